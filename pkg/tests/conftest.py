"""Shared fixtures. The heavy growth-run fixtures are session-scoped so
the acceptance criteria share one computation."""

import subprocess
import sys

import pytest

from steklov import build_fundamental_piece
from steklov.experiments import GrowthRunConfig, run_growth

ACCEPTANCE_SIZES = (8, 12, 16, 24, 32)


@pytest.fixture(scope="session")
def piece_small():
    """Cheap k=4 piece for structural tests."""
    return build_fundamental_piece(4, 8, 2)


@pytest.fixture(scope="session")
def acceptance_config():
    return GrowthRunConfig(sizes=ACCEPTANCE_SIZES, k=4, gap_threshold=0.2,
                           n_b=16, resolution=4, seed=7)


@pytest.fixture(scope="session")
def growth_records(acceptance_config):
    """The seed-7 experiment run shared by the growth criteria."""
    return run_growth(acceptance_config)


@pytest.fixture(scope="session")
def growth_cli_dirs(tmp_path_factory):
    """Two independent CLI executions of the full growth run."""
    dirs = []
    for name in ("run_a", "run_b"):
        out = tmp_path_factory.mktemp("determinism") / name
        cmd = [
            sys.executable, "-m", "steklov.cli", "growth",
            "--k", "4", "--sizes", ",".join(str(n) for n in ACCEPTANCE_SIZES),
            "--seed", "7", "--gap", "0.2", "--nb", "16", "--resolution", "4",
            "--out", str(out),
        ]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        dirs.append(out)
    return tuple(dirs)
