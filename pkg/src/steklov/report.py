"""Artifact writers for growth runs: records.csv, report.json, growth.svg.

All writers are deterministic: identical records and config serialize to
byte-identical files (floats via repr, sorted JSON keys, no timestamps,
salted SVG ids). Writes go through a temp file + os.replace so partial
artifacts never appear under the final name.
"""

from __future__ import annotations

import json
import os
import platform
from dataclasses import asdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import scipy

from .errors import ArtifactIOError, InsufficientRecords
from .experiments import (
    RECORD_COLUMNS,
    GrowthRecord,
    GrowthRunConfig,
    RatioReport,
    comparison_ratio_report,
    growth_slope,
)

SCHEMA_VERSION = 1
_SVG_HASHSALT = "steklov-growth"


def _config_dict(config) -> dict | None:
    if config is None or isinstance(config, dict):
        return config
    return config.to_dict()


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_bytes(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise ArtifactIOError(f"cannot write {path}: {exc}") from exc


def records_to_csv(records, config: GrowthRunConfig | dict | None = None) -> str:
    """Delimited text: '# key = value' config echo, header, one row per N."""
    lines = []
    config = _config_dict(config)
    if config is not None:
        for key, value in sorted(config.items()):
            lines.append(f"# {key} = {json.dumps(value)}")
    lines.append(",".join(RECORD_COLUMNS))
    for rec in records:
        row = asdict(rec)
        lines.append(",".join(_fmt(row[c]) for c in RECORD_COLUMNS))
    return "\n".join(lines) + "\n"


def records_from_csv(text: str) -> tuple[list[GrowthRecord], dict]:
    """Inverse of records_to_csv (timings are not persisted)."""
    config_echo = {}
    rows = []
    header = None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            config_echo[key.strip()] = json.loads(value.strip())
            continue
        if header is None:
            header = line.split(",")
            if tuple(header) != RECORD_COLUMNS:
                raise ArtifactIOError(f"unexpected csv header {header}")
            continue
        rows.append(line.split(","))
    records = []
    for row in rows:
        if len(row) != len(RECORD_COLUMNS):
            raise ArtifactIOError(f"csv row has {len(row)} fields")
        kw = dict(zip(RECORD_COLUMNS, row))
        for key in kw:
            kw[key] = int(kw[key]) if key in ("n", "genus") else float(kw[key])
        records.append(GrowthRecord(**kw))
    return records, config_echo


def _record_dict(rec: GrowthRecord) -> dict:
    row = asdict(rec)
    return {c: (int(row[c]) if c in ("n", "genus") else float(row[c])) for c in RECORD_COLUMNS}


def report_payload(
    records,
    config: GrowthRunConfig | dict | None = None,
    ratio_report: RatioReport | None = None,
    constants: dict | None = None,
) -> dict:
    from . import __version__

    if not records:
        raise InsufficientRecords("cannot report an empty run")
    if ratio_report is None and len(records) >= 2:
        ratio_report = comparison_ratio_report(records)
    if constants is None:
        constants = {"mu_collar": records[0].mu_collar}
    payload = {
        "schema_version": SCHEMA_VERSION,
        "tool": "steklov",
        "version": __version__,
        "config": _config_dict(config),
        "records": [_record_dict(r) for r in records],
        "ratio_report": ratio_report.to_dict() if ratio_report is not None else None,
        "slope": growth_slope(records) if len(records) >= 2 else None,
        "constants": constants,
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "matplotlib": matplotlib.__version__,
        },
    }
    return payload


def report_to_json(records, config=None, ratio_report=None, constants=None) -> str:
    payload = report_payload(records, config, ratio_report, constants)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def load_report_json(text: str) -> tuple[list[GrowthRecord], dict | None, dict | None]:
    """Parse report.json back into records + config echo + constants."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArtifactIOError(f"invalid report json: {exc}") from exc
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise ArtifactIOError(f"unsupported schema_version {payload.get('schema_version')!r}")
    records = [GrowthRecord(**{c: row[c] for c in RECORD_COLUMNS}) for row in payload["records"]]
    return records, payload.get("config"), payload.get("constants")


def render_growth_figure(records, path: Path) -> None:
    """Two panels: sigma1*L against N with its least-squares line and the
    topological ceiling, and the pinched ratio sigma1/lambda1."""
    if not records:
        raise InsufficientRecords("cannot plot an empty run")
    ns = np.array([r.n for r in records], dtype=float)
    growth = np.array([r.sigma1_times_l for r in records])
    ratios = np.array([r.ratio for r in records])
    kokarev = np.array([r.kokarev_bound for r in records])

    with plt.rc_context({"svg.hashsalt": _SVG_HASHSALT}):
        fig, (ax_growth, ax_ratio) = plt.subplots(1, 2, figsize=(9.0, 3.6))
        ax_growth.plot(ns, growth, "o", color="tab:blue", label=r"$\sigma_1 \cdot L$")
        if len(records) >= 2:
            coeffs = np.polyfit(ns, growth, 1)
            xs = np.linspace(ns.min(), ns.max(), 64)
            ax_growth.plot(
                xs,
                np.polyval(coeffs, xs),
                "-",
                color="tab:blue",
                alpha=0.6,
                label=f"fit, slope {coeffs[0]:.3g}",
            )
        ax_growth.plot(ns, kokarev, "--", color="tab:red", label=r"$8\pi(\gamma+1)$")
        ax_growth.set_xlabel("N")
        ax_growth.set_ylabel(r"$\sigma_1 \cdot L$")
        ax_growth.set_title("boundary-normalized growth")
        ax_growth.legend(loc="upper left", fontsize=8)

        ax_ratio.plot(ns, ratios, "s-", color="tab:green")
        ax_ratio.set_xlabel("N")
        ax_ratio.set_ylabel(r"$\sigma_1 / \lambda_1$")
        ax_ratio.set_title("spectral ratio")
        ax_ratio.set_ylim(0, max(ratios.max() * 1.3, 1e-12))
        fig.tight_layout()
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise ArtifactIOError(f"cannot write {path}: {exc}") from exc
        finally:
            plt.close(fig)


def export_report(
    out_dir,
    records,
    config: GrowthRunConfig | dict | None = None,
    constants: dict | None = None,
) -> dict[str, Path]:
    """Write records.csv, report.json and growth.svg into out_dir."""
    if not records:
        raise InsufficientRecords("cannot export an empty run")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactIOError(f"cannot create {out}: {exc}") from exc
    paths = {
        "csv": out / "records.csv",
        "json": out / "report.json",
        "svg": out / "growth.svg",
    }
    _atomic_write(paths["csv"], records_to_csv(records, config).encode())
    _atomic_write(paths["json"], report_to_json(records, config, constants=constants).encode())
    render_growth_figure(records, paths["svg"])
    return paths
