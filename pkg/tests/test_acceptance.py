"""Release gate: ten end-to-end criteria, one verdict line each.

Every test prints "ACCEPTANCE n (name): PASS|FAIL" before asserting, so
a full run of this file reads as a checklist.
"""

import filecmp
import math

import numpy as np

from steklov.build import (
    build_disk,
    build_flat_cylinder,
    build_flat_sheet,
    build_fundamental_piece,
    cylinder_grid,
    glue_from_pairing,
    glue_surface,
    pairing_from_edges,
)
from steklov.experiments import comparison_ratio_report, growth_slope
from steklov.fem import assemble_boundary_mass, assemble_stiffness, dtn_schur
from steklov.graphs import circulant_graph, laplacian_matrix, laplacian_spectrum, sample_expander
from steklov.mesh import euler_genus
from steklov.seeding import derive_rng
from steklov.spectra import BoundaryCondition, EigenOptions, sloshing_mu1, steklov_spectrum

ACCEPT_SEED = 20250825


def _verdict(num, name, ok):
    print(f"ACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'}")
    return ok


def test_01_genus_is_one_plus_n():
    piece = build_fundamental_piece(4, 8, 1)
    genera = {}
    # N = 4 needs a 4-regular multigraph (no simple one exists): the
    # doubled 4-cycle, glued through an explicit slot pairing
    edges = [(0, 1), (0, 1), (1, 2), (1, 2), (2, 3), (2, 3), (3, 0), (3, 0)]
    pairs = pairing_from_edges(4, 4, edges, piece.b_loops)
    genera[4] = euler_genus(glue_from_pairing(piece, 4, pairs).mesh)[2]
    for n in (8, 12, 16, 24, 32):
        surface = glue_surface(piece, circulant_graph(n, (1, 2)))
        genera[n] = euler_genus(surface.mesh)[2]
    ok = all(genera[n] == 1 + n for n in genera)
    assert _verdict(1, "genus equals 1+N", ok), genera


def test_02_disk_spectrum_converges():
    errs1, errs3, n_vertices = [], [], []
    for rings, around in ((16, 64), (32, 128), (64, 256)):
        disk = build_disk(rings, around)
        n_vertices.append(disk.n_vertices)
        spec = steklov_spectrum(disk, EigenOptions(n_eigs=6))
        errs1.append(abs(spec.sigmas[1] - 1.0))
        errs3.append(abs(spec.sigmas[3] - 2.0) / 2.0)
    ok = (
        n_vertices[-1] >= 5000
        and errs1[-1] <= 0.01
        and errs3[-1] <= 0.015
        and errs1[0] > errs1[1] > errs1[2]
        and errs3[0] > errs3[1] > errs3[2]
    )
    assert _verdict(2, "disk sigma oracle", ok), (n_vertices, errs1, errs3)


def test_03_sloshing_oracle():
    cylinder = build_flat_cylinder(64, 32, 1.0, 1.0)
    mu = sloshing_mu1(cylinder, BoundaryCondition.one_steklov(cylinder, "bottom"),
                      EigenOptions())
    target = 2.0 * math.pi * math.tanh(2.0 * math.pi)
    ok = abs(mu - target) / target <= 0.01
    assert _verdict(3, "sloshing mu oracle", ok), (mu, target)


def test_04_growth_is_linear(growth_records):
    slope = growth_slope(growth_records)
    values = [r.sigma1_times_l for r in growth_records]
    running, monotone = values[0], True
    for v in values[1:]:
        if v < 0.9 * running:
            monotone = False
        running = max(running, v)
    ok = slope > 0 and monotone
    assert _verdict(4, "sigma1*L grows", ok), (slope, values)


def test_05_ratio_is_pinched(growth_records):
    report = comparison_ratio_report(growth_records)
    ok = report.alpha_hat > 0 and report.spread <= 10.0
    assert _verdict(5, "sigma1/lambda1 pinched", ok), report


def test_06_kokarev_bound(growth_records):
    ok = all(
        r.sigma1_times_l <= 8.0 * math.pi * (r.genus + 1) * 1.01
        for r in growth_records
    )
    assert _verdict(6, "genus ceiling respected", ok)


def test_07_variational_bracketing(growth_records):
    ok = all(
        r.sigma1 <= r.trial_quotient + 1e-8
        and r.sigma1 >= r.lower_bound - 1e-6
        for r in growth_records
    )
    assert _verdict(7, "upper/lower bounds bracket sigma1", ok), [
        (r.n, r.lower_bound, r.sigma1, r.trial_quotient) for r in growth_records
    ]


def test_08_inequality_margins(growth_records):
    ok = all(r.local_margin >= 0 and r.global_margin >= 0 for r in growth_records)
    assert _verdict(8, "estimate margins nonnegative", ok), [
        (r.n, r.local_margin, r.global_margin) for r in growth_records
    ]


def test_09_artifacts_deterministic(growth_cli_dirs):
    dir_a, dir_b = growth_cli_dirs
    same = {
        name: filecmp.cmp(dir_a / name, dir_b / name, shallow=False)
        for name in ("records.csv", "report.json", "growth.svg")
    }
    ok = all(same.values())
    assert _verdict(9, "byte-identical reruns", ok), same


def _random_mesh(i):
    rng = derive_rng(ACCEPT_SEED, "mesh", i)
    kind = i % 3
    if kind == 0:
        return build_flat_cylinder(int(rng.integers(8, 14)), int(rng.integers(2, 5)),
                                   1.0, float(rng.uniform(0.5, 2.0)))
    if kind == 1:
        return build_disk(int(rng.integers(3, 7)), int(rng.integers(8, 16)),
                          float(rng.uniform(0.5, 2.0)))
    return build_flat_sheet(int(rng.integers(2, 6)), int(rng.integers(2, 6)),
                            float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.5, 2.0)))


def _suite_stiffness_kernel(cases):
    bad = []
    for i in range(cases):
        m = _random_mesh(i)
        K = assemble_stiffness(m)
        resid = np.abs(K @ np.ones(m.n_vertices)).max()
        if resid > 1e-12 * max(1.0, np.abs(K.data).max()):
            bad.append(i)
    return bad


def _suite_dtn_energy(cases):
    bad = []
    for i in range(cases):
        m = _random_mesh(100 + i)
        ctx = dtn_schur(m)
        u = derive_rng(ACCEPT_SEED, "dtn", i).standard_normal(ctx.n_boundary)
        quad = float(u @ ctx.schur @ u)
        full = ctx.extend(u)
        energy = float(full @ (ctx.stiffness @ full))
        if abs(quad - energy) > 1e-10 * max(1.0, abs(energy)):
            bad.append(i)
    return bad


def _suite_boundary_mass(cases):
    bad = []
    for i in range(cases):
        m = _random_mesh(200 + i)
        total = float(assemble_boundary_mass(m).sum())
        length = sum(m.loop_length(lbl) for lbl in m.loop_labels())
        if abs(total - length) > 1e-10 * length:
            bad.append(i)
    return bad


def _suite_collar_decomposition(cases):
    bad = []
    for i in range(cases):
        rng = derive_rng(ACCEPT_SEED, "collar", i)
        n_b = int(rng.integers(4, 10)) * 2
        layers = int(rng.integers(2, 6))
        cyl = build_flat_cylinder(n_b, layers, 1.0, float(rng.uniform(0.5, 1.5)))
        grid = cylinder_grid(n_b, layers)
        K = assemble_stiffness(cyl)
        f = rng.standard_normal(cyl.n_vertices)
        fbar = np.zeros_like(f)
        for row in grid:
            fbar[row] = f[row].mean()
        e_f = float(f @ (K @ f))
        e_bar = float(fbar @ (K @ fbar))
        ftil = f - fbar
        e_til = float(ftil @ (K @ ftil))
        if abs(e_f - e_bar - e_til) > 1e-8 * max(1.0, e_f):
            bad.append(i)
    return bad


def _suite_graph_trace(cases):
    bad = []
    for i in range(cases):
        rng = derive_rng(ACCEPT_SEED, "graph", i)
        n = int(rng.integers(8, 25))
        # pairing rejection rates blow up for dense degrees on small n,
        # so stay in the regime the pipeline actually uses
        k = 3 + (i % 2)
        if (n * k) % 2:
            n += 1
        g = sample_expander(n, k, 0.05, rng, max_attempts=5000)
        spec = laplacian_spectrum(g)
        trace = float(laplacian_matrix(g).diagonal().sum())
        checks = (
            abs(trace - n * k) <= 1e-9 * n * k,
            2 * g.n_edges == n * k,
            abs(spec.eigenvalues.sum() - n * k) <= 1e-8 * n * k,
        )
        if not all(checks):
            bad.append(i)
    return bad


def test_10_randomized_invariant_suites():
    failures = {
        "stiffness_kernel": _suite_stiffness_kernel(20),
        "dtn_energy": _suite_dtn_energy(20),
        "boundary_mass": _suite_boundary_mass(20),
        "collar_decomposition": _suite_collar_decomposition(20),
        "graph_trace": _suite_graph_trace(20),
    }
    ok = not any(failures.values())
    assert _verdict(10, "randomized invariants (5 suites x 20)", ok), failures
