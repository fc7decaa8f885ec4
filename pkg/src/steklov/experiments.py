"""Growth experiments on glued surfaces and numeric verification of the
eigenvalue inequalities relating sigma_1, the graph gap, the collar
sloshing eigenvalue, and the per-edge energy constant.

A growth run, for each size N: sample a gap-certified k-regular graph,
glue N copies of the fundamental piece, solve the Steklov problem, and
assemble a record with all verified quantities. Runs are deterministic
functions of (config, seed).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .build import (
    FundamentalPiece,
    GluedSurface,
    build_flat_cylinder,
    build_fundamental_piece,
    double_piece,
    genus_formula,
    glue_surface,
)
from .errors import (
    InsufficientRecords,
    InvalidParams,
    RunInvariantViolated,
)
from .fem import rayleigh_quotient, triangle_energies
from .graphs import RegularGraph, laplacian_spectrum, sample_expander
from .mesh import euler_genus
from .seeding import derive_rng
from .spectra import (
    BoundaryCondition,
    EigenOptions,
    neumann_lambda1,
    sloshing_mu1,
    steklov_spectrum,
)


@dataclass(frozen=True)
class GrowthRunConfig:
    sizes: tuple[int, ...]
    k: int = 4
    gap_threshold: float = 0.2
    n_b: int = 16
    resolution: int = 4
    seed: int = 7
    eig: EigenOptions = EigenOptions()
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        if not self.sizes:
            raise InvalidParams("growth run needs at least one size")
        if list(self.sizes) != sorted(set(self.sizes)):
            raise InvalidParams("sizes must be strictly ascending")
        if any(n * self.k % 2 for n in self.sizes):
            raise InvalidParams("every N*k must be even")
        if self.gap_threshold <= 0:
            raise InvalidParams("gap threshold must be positive")
        if self.jobs < 1:
            raise InvalidParams("jobs must be >= 1")

    def to_dict(self) -> dict:
        # jobs is deliberately not echoed: it controls orchestration only
        # and must never change the artifacts.
        return {
            "k": self.k,
            "sizes": list(self.sizes),
            "gap_threshold": self.gap_threshold,
            "n_b": self.n_b,
            "resolution": self.resolution,
            "seed": self.seed,
            "n_eigs": self.eig.n_eigs,
            "tol_res": self.eig.tol_res,
            "max_iterations": self.eig.max_iterations,
            "dense_fallback_threshold": self.eig.dense_fallback_threshold,
        }


@dataclass(frozen=True)
class GrowthRecord:
    n: int
    lambda1_graph: float
    sigma1: float
    l_boundary: float
    sigma1_times_l: float
    genus: int
    ratio: float
    kokarev_bound: float
    trial_quotient: float
    mu_collar: float
    c_emp: float
    lower_bound: float
    local_margin: float
    global_margin: float
    residual_max: float
    timings: dict = field(default_factory=dict, compare=False, repr=False)


# serialized column order for records.csv; timings stay off disk so runs
# with identical seeds serialize byte-identically
RECORD_COLUMNS = tuple(f.name for f in fields(GrowthRecord) if f.name != "timings")


@dataclass(frozen=True)
class RatioReport:
    ratios: tuple[tuple[int, float], ...]
    alpha_hat: float
    beta_hat: float
    spread: float

    def to_dict(self) -> dict:
        return {
            "ratios": {str(n): r for n, r in self.ratios},
            "alpha_hat": self.alpha_hat,
            "beta_hat": self.beta_hat,
            "spread": self.spread,
        }


@dataclass(frozen=True)
class LocalEstimateReport:
    """Collar fluctuation bound: integral of ftilde^2 over the boundary
    against energy/mu, plus the exactness diagnostics of the ring-mean
    decomposition."""

    mu: float
    fluct_boundary_sq: float
    energy_total: float
    bound: float
    margin: float
    max_ring_mean_residual: float
    max_decomposition_rel_err: float


@dataclass(frozen=True)
class GlobalEstimateReport:
    """Per-edge energy comparison: boundary means x, graph quadratic form
    q, the empirical per-edge constant, and the assembled boundary-norm
    inequality margin."""

    x: tuple[float, ...]
    sum_x: float
    q_gamma: float
    c_emp: float
    global_ratio: float
    energy_total: float
    boundary_sq: float
    fluct_sq: float
    global_margin: float
    per_edge_ratios: tuple[float, ...]


def _loop_weights(surface: GluedSurface, label: str) -> tuple[np.ndarray, np.ndarray]:
    """Vertex ids and consistent-mass row weights of one boundary loop."""
    cyc = surface.mesh.loop(label).vertices
    ids = np.fromiter(cyc, dtype=np.int64, count=len(cyc))
    seg = np.array(
        [surface.mesh.length(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))]
    )
    # weight of vertex i in 1^T M f: half the two adjacent segments
    w = 0.5 * (seg + np.roll(seg, 1))
    return ids, w


def _loop_quadratic(surface: GluedSurface, label: str, g: np.ndarray) -> float:
    """g^T M g restricted to one loop, consistent 1D mass."""
    cyc = surface.mesh.loop(label).vertices
    total = 0.0
    for i in range(len(cyc)):
        u, v = cyc[i], cyc[(i + 1) % len(cyc)]
        a, b = g[u], g[v]
        total += surface.mesh.length(u, v) * (a * a + a * b + b * b) / 3.0
    return total


def boundary_means(surface: GluedSurface, f: np.ndarray) -> np.ndarray:
    """x(v) = integral of f over the sigma loop of copy v (loop length 1,
    so the integral is the mass-weighted mean)."""
    out = np.empty(surface.n_copies)
    for v, label in enumerate(surface.sigma_loops):
        ids, w = _loop_weights(surface, label)
        out[v] = float(w @ f[ids])
    return out


def trial_function(surface: GluedSurface, x: np.ndarray) -> np.ndarray:
    """The piecewise-linear field worth x(v) on the loop of copy v,
    decaying linearly to 0 across its collar, zero elsewhere."""
    x = np.asarray(x, dtype=float)
    if x.shape != (surface.n_copies,):
        raise InvalidParams(f"trial vector shape {x.shape} != ({surface.n_copies},)")
    if surface.collar_maps.shape[1] < 2:
        raise InvalidParams("surface carries no collar grids")
    n_rows = surface.collar_maps.shape[1]
    ramp = 1.0 - np.arange(n_rows) / (n_rows - 1)
    f = np.zeros(surface.mesh.n_vertices)
    for v in range(surface.n_copies):
        f[surface.collar_maps[v]] = x[v] * ramp[:, None]
    return f


def trial_function_quotient(surface: GluedSurface, x: np.ndarray) -> float:
    """Rayleigh quotient of the collar trial function; an upper bound for
    sigma_1 whenever x sums to zero."""
    x = np.asarray(x, dtype=float)
    if abs(x.sum()) > 1e-8 * max(1.0, np.abs(x).max()):
        raise InvalidParams(f"trial vector must sum to zero, got {x.sum():.3e}")
    f = trial_function(surface, x)
    _, _, quotient = rayleigh_quotient(surface.mesh, f, loops=surface.sigma_loops)
    return quotient


def _collar_slice(surface: GluedSurface, v: int) -> slice:
    start, _ = surface.piece_triangle_slices[v]
    lo, hi = surface.piece.slot_tri_slices[surface.piece.sigma0_loop]
    return slice(start + lo, start + hi)


def collar_sloshing_mu(piece: FundamentalPiece, opts: EigenOptions = EigenOptions()) -> float:
    """First nonzero sloshing eigenvalue of the piece's collar grid,
    computed on a standalone copy of that grid."""
    cylinder = build_flat_cylinder(piece.n_b, piece.resolution, 1.0, 1.0)
    return sloshing_mu1(cylinder, BoundaryCondition.one_steklov(cylinder, "bottom"), opts)


def verify_local_estimate(
    surface: GluedSurface,
    f: np.ndarray,
    mu: float | None = None,
    e_tri: np.ndarray | None = None,
) -> LocalEstimateReport:
    """Check the collar fluctuation bound for a field f.

    On each collar, f splits into per-ring means fbar plus fluctuation
    ftilde; the boundary norm of ftilde is bounded by (total energy)/mu,
    mu being the first nonzero sloshing eigenvalue of the collar grid
    (computed on the collar mesh when not supplied). Also verifies the
    energy decomposition E(f) = E(fbar) + E(ftilde) on every collar and
    that ftilde has exactly zero ring means.
    """
    mesh = surface.mesh
    if mu is None:
        mu = collar_sloshing_mu(surface.piece)
    if e_tri is None:
        e_tri = triangle_energies(mesh, f)
    energy_total = float(e_tri.sum())

    fbar = np.zeros(mesh.n_vertices)
    ftil = np.zeros(mesh.n_vertices)
    max_ring_mean = 0.0
    for v in range(surface.n_copies):
        grid = surface.collar_maps[v]
        ring_means = f[grid].mean(axis=1)
        fbar[grid] = ring_means[:, None]
        ftil[grid] = f[grid] - ring_means[:, None]
        max_ring_mean = max(max_ring_mean, float(np.abs(ftil[grid].mean(axis=1)).max()))
    e_bar = triangle_energies(mesh, fbar)
    e_til = triangle_energies(mesh, ftil)

    max_rel = 0.0
    for v in range(surface.n_copies):
        sl = _collar_slice(surface, v)
        total = float(e_tri[sl].sum())
        split = float(e_bar[sl].sum() + e_til[sl].sum())
        max_rel = max(max_rel, abs(total - split) / max(1.0, abs(total)))

    fluct_sq = 0.0
    x = boundary_means(surface, f)
    for v, label in enumerate(surface.sigma_loops):
        fluct_sq += _loop_quadratic(surface, label, f - x[v])
    bound = energy_total / mu
    return LocalEstimateReport(
        mu=mu,
        fluct_boundary_sq=fluct_sq,
        energy_total=energy_total,
        bound=bound,
        margin=bound - fluct_sq,
        max_ring_mean_residual=max_ring_mean,
        max_decomposition_rel_err=max_rel,
    )


def verify_global_estimate(
    surface: GluedSurface,
    graph: RegularGraph,
    f: np.ndarray,
    e_tri: np.ndarray | None = None,
) -> GlobalEstimateReport:
    """Check the edge-difference comparison for a field f.

    x(v) are boundary means of f; per glued edge, (x(v)-x(w))^2 is
    compared with the Dirichlet energy of f on the two pieces meeting
    there. The maximum per-edge ratio is the empirical constant, and the
    assembled inequality bounds the boundary norm of f by
    q(x)/lambda1 + the boundary norm of the fluctuation.
    """
    mesh = surface.mesh
    lambda1 = laplacian_spectrum(graph).lambda1
    if e_tri is None:
        e_tri = triangle_energies(mesh, f)
    energy_total = float(e_tri.sum())
    x = boundary_means(surface, f)
    piece_energy = np.array(
        [float(e_tri[lo:hi].sum()) for lo, hi in surface.piece_triangle_slices]
    )

    ratios = []
    q_gamma = 0.0
    for (va, _), (vb, _) in surface.pairing:
        diff_sq = (x[va] - x[vb]) ** 2
        q_gamma += diff_sq
        pair_energy = piece_energy[va] + piece_energy[vb]
        if pair_energy <= 0.0:
            ratios.append(0.0 if diff_sq == 0.0 else math.inf)
        else:
            ratios.append(diff_sq / pair_energy)
    c_emp = max(ratios) if ratios else 0.0

    boundary_sq = 0.0
    fluct_sq = 0.0
    for v, label in enumerate(surface.sigma_loops):
        boundary_sq += _loop_quadratic(surface, label, f)
        fluct_sq += _loop_quadratic(surface, label, f - x[v])
    global_margin = q_gamma / lambda1 + fluct_sq - boundary_sq
    return GlobalEstimateReport(
        x=tuple(float(t) for t in x),
        sum_x=float(x.sum()),
        q_gamma=q_gamma,
        c_emp=c_emp,
        global_ratio=q_gamma / energy_total if energy_total > 0 else math.inf,
        energy_total=energy_total,
        boundary_sq=boundary_sq,
        fluct_sq=fluct_sq,
        global_margin=global_margin,
        per_edge_ratios=tuple(ratios),
    )


def check_kokarev(record: GrowthRecord, slack: float = 1e-2) -> bool:
    """sigma_1 * L may not exceed 8*pi*(genus+1), up to discretization
    slack; a failure indicates a solver bug."""
    return record.sigma1_times_l <= 8.0 * math.pi * (record.genus + 1) * (1.0 + slack)


def growth_slope(records) -> float:
    """Least-squares slope of sigma_1 * L against N."""
    if len(records) < 2:
        raise InsufficientRecords("slope needs at least two records")
    ns = np.array([r.n for r in records], dtype=float)
    ys = np.array([r.sigma1_times_l for r in records])
    return float(np.polyfit(ns, ys, 1)[0])


def comparison_ratio_report(records) -> RatioReport:
    if len(records) < 2:
        raise InsufficientRecords(f"ratio report needs >= 2 records, got {len(records)}")
    ratios = tuple((r.n, r.ratio) for r in records)
    alpha = min(r for _, r in ratios)
    beta = max(r for _, r in ratios)
    if alpha <= 0:
        raise RunInvariantViolated(f"nonpositive ratio {alpha} in run")
    return RatioReport(ratios=ratios, alpha_hat=alpha, beta_hat=beta, spread=beta / alpha)


def collar_model(config: GrowthRunConfig):
    """Standalone copy of the collar grid with its sloshing eigenvalue."""
    cylinder = build_flat_cylinder(config.n_b, config.resolution, 1.0, 1.0)
    mu = sloshing_mu1(cylinder, BoundaryCondition.one_steklov(cylinder, "bottom"), config.eig)
    return cylinder, mu


def doubled_piece_lambda1(piece: FundamentalPiece, opts: EigenOptions = EigenOptions()) -> float:
    """First nonzero Neumann eigenvalue of two pieces joined along one
    B-loop; a reported run constant with no analytic oracle."""
    return neumann_lambda1(double_piece(piece).mesh, opts)


def _check_record(record: GrowthRecord, config: GrowthRunConfig) -> None:
    checks = [
        (abs(record.l_boundary - record.n) <= 1e-6, "boundary length equals N"),
        (
            record.genus == genus_formula(0, config.k, record.n),
            "genus matches the gluing formula",
        ),
        (check_kokarev(record), "sigma1*L respects the genus bound"),
        (record.sigma1 <= record.trial_quotient + 1e-8, "Rayleigh upper bound"),
        (record.sigma1 >= record.lower_bound - 1e-6, "assembled lower bound"),
        (record.local_margin >= -1e-6, "collar fluctuation bound"),
        (record.global_margin >= -1e-9, "boundary-norm inequality"),
        (record.lambda1_graph >= config.gap_threshold, "certified spectral gap"),
    ]
    for ok, name in checks:
        if not ok:
            raise RunInvariantViolated(f"N={record.n}: invariant failed: {name}")


def _run_size(piece: FundamentalPiece, mu: float, config: GrowthRunConfig, n: int) -> GrowthRecord:
    timings = {}
    tic = time.perf_counter()
    rng = derive_rng(config.seed, "graph", n)
    graph = sample_expander(n, config.k, config.gap_threshold, rng)
    gspec = laplacian_spectrum(graph)
    timings["graph"] = time.perf_counter() - tic

    tic = time.perf_counter()
    surface = glue_surface(piece, graph)
    timings["glue"] = time.perf_counter() - tic

    tic = time.perf_counter()
    spectrum = steklov_spectrum(surface.mesh, config.eig)
    sigma1 = spectrum.sigma1
    f = spectrum.extensions[:, spectrum.n_zero_modes]
    timings["solve"] = time.perf_counter() - tic

    tic = time.perf_counter()
    e_tri = triangle_energies(surface.mesh, f)
    local = verify_local_estimate(surface, f, mu, e_tri)
    glob = verify_global_estimate(surface, graph, f, e_tri)
    trial_q = trial_function_quotient(surface, gspec.fiedler_vector)
    timings["verify"] = time.perf_counter() - tic

    l_boundary = sum(surface.mesh.loop_length(lbl) for lbl in surface.sigma_loops)
    genus = euler_genus(surface.mesh)[2]
    lam1 = gspec.lambda1
    record = GrowthRecord(
        n=n,
        lambda1_graph=lam1,
        sigma1=sigma1,
        l_boundary=l_boundary,
        sigma1_times_l=sigma1 * l_boundary,
        genus=genus,
        ratio=sigma1 / lam1,
        kokarev_bound=8.0 * math.pi * (genus + 1),
        trial_quotient=trial_q,
        mu_collar=mu,
        c_emp=glob.c_emp,
        lower_bound=lam1 / (lam1 / mu + glob.c_emp * config.k),
        local_margin=local.margin,
        global_margin=glob.global_margin,
        residual_max=float(spectrum.residuals.max()),
        timings=timings,
    )
    _check_record(record, config)
    return record


def run_growth(config: GrowthRunConfig) -> list[GrowthRecord]:
    """Execute the full pipeline for every size in the config.

    Deterministic given (config, seed): each size derives its own rng.
    On an invariant failure the raised error carries the records
    completed so far, so callers can persist the partial run.
    """
    piece = build_fundamental_piece(config.k, config.n_b, config.resolution)
    _, mu = collar_model(config)
    records: list[GrowthRecord] = []
    try:
        if config.jobs == 1:
            for n in config.sizes:
                records.append(_run_size(piece, mu, config, n))
        else:
            with ThreadPoolExecutor(max_workers=config.jobs) as pool:
                futures = [
                    pool.submit(_run_size, piece, mu, config, n) for n in config.sizes
                ]
                for fut in futures:
                    records.append(fut.result())
    except RunInvariantViolated as exc:
        exc.records = records
        raise
    return records
