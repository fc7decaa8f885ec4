"""Finite simple regular graphs and their combinatorial Laplacian spectra.

The Laplacian used throughout is the unnormalized L = k*I - A, whose
quadratic form is the sum of squared differences over edges. Expander
families are sampled with the pairing (configuration) model and
certified by an explicit spectral-gap check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ArtifactIOError,
    DegreeMismatch,
    DimensionMismatch,
    DuplicateEdge,
    InvalidParams,
    NotConnected,
    OddTotalDegree,
    SamplingExhausted,
    SelfLoop,
)
from .seeding import derive_rng

# Dense symmetric eigensolves only; keeps results deterministic and robust.
DENSE_EIGENSOLVE_CAP = 4096

DEFAULT_MAX_SAMPLING_ATTEMPTS = 1000


@dataclass(frozen=True)
class RegularGraph:
    """A simple k-regular graph on vertices 0..n-1."""

    n_vertices: int
    degree: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def build_regular_graph(n: int, k: int, edges) -> RegularGraph:
    """Validate an edge list into a RegularGraph.

    Rejects self-loops, duplicate edges, out-of-range endpoints, odd
    total degree, and any vertex whose degree differs from k.
    """
    if n <= 0 or k <= 0:
        raise InvalidParams(f"need positive n and k, got n={n}, k={k}")
    if (n * k) % 2 != 0:
        raise OddTotalDegree(f"n*k = {n * k} is odd; no {k}-regular graph on {n} vertices")
    seen: set[tuple[int, int]] = set()
    canon: list[tuple[int, int]] = []
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidParams(f"edge ({u},{v}) out of range for n={n}")
        e = (u, v) if u < v else (v, u)
        if e in seen:
            raise DuplicateEdge(f"edge {e} listed more than once")
        seen.add(e)
        canon.append(e)
    canon.sort()
    deg = np.zeros(n, dtype=int)
    for u, v in canon:
        deg[u] += 1
        deg[v] += 1
    bad = np.nonzero(deg != k)[0]
    if bad.size:
        v0 = int(bad[0])
        raise DegreeMismatch(f"vertex {v0} has degree {int(deg[v0])}, expected {k}")
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in canon:
        nbrs[u].append(v)
        nbrs[v].append(u)
    adjacency = tuple(tuple(sorted(a)) for a in nbrs)
    return RegularGraph(n_vertices=n, degree=k, edges=tuple(canon), adjacency=adjacency)


def is_connected(g: RegularGraph) -> bool:
    """Breadth-first search from vertex 0 reaches every vertex."""
    n = g.n_vertices
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = [0]
    count = 1
    while frontier:
        nxt = []
        for u in frontier:
            for v in g.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    nxt.append(v)
        frontier = nxt
    return count == n


def adjacency_matrix(g: RegularGraph) -> np.ndarray:
    a = np.zeros((g.n_vertices, g.n_vertices))
    for u, v in g.edges:
        a[u, v] = 1.0
        a[v, u] = 1.0
    return a


def laplacian_matrix(g: RegularGraph) -> np.ndarray:
    """Dense combinatorial Laplacian L = k*I - A."""
    return g.degree * np.eye(g.n_vertices) - adjacency_matrix(g)


def quadratic_form(g: RegularGraph, x) -> float:
    """Sum of (x(u) - x(v))^2 over the unoriented edges of g."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n_vertices,):
        raise DimensionMismatch(f"vector has shape {x.shape}, expected ({g.n_vertices},)")
    total = 0.0
    for u, v in g.edges:
        d = x[u] - x[v]
        total += d * d
    return float(total)


@dataclass(frozen=True)
class GraphSpectrum:
    """Full ascending Laplacian spectrum with the gap eigenpair."""

    eigenvalues: np.ndarray
    lambda1: float
    fiedler_vector: np.ndarray


def _canonical_sign(vec: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    for value in vec:
        if abs(value) > tol:
            return vec if value > 0 else -vec
    return vec


def laplacian_spectrum(g: RegularGraph) -> GraphSpectrum:
    """Dense symmetric eigensolve of L = k*I - A.

    Requires a connected graph (otherwise lambda1 would be 0 and the
    gap-based experiments would silently break).
    """
    if g.n_vertices > DENSE_EIGENSOLVE_CAP:
        raise InvalidParams(
            f"n={g.n_vertices} exceeds the dense eigensolve cap {DENSE_EIGENSOLVE_CAP}"
        )
    if not is_connected(g):
        raise NotConnected("graph is not connected; lambda1 would be 0")
    lap = laplacian_matrix(g)
    eigenvalues, vectors = np.linalg.eigh(lap)
    fiedler = np.array(vectors[:, 1], dtype=float)
    # Exact normalization: sum-zero (project out constants) and unit norm.
    fiedler = fiedler - fiedler.mean()
    fiedler = fiedler / np.linalg.norm(fiedler)
    fiedler = _canonical_sign(fiedler)
    return GraphSpectrum(
        eigenvalues=eigenvalues,
        lambda1=float(eigenvalues[1]),
        fiedler_vector=fiedler,
    )


def _sample_pairing(n: int, k: int, rng: np.random.Generator):
    """One pairing-model draw: match n*k half-edge stubs uniformly.

    Returns a sorted edge tuple, or None if the draw produced a
    self-loop or a repeated edge.
    """
    stubs = np.repeat(np.arange(n), k)
    rng.shuffle(stubs)
    edges: set[tuple[int, int]] = set()
    for i in range(0, stubs.size, 2):
        u, v = int(stubs[i]), int(stubs[i + 1])
        if u == v:
            return None
        e = (u, v) if u < v else (v, u)
        if e in edges:
            return None
        edges.add(e)
    return tuple(sorted(edges))


def sample_expander(
    n: int,
    k: int,
    gap_threshold: float,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_MAX_SAMPLING_ATTEMPTS,
) -> RegularGraph:
    """Rejection-sample one simple connected k-regular graph with
    lambda1 >= gap_threshold."""
    if gap_threshold <= 0:
        raise InvalidParams("gap threshold must be positive")
    if n <= k:
        raise InvalidParams(f"no simple {k}-regular graph on n={n} <= k vertices")
    if (n * k) % 2 != 0:
        raise InvalidParams(f"n*k = {n * k} is odd")
    for _ in range(max_attempts):
        edges = _sample_pairing(n, k, rng)
        if edges is None:
            continue
        g = build_regular_graph(n, k, edges)
        if not is_connected(g):
            continue
        if laplacian_spectrum(g).lambda1 >= gap_threshold:
            return g
    raise SamplingExhausted(
        f"no k={k} graph on n={n} vertices with gap >= {gap_threshold} "
        f"after {max_attempts} attempts"
    )


def generate_expander_family(
    sizes,
    k: int,
    gap_threshold: float,
    seed: int,
    max_attempts: int = DEFAULT_MAX_SAMPLING_ATTEMPTS,
) -> list[RegularGraph]:
    """One certified graph per requested size.

    Each size draws from its own generator derived from (seed, size),
    so the family is reproducible and sizes are independent jobs.
    """
    graphs = []
    for n in sizes:
        rng = derive_rng(seed, "graph", int(n))
        graphs.append(sample_expander(int(n), k, gap_threshold, rng, max_attempts))
    return graphs


# --- convenience constructors used by tests and the CLI -------------------

def cycle_graph(n: int) -> RegularGraph:
    edges = [(i, (i + 1) % n) for i in range(n)]
    return build_regular_graph(n, 2, edges)


def complete_graph(n: int) -> RegularGraph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return build_regular_graph(n, n - 1, edges)


def circulant_graph(n: int, offsets) -> RegularGraph:
    """Circulant graph: i ~ i +- s for each offset s. Deterministic
    2*len(offsets)-regular family (offsets must be distinct, 0 < s < n/2)."""
    offsets = tuple(int(s) for s in offsets)
    if len(set(offsets)) != len(offsets):
        raise InvalidParams(f"repeated offsets in {offsets}")
    for s in offsets:
        if not 0 < s < n / 2:
            raise InvalidParams(f"offset {s} outside (0, {n}/2)")
    edges = [(i, (i + s) % n) for s in offsets for i in range(n)]
    return build_regular_graph(n, 2 * len(offsets), edges)


# --- text file format ------------------------------------------------------
# Line 1: "n k"; one "u v" line per edge, u < v, ascending. Round-trips
# exactly because vertices and edges are integers.

def graph_to_text(g: RegularGraph) -> str:
    lines = [f"{g.n_vertices} {g.degree}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> RegularGraph:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows or len(rows[0]) != 2:
        raise InvalidParams("graph text must start with a 'n k' line")
    n, k = int(rows[0][0]), int(rows[0][1])
    edges = [(int(u), int(v)) for u, v in rows[1:]]
    return build_regular_graph(n, k, edges)


def save_graph(g: RegularGraph, path) -> None:
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(graph_to_text(g))
    except OSError as exc:
        raise ArtifactIOError(f"cannot write graph {path}: {exc}") from exc


def load_graph(path) -> RegularGraph:
    try:
        with open(path, "r", encoding="ascii") as fh:
            return graph_from_text(fh.read())
    except OSError as exc:
        raise ArtifactIOError(f"cannot read graph {path}: {exc}") from exc
