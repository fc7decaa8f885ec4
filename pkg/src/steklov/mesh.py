"""Intrinsic triangle meshes: connectivity plus per-edge lengths.

No vertex coordinates are stored anywhere; the metric lives entirely in
the edge lengths. Meshes are manifolds with boundary, globally oriented,
and carry labeled boundary loops. Validation returns diagnostics instead
of raising so that deliberately broken inputs can be inspected.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import ArtifactIOError, InvalidParams, MeshInvariantViolated, NonIntegerGenus


@dataclass(frozen=True)
class BoundaryLoop:
    """A closed boundary cycle, ordered along the induced orientation."""

    label: str
    vertices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    location: tuple
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.location}: {self.message}"


class IntrinsicMesh:
    """Oriented triangle mesh with boundary, metric given by edge lengths.

    Parameters
    ----------
    n_vertices : int
    triangles : (nT, 3) integer array, orientation-consistent triples.
    edge_lengths : dict mapping each unordered vertex pair (u < v) that
        appears in a triangle to its positive length.
    boundary_loops : labeled vertex cycles covering all boundary edges.
    """

    def __init__(self, n_vertices, triangles, edge_lengths, boundary_loops):
        self.n_vertices = int(n_vertices)
        self.triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        self.edge_lengths = {
            (int(min(u, v)), int(max(u, v))): float(length)
            for (u, v), length in edge_lengths.items()
        }
        self.boundary_loops = [
            BoundaryLoop(str(bl.label), tuple(int(v) for v in bl.vertices))
            if isinstance(bl, BoundaryLoop)
            else BoundaryLoop(str(bl[0]), tuple(int(v) for v in bl[1]))
            for bl in boundary_loops
        ]
        self._tri_lengths = None
        self._areas = None

    # -- metric access ----------------------------------------------------

    def length(self, u: int, v: int) -> float:
        return self.edge_lengths[(u, v) if u < v else (v, u)]

    def tri_lengths(self) -> np.ndarray:
        """(nT, 3) array; column i holds the length opposite vertex i."""
        if self._tri_lengths is None:
            t = self.triangles
            out = np.empty((len(t), 3))
            for row, (a, b, c) in enumerate(t):
                out[row, 0] = self.length(b, c)
                out[row, 1] = self.length(a, c)
                out[row, 2] = self.length(a, b)
            self._tri_lengths = out
        return self._tri_lengths

    def areas(self) -> np.ndarray:
        """Triangle areas from edge lengths (stable Heron formula)."""
        if self._areas is None:
            lengths = np.sort(self.tri_lengths(), axis=1)
            a, b, c = lengths[:, 2], lengths[:, 1], lengths[:, 0]
            # Kahan's numerically stable ordering, a >= b >= c
            s = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
            self._areas = 0.25 * np.sqrt(np.maximum(s, 0.0))
        return self._areas

    def total_area(self) -> float:
        return float(self.areas().sum())

    # -- boundary access ---------------------------------------------------

    def loop(self, label: str) -> BoundaryLoop:
        for bl in self.boundary_loops:
            if bl.label == label:
                return bl
        raise InvalidParams(f"no boundary loop labeled {label!r}")

    def loop_labels(self) -> list[str]:
        return [bl.label for bl in self.boundary_loops]

    def loop_length(self, label: str) -> float:
        cyc = self.loop(label).vertices
        return float(
            sum(self.length(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc)))
        )

    def boundary_vertices(self, labels=None) -> np.ndarray:
        """Concatenated loop vertices, loops in stored order."""
        if labels is None:
            labels = self.loop_labels()
        out: list[int] = []
        for label in labels:
            out.extend(self.loop(label).vertices)
        return np.array(out, dtype=np.int64)

    # -- identity -----------------------------------------------------------

    def content_id(self) -> str:
        """Stable short hash of the full mesh content."""
        return hashlib.sha256(mesh_to_text(self).encode("ascii")).hexdigest()[:16]


# --- connectivity helpers ---------------------------------------------------

def directed_edge_census(triangles: np.ndarray):
    """Count, per unordered edge, how often each direction is used.

    Returns a dict (u, v) with u < v -> [count of (u->v), count of (v->u)].
    """
    census: dict[tuple[int, int], list[int]] = {}
    for a, b, c in triangles:
        for u, v in ((a, b), (b, c), (c, a)):
            u, v = int(u), int(v)
            if u < v:
                key, slot = (u, v), 0
            else:
                key, slot = (v, u), 1
            entry = census.get(key)
            if entry is None:
                census[key] = [0, 0]
                entry = census[key]
            entry[slot] += 1
    return census


def extract_boundary_cycles(triangles: np.ndarray) -> list[tuple[int, ...]]:
    """Boundary cycles in the orientation induced by the triangles.

    Each cycle starts at its smallest vertex; the list is sorted by that
    starting vertex, so the result is deterministic. Raises
    MeshInvariantViolated on non-manifold or pinched boundaries.
    """
    census = directed_edge_census(triangles)
    nxt: dict[int, int] = {}
    for (u, v), (fwd, bwd) in census.items():
        total = fwd + bwd
        if total == 1:
            src, dst = (u, v) if fwd else (v, u)
            if src in nxt:
                raise MeshInvariantViolated(f"boundary pinch at vertex {src}")
            nxt[src] = dst
        elif total != 2:
            raise MeshInvariantViolated(f"edge {(u, v)} lies in {total} triangles")
    cycles = []
    remaining = set(nxt)
    while remaining:
        start = min(remaining)
        cyc = [start]
        cur = nxt[start]
        remaining.discard(start)
        while cur != start:
            if cur not in remaining:
                raise MeshInvariantViolated(f"boundary walk stuck at vertex {cur}")
            cyc.append(cur)
            remaining.discard(cur)
            cur = nxt[cur]
        cycles.append(tuple(cyc))
    cycles.sort(key=lambda c: c[0])
    return cycles


def _rotate_to_min(cycle: tuple[int, ...]) -> tuple[int, ...]:
    i = cycle.index(min(cycle))
    return cycle[i:] + cycle[:i]


# --- validation --------------------------------------------------------------

def validate_mesh(m: IntrinsicMesh) -> list[Diagnostic]:
    """Check every structural invariant; empty list means valid."""
    out: list[Diagnostic] = []
    tris = m.triangles
    n = m.n_vertices

    if tris.size and (tris.min() < 0 or tris.max() >= n):
        out.append(Diagnostic("BadIndex", (), "triangle vertex index out of range"))
        return out
    for row, (a, b, c) in enumerate(tris):
        if a == b or b == c or a == c:
            out.append(Diagnostic("DegenerateTriangle", (row,), "repeated vertex in triangle"))
    if any(d.kind == "DegenerateTriangle" for d in out):
        return out

    used = np.zeros(n, dtype=bool)
    used[tris.reshape(-1)] = True
    for v in np.nonzero(~used)[0]:
        out.append(Diagnostic("UnusedVertex", (int(v),), "vertex not in any triangle"))

    census = directed_edge_census(tris)
    boundary_edges = set()
    manifold_ok = True
    for (u, v), (fwd, bwd) in census.items():
        total = fwd + bwd
        if total > 2:
            out.append(
                Diagnostic("NonManifoldEdge", (u, v), f"edge lies in {total} triangles")
            )
            manifold_ok = False
        elif total == 2 and (fwd == 2 or bwd == 2):
            out.append(
                Diagnostic(
                    "OrientationConflict", (u, v), "both triangles traverse edge the same way"
                )
            )
            manifold_ok = False
        elif total == 1:
            boundary_edges.add((u, v))

    mesh_edges = set(census)
    stored_edges = set(m.edge_lengths)
    for e in sorted(mesh_edges - stored_edges):
        out.append(Diagnostic("BadEdgeSet", e, "triangle edge missing from edge_lengths"))
    for e in sorted(stored_edges - mesh_edges):
        out.append(Diagnostic("BadEdgeSet", e, "edge_lengths entry not used by any triangle"))
    for e in sorted(stored_edges & mesh_edges):
        if not (m.edge_lengths[e] > 0):
            out.append(Diagnostic("NonPositiveLength", e, f"length {m.edge_lengths[e]}"))

    if stored_edges >= mesh_edges and not any(
        d.kind == "NonPositiveLength" for d in out
    ):
        for row, (a, b, c) in enumerate(tris):
            la = m.length(b, c)
            lb = m.length(a, c)
            lc = m.length(a, b)
            big = max(la, lb, lc)
            if la + lb + lc - 2 * big <= 0:
                out.append(
                    Diagnostic(
                        "TriangleInequality",
                        (row,),
                        f"lengths ({la}, {lb}, {lc}) violate strict triangle inequality",
                    )
                )

    if manifold_ok:
        try:
            computed = {_rotate_to_min(c) for c in extract_boundary_cycles(tris)}
        except MeshInvariantViolated as exc:
            out.append(Diagnostic("BoundaryPinch", (), str(exc)))
            return out
        stored = {_rotate_to_min(bl.vertices) for bl in m.boundary_loops}
        if len(stored) != len(m.boundary_loops):
            out.append(Diagnostic("BoundaryLoopMismatch", (), "duplicate stored loops"))
        if stored != computed:
            out.append(
                Diagnostic(
                    "BoundaryLoopMismatch",
                    (),
                    f"stored loops do not match mesh boundary "
                    f"({len(stored)} stored, {len(computed)} computed)",
                )
            )
        labels = [bl.label for bl in m.boundary_loops]
        if len(set(labels)) != len(labels):
            out.append(Diagnostic("BoundaryLoopMismatch", (), "duplicate loop labels"))
        cover = set()
        for bl in m.boundary_loops:
            cyc = bl.vertices
            for i in range(len(cyc)):
                u, v = cyc[i], cyc[(i + 1) % len(cyc)]
                cover.add((u, v) if u < v else (v, u))
        if cover != boundary_edges and stored == computed:
            out.append(
                Diagnostic("BoundaryLoopMismatch", (), "loops do not cover boundary edges")
            )
    return out


def require_valid(m: IntrinsicMesh) -> IntrinsicMesh:
    problems = validate_mesh(m)
    if problems:
        head = "; ".join(str(p) for p in problems[:5])
        raise MeshInvariantViolated(f"{len(problems)} mesh invariant violations: {head}")
    return m


# --- topology ----------------------------------------------------------------

def euler_genus(m: IntrinsicMesh) -> tuple[int, int, int]:
    """(Euler characteristic, boundary loop count, genus).

    chi = V - E + F counted combinatorially; b counted from the triangle
    census (not the stored loop records); genus from chi = 2 - 2*genus - b.
    Raises NonIntegerGenus when that equation has no admissible integer
    solution (non-orientable or corrupted mesh).
    """
    n_edges = len(directed_edge_census(m.triangles))
    chi = m.n_vertices - n_edges + len(m.triangles)
    b = len(extract_boundary_cycles(m.triangles))
    twice_genus = 2 - chi - b
    if twice_genus % 2 != 0 or twice_genus < 0:
        raise NonIntegerGenus(f"chi={chi}, b={b} gives 2g={twice_genus}")
    return chi, b, twice_genus // 2


# --- text file format ---------------------------------------------------------
# Header "IMESH nV nT nBL"; nT oriented triangle lines "i j k"; one line
# per distinct edge "u v length" (u < v, ascending, 17 significant
# digits); nBL loop lines "label m v1 ... vm". Round-trips bit-exactly.

def mesh_to_text(m: IntrinsicMesh) -> str:
    lines = [f"IMESH {m.n_vertices} {len(m.triangles)} {len(m.boundary_loops)}"]
    for a, b, c in m.triangles:
        lines.append(f"{a} {b} {c}")
    for (u, v) in sorted(m.edge_lengths):
        lines.append(f"{u} {v} {m.edge_lengths[(u, v)]:.17g}")
    for bl in m.boundary_loops:
        verts = " ".join(str(v) for v in bl.vertices)
        lines.append(f"{bl.label} {len(bl.vertices)} {verts}")
    return "\n".join(lines) + "\n"


def mesh_from_text(text: str) -> IntrinsicMesh:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("IMESH"):
        raise ArtifactIOError("not an IMESH file (missing header)")
    try:
        _, n_v, n_t, n_bl = lines[0].split()
        n_v, n_t, n_bl = int(n_v), int(n_t), int(n_bl)
        tris = np.array(
            [[int(x) for x in lines[1 + i].split()] for i in range(n_t)], dtype=np.int64
        ).reshape(-1, 3)
        n_e = len(directed_edge_census(tris))
        lengths = {}
        for i in range(n_e):
            u, v, val = lines[1 + n_t + i].split()
            lengths[(int(u), int(v))] = float(val)
        loops = []
        for i in range(n_bl):
            parts = lines[1 + n_t + n_e + i].split()
            label, count = parts[0], int(parts[1])
            verts = tuple(int(x) for x in parts[2 : 2 + count])
            if len(verts) != count:
                raise ArtifactIOError(f"loop {label!r} truncated")
            loops.append(BoundaryLoop(label, verts))
    except (ValueError, IndexError) as exc:
        raise ArtifactIOError(f"malformed IMESH file: {exc}") from exc
    return IntrinsicMesh(n_v, tris, lengths, loops)


def save_mesh(m: IntrinsicMesh, path) -> None:
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(mesh_to_text(m))
    except OSError as exc:
        raise ArtifactIOError(f"cannot write mesh {path}: {exc}") from exc


def load_mesh(path, validate: bool = True) -> IntrinsicMesh:
    try:
        with open(path, "r", encoding="ascii") as fh:
            m = mesh_from_text(fh.read())
    except OSError as exc:
        raise ArtifactIOError(f"cannot read mesh {path}: {exc}") from exc
    return require_valid(m) if validate else m
