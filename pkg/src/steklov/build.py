"""Mesh constructors: flat cylinders, disks, sheets, the fundamental
piece, and surfaces glued from copies of the piece along a graph.

Every builder produces an IntrinsicMesh (lengths only). Planar
coordinates appear below strictly as scaffolding to compute lengths and
are discarded.

The fundamental piece is a genus-0 surface with k+1 boundary circles of
length exactly 1, each carrying an exactly flat cylindrical tube of
circumference 1 and length 1. The hub joining the tubes is a doubled
chamfered regular (k+1)-gon: two mirror copies of the flat polygon, with
each corner cut off by a straight segment of length 1/2, glued along the
remaining perimeter. Each doubled cut is a circle with n_b segments of
length exactly 1/n_b, onto which a tube ring welds isometrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegreeMismatch,
    InvalidParams,
    MeshInvariantViolated,
    NonIntegerResult,
    NotConnected,
)
from .graphs import RegularGraph, is_connected
from .mesh import (
    BoundaryLoop,
    IntrinsicMesh,
    euler_genus,
    extract_boundary_cycles,
    require_valid,
)

TOL_LEN = 1e-9


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


# --- structured flat meshes ---------------------------------------------------

def build_flat_cylinder(
    n_b: int,
    n_layers: int,
    circumference: float = 1.0,
    length: float = 1.0,
    labels: tuple[str, str] = ("bottom", "top"),
) -> IntrinsicMesh:
    """Flat cylinder S^1(circumference) x [0, length] as an n_b x n_layers
    quad grid, every quad split along the same diagonal direction.

    Horizontal edges have length exactly circumference/n_b and vertical
    edges exactly length/n_layers. Boundary loops: labels[0] at layer 0,
    labels[1] at layer n_layers.
    """
    if n_b < 3 or n_layers < 1:
        raise InvalidParams(f"cylinder needs n_b >= 3, n_layers >= 1, got ({n_b}, {n_layers})")
    if circumference <= 0 or length <= 0:
        raise InvalidParams("cylinder dimensions must be positive")
    h = circumference / n_b
    v = length / n_layers
    diag = math.hypot(h, v)

    def vid(i: int, j: int) -> int:
        return j * n_b + i % n_b

    tris = []
    lengths: dict[tuple[int, int], float] = {}
    for j in range(n_layers + 1):
        for i in range(n_b):
            lengths[_edge(vid(i, j), vid(i + 1, j))] = h
    for j in range(n_layers):
        for i in range(n_b):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
            lengths[_edge(a, d)] = v
            lengths[_edge(a, c)] = diag

    tris = np.array(tris, dtype=np.int64)
    cycles = extract_boundary_cycles(tris)
    loops = []
    for cyc in cycles:
        label = labels[0] if vid(0, 0) in cyc else labels[1]
        loops.append(BoundaryLoop(label, cyc))
    loops.sort(key=lambda bl: labels.index(bl.label))
    return IntrinsicMesh(n_b * (n_layers + 1), tris, lengths, loops)


def cylinder_grid(n_b: int, n_layers: int) -> np.ndarray:
    """Vertex ids of build_flat_cylinder as a (n_layers+1, n_b) array;
    row j is the ring at layer j."""
    return np.arange(n_b * (n_layers + 1), dtype=np.int64).reshape(n_layers + 1, n_b)


def _lengths_from_coords(coords: np.ndarray, tris: np.ndarray) -> dict:
    lengths: dict[tuple[int, int], float] = {}
    for a, b, c in tris:
        for u, v in ((a, b), (b, c), (a, c)):
            key = _edge(int(u), int(v))
            if key not in lengths:
                lengths[key] = float(np.linalg.norm(coords[key[0]] - coords[key[1]]))
    return lengths


def build_disk(n_rings: int, n_around: int, radius: float = 1.0) -> IntrinsicMesh:
    """Triangulated flat disk: center fan plus concentric ring grid.
    One boundary loop labeled "rim" (a regular n_around-gon)."""
    if n_rings < 1 or n_around < 3:
        raise InvalidParams(f"disk needs n_rings >= 1, n_around >= 3, got ({n_rings}, {n_around})")
    if radius <= 0:
        raise InvalidParams("disk radius must be positive")
    angles = 2 * math.pi * np.arange(n_around) / n_around
    ring_dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    coords = [np.zeros(2)]
    for s in range(1, n_rings + 1):
        coords.extend(radius * s / n_rings * ring_dirs)
    coords = np.array(coords)

    def vid(s: int, i: int) -> int:
        return 1 + (s - 1) * n_around + i % n_around

    tris = []
    for i in range(n_around):
        tris.append((0, vid(1, i), vid(1, i + 1)))
    for s in range(1, n_rings):
        for i in range(n_around):
            a, b = vid(s, i), vid(s + 1, i)
            c, d = vid(s + 1, i + 1), vid(s, i + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    tris = np.array(tris, dtype=np.int64)
    lengths = _lengths_from_coords(coords, tris)
    (cycle,) = extract_boundary_cycles(tris)
    return IntrinsicMesh(len(coords), tris, lengths, [BoundaryLoop("rim", cycle)])


def build_flat_sheet(nx: int, ny: int, width: float = 1.0, height: float = 1.0) -> IntrinsicMesh:
    """Flat rectangular sheet [0,width] x [0,height] on an (nx+1) x (ny+1)
    grid; single boundary loop labeled "border"."""
    if nx < 1 or ny < 1 or width <= 0 or height <= 0:
        raise InvalidParams("sheet needs nx, ny >= 1 and positive dimensions")
    h, v = width / nx, height / ny
    diag = math.hypot(h, v)

    def vid(i: int, j: int) -> int:
        return j * (nx + 1) + i

    tris = []
    lengths: dict[tuple[int, int], float] = {}
    for j in range(ny + 1):
        for i in range(nx):
            lengths[_edge(vid(i, j), vid(i + 1, j))] = h
    for j in range(ny):
        for i in range(nx + 1):
            lengths[_edge(vid(i, j), vid(i, j + 1))] = v
        for i in range(nx):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
            lengths[_edge(a, c)] = diag
    tris = np.array(tris, dtype=np.int64)
    (cycle,) = extract_boundary_cycles(tris)
    return IntrinsicMesh((nx + 1) * (ny + 1), tris, lengths, [BoundaryLoop("border", cycle)])


# --- fundamental piece ---------------------------------------------------------

@dataclass(frozen=True)
class FundamentalPiece:
    """Genus-0 building block with k+1 unit boundary loops.

    Loop labels: sigma0_loop is the distinguished free boundary; b_loops
    are the k loops consumed by gluing. collar_vertices indexes the
    structured sigma0 tube as (resolution+1) rings x n_b vertices, ring 0
    on the boundary. slot_grids holds the analogous grid for every loop,
    and slot_tri_slices the contiguous triangle range of every tube.
    """

    mesh: IntrinsicMesh
    k: int
    n_b: int
    resolution: int
    sigma0_loop: str
    b_loops: tuple[str, ...]
    collar_vertices: np.ndarray
    slot_grids: dict[str, np.ndarray]
    slot_tri_slices: dict[str, tuple[int, int]]
    genus0: int = 0

    @property
    def loop_labels(self) -> tuple[str, ...]:
        return (self.sigma0_loop,) + self.b_loops

    @classmethod
    def from_mesh(cls, mesh: IntrinsicMesh) -> "FundamentalPiece":
        """Rebuild the piece wrapper from a serialized mesh.

        Collar grids and tube slices are not stored in the file format,
        so they come back empty; gluing only needs loops and lengths.
        """
        labels = mesh.loop_labels()
        if "sigma0" not in labels:
            raise InvalidParams("piece mesh must carry a loop labeled 'sigma0'")
        b_loops = tuple(sorted((s for s in labels if s != "sigma0"),
                               key=lambda s: (len(s), s)))
        sizes = {len(mesh.loop(s)) for s in labels}
        if len(sizes) != 1:
            raise MeshInvariantViolated(f"boundary loops disagree on n_b: {sorted(sizes)}")
        (n_b,) = sizes
        return cls(
            mesh=mesh,
            k=len(b_loops),
            n_b=n_b,
            resolution=0,
            sigma0_loop="sigma0",
            b_loops=b_loops,
            collar_vertices=np.empty((0, n_b), dtype=np.int64),
            slot_grids={},
            slot_tri_slices={},
        )


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def _build_hub(k: int, n_b: int) -> IntrinsicMesh:
    """Doubled chamfered (k+1)-gon with k+1 cut circles labeled C0..Ck.

    Corner j of the flat regular polygon is trimmed by a straight cut of
    length 1/2 at distance d from the corner; sides are sized so the
    remaining straight remnant between cuts also has length 1/2. Two
    mirror copies share the remnant vertices, turning each pair of cuts
    into a closed boundary circle of n_b segments of length 1/n_b.
    """
    m = n_b // 2
    n_c = k + 1
    alpha = (n_c - 2) * math.pi / n_c
    trim = 1.0 / (4.0 * math.sin(alpha / 2.0))
    side = 2.0 * trim + 0.5
    circum_r = side / (2.0 * math.sin(math.pi / n_c))
    corner_angles = 2 * math.pi * np.arange(n_c) / n_c + math.pi / 2
    corners = circum_r * np.column_stack([np.cos(corner_angles), np.sin(corner_angles)])
    cut_a = np.empty((n_c, 2))
    cut_b = np.empty((n_c, 2))
    for j in range(n_c):
        cut_a[j] = corners[j] + trim * _unit(corners[j - 1] - corners[j])
        cut_b[j] = corners[j] + trim * _unit(corners[(j + 1) % n_c] - corners[j])

    # closed boundary polyline: alternating cut runs and seam remnants
    pts: list[np.ndarray] = []
    seg_cut: list[bool] = []  # kind of the segment starting at each vertex
    seg_len: list[float] = []
    cut_start = []
    for j in range(n_c):
        cut_start.append(len(pts))
        for t in range(m):
            pts.append(cut_a[j] + (t / m) * (cut_b[j] - cut_a[j]))
            seg_cut.append(True)
            seg_len.append(1.0 / n_b)  # cut length 1/2 over n_b/2 segments
        seam_vec = cut_a[(j + 1) % n_c] - cut_b[j]
        seam_len = float(np.linalg.norm(seam_vec))
        m_r = max(1, round(seam_len * n_b))
        for t in range(m_r):
            pts.append(cut_b[j] + (t / m_r) * seam_vec)
            seg_cut.append(False)
            seg_len.append(seam_len / m_r)
    boundary = np.array(pts)
    n_bd = len(boundary)

    rho = np.linalg.norm(boundary, axis=1)
    n_rings = max(3, round(n_b * float(np.median(rho))))

    def vid(s: int, i: int) -> int:
        return 1 + (s - 1) * n_bd + i % n_bd

    n_single = 1 + n_rings * n_bd
    coords = np.zeros((n_single, 2))
    for s in range(1, n_rings + 1):
        for i in range(n_bd):
            coords[vid(s, i)] = (s / n_rings) * boundary[i]

    tris = []
    for i in range(n_bd):
        tris.append((0, vid(1, i), vid(1, i + 1)))
    for s in range(1, n_rings):
        for i in range(n_bd):
            a, b = vid(s, i), vid(s + 1, i)
            c, d = vid(s + 1, i + 1), vid(s, i + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    tris = np.array(tris, dtype=np.int64)
    lengths = _lengths_from_coords(coords, tris)
    for i in range(n_bd):  # boundary segments get their exact lengths
        lengths[_edge(vid(n_rings, i), vid(n_rings, i + 1))] = seg_len[i]

    # mirror copy, sharing exactly the seam vertices of the outer ring
    shared = np.zeros(n_single, dtype=bool)
    for i in range(n_bd):
        if not (seg_cut[i - 1] and seg_cut[i]):
            shared[vid(n_rings, i)] = True
    mirror = np.empty(n_single, dtype=np.int64)
    next_id = n_single
    for vtx in range(n_single):
        if shared[vtx]:
            mirror[vtx] = vtx
        else:
            mirror[vtx] = next_id
            next_id += 1
    tris_mirror = mirror[tris][:, [0, 2, 1]]  # reversed orientation
    all_lengths = dict(lengths)
    for (u, v), val in lengths.items():
        all_lengths.setdefault(_edge(int(mirror[u]), int(mirror[v])), val)

    all_tris = np.vstack([tris, tris_mirror])
    cycles = extract_boundary_cycles(all_tris)
    if len(cycles) != n_c:
        raise MeshInvariantViolated(f"hub has {len(cycles)} boundary circles, expected {n_c}")
    owner = {}
    for cyc in cycles:
        for vtx in cyc:
            owner[vtx] = cyc
    loops = [BoundaryLoop(f"C{j}", owner[vid(n_rings, cut_start[j])]) for j in range(n_c)]
    return require_valid(IntrinsicMesh(next_id, all_tris, all_lengths, loops))


def build_fundamental_piece(k: int, n_b: int, resolution: int) -> FundamentalPiece:
    """Fundamental piece: doubled-polygon hub plus k+1 flat tubes.

    Tube t0 ends in the distinguished loop sigma0 (the collar C0); tubes
    t1..tk end in B1..Bk. Each tube is build_flat_cylinder(n_b,
    resolution, 1, 1) welded to a hub cut circle along its top ring.
    """
    if k < 2:
        raise InvalidParams(f"piece needs k >= 2, got {k}")
    if n_b < 8 or n_b % 2 != 0:
        raise InvalidParams(f"piece needs even n_b >= 8, got {n_b}")
    if resolution < 1:
        raise InvalidParams(f"piece needs resolution >= 1, got {resolution}")

    hub = _build_hub(k, n_b)
    tube = build_flat_cylinder(n_b, resolution, 1.0, 1.0)
    grid_local = cylinder_grid(n_b, resolution)
    slot_labels = ["sigma0"] + [f"B{j}" for j in range(1, k + 1)]

    asm = MeshAssembly()
    asm.add(hub)
    n_hub_tris = len(hub.triangles)
    n_tube_tris = len(tube.triangles)
    grids = {}
    tri_slices = {}
    for j, slot in enumerate(slot_labels):
        off = asm.add(tube, prefix=f"t{j}.")
        asm.weld(f"t{j}.top", f"C{j}")
        asm.rename_loop(f"t{j}.bottom", slot)
        grids[slot] = grid_local + off
        tri_slices[slot] = (n_hub_tris + j * n_tube_tris, n_hub_tris + (j + 1) * n_tube_tris)
    mesh, relabel = asm.finalize()
    grids = {slot: relabel[g] for slot, g in grids.items()}

    require_valid(mesh)
    chi, b, genus = euler_genus(mesh)
    if (chi, b, genus) != (1 - k, k + 1, 0):
        raise MeshInvariantViolated(
            f"piece topology (chi, b, genus) = {(chi, b, genus)}, expected {(1 - k, k + 1, 0)}"
        )
    for slot in slot_labels:
        loop = mesh.loop(slot)
        if len(loop) != n_b:
            raise MeshInvariantViolated(f"loop {slot} has {len(loop)} vertices, expected {n_b}")
        if abs(mesh.loop_length(slot) - 1.0) > TOL_LEN:
            raise MeshInvariantViolated(f"loop {slot} length {mesh.loop_length(slot)} != 1")
    _check_collar_metric(mesh, grids["sigma0"])
    return FundamentalPiece(
        mesh=mesh,
        k=k,
        n_b=n_b,
        resolution=resolution,
        sigma0_loop="sigma0",
        b_loops=tuple(slot_labels[1:]),
        collar_vertices=grids["sigma0"],
        slot_grids=grids,
        slot_tri_slices=tri_slices,
    )


def _check_collar_metric(mesh: IntrinsicMesh, grid: np.ndarray) -> None:
    """The collar must be an exactly flat unit cylinder: every ring of
    circumference 1, every grid column of total length 1."""
    n_rows, n_b = grid.shape
    for r in range(n_rows):
        circ = sum(
            mesh.length(int(grid[r, i]), int(grid[r, (i + 1) % n_b])) for i in range(n_b)
        )
        if abs(circ - 1.0) > TOL_LEN:
            raise MeshInvariantViolated(f"collar ring {r} circumference {circ} != 1")
    for i in range(n_b):
        span = sum(mesh.length(int(grid[r, i]), int(grid[r + 1, i])) for r in range(n_rows - 1))
        if abs(span - 1.0) > TOL_LEN:
            raise MeshInvariantViolated(f"collar column {i} length {span} != 1")


# --- assembly / welding --------------------------------------------------------

class MeshAssembly:
    """Disjoint union of meshes with boundary-ring welding.

    Welding identifies two same-length boundary loops vertex by vertex,
    reversing index order (both loops are stored in induced boundary
    orientation, so the reversal keeps the result orientable) with an
    optional rotational twist. finalize() compacts vertex ids and
    returns the mesh plus the old-id -> new-id map.
    """

    def __init__(self):
        self._n = 0
        self._tris: list[np.ndarray] = []
        self._lengths: dict[tuple[int, int], float] = {}
        self._loops: dict[str, list[int]] = {}
        self._parent: list[int] = []

    def add(self, m: IntrinsicMesh, prefix: str = "") -> int:
        off = self._n
        self._n += m.n_vertices
        self._parent.extend(range(off, off + m.n_vertices))
        self._tris.append(m.triangles + off)
        for (u, v), val in m.edge_lengths.items():
            self._lengths[(u + off, v + off)] = val
        for bl in m.boundary_loops:
            label = prefix + bl.label
            if label in self._loops:
                raise InvalidParams(f"duplicate loop label {label!r} in assembly")
            self._loops[label] = [v + off for v in bl.vertices]
        return off

    def _find(self, x: int) -> int:
        root = x
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[x] != root:
            self._parent[x], x = root, self._parent[x]
        return root

    def _union(self, x: int, y: int) -> None:
        rx, ry = self._find(x), self._find(y)
        if rx == ry:
            return
        if rx > ry:
            rx, ry = ry, rx
        self._parent[ry] = rx

    def rename_loop(self, old: str, new: str) -> None:
        if new in self._loops:
            raise InvalidParams(f"loop label {new!r} already present")
        self._loops[new] = self._loops.pop(old)

    def weld(self, label_a: str, label_b: str, twist: int = 0) -> None:
        ring_a = self._loops.pop(label_a, None)
        ring_b = self._loops.pop(label_b, None)
        if ring_a is None or ring_b is None:
            raise InvalidParams(f"unknown or already-welded loop in ({label_a!r}, {label_b!r})")
        if len(ring_a) != len(ring_b):
            raise MeshInvariantViolated(
                f"cannot weld rings of sizes {len(ring_a)} and {len(ring_b)}"
            )
        if set(ring_a) & set(ring_b):
            raise MeshInvariantViolated(f"rings {label_a!r} and {label_b!r} share vertices")
        n = len(ring_a)
        for t in range(n):
            self._union(ring_a[t], ring_b[(twist - t) % n])

    def finalize(self) -> tuple[IntrinsicMesh, np.ndarray]:
        roots = np.fromiter((self._find(i) for i in range(self._n)), dtype=np.int64, count=self._n)
        uniq, relabel = np.unique(roots, return_inverse=True)
        tris = relabel[np.vstack(self._tris)] if self._tris else np.empty((0, 3), np.int64)
        lengths: dict[tuple[int, int], float] = {}
        for (u, v), val in self._lengths.items():
            key = _edge(int(relabel[u]), int(relabel[v]))
            prev = lengths.get(key)
            if prev is None:
                lengths[key] = val
            elif abs(prev - val) > 1e-9 * max(1.0, abs(prev)):
                raise MeshInvariantViolated(
                    f"seam length mismatch at {key}: {prev} vs {val}"
                )
        loops = [
            BoundaryLoop(label, tuple(int(relabel[v]) for v in seq))
            for label, seq in self._loops.items()
        ]
        return IntrinsicMesh(len(uniq), tris, lengths, loops), relabel


# --- gluing along a graph ------------------------------------------------------

@dataclass(frozen=True)
class GluedSurface:
    """Copies of the fundamental piece sewn along graph edges.

    Piece copy v contributes loops prefixed "p{v}."; after gluing, the
    free boundary consists of one sigma loop per copy (plus any B-loops
    left open by a partial pairing). collar_maps[v] is copy v's sigma
    collar grid in global vertex ids, ring 0 on the boundary.
    """

    mesh: IntrinsicMesh
    piece: FundamentalPiece
    graph: RegularGraph | None
    pairing: tuple[tuple[tuple[int, str], tuple[int, str]], ...]
    sigma_loops: tuple[str, ...]
    collar_maps: np.ndarray
    piece_vertex_maps: np.ndarray
    piece_triangle_slices: tuple[tuple[int, int], ...]

    @property
    def n_copies(self) -> int:
        return len(self.sigma_loops)


def pairing_from_edges(n_vertices, degree, edges, b_labels):
    """Assign the b_labels slots of each vertex to its incident edges by
    ascending (neighbor, edge index), and pair slots across each edge.
    Accepts repeated edges (multigraphs); rejects self-loops."""
    if len(b_labels) != degree:
        raise DegreeMismatch(f"{len(b_labels)} slot labels for degree {degree}")
    incident: list[list[tuple[int, int, int]]] = [[] for _ in range(n_vertices)]
    for idx, (u, v) in enumerate(edges):
        u, v = int(u), int(v)
        if u == v:
            raise InvalidParams(f"self-loop at vertex {u} cannot be glued")
        if not (0 <= u < n_vertices and 0 <= v < n_vertices):
            raise InvalidParams(f"edge ({u}, {v}) out of range")
        incident[u].append((v, idx, 0))
        incident[v].append((u, idx, 1))
    slot: dict[tuple[int, int], str] = {}
    for vtx, inc in enumerate(incident):
        if len(inc) != degree:
            raise DegreeMismatch(f"vertex {vtx} has degree {len(inc)}, expected {degree}")
        for rank, (_, idx, end) in enumerate(sorted(inc)):
            slot[(idx, end)] = b_labels[rank]
    return tuple(
        ((int(u), slot[(idx, 0)]), (int(v), slot[(idx, 1)]))
        for idx, (u, v) in enumerate(edges)
    )


def glue_from_pairing(piece, n_copies, pairs, twist=0, graph=None):
    """Sew n_copies of the piece along explicit ((copy, slot), (copy, slot))
    pairings. A full pairing uses every B-slot of every copy; partial
    pairings leave the unused B-loops as extra boundary."""
    pairs = tuple(pairs)
    used = set()
    for (va, sa), (vb, sb) in pairs:
        for vtx, s in ((va, sa), (vb, sb)):
            if not 0 <= vtx < n_copies:
                raise InvalidParams(f"pairing references copy {vtx} of {n_copies}")
            if s not in piece.b_loops:
                raise InvalidParams(f"unknown B-slot {s!r}")
            if (vtx, s) in used:
                raise InvalidParams(f"slot {(vtx, s)} paired twice")
            used.add((vtx, s))
        if va == vb and sa == sb:
            raise InvalidParams("cannot weld a loop to itself")

    asm = MeshAssembly()
    offsets = [asm.add(piece.mesh, prefix=f"p{v}.") for v in range(n_copies)]
    for (va, sa), (vb, sb) in pairs:
        asm.weld(f"p{va}.{sa}", f"p{vb}.{sb}", twist=twist)
    mesh, relabel = asm.finalize()

    n_piece = piece.mesh.n_vertices
    expected = n_copies * n_piece - len(pairs) * piece.n_b
    if mesh.n_vertices != expected:
        raise MeshInvariantViolated(
            f"glued vertex count {mesh.n_vertices}, expected {expected}"
        )
    require_valid(mesh)
    for bl in mesh.boundary_loops:
        if abs(mesh.loop_length(bl.label) - 1.0) > TOL_LEN:
            raise MeshInvariantViolated(f"loop {bl.label} length != 1 after gluing")

    full = len(used) == n_copies * piece.k
    if full:
        if len(mesh.boundary_loops) != n_copies:
            raise MeshInvariantViolated(
                f"{len(mesh.boundary_loops)} boundary loops for {n_copies} copies"
            )
        genus = euler_genus(mesh)[2]
        want = genus_formula(piece.genus0, piece.k, n_copies)
        if genus != want:
            raise MeshInvariantViolated(f"glued genus {genus}, formula gives {want}")

    maps = np.vstack([relabel[off : off + n_piece] for off in offsets])
    collars = (
        np.stack([maps[v][piece.collar_vertices] for v in range(n_copies)])
        if piece.collar_vertices.size
        else np.empty((n_copies, 0, piece.n_b), dtype=np.int64)
    )
    n_tri = len(piece.mesh.triangles)
    return GluedSurface(
        mesh=mesh,
        piece=piece,
        graph=graph,
        pairing=pairs,
        sigma_loops=tuple(f"p{v}.{piece.sigma0_loop}" for v in range(n_copies)),
        collar_maps=collars,
        piece_vertex_maps=maps,
        piece_triangle_slices=tuple((v * n_tri, (v + 1) * n_tri) for v in range(n_copies)),
    )


def glue_surface(piece: FundamentalPiece, g: RegularGraph, twist: int = 0) -> GluedSurface:
    """One piece copy per graph vertex, B-loops welded along graph edges."""
    if len(piece.b_loops) != g.degree:
        raise DegreeMismatch(
            f"piece has {len(piece.b_loops)} B-loops but graph degree is {g.degree}"
        )
    if not is_connected(g):
        raise NotConnected("gluing pattern must be a connected graph")
    pairs = pairing_from_edges(g.n_vertices, g.degree, g.edges, piece.b_loops)
    return glue_from_pairing(piece, g.n_vertices, pairs, twist=twist, graph=g)


def double_piece(piece: FundamentalPiece, slot: str | None = None) -> GluedSurface:
    """Two copies of the piece joined along a single B-loop (the M_v u M_w
    sub-surface of a glued surface around one edge)."""
    slot = piece.b_loops[0] if slot is None else slot
    return glue_from_pairing(piece, 2, [((0, slot), (1, slot))])


def genus_formula(genus0: int, k: int, n: int) -> int:
    """Genus of the surface glued from n copies of a genus-genus0 piece
    along a k-regular pattern: 1 + (genus0 + k/2 - 1)*n, as an exact
    integer."""
    doubled = 2 + (2 * genus0 + k - 2) * n
    if doubled % 2 != 0:
        raise NonIntegerResult(f"genus formula non-integral for genus0={genus0}, k={k}, n={n}")
    return doubled // 2
