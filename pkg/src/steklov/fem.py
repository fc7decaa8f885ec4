"""Piecewise-linear finite elements from intrinsic edge lengths.

Cotangent stiffness, boundary mass (consistent and lumped), lumped
interior mass, per-triangle energies, and the Dirichlet-to-Neumann
reduction S = K_bb - K_bi K_ii^{-1} K_ib onto selected boundary loops.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DegenerateTriangle,
    DimensionMismatch,
    SingularInterior,
    SolverError,
    ZeroBoundaryNorm,
)
from .mesh import IntrinsicMesh

DEGENERACY_MARGIN = 1e-12
FACTOR_RESIDUAL_TOL = 1e-10
_SOLVE_CHUNK = 256


def _tri_cotangents(m: IntrinsicMesh) -> np.ndarray:
    """(nT, 3) cotangents; column i is the angle at triangle vertex i,
    opposite edge i. Law of cosines + Heron, no coordinates."""
    lengths = m.tri_lengths()
    margins = lengths.sum(axis=1) - 2 * lengths.max(axis=1)
    bad = np.nonzero(margins <= DEGENERACY_MARGIN)[0]
    if bad.size:
        raise DegenerateTriangle(
            f"{bad.size} triangle(s) at or below degeneracy margin, first rows {bad[:5].tolist()}"
        )
    sq = lengths**2
    areas = m.areas()
    cots = np.empty_like(lengths)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        cots[:, i] = (sq[:, j] + sq[:, k] - sq[:, i]) / (4.0 * areas)
    return cots


def assemble_stiffness(m: IntrinsicMesh) -> sp.csr_matrix:
    """Cotangent stiffness K: off-diagonal -cot/2 per opposite angle,
    rows summing to zero. Symmetric PSD; K @ 1 = 0 exactly by assembly."""
    cots = _tri_cotangents(m)
    tri = m.triangles
    rows, cols, vals = [], [], []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        w = 0.5 * cots[:, i]
        rows.extend([tri[:, j], tri[:, k], tri[:, j], tri[:, k]])
        cols.extend([tri[:, k], tri[:, j], tri[:, j], tri[:, k]])
        vals.extend([-w, -w, w, w])
    K = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(m.n_vertices, m.n_vertices),
    ).tocsr()
    K.sum_duplicates()
    return K


def triangle_energies(m: IntrinsicMesh, f: np.ndarray) -> np.ndarray:
    """Per-triangle Dirichlet energies; their sum equals f^T K f."""
    f = _as_vertex_vector(m, f)
    cots = _tri_cotangents(m)
    tri = m.triangles
    e = np.zeros(len(tri))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        e += 0.5 * cots[:, i] * (f[tri[:, j]] - f[tri[:, k]]) ** 2
    return e


def triangle_energies_embedded(m: IntrinsicMesh, f: np.ndarray) -> np.ndarray:
    """Independent energy route: lay each triangle out in the plane from
    its lengths, form the piecewise-linear gradient explicitly, and
    integrate |grad f|^2. Used to cross-check triangle_energies."""
    f = _as_vertex_vector(m, f)
    lengths = m.tri_lengths()
    tri = m.triangles
    out = np.empty(len(tri))
    for row in range(len(tri)):
        la, lb, lc = lengths[row]  # opposite vertices 0, 1, 2
        p0 = np.zeros(2)
        p1 = np.array([lc, 0.0])
        x2 = (lb**2 + lc**2 - la**2) / (2.0 * lc)
        y2 = np.sqrt(max(lb**2 - x2**2, 0.0))
        p2 = np.array([x2, y2])
        basis = np.array([p1 - p0, p2 - p0])
        rhs = np.array([f[tri[row, 1]] - f[tri[row, 0]], f[tri[row, 2]] - f[tri[row, 0]]])
        grad = np.linalg.solve(basis, rhs)
        area = 0.5 * lc * y2
        out[row] = area * float(grad @ grad)
    return out


def loop_segments(m: IntrinsicMesh, labels) -> list[tuple[int, int, float]]:
    """(u, v, length) for every boundary segment of the selected loops."""
    segs = []
    for label in labels:
        cyc = m.loop(label).vertices
        for i in range(len(cyc)):
            u, v = cyc[i], cyc[(i + 1) % len(cyc)]
            segs.append((u, v, m.length(u, v)))
    return segs


def assemble_boundary_mass(m: IntrinsicMesh, loops=None, lumped: bool = False) -> sp.csr_matrix:
    """1D boundary mass along the selected loops, full vertex dimension.

    Consistent (default): per segment of length l, diagonal l/3 and
    off-diagonal l/6. Lumped: diagonal l/2 per endpoint. 1^T M 1 equals
    the total selected boundary length either way.
    """
    labels = m.loop_labels() if loops is None else list(loops)
    rows, cols, vals = [], [], []
    for u, v, length in loop_segments(m, labels):
        if lumped:
            rows += [u, v]
            cols += [u, v]
            vals += [length / 2.0, length / 2.0]
        else:
            rows += [u, v, u, v]
            cols += [u, v, v, u]
            vals += [length / 3.0, length / 3.0, length / 6.0, length / 6.0]
    M = sp.coo_matrix((vals, (rows, cols)), shape=(m.n_vertices, m.n_vertices)).tocsr()
    M.sum_duplicates()
    return M


def assemble_lumped_mass(m: IntrinsicMesh) -> np.ndarray:
    """Diagonal 2D mass: each vertex gets one third of its triangles' area."""
    diag = np.zeros(m.n_vertices)
    areas = m.areas() / 3.0
    for i in range(3):
        np.add.at(diag, m.triangles[:, i], areas)
    return diag


def _as_vertex_vector(m: IntrinsicMesh, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (m.n_vertices,):
        raise DimensionMismatch(f"field shape {f.shape} != ({m.n_vertices},)")
    return f


# --- Dirichlet-to-Neumann reduction --------------------------------------------

@dataclass
class SchurContext:
    """DtN reduction of a mesh onto selected Steklov loops.

    boundary holds the Steklov vertex ids in loop-concatenation order;
    schur is the dense DtN matrix on those unknowns; boundary_mass the
    matching consistent 1D mass. Vertices of non-selected loops sit in
    the interior block, which realizes the natural (Neumann) condition.
    """

    mesh: IntrinsicMesh
    steklov_labels: tuple[str, ...]
    boundary: np.ndarray
    interior: np.ndarray
    stiffness: sp.csr_matrix
    schur: np.ndarray
    boundary_mass: np.ndarray
    _k_ib: sp.csr_matrix = field(repr=False)
    _lu: object = field(repr=False)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary)

    def solve_interior(self, rhs: np.ndarray) -> np.ndarray:
        if self._lu is None:
            return np.zeros((0,) + rhs.shape[1:])
        out = self._lu.solve(rhs)
        return out

    def extend(self, boundary_values: np.ndarray) -> np.ndarray:
        """Harmonic extension of Steklov-boundary data to all vertices
        (interior and Neumann loops included)."""
        boundary_values = np.asarray(boundary_values, dtype=float)
        if boundary_values.shape[0] != self.n_boundary:
            raise DimensionMismatch(
                f"boundary data length {boundary_values.shape[0]} != {self.n_boundary}"
            )
        full = np.zeros((self.mesh.n_vertices,) + boundary_values.shape[1:])
        full[self.boundary] = boundary_values
        if len(self.interior):
            rhs = -(self._k_ib @ boundary_values)
            full[self.interior] = self.solve_interior(rhs)
        return full


def dtn_schur(m: IntrinsicMesh, steklov_loops=None) -> SchurContext:
    """Assemble the discrete DtN operator on the selected loops.

    S = K_bb - K_bi K_ii^{-1} K_ib, eliminated with a sparse direct
    factorization of K_ii; the factor-solve residual is checked at
    FACTOR_RESIDUAL_TOL and the result symmetrized.
    """
    labels = tuple(m.loop_labels() if steklov_loops is None else steklov_loops)
    if not labels:
        raise ZeroBoundaryNorm("at least one Steklov loop is required")
    boundary = m.boundary_vertices(labels)
    if len(np.unique(boundary)) != len(boundary):
        raise DimensionMismatch("Steklov loops overlap")
    mask = np.ones(m.n_vertices, dtype=bool)
    mask[boundary] = False
    interior = np.nonzero(mask)[0]

    K = assemble_stiffness(m)
    K_bb = K[np.ix_(boundary, boundary)].toarray()
    if len(interior) == 0:
        schur = K_bb
        k_ib, lu = sp.csr_matrix((0, len(boundary))), None
    else:
        k_ii = K[np.ix_(interior, interior)].tocsc()
        k_ib = K[np.ix_(interior, boundary)].tocsr()
        try:
            lu = spla.splu(k_ii)
        except RuntimeError as exc:
            raise SingularInterior(f"interior stiffness block is singular: {exc}") from exc
        correction = np.empty((len(boundary), len(boundary)))
        rhs_dense = k_ib.toarray()
        for start in range(0, len(boundary), _SOLVE_CHUNK):
            chunk = rhs_dense[:, start : start + _SOLVE_CHUNK]
            x = lu.solve(chunk)
            resid = np.abs(k_ii @ x - chunk).max()
            scale = max(1.0, np.abs(chunk).max())
            if resid > FACTOR_RESIDUAL_TOL * scale:
                raise SolverError(
                    f"factor-solve residual {resid:.3e} exceeds {FACTOR_RESIDUAL_TOL:.0e}"
                )
            correction[:, start : start + _SOLVE_CHUNK] = k_ib.T @ x
        schur = K_bb - correction

    asym = np.abs(schur - schur.T).max()
    scale = max(1.0, np.abs(schur).max())
    if asym > 1e-8 * scale:
        raise SolverError(f"DtN asymmetry {asym:.3e} beyond tolerance")
    schur = 0.5 * (schur + schur.T)

    mass_full = assemble_boundary_mass(m, labels)
    mass_b = mass_full[np.ix_(boundary, boundary)].toarray()
    return SchurContext(
        mesh=m,
        steklov_labels=labels,
        boundary=boundary,
        interior=interior,
        stiffness=K,
        schur=schur,
        boundary_mass=mass_b,
        _k_ib=k_ib,
        _lu=lu,
    )


def harmonic_extension(m: IntrinsicMesh, boundary_values: np.ndarray) -> np.ndarray:
    """Extend data given on all boundary vertices (loop-concatenation
    order) harmonically: interior values solve K_ii f_i = -K_ib f_b."""
    return dtn_schur(m).extend(boundary_values)


def rayleigh_quotient(m: IntrinsicMesh, f: np.ndarray, loops=None):
    """(energy, boundary_norm, quotient) of a vertex field: f^T K f over
    the boundary L2 norm on the selected loops."""
    f = _as_vertex_vector(m, f)
    energy = float(f @ (assemble_stiffness(m) @ f))
    mass = assemble_boundary_mass(m, loops)
    boundary_norm = float(f @ (mass @ f))
    if boundary_norm <= 0.0 or not np.isfinite(boundary_norm):
        raise ZeroBoundaryNorm(f"boundary norm {boundary_norm} is not positive")
    return energy, boundary_norm, energy / boundary_norm
