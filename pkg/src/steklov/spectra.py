"""Eigen solvers for the Steklov, sloshing, and Neumann problems.

The Steklov problem is solved as S u = sigma M_b u on the DtN Schur
complement: dense generalized solve up to a boundary-size threshold,
shift-invert Lanczos above it. Residuals are always verified against
the assembled operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceFailure, InvalidParams, SolverError
from .fem import SchurContext, assemble_lumped_mass, assemble_stiffness, dtn_schur
from .mesh import IntrinsicMesh

ZERO_MODE_REL = 1e-6

STEKLOV = "steklov"
NEUMANN = "neumann"
SLOSHING = "sloshing"


@dataclass(frozen=True)
class EigenOptions:
    n_eigs: int = 8
    tol_res: float = 1e-8
    max_iterations: int = 2000
    dense_fallback_threshold: int = 2000

    def __post_init__(self):
        if self.n_eigs < 2:
            raise InvalidParams("n_eigs must be at least 2 (zero mode plus one)")
        if self.tol_res <= 0 or self.max_iterations <= 0 or self.dense_fallback_threshold <= 0:
            raise InvalidParams("eigensolver tolerances must be positive")


@dataclass(frozen=True)
class BoundaryCondition:
    """Per-loop condition: each label mapped to "steklov" or "neumann"."""

    conditions: dict

    def __post_init__(self):
        bad = {v for v in self.conditions.values() if v not in (STEKLOV, NEUMANN)}
        if bad:
            raise InvalidParams(f"unknown boundary conditions {sorted(bad)}")
        if not self.steklov_labels:
            raise InvalidParams("at least one loop must carry the Steklov condition")

    @property
    def steklov_labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, cond in self.conditions.items() if cond == STEKLOV)

    @classmethod
    def all_steklov(cls, m: IntrinsicMesh) -> "BoundaryCondition":
        return cls({lbl: STEKLOV for lbl in m.loop_labels()})

    @classmethod
    def one_steklov(cls, m: IntrinsicMesh, steklov_label: str) -> "BoundaryCondition":
        return cls(
            {lbl: (STEKLOV if lbl == steklov_label else NEUMANN) for lbl in m.loop_labels()}
        )


@dataclass
class SteklovSpectrum:
    """Ascending eigenvalues (zero mode included) with boundary vectors,
    harmonic extensions to every vertex, and verified residuals."""

    sigmas: np.ndarray
    boundary_vectors: np.ndarray
    extensions: np.ndarray
    residuals: np.ndarray
    mesh_id: str
    problem: str
    solver: str
    n_boundary_unknowns: int
    context: SchurContext = field(repr=False)

    @property
    def n_zero_modes(self) -> int:
        scale = max(1.0, float(self.sigmas[-1]))
        return int(np.sum(np.abs(self.sigmas) <= ZERO_MODE_REL * scale))

    @property
    def sigma1(self) -> float:
        k = self.n_zero_modes
        if k == 0 or k >= len(self.sigmas):
            raise SolverError(
                f"cannot isolate the first nonzero eigenvalue from {self.sigmas[:4]}"
            )
        return float(self.sigmas[k])

    def to_record(self) -> dict:
        return {
            "mesh_id": self.mesh_id,
            "problem": self.problem,
            "eigenvalues": [float(s) for s in self.sigmas],
            "residuals": [float(r) for r in self.residuals],
            "n_boundary_unknowns": self.n_boundary_unknowns,
            "solver": self.solver,
        }


def _iterative_pairs(schur, mass, k, opts):
    """Shift-invert Lanczos for the smallest pairs of (S, M); the inner
    (S - sigma M) solves run conjugate gradients on the dense operator."""
    n = schur.shape[0]
    shift = -1e-3 * max(1.0, np.abs(schur).max())
    shifted = schur - shift * mass

    def op_inv(rhs):
        x, info = spla.cg(
            spla.aslinearoperator(shifted), rhs, rtol=1e-12, atol=0.0, maxiter=10 * n
        )
        if info != 0:
            raise ConvergenceFailure(f"inner CG failed with status {info}")
        return x

    vals, vecs = spla.eigsh(
        spla.aslinearoperator(schur),
        k=k,
        M=mass,
        sigma=shift,
        which="LM",
        OPinv=spla.LinearOperator((n, n), matvec=op_inv),
        v0=np.full(n, 1.0 / np.sqrt(n)),
        maxiter=opts.max_iterations,
    )
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def steklov_spectrum(
    m: IntrinsicMesh,
    opts: EigenOptions = EigenOptions(),
    loops=None,
    problem: str = STEKLOV,
) -> SteklovSpectrum:
    """Solve S u = sigma M_b u on the selected loops (all loops by
    default) for the opts.n_eigs smallest pairs."""
    ctx = dtn_schur(m, loops)
    nb = ctx.n_boundary
    k = min(opts.n_eigs, nb)
    if nb <= opts.dense_fallback_threshold or k >= nb - 1:
        vals, vecs = sla.eigh(ctx.schur, ctx.boundary_mass, subset_by_index=[0, k - 1])
        solver = "dense"
    else:
        vals, vecs = _iterative_pairs(ctx.schur, sp.csc_matrix(ctx.boundary_mass), k, opts)
        solver = "iterative"
        norms = np.sqrt(np.einsum("ij,ij->j", vecs, ctx.boundary_mass @ vecs))
        vecs = vecs / norms

    residuals = np.linalg.norm(
        ctx.schur @ vecs - (ctx.boundary_mass @ vecs) * vals, axis=0
    ) / np.linalg.norm(vecs, axis=0)
    worst = float(residuals.max())
    if worst > opts.tol_res:
        raise ConvergenceFailure(
            f"eigen residual {worst:.3e} exceeds tol_res {opts.tol_res:.0e}"
        )

    spectrum = SteklovSpectrum(
        sigmas=np.asarray(vals, dtype=float),
        boundary_vectors=vecs,
        extensions=ctx.extend(vecs),
        residuals=residuals,
        mesh_id=m.content_id(),
        problem=problem,
        solver=solver,
        n_boundary_unknowns=nb,
        context=ctx,
    )
    u0 = vecs[:, 0]
    if np.ptp(u0) > 1e-5 * max(1.0, np.abs(u0).max()):
        raise SolverError("zero mode is not constant on the boundary; mesh may be disconnected")
    _ = spectrum.sigma1  # zero mode must be isolable
    return spectrum


def sloshing_mu1(
    cylinder: IntrinsicMesh, bc: BoundaryCondition, opts: EigenOptions = EigenOptions()
) -> float:
    """First nonzero eigenvalue of the mixed problem: Steklov on exactly
    one loop, Neumann (natural) on the rest."""
    labels = set(cylinder.loop_labels())
    if set(bc.conditions) != labels:
        raise InvalidParams(
            f"boundary condition covers {sorted(bc.conditions)}, mesh has {sorted(labels)}"
        )
    if len(bc.steklov_labels) != 1:
        raise InvalidParams("sloshing needs exactly one Steklov loop")
    spectrum = steklov_spectrum(cylinder, opts, loops=bc.steklov_labels, problem=SLOSHING)
    return spectrum.sigma1


def sloshing_oracle(length: float = 1.0) -> float:
    """Separation-of-variables value for the unit-circumference flat
    cylinder of the given length: mu_1 = 2*pi*tanh(2*pi*length)."""
    return float(2.0 * np.pi * np.tanh(2.0 * np.pi * length))


def neumann_lambda1(m: IntrinsicMesh, opts: EigenOptions = EigenOptions()) -> float:
    """Second-smallest eigenvalue of K f = lambda M f with the lumped 2D
    mass (free boundary: natural condition everywhere)."""
    K = assemble_stiffness(m)
    diag = assemble_lumped_mass(m)
    if np.any(diag <= 0):
        raise SolverError("lumped mass has nonpositive entries")
    n = m.n_vertices
    if n <= 1500:
        scale = 1.0 / np.sqrt(diag)
        sym = (K.toarray() * scale[None, :]) * scale[:, None]
        vals = sla.eigh(0.5 * (sym + sym.T), eigvals_only=True, subset_by_index=[0, 1])
    else:
        vals = spla.eigsh(
            K,
            k=2,
            M=sp.diags(diag).tocsc(),
            sigma=-1e-2,
            which="LM",
            v0=np.full(n, 1.0 / np.sqrt(n)),
            maxiter=opts.max_iterations,
            return_eigenvectors=False,
        )
        vals = np.sort(vals)
    lam0, lam1 = float(vals[0]), float(vals[1])
    if abs(lam0) > ZERO_MODE_REL * max(1.0, lam1):
        raise SolverError(f"Neumann zero mode came out as {lam0:.3e}")
    return lam1
