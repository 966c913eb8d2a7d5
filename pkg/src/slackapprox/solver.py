"""A small ADMM solver for linear objectives over affine slices of cones.

Problems have the form::

    minimize    c^T u
    subject to  h - G u  in  K        (K an orthant/SOC product)
                E u = e               (optional)

Equalities become a zero-cone block. ``G^T G`` is eigendecomposed once per
constraint matrix and reused across right-hand sides, which is what every
body oracle in this package does: one workspace, thousands of queries.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import NumericalError, SolverError, StructuralError, ValidationError
from .model import ConeSpec, SecondOrder, Zero, as_matrix


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    MAX_ITERS = "MaxIters"


_STATUS = {kernels.OPTIMAL: Status.OPTIMAL,
           kernels.INFEASIBLE: Status.INFEASIBLE,
           kernels.MAX_ITERS: Status.MAX_ITERS}


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iters: int = 200_000
    alpha: float = 1.6
    rho: float = 1.0
    sigma: float = 1e-6
    adapt_every: int = 25
    # iterations a Farkas certificate must persist before declaring infeasibility
    stall_iters: int = 1000

    def __post_init__(self):
        if not 1.0 <= self.alpha < 2.0:
            raise StructuralError("over-relaxation alpha must lie in [1, 2)")
        if self.tol <= 0 or self.rho <= 0 or self.sigma <= 0 or self.max_iters < 1:
            raise StructuralError("tol, rho, sigma must be positive and max_iters >= 1")


@dataclass(frozen=True)
class ConicProblem:
    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    cone: ConeSpec
    E: Optional[np.ndarray] = None
    e: Optional[np.ndarray] = None

    def __post_init__(self):
        G = as_matrix(self.G, "G")
        c = as_matrix(self.c, "c", ndim=1)
        h = as_matrix(self.h, "h", ndim=1)
        k, d = G.shape
        if c.shape != (d,) or h.shape != (k,):
            raise StructuralError(f"G is {G.shape}, c has {c.shape}, h has {h.shape}")
        if self.cone.total_dim != k:
            raise StructuralError(f"cone dim {self.cone.total_dim} != {k} constraint rows")
        if (self.E is None) != (self.e is None):
            raise StructuralError("E and e must be given together")
        if self.E is not None:
            E = as_matrix(self.E, "E")
            e = as_matrix(self.e, "e", ndim=1)
            if E.shape[1] != d or e.shape != (E.shape[0],):
                raise StructuralError(f"E is {E.shape} and e has {e.shape}; need (*, {d})")
            object.__setattr__(self, "E", E)
            object.__setattr__(self, "e", e)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "h", h)

    def stacked(self):
        """Constraint data with equalities folded in as a leading zero block."""
        if self.E is None or self.E.shape[0] == 0:
            return self.G, self.h, self.cone
        cone = ConeSpec((Zero(self.E.shape[0]),)) + self.cone
        return np.vstack([self.E, self.G]), np.concatenate([self.e, self.h]), cone


@dataclass
class ConicSolution:
    status: Status
    u: np.ndarray
    objective: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    dual_objective: float = float("nan")
    s: np.ndarray = field(repr=False, default=None)
    y: np.ndarray = field(repr=False, default=None)

    def require_optimal(self, what="conic solve"):
        if self.status is not Status.OPTIMAL:
            raise SolverError(
                f"{what}: solver stopped with status {self.status.value} after "
                f"{self.iterations} iterations (primal res {self.primal_residual:.2e}, "
                f"dual res {self.dual_residual:.2e})",
                status=self.status,
                partial={"primal": self.objective, "dual": self.dual_objective})
        return self


class Workspace:
    """Cached factorization of a fixed constraint matrix."""

    def __init__(self, G, cone: ConeSpec, opts: SolverOptions | None = None):
        self.G = np.ascontiguousarray(G, dtype=np.float64)
        self.cone = cone
        self.opts = opts or SolverOptions()
        if cone.total_dim != self.G.shape[0]:
            raise StructuralError(f"cone dim {cone.total_dim} != {self.G.shape[0]} rows")
        self.kinds, self.dims = cone.arrays()
        lam, Q = np.linalg.eigh(self.G.T @ self.G)
        self.lam = np.ascontiguousarray(np.maximum(lam, 0.0))
        self.Q = np.ascontiguousarray(Q)

    def solve(self, h, c, opts: SolverOptions | None = None) -> ConicSolution:
        o = opts or self.opts
        h = np.ascontiguousarray(h, dtype=np.float64)
        c = np.ascontiguousarray(c, dtype=np.float64)
        u, s, y, code, it, rp, rd, gap, _ = kernels.admm(
            self.G, h, c, self.kinds, self.dims, self.Q, self.lam,
            o.tol, o.max_iters, o.alpha, o.rho, o.sigma, o.adapt_every, o.stall_iters)
        if code == kernels.NUMERICAL:
            raise NumericalError(f"non-finite iterate in ADMM after {it} iterations")
        return ConicSolution(_STATUS[int(code)], u, float(c @ u), float(rp), float(rd),
                             float(gap), int(it), float(-h @ y), s, y)


def solve(prob: ConicProblem, opts: SolverOptions | None = None) -> ConicSolution:
    G, h, cone = prob.stacked()
    return Workspace(G, cone, opts).solve(h, prob.c, opts)


def check_dual_map(A, K: ConeSpec, tol=1e-9, name="A"):
    """Each column of ``A`` must lie in K* (= K for the cones supported)."""
    A = as_matrix(A, name)
    if A.shape[0] != K.total_dim:
        raise StructuralError(f"{name} has {A.shape[0]} rows but cone has dim {K.total_dim}")
    Kd = K.dual()
    for j in range(A.shape[1]):
        if not Kd.contains(A[:, j], tol):
            raise ValidationError(f"column {j + 1} of {name} is not in the cone",
                                  [f"column {j + 1} of {name} outside cone"])
    return A


class MuProgram:
    """Signed shift ``min {t : x + t 1 in O_in^f + A^T(K)}`` for a fixed A.

    O_in^f is written as ``exists tau: ||tau 1 - w|| <= tau`` (one SOC_{f+1}
    block), so the data carry no sqrt(f-1) factor. Variables are
    ``u = (t, y, tau)``. ``mu(x) = max(0, value(x))`` because the feasible
    set in t is an up-closed interval.
    """

    def __init__(self, A, K: ConeSpec, f: int | None = None, opts: SolverOptions | None = None):
        if A is None or np.size(A) == 0:
            if f is None:
                raise StructuralError("f is required when A is empty")
            A = np.zeros((0, f))
            K = ConeSpec(())
        A = as_matrix(A, "A")
        m, f = A.shape
        if K.total_dim != m:
            raise StructuralError(f"A has {m} rows but cone has dim {K.total_dim}")
        self.A, self.K, self.m, self.f = A, K, m, f
        G = np.zeros((m + f + 1, m + 2))
        G[:m, 1:1 + m] = -np.eye(m)
        G[m, m + 1] = -1.0
        G[m + 1:, 0] = 1.0
        G[m + 1:, 1:1 + m] = -A.T
        G[m + 1:, m + 1] = -1.0
        self.c = np.zeros(m + 2)
        self.c[0] = 1.0
        self.ws = Workspace(G, K + ConeSpec((SecondOrder(f + 1),)), opts)

    def solve(self, x, opts=None) -> ConicSolution:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.f,):
            raise StructuralError(f"x has shape {x.shape}, expected ({self.f},)")
        h = np.zeros(self.m + self.f + 1)
        h[self.m + 1:] = -x
        return self.ws.solve(h, self.c, opts)

    def value(self, x, opts=None) -> float:
        return self.solve(x, opts).require_optimal("mu").objective

    def witness(self, sol: ConicSolution) -> np.ndarray:
        """The K-element y of an optimal solution."""
        return sol.u[1:1 + self.m]


def mu(x, A, K: ConeSpec, opts: SolverOptions | None = None) -> float:
    x = np.asarray(x, dtype=np.float64)
    if A is not None and np.size(A):
        check_dual_map(A, K)
    return max(0.0, MuProgram(A, K, f=x.size, opts=opts).value(x))
