"""Inner and outer approximations built from one factor of a slack factorization.

For ``P = {x : H^T x <= 1}`` with vertex matrix ``V`` and an approximate
factorization ``S ~ A^T B`` over a cone ``K``::

    Inn_P(A) = {x : exists y in K,  1 - H^T x - A^T y in O_in^f}
    Out_P(B) = {V z : z in O_out^v,  1^T z <= 1,  B z in K}

Both contain the origin in their interior, so each is described by its gauge.
All oracles here reduce to small conic programs solved by :mod:`solver`; the
constraint matrix of each program is factored once per body and reused for
every query point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cones import xi
from .errors import IndeterminateError, SolverError, StructuralError
from .factor import FactorPair, factor_error
from .model import ConeSpec, Orthant, Polytope, SecondOrder, Zero, as_matrix, polar
from .slack import matrix_to_dict, slack_matrix
from .solver import ConicSolution, MuProgram, SolverOptions, Status, Workspace, check_dual_map

BISECT_WIDTH = 1e-7


def _check_opt(sol: ConicSolution, what: str) -> ConicSolution:
    if sol.status is Status.MAX_ITERS:
        raise IndeterminateError(
            f"{what}: undecided, solver hit {sol.iterations} iterations "
            f"(primal res {sol.primal_residual:.2e}, dual res {sol.dual_residual:.2e})",
            status=sol.status,
            partial={"primal": sol.objective, "dual": sol.dual_objective})
    return sol.require_optimal(what)


def _stack(blocks):
    """Stack ``(G_rows, cone)`` pairs; zero blocks must come first."""
    G = np.vstack([g for g, _ in blocks])
    cone = ConeSpec(())
    for _, k in blocks:
        cone = cone + k
    return G, cone


def _factor_part(M, K, rows, name):
    if M is None or np.size(M) == 0:
        return np.zeros((0, rows)), ConeSpec(())
    if K is None:
        raise StructuralError(f"a cone is required with a nonzero {name}")
    M = check_dual_map(M, K, name=name)
    if M.shape[1] != rows:
        raise StructuralError(f"{name} has {M.shape[1]} columns, expected {rows}")
    return M, K


class InnerBody:
    """``Inn_P(A)``. ``P`` may be a Polytope or just its facet matrix ``H``.

    A bare ``H`` is how the outer set ``Q`` of a nested pair is passed in,
    since ``Q`` need not be bounded.
    """

    def __init__(self, P, A=None, K: Optional[ConeSpec] = None,
                 opts: Optional[SolverOptions] = None):
        self.P = P if isinstance(P, Polytope) else None
        self.H = P.H if isinstance(P, Polytope) else as_matrix(P, "H")
        n, f = self.H.shape
        self.A, self.K = _factor_part(A, K, f, "A")
        self.n, self.f, self.m = n, f, self.A.shape[0]
        self.opts = opts or SolverOptions()
        self._mu = MuProgram(self.A if self.m else None, self.K, f=f, opts=self.opts)
        self._sup = None

    # level(x) <= 0  iff  x in Inn
    def level(self, x) -> float:
        x = self._point(x)
        sol = _check_opt(self._mu.solve(1.0 - self.H.T @ x), "Inn membership")
        return sol.objective

    def contains(self, x, tol: float = 1e-7) -> bool:
        return self.level(x) <= tol

    def gauge(self, c) -> float:
        """``min {lam >= 0 : c in lam Inn}``."""
        c = self._point(c)
        sol = _check_opt(self._mu.solve(-(self.H.T @ c)), "Inn gauge")
        return max(0.0, sol.objective)

    def _point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise StructuralError(f"point has shape {x.shape}, expected ({self.n},)")
        return x

    def _support_ws(self):
        if self._sup is None:
            n, m, f = self.n, self.m, self.f
            d = n + m + 1
            Gk = np.zeros((m, d))
            Gk[:, n:n + m] = -np.eye(m)
            Gs = np.zeros((f + 1, d))
            Gs[0, d - 1] = -1.0
            Gs[1:, :n] = -self.H.T
            Gs[1:, n:n + m] = -self.A.T
            Gs[1:, d - 1] = -1.0
            G, cone = _stack([(Gk, self.K), (Gs, ConeSpec((SecondOrder(f + 1),)))])
            h = np.zeros(m + f + 1)
            h[m + 1:] = -1.0
            self._sup = (Workspace(G, cone, self.opts), h)
        return self._sup

    def support_point(self, c):
        """``(max <c, x>, argmax)`` over the body."""
        c = self._point(c)
        ws, h = self._support_ws()
        cu = np.zeros(self.n + self.m + 1)
        cu[:self.n] = -c
        sol = _check_opt(ws.solve(h, cu), "Inn support")
        return -sol.objective, sol.u[:self.n].copy()

    def dual_body(self) -> "OuterBody":
        """``Out_{P°}(A)``, whose gauge is the support function of this body."""
        return OuterBody(self.H, self.A if self.m else None, self.K if self.m else None,
                         self.opts)


class OuterBody:
    """``Out_P(B)``. ``P`` may be a Polytope or just its vertex matrix ``V``."""

    def __init__(self, P, B=None, K: Optional[ConeSpec] = None,
                 opts: Optional[SolverOptions] = None):
        self.P = P if isinstance(P, Polytope) else None
        self.V = P.V if isinstance(P, Polytope) else as_matrix(P, "V")
        n, v = self.V.shape
        self.B, self.K = _factor_part(B, K, v, "B")
        self.n, self.v, self.m = n, v, self.B.shape[0]
        self.opts = opts or SolverOptions()
        self._gws = self._eqws = self._sup = None

    def _point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise StructuralError(f"point has shape {x.shape}, expected ({self.n},)")
        return x

    def _gauge_ws(self):
        if self._gws is None:
            n, v, m = self.n, self.v, self.m
            Gs = -np.vstack([np.ones((1, v)), np.eye(v)])
            G, cone = _stack([(self.V, ConeSpec((Zero(n),))),
                              (Gs, ConeSpec((SecondOrder(v + 1),))),
                              (-self.B, self.K)])
            self._gws = Workspace(G, cone, self.opts)
        return self._gws

    def gauge(self, x) -> float:
        """``min 1^T z  s.t.  V z = x, z in O_out, B z in K``."""
        x = self._point(x)
        h = np.zeros(self.n + self.v + 1 + self.m)
        h[:self.n] = x
        sol = _check_opt(self._gauge_ws().solve(h, np.ones(self.v)), "Out gauge")
        return max(0.0, sol.objective)

    def _equality_ws(self):
        # u = (z, t): V z = x, 1^T z = 1, (1^T z + t, z) in SOC, B z + t e in K, t >= -1
        if self._eqws is None:
            n, v, m = self.n, self.v, self.m
            E = np.zeros((n + 1, v + 1))
            E[:n, :v] = self.V
            E[n, :v] = 1.0
            Gs = np.zeros((v + 1, v + 1))
            Gs[0, :v] = -1.0
            Gs[0, v] = -1.0
            Gs[1:, :v] = -np.eye(v)
            Gk = np.zeros((m, v + 1))
            Gk[:, :v] = -self.B
            Gk[:, v] = -self.K.interior_point()
            Gt = np.zeros((1, v + 1))
            Gt[0, v] = -1.0
            G, cone = _stack([(E, ConeSpec((Zero(n + 1),))),
                              (Gs, ConeSpec((SecondOrder(v + 1),))),
                              (Gk, self.K), (Gt, ConeSpec((Orthant(1),)))])
            self._eqws = Workspace(G, cone, self.opts)
        return self._eqws

    def level(self, x, form: str = "inequality") -> float:
        x = self._point(x)
        if form == "inequality":
            return self.gauge(x) - 1.0
        if form != "equality":
            raise StructuralError(f"unknown Out form {form!r}")
        h = np.zeros(self.n + 1 + self.v + 1 + self.m + 1)
        h[:self.n] = x
        h[self.n] = 1.0
        h[-1] = 1.0
        c = np.zeros(self.v + 1)
        c[-1] = 1.0
        return _check_opt(self._equality_ws().solve(h, c), "Out membership").objective

    def contains(self, x, tol: float = 1e-7, form: str = "inequality") -> bool:
        return self.level(x, form) <= tol

    def support_point(self, c):
        c = self._point(c)
        if self._sup is None:
            v = self.v
            Gs = -np.vstack([np.ones((1, v)), np.eye(v)])
            G, cone = _stack([(Gs, ConeSpec((SecondOrder(v + 1),))),
                              (np.ones((1, v)), ConeSpec((Orthant(1),))),
                              (-self.B, self.K)])
            h = np.zeros(v + 2 + self.m)
            h[v + 1] = 1.0
            self._sup = (Workspace(G, cone, self.opts), h)
        ws, h = self._sup
        sol = _check_opt(ws.solve(h, -(self.V.T @ c)), "Out support")
        z = sol.u
        return -sol.objective, self.V @ z

    def dual_body(self) -> InnerBody:
        """``Inn_{P°}(B)``, whose gauge is the support function of this body."""
        return InnerBody(self.V, self.B if self.m else None, self.K if self.m else None,
                         self.opts)


def inner_body(P: Polytope, F: Optional[FactorPair] = None, opts=None) -> InnerBody:
    if F is None or F.m == 0:
        return InnerBody(P, opts=opts)
    return InnerBody(P, F.A, F.cone, opts)


def outer_body(P: Polytope, F: Optional[FactorPair] = None, opts=None) -> OuterBody:
    if F is None or F.m == 0:
        return OuterBody(P, opts=opts)
    return OuterBody(P, F.B, F.cone, opts)


def inn_contains(body: InnerBody, x, tol: float = 1e-7) -> bool:
    return body.contains(x, tol)


def out_contains(body: OuterBody, x, tol: float = 1e-7, form: str = "inequality") -> bool:
    return body.contains(x, tol, form)


@dataclass(frozen=True)
class SupportResult:
    value: float
    point: np.ndarray
    dual_value: float

    @property
    def gap(self) -> float:
        return abs(self.value - self.dual_value)


def support(body, c) -> SupportResult:
    """Support function with the value of the dual program alongside.

    The dual of ``max <c,x>`` over ``Inn_P(A)`` is the gauge of ``Out_{P°}(A)``
    at ``c`` (and symmetrically for outer bodies); it is solved as a separate
    program, so ``gap`` measures agreement of two independent computations.
    """
    c = np.asarray(c, dtype=float)
    if not np.any(c):
        raise StructuralError("support direction must be nonzero")
    val, pt = body.support_point(c)
    try:
        dual = body.dual_body().gauge(c)
    except SolverError as exc:
        raise SolverError(f"dual support program failed: {exc}", exc.status,
                          {"primal": val, **exc.partial}) from None
    return SupportResult(val, pt, dual)


def boundary_point(body, d, method: str = "gauge", tol: float = 1e-7) -> np.ndarray:
    """Point where the ray ``{t d : t >= 0}`` leaves the body."""
    d = np.asarray(d, dtype=float)
    if method == "gauge":
        g = body.gauge(d)
        if g <= 0.0:
            raise StructuralError("body is unbounded along this ray")
        return d / g
    if method == "bisect":
        return bisect_scale(body, d, tol=tol) * d
    raise StructuralError(f"unknown boundary method {method!r}")


def bisect_scale(body, d, width: float = BISECT_WIDTH, tol: float = 1e-7,
                 hi: float = 1.0, max_grow: int = 60) -> float:
    """Largest ``t`` with ``t d`` in the body, by bisection on the membership oracle.

    An undecided oracle call inside the bracket means the point sits within
    solver resolution of the boundary; that point is returned.
    """
    d = np.asarray(d, dtype=float)
    lo = 0.0
    for _ in range(max_grow):
        if not body.contains(hi * d, tol):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise StructuralError("body is unbounded along this ray")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        try:
            inside = body.contains(mid * d, tol)
        except IndeterminateError:
            return mid
        if inside:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ray_directions(n: int, count: int, seed: int = 0) -> np.ndarray:
    """Unit directions as columns: evenly spaced angles in the plane, seeded Gaussian otherwise."""
    if n == 2:
        t = 2.0 * np.pi * (np.arange(count) + 0.5) / count
        return np.vstack([np.cos(t), np.sin(t)])
    g = np.random.default_rng(seed).standard_normal((n, count))
    return g / np.linalg.norm(g, axis=0)


# -- lifts ---------------------------------------------------------------------

@dataclass(frozen=True)
class LiftDescription:
    """``Inn_P(A) = {x : exists y, xi with  g + F (x, y, xi) in K x SOC_{n+m+2}}``.

    The SOC block is ``(1 - xi, R (x, y, xi))`` with ``R^T R = M^T M`` for
    ``M = [H^T | A^T | -1]``; the K block is ``y`` itself.
    """

    cone: ConeSpec
    R: np.ndarray
    F: np.ndarray
    g: np.ndarray
    n: int
    m: int
    K: ConeSpec

    @property
    def lift_dim(self) -> int:
        return self.n + self.m + 2

    @property
    def offsets(self) -> dict:
        n, m = self.n, self.m
        return {"x": [0, n], "y": [n, n + m], "xi": n + m, "soc_start": m}

    def to_dict(self) -> dict:
        return {"cone": self.cone.to_dict(), "R": matrix_to_dict(self.R),
                "F": matrix_to_dict(self.F), "g": [float(a) for a in self.g],
                "offsets": self.offsets}

    def level(self, x, opts: Optional[SolverOptions] = None) -> float:
        """``min t  s.t.  y in K,  ||R (x, y, xi)|| <= 1 - xi + t``."""
        cache = self.__dict__.setdefault("_programs", {})
        if opts not in cache:
            cache[opts] = _lift_program(self, opts)
        return cache[opts](x)

    def contains(self, x, tol: float = 1e-7) -> bool:
        return self.level(x) <= tol


def _lift_program(L: LiftDescription, opts):
    n, m = L.n, L.m
    k = n + m + 1
    # u = (y, xi, t)
    d = m + 2
    Rx, Ry, Rxi = L.R[:, :n], L.R[:, n:n + m], L.R[:, n + m]
    Gk = np.zeros((m, d))
    Gk[:, :m] = -np.eye(m)
    Gt = np.zeros((1, d))
    Gt[0, m + 1] = -1.0
    Gs = np.zeros((k + 1, d))
    Gs[0, m] = 1.0
    Gs[0, m + 1] = -1.0
    Gs[1:, :m] = -Ry
    Gs[1:, m] = -Rxi
    G, cone = _stack([(Gk, L.K), (Gt, ConeSpec((Orthant(1),))),
                      (Gs, ConeSpec((SecondOrder(k + 1),)))])
    ws = Workspace(G, cone, opts or SolverOptions())
    c = np.zeros(d)
    c[-1] = 1.0

    def level(x):
        x = np.asarray(x, dtype=float)
        if x.shape != (n,):
            raise StructuralError(f"point has shape {x.shape}, expected ({n},)")
        h = np.zeros(m + 1 + k + 1)
        h[m] = 1.0
        h[m + 1] = 1.0
        h[m + 2:] = Rx @ x
        return _check_opt(ws.solve(h, c), "lift membership").objective

    return level


def soc_lift(body: InnerBody) -> LiftDescription:
    n, m, f = body.n, body.m, body.f
    M = np.hstack([body.H.T, body.A.T, -np.ones((f, 1))])
    k = n + m + 1
    # QR rather than Cholesky of M^T M: same R up to row signs, no squaring of the condition number
    R = np.linalg.qr(M, mode="r")
    if R.shape[0] < k:
        R = np.vstack([R, np.zeros((k - R.shape[0], k))])
    R = np.ascontiguousarray(R[:k])
    cone = body.K + ConeSpec((SecondOrder(k + 1),))
    F = np.zeros((m + k + 1, k))
    F[:m, n:n + m] = np.eye(m)
    F[m, k - 1] = -1.0
    F[m + 1:, :] = R
    g = np.zeros(m + k + 1)
    g[m] = 1.0
    for a in (R, F, g):
        a.setflags(write=False)
    return LiftDescription(cone, R, F, g, n, m, body.K)


# -- quality bounds ------------------------------------------------------------

_ORDER_SLACK = 1e-7


@dataclass(frozen=True)
class BoundsReport:
    eps_mu: float
    eps_xi_in: float
    eps_norm_in: float
    eps_xi_out: float
    eps_norm_out: float
    mu_columns: tuple = ()
    failures: tuple = ()

    @property
    def inner_ordered(self) -> bool:
        return bool(self.eps_mu <= self.eps_xi_in + _ORDER_SLACK
                    and self.eps_xi_in <= self.eps_norm_in + _ORDER_SLACK)

    @property
    def outer_ordered(self) -> bool:
        return bool(self.eps_xi_out <= self.eps_norm_out + _ORDER_SLACK)

    @property
    def complete(self) -> bool:
        return not self.failures

    def inner_tiers(self) -> dict:
        return {"mu": self.eps_mu, "xi": self.eps_xi_in, "norm": self.eps_norm_in}

    def outer_tiers(self) -> dict:
        return {"xi": self.eps_xi_out, "norm": self.eps_norm_out}

    def to_dict(self) -> dict:
        return {"eps_mu": self.eps_mu, "eps_xi_in": self.eps_xi_in,
                "eps_norm_in": self.eps_norm_in, "eps_xi_out": self.eps_xi_out,
                "eps_norm_out": self.eps_norm_out, "inner_ordered": self.inner_ordered,
                "outer_ordered": self.outer_ordered,
                "mu_columns": list(self.mu_columns),
                "failures": [list(x) for x in self.failures]}


def bounds_from_slack(S: np.ndarray, F: FactorPair, opts: Optional[SolverOptions] = None) -> BoundsReport:
    err = factor_error(S, F)
    f = S.shape[0]
    prog = MuProgram(F.A if F.m else None, F.cone, f=f, opts=opts)
    mus, failures = [], []
    for j in range(S.shape[1]):
        try:
            mus.append(max(0.0, prog.value(S[:, j])))
        except SolverError as exc:
            mus.append(float("nan"))
            failures.append((j + 1, str(exc)))
    good = [u for u in mus if not math.isnan(u)]
    return BoundsReport(max(good, default=float("nan")), err.xi_cols_max, err.norm_1_2,
                        err.xi_rows_max, err.norm_2_inf, tuple(mus), tuple(failures))


def quality_bounds(P: Polytope, F: FactorPair, opts: Optional[SolverOptions] = None) -> BoundsReport:
    """All five approximation radii: ``Inn ⊇ P/(1+eps_in)``, ``Out ⊆ (1+eps_out) P``."""
    return bounds_from_slack(slack_matrix(P).S, F, opts)


# -- polarity ------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityCheck:
    name: str
    max_pairing: float
    min_best_pairing: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_pairing <= 1.0 + self.tol and self.min_best_pairing >= 1.0 - self.tol


@dataclass(frozen=True)
class PolarityReport:
    checks: tuple
    num_dirs: int
    seed: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "num_dirs": self.num_dirs, "seed": self.seed,
                "checks": [{"name": c.name, "passed": c.passed, "max_pairing": c.max_pairing,
                            "min_best_pairing": c.min_best_pairing} for c in self.checks]}


def _pairing_check(name, body, polar_body, dirs, tol) -> IdentityCheck:
    # x_k maximizes <c_k, .> over body; y_k = c_k / gauge_polar(c_k) lies on the polar boundary
    X = np.column_stack([body.support_point(dirs[:, k])[1] for k in range(dirs.shape[1])])
    Y = np.column_stack([boundary_point(polar_body, dirs[:, k]) for k in range(dirs.shape[1])])
    G = X.T @ Y
    return IdentityCheck(name, float(G.max()), float(G.max(axis=1).min()), tol)


def verify_polarity(P: Polytope, F: Optional[FactorPair], num_dirs: int = 64,
                    tol: float = 1e-4, seed: int = 0, inner_A=None, outer_B=None,
                    opts: Optional[SolverOptions] = None) -> PolarityReport:
    """Sampled check of ``Out_{P°}(A) = Inn_P(A)°`` and ``Inn_{P°}(B) = Out_P(B)°``.

    ``inner_A`` / ``outer_B`` replace the factor on the primal side only;
    passing a perturbed matrix there is a negative control.
    """
    Pp = polar(P)
    K = F.cone if F is not None and F.m else None
    A = F.A if K is not None else None
    B = F.B if K is not None else None
    dirs = ray_directions(P.dim, num_dirs, seed)
    inn = InnerBody(P, A if inner_A is None else inner_A, K, opts)
    out_polar = OuterBody(Pp, A, K, opts)
    out = OuterBody(P, B if outer_B is None else outer_B, K, opts)
    inn_polar = InnerBody(Pp, B, K, opts)
    checks = (_pairing_check("Out_polar(A) = Inn(A)^polar", inn, out_polar, dirs, tol),
              _pairing_check("Inn_polar(B) = Out(B)^polar", out, inn_polar, dirs, tol))
    return PolarityReport(checks, num_dirs, seed)


# -- Dikin / Sonnevend ---------------------------------------------------------

@dataclass(frozen=True)
class QuadraticForm:
    """``{x : (x - center)^T Gamma (x - center) <= radius^2}``."""

    Gamma: np.ndarray
    center: np.ndarray
    radius: float = 1.0

    def value(self, x) -> float:
        d = np.asarray(x, dtype=float) - self.center
        return float(d @ self.Gamma @ d)

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.value(x) <= self.radius ** 2 + tol

    def scaled(self, r: float) -> "QuadraticForm":
        return QuadraticForm(self.Gamma, self.center, r)

    def boundary(self, d) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        return self.center + d * (self.radius / math.sqrt(float(d @ self.Gamma @ d)))


def dikin_ellipsoid(P: Polytope, x0=None, radius: float = 1.0) -> QuadraticForm:
    """Barrier Hessian ``sum h h^T / (1 - <h, x0>)^2`` at ``x0`` (default origin)."""
    x0 = np.zeros(P.dim) if x0 is None else np.asarray(x0, dtype=float)
    s = 1.0 - P.H.T @ x0
    if np.any(s <= 0):
        raise StructuralError("Dikin center must be interior")
    Hs = P.H / s
    return QuadraticForm(Hs @ Hs.T, x0, radius)


def dikin_contains(P: Polytope, x, radius: float = 1.0, tol: float = 0.0) -> bool:
    return dikin_ellipsoid(P, radius=radius).contains(x, tol)


def sonnevend_radius(f: int) -> float:
    return math.sqrt(f / (f - 1.0))
