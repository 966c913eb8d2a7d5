"""Nested pairs ``P ⊆ Q`` and the sets sandwiched between them.

With ``S_{P,Q} = A^T B`` over ``K``::

    C_A = {x : exists y in K,  1 - H_Q^T x - A^T y = 0}
    C_B = {V_P z : 1^T z = 1,  B z in K}          (z sign-free)

and, for an exact factorization, ``P ⊆ Out_P(B) ⊆ C_B ⊆ C_A ⊆ Inn_Q(A) ⊆ Q``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .approx import InnerBody, OuterBody, _check_opt, _stack, bounds_from_slack, boundary_point, ray_directions
from .errors import IndeterminateError, StructuralError
from .factor import FactorPair, verify_factorization
from .model import ConeSpec, Orthant, Polytope, Zero, as_matrix
from .slack import SlackMatrix, generalized_slack
from .solver import SolverOptions, Status, Workspace, check_dual_map


@dataclass(frozen=True)
class NestedPair:
    P: Polytope
    Q_H: np.ndarray
    S: SlackMatrix = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "Q_H", as_matrix(self.Q_H, "Q_H"))
        object.__setattr__(self, "S", generalized_slack(self.P, self.Q_H))

    @property
    def n(self) -> int:
        return self.P.dim

    def q_level(self, x) -> float:
        return float(np.max(self.Q_H.T @ x)) - 1.0

    def p_level(self, x) -> float:
        return float(np.max(self.P.H.T @ x)) - 1.0

    def to_dict(self) -> dict:
        from .slack import matrix_to_dict
        return {"P": self.P.to_dict(), "Q_H": matrix_to_dict(self.Q_H.T)}

    @classmethod
    def from_dict(cls, d) -> "NestedPair":
        from .slack import matrix_from_dict
        try:
            P = Polytope.from_dict(d["P"])
            QH = matrix_from_dict(d["Q_H"])
        except (KeyError, TypeError):
            raise StructuralError("nested-pair document needs 'P' and 'Q_H'") from None
        # stored one facet per row, like the polytope format
        return cls(P, QH.T)


RECESSION_TOL = 1e-7


def _gauge_value(sol, what) -> float:
    if sol.status is Status.INFEASIBLE:
        return np.inf
    return max(0.0, _check_opt(sol, what).objective)


class CAOracle:
    """``min t  s.t.  y in K,  -t 1 <= 1 - H_Q^T x - A^T y <= t 1``."""

    def __init__(self, pair: NestedPair, A, K: ConeSpec, opts=None):
        A = check_dual_map(A, K, name="A") if np.size(A) else np.zeros((0, pair.Q_H.shape[1]))
        m, f = A.shape
        if f != pair.Q_H.shape[1]:
            raise StructuralError(f"A has {f} columns, Q has {pair.Q_H.shape[1]} facets")
        self.pair, self.A, self.K, self.m, self.f = pair, A, K, m, f
        # u = (y, t)
        Gk = np.zeros((m, m + 1))
        Gk[:, :m] = -np.eye(m)
        Gp = np.hstack([-A.T, -np.ones((f, 1))])
        Gm = np.hstack([A.T, -np.ones((f, 1))])
        G, cone = _stack([(Gk, K if m else ConeSpec(())),
                          (np.vstack([Gp, Gm]), ConeSpec((Orthant(2 * f),)))])
        self.ws = Workspace(G, cone, opts or SolverOptions())
        self.c = np.zeros(m + 1)
        self.c[-1] = 1.0
        self._gws = None

    def gauge(self, x) -> float:
        """``min lam >= 0  s.t.  lam 1 - H_Q^T x - A^T y = 0,  y in K``; ``inf`` off the cone."""
        if self._gws is None:
            m, f = self.m, self.f
            Ez = np.hstack([self.A.T, -np.ones((f, 1))])
            Gk = np.hstack([-np.eye(m), np.zeros((m, 1))])
            Gl = np.zeros((1, m + 1))
            Gl[0, m] = -1.0
            G, cone = _stack([(Ez, ConeSpec((Zero(f),))), (Gk, self.K if m else ConeSpec(())),
                              (Gl, ConeSpec((Orthant(1),)))])
            self._gws = Workspace(G, cone, self.ws.opts)
        h = np.zeros(self.f + self.m + 1)
        h[:self.f] = -(self.pair.Q_H.T @ np.asarray(x, dtype=float))
        return _gauge_value(self._gws.solve(h, self.c), "C_A gauge")

    def level(self, x) -> float:
        r = 1.0 - self.pair.Q_H.T @ np.asarray(x, dtype=float)
        h = np.concatenate([np.zeros(self.m), -r, r])
        return _check_opt(self.ws.solve(h, self.c), "C_A membership").objective

    def contains(self, x, tol: float = 1e-7) -> bool:
        return self.level(x) <= tol


class CBOracle:
    """``min t  s.t.  V z = x,  1^T z = 1,  B z + t e in K,  t >= -1`` with free ``z``."""

    def __init__(self, pair: NestedPair, B, K: ConeSpec, opts=None):
        V = pair.P.V
        n, v = V.shape
        B = check_dual_map(B, K, name="B") if np.size(B) else np.zeros((0, v))
        m = B.shape[0]
        if B.shape[1] != v:
            raise StructuralError(f"B has {B.shape[1]} columns, P has {v} vertices")
        self.V, self.B, self.K, self.n, self.v, self.m = V, B, K, n, v, m
        E = np.zeros((n + 1, v + 1))
        E[:n, :v] = V
        E[n, :v] = 1.0
        Gk = np.zeros((m, v + 1))
        Gk[:, :v] = -B
        Gk[:, v] = -(K.interior_point() if m else np.zeros(0))
        Gt = np.zeros((1, v + 1))
        Gt[0, v] = -1.0
        G, cone = _stack([(E, ConeSpec((Zero(n + 1),))), (Gk, K if m else ConeSpec(())),
                          (Gt, ConeSpec((Orthant(1),)))])
        self.ws = Workspace(G, cone, opts or SolverOptions())
        self.c = np.zeros(v + 1)
        self.c[-1] = 1.0
        self._gws = None
        self.recession_margin = self._recession_margin()
        # C_B is all of R^n when B maps a kernel direction of [V; 1^T] into int K
        self.whole_space = self.recession_margin > RECESSION_TOL

    def _recession_margin(self) -> float:
        """``max t  s.t.  B N s - t e in K,  |s| <= 1`` over the kernel ``N`` of ``[V; 1^T]``,
        with ``B N`` rescaled to unit max entry.

        Witnesses for C_B membership can be arbitrarily large along such a
        direction, which no first-order method tracks; this test settles the
        case once instead.
        """
        if self.m == 0:
            return -np.inf
        M = np.vstack([self.V, np.ones((1, self.v))])
        _, sv, Vt = np.linalg.svd(M)
        rank = int(np.sum(sv > 1e-12 * sv[0]))
        N = Vt[rank:].T
        if N.shape[1] == 0:
            return -np.inf
        k = N.shape[1]
        BN = self.B @ N
        scale = np.abs(BN).max()
        if scale <= 1e-12 * max(1.0, np.abs(self.B).max()):
            return 0.0
        # only the sign of the margin matters; unit scale keeps ADMM well conditioned
        BN = BN / scale
        e = self.K.interior_point()
        Gk = np.hstack([-BN, e[:, None]])
        Gb = np.vstack([np.hstack([np.eye(k), np.zeros((k, 1))]),
                        np.hstack([-np.eye(k), np.zeros((k, 1))])])
        G, cone = _stack([(Gk, self.K), (Gb, ConeSpec((Orthant(2 * k),)))])
        c = np.zeros(k + 1)
        c[-1] = -1.0
        h = np.concatenate([np.zeros(self.m), np.ones(2 * k)])
        sol = _check_opt(Workspace(G, cone, self.ws.opts).solve(h, c), "C_B recession test")
        return -sol.objective

    def gauge(self, x) -> float:
        """``min 1^T z  s.t.  V z = x,  B z in K,  1^T z >= 0``; ``inf`` off the cone."""
        if self.whole_space:
            return 0.0
        if self._gws is None:
            G, cone = _stack([(self.V, ConeSpec((Zero(self.n),))),
                              (-self.B, self.K if self.m else ConeSpec(())),
                              (-np.ones((1, self.v)), ConeSpec((Orthant(1),)))])
            self._gws = Workspace(G, cone, self.ws.opts)
        h = np.zeros(self.n + self.m + 1)
        h[:self.n] = np.asarray(x, dtype=float)
        return _gauge_value(self._gws.solve(h, np.ones(self.v)), "C_B gauge")

    def level(self, x) -> float:
        if self.whole_space:
            return -1.0
        h = np.zeros(self.n + 1 + self.m + 1)
        h[:self.n] = np.asarray(x, dtype=float)
        h[self.n] = 1.0
        h[-1] = 1.0
        return _check_opt(self.ws.solve(h, self.c), "C_B membership").objective

    def contains(self, x, tol: float = 1e-7) -> bool:
        return self.level(x) <= tol


def ca_contains(pair: NestedPair, A, K: ConeSpec, x, tol: float = 1e-7) -> bool:
    return CAOracle(pair, A, K).contains(x, tol)


def cb_contains(pair: NestedPair, B, K: ConeSpec, x, tol: float = 1e-7) -> bool:
    return CBOracle(pair, B, K).contains(x, tol)


LINKS = ("P<=Out", "Out<=C_B", "C_B<=C_A", "C_A<=Inn_Q", "Inn_Q<=Q")
BODIES = ("P", "Out", "C_B", "C_A", "Inn_Q", "Q")


@dataclass
class LinkResult:
    name: str
    verified: bool
    violations: list
    strict_witness: Optional[np.ndarray]
    checked: bool = True

    @property
    def equal_on_sample(self) -> bool:
        return self.checked and not self.violations and self.strict_witness is None


@dataclass
class ChainReport:
    links: list
    exact: bool
    points: np.ndarray = field(repr=False)
    levels: dict = field(repr=False)

    @property
    def passed(self) -> bool:
        return all(l.verified for l in self.links if l.checked)

    @property
    def undecided(self) -> int:
        return int(sum(np.isnan(v).sum() for v in self.levels.values()))

    def link(self, name) -> LinkResult:
        return next(l for l in self.links if l.name == name)

    def to_dict(self) -> dict:
        return {"exact": self.exact, "passed": self.passed, "points": int(self.points.shape[1]),
                "undecided": self.undecided,
                "links": [{"name": l.name, "checked": l.checked, "verified": l.verified,
                           "violations": len(l.violations),
                           "strict_witness": None if l.strict_witness is None
                           else [float(a) for a in l.strict_witness]} for l in self.links]}


def grid_points(count: int = 41, half_width: float = 1.2) -> np.ndarray:
    t = np.linspace(-half_width, half_width, count)
    X, Y = np.meshgrid(t, t, indexing="ij")
    return np.vstack([X.ravel(), Y.ravel()])


def chain_levels(pair: NestedPair, F: FactorPair, points: np.ndarray, opts=None) -> dict:
    """Membership level (``<= 0`` inside) of every point in each of the six sets.

    Points the solver cannot decide get ``nan`` and count as neither in nor out.
    """
    K = F.cone
    A = F.A if F.m else None
    B = F.B if F.m else None
    out = OuterBody(pair.P, B, K if F.m else None, opts)
    inn = InnerBody(pair.Q_H, A, K if F.m else None, opts)
    ca = CAOracle(pair, F.A, K, opts)
    cb = CBOracle(pair, F.B, K, opts)
    def safe(fn):
        def run(x):
            try:
                return fn(x)
            except IndeterminateError:
                return np.nan
        return run

    fns = {"P": pair.p_level, "Out": out.level, "C_B": cb.level, "C_A": ca.level,
           "Inn_Q": inn.level, "Q": pair.q_level}
    fns = {k: safe(f) for k, f in fns.items()}
    return {k: np.array([fns[k](points[:, j]) for j in range(points.shape[1])]) for k in BODIES}


def containment_chain(pair: NestedPair, F: FactorPair, points: Optional[np.ndarray] = None,
                      tol: float = 1e-6, margin: float = 1e-4, exact_tol: float = 1e-9,
                      opts: Optional[SolverOptions] = None) -> ChainReport:
    """Sampled check of each inclusion in the chain.

    A violation of ``X ⊆ Y`` is a point with level_X <= tol and level_Y > margin.
    A strictness witness is a point with level_Y <= tol and level_X > margin.
    Without an exact factorization the ``C_B ⊆ C_A`` link is not checked.
    """
    if points is None:
        if pair.n != 2:
            raise StructuralError("default grid sampling needs n = 2; pass points for other n")
        points = grid_points()
    points = np.asarray(points, dtype=float)
    exact = verify_factorization(pair.S, F, exact_tol)
    lv = chain_levels(pair, F, points, opts)
    links = []
    for k, name in enumerate(LINKS):
        X, Y = lv[BODIES[k]], lv[BODIES[k + 1]]
        checked = exact or name != "C_B<=C_A"
        bad = np.flatnonzero((X <= tol) & (Y > margin))
        wit = np.flatnonzero((Y <= tol) & (X > margin))
        links.append(LinkResult(name, bool(checked and bad.size == 0),
                                [points[:, j].copy() for j in bad],
                                points[:, wit[0]].copy() if wit.size else None, checked))
    return ChainReport(links, exact, points, lv)


def set_agreement(levels_x, levels_y, tol: float = 1e-6, margin: float = 1e-4) -> int:
    """Number of sample points on which two membership level arrays disagree."""
    a, b = np.asarray(levels_x), np.asarray(levels_y)
    return int(np.sum(((a <= tol) & (b > margin)) | ((b <= tol) & (a > margin))))


@dataclass
class NestedBoundsCheck:
    bounds: object
    inner_scaled_ok: bool
    outer_scaled_ok: bool
    failures: list


def nested_quality_bounds(pair: NestedPair, F: FactorPair, num_dirs: int = 64,
                          opts: Optional[SolverOptions] = None, check: bool = True):
    """Bounds from ``Delta = S_{P,Q} - A^T B`` plus sampled checks of the scaled inclusions:
    ``P/(1+eps) ⊆ Inn_Q(A)`` and ``Out_P(B)/(1+eps_out) ⊆ Q``."""
    rep = bounds_from_slack(pair.S.S, F, opts)
    if not check:
        return NestedBoundsCheck(rep, True, True, [])
    K = F.cone if F.m else None
    inn = InnerBody(pair.Q_H, F.A if F.m else None, K, opts)
    out = OuterBody(pair.P, F.B if F.m else None, K, opts)
    fails = []
    ok_in = True
    for name, eps in rep.inner_tiers().items():
        for j in range(pair.P.n_vertices):
            p = pair.P.V[:, j] / (1.0 + eps + 1e-7)
            if not inn.contains(p, 1e-7):
                ok_in = False
                fails.append(f"vertex {j + 1} / (1+eps_{name}) outside Inn_Q(A)")
    ok_out = True
    dirs = ray_directions(pair.n, num_dirs)
    bpts = [boundary_point(out, dirs[:, k]) for k in range(num_dirs)]
    for name, eps in rep.outer_tiers().items():
        for x in bpts:
            if pair.q_level(x / (1.0 + eps + 1e-7)) > 1e-6:
                ok_out = False
                fails.append(f"Out boundary point / (1+eps_{name}) outside Q")
    return NestedBoundsCheck(rep, ok_in, ok_out, fails)
