"""Cone factorizations of slack matrices: verification, error norms, generators."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .cones import xi
from .errors import DegenerateSpectrumError, NumericalError, StructuralError, ValidationError
from .model import ConeSpec, as_matrix
from .slack import SlackMatrix

MEMBER_TOL = 1e-9
POWER_MAX_ITERS = 100_000


def _S(S) -> np.ndarray:
    return S.S if isinstance(S, SlackMatrix) else as_matrix(S, "S")


def _factor_matrix(X, m, name):
    X = np.array(X, dtype=float)
    if X.ndim == 1 and (X.size == 0 or m == 1):
        X = X.reshape(m, -1) if m else X.reshape(0, 0)
    X = as_matrix(X, name)
    if X.shape[0] != m:
        raise StructuralError(f"{name} has {X.shape[0]} rows but the cone has dim {m}")
    return X


@dataclass(frozen=True)
class FactorPair:
    """``A`` is m x f (columns in K*), ``B`` is m x v (columns in K)."""

    A: np.ndarray
    B: np.ndarray
    cone: ConeSpec

    def __post_init__(self):
        m = self.cone.total_dim
        object.__setattr__(self, "A", _factor_matrix(self.A, m, "A"))
        object.__setattr__(self, "B", _factor_matrix(self.B, m, "B"))

    @property
    def m(self) -> int:
        return self.cone.total_dim

    def membership_violations(self, tol: float = MEMBER_TOL) -> list:
        out = []
        Kd = self.cone.dual()
        for j in range(self.A.shape[1]):
            if not Kd.contains(self.A[:, j], tol):
                out.append(f"column {j + 1} of A not in K*")
        for j in range(self.B.shape[1]):
            if not self.cone.contains(self.B[:, j], tol):
                out.append(f"column {j + 1} of B not in K")
        return out

    def validate(self, tol: float = MEMBER_TOL) -> "FactorPair":
        bad = self.membership_violations(tol)
        if bad:
            raise ValidationError("factor columns outside the cone: " + "; ".join(bad), bad)
        return self

    def product(self) -> np.ndarray:
        return self.A.T @ self.B

    @classmethod
    def zero(cls, f: int, v: int) -> "FactorPair":
        return cls(np.zeros((0, f)), np.zeros((0, v)), ConeSpec(()))

    def to_dict(self) -> dict:
        from .slack import matrix_to_dict
        return {"cone": self.cone.to_dict(), "A": matrix_to_dict(self.A),
                "B": matrix_to_dict(self.B)}

    @classmethod
    def from_dict(cls, d) -> "FactorPair":
        from .slack import matrix_from_dict
        try:
            cone = ConeSpec.from_dict(d["cone"])
            A, B = matrix_from_dict(d["A"]), matrix_from_dict(d["B"])
        except (KeyError, TypeError):
            raise StructuralError("factor document needs 'cone', 'A', 'B'") from None
        if A.shape[0] != cone.total_dim or B.shape[0] != cone.total_dim:
            raise StructuralError(
                f"A is {A.shape}, B is {B.shape}; both need {cone.total_dim} rows")
        return cls(A, B, cone)


def _check_dims(S: np.ndarray, F: FactorPair):
    f, v = S.shape
    if F.A.shape != (F.m, f) or F.B.shape != (F.m, v):
        raise StructuralError(
            f"S is {f}x{v} but A is {F.A.shape} and B is {F.B.shape} (need m x {f}, m x {v})")


def verify_factorization(S, F: FactorPair, tol: float = 1e-9) -> bool:
    S = _S(S)
    _check_dims(S, F)
    if F.membership_violations(tol):
        return False
    return bool(np.max(np.abs(S - F.product()), initial=0.0) <= tol)


@dataclass(frozen=True)
class ErrorReport:
    Delta: np.ndarray
    norm_1_2: float
    norm_2_inf: float
    xi_cols_max: float
    xi_rows_max: float

    def to_dict(self) -> dict:
        return {"norm_1_2": self.norm_1_2, "norm_2_inf": self.norm_2_inf,
                "xi_cols_max": self.xi_cols_max, "xi_rows_max": self.xi_rows_max,
                "frobenius": float(np.linalg.norm(self.Delta))}


def factor_error(S, F: FactorPair) -> ErrorReport:
    """Error ``Delta = S - A^T B`` with its max column/row norms and xi maxima."""
    S = _S(S)
    _check_dims(S, F)
    D = S - F.product()
    D.setflags(write=False)
    cols = [D[:, i] for i in range(D.shape[1])]
    rows = [D[i, :] for i in range(D.shape[0])]
    return ErrorReport(
        Delta=D,
        norm_1_2=max((float(np.linalg.norm(c)) for c in cols), default=0.0),
        norm_2_inf=max((float(np.linalg.norm(r)) for r in rows), default=0.0),
        xi_cols_max=max((float(xi(c)) for c in cols), default=0.0) if D.shape[0] >= 2 else
        max((max(0.0, -float(c[0])) for c in cols), default=0.0),
        xi_rows_max=max((float(xi(r)) for r in rows), default=0.0) if D.shape[1] >= 2 else
        max((max(0.0, -float(r[0])) for r in rows), default=0.0),
    )


def _leading_pair(M, start, what):
    x, ev, it, ok = kernels.power_iteration(np.ascontiguousarray(M), start, POWER_MAX_ITERS, 1e-15)
    if not ok:
        raise DegenerateSpectrumError(
            f"power iteration for the {what} singular pair did not converge in "
            f"{POWER_MAX_ITERS} iterations; the top singular values are (nearly) equal "
            "and deflation is not supported")
    return x, ev


def rank_one_factor(S, gap_tol: float = 1e-12) -> FactorPair:
    """Rank-one nonnegative factors from the leading singular triple of ``S``.

    Power iteration on ``S^T S`` from ``1/sqrt(v)``; the second singular
    value is estimated by a deflated run to reject repeated spectra. The
    output is ``A = sqrt(sigma) u^T``, ``B = sqrt(sigma) v^T`` so that
    ``||A|| = ||B||``.
    """
    S = _S(S)
    if np.any(S < 0) or not np.any(S):
        raise ValidationError("rank_one_factor needs a nonnegative, nonzero matrix")
    f, v = S.shape
    M = S.T @ S
    vec, lam1 = _leading_pair(M, np.full(v, 1.0 / np.sqrt(v)), "leading")
    sigma = float(np.sqrt(max(lam1, 0.0)))
    # trace of the deflated matrix is sum_{k>=2} sigma_k^2 >= lam2
    rest = float(np.trace(M)) - lam1
    if v > 1 and rest > 0.5 * lam1:
        # deflated run from a fixed generic start
        start = np.cos(np.arange(1, v + 1) * 1.2345) + 0.1
        start -= (start @ vec) * vec
        Md = M - lam1 * np.outer(vec, vec)
        try:
            _, lam2 = _leading_pair(Md, start, "second")
        except DegenerateSpectrumError:
            lam2 = lam1
        sigma2 = float(np.sqrt(max(lam2, 0.0)))
        if sigma - sigma2 <= gap_tol * sigma:
            raise DegenerateSpectrumError(
                f"leading singular value {sigma:.6g} is repeated (second {sigma2:.6g}); "
                "the rank-one factor is not unique and deflation is unsupported")
    u = S @ vec / sigma
    if vec.sum() < 0:
        vec, u = -vec, -u
    if np.min(vec) < -1e-12 or np.min(u) < -1e-12:
        raise NumericalError("leading singular vectors have mixed signs")
    u = np.maximum(u, 0.0)
    vec = np.maximum(vec, 0.0)
    r = np.sqrt(sigma)
    return FactorPair((r * u)[None, :], (r * vec)[None, :], ConeSpec.orthant(1))


@dataclass(frozen=True)
class NMFOptions:
    max_iters: int = 5000
    seed: int = 0
    tol: float = 1e-10
    # stop early once the Frobenius error drops to this value
    target_error: float = 0.0
    debug: bool = False


def nmf_init(f: int, v: int, m: int, seed: int):
    rng = np.random.default_rng(seed)
    W = 0.5 + 1e-2 * rng.uniform(-1.0, 1.0, size=(f, m))
    H = 0.5 + 1e-2 * rng.uniform(-1.0, 1.0, size=(m, v))
    return W, H


def nmf(S, m: int, opts: Optional[NMFOptions] = None, return_trace: bool = False):
    """Rank-m nonnegative factorization by Lee-Seung multiplicative updates.

    Deterministic for a given seed. With ``opts.debug`` the Frobenius
    objective is checked to be nonincreasing at every step.
    """
    o = opts or NMFOptions()
    S = _S(S)
    if m < 1:
        raise StructuralError("rank m must be >= 1")
    if np.any(S < 0):
        raise ValidationError("nmf needs a nonnegative matrix")
    f, v = S.shape
    W, H = nmf_init(f, v, m, o.seed)
    W, H, _, _, trace, monotone = kernels.nmf_multiplicative(
        np.ascontiguousarray(S), W, H, o.max_iters, o.tol, o.target_error, o.debug,
        return_trace)
    if o.debug and not monotone:
        raise NumericalError("NMF objective increased during the multiplicative updates")
    F = FactorPair(W.T.copy(), H.copy(), ConeSpec.orthant(m))
    return (F, trace) if return_trace else F
