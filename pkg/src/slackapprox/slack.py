"""Slack matrices of a polytope, of nested pairs, and of the COR(n) family."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import StructuralError, ValidationError
from .model import DEFAULT_TOL, Polytope, as_matrix, require_valid

NEG_TOL = 1e-9
TIGHT_TOL = 1e-7
DENSE_WARN_FACETS = 4096
MAX_FACETS = 2 ** 16


@dataclass(frozen=True)
class SlackMatrix:
    S: np.ndarray
    P: Polytope
    Q_H: Optional[np.ndarray] = None

    @property
    def source(self) -> str:
        return "single" if self.Q_H is None else "pair"

    @property
    def shape(self):
        return self.S.shape

    def to_dict(self) -> dict:
        return matrix_to_dict(self.S)


def matrix_to_dict(M) -> dict:
    M = np.asarray(M, dtype=float)
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]),
            "data": [float(x) for x in M.ravel()]}


def matrix_from_dict(d) -> np.ndarray:
    try:
        rows, cols, data = int(d["rows"]), int(d["cols"]), d["data"]
    except (KeyError, TypeError, ValueError):
        raise StructuralError("matrix document needs 'rows', 'cols', 'data'") from None
    if len(data) != rows * cols:
        raise StructuralError(f"matrix data has {len(data)} entries, expected {rows}x{cols}")
    return as_matrix(np.asarray(data, dtype=float).reshape(rows, cols))


def slack_matrix(P: Polytope, tol: float = DEFAULT_TOL) -> SlackMatrix:
    """``S = 1 - H^T V``: facet-by-vertex slacks."""
    require_valid(P, tol)
    S = P.slacks()
    if np.any(S < -NEG_TOL):
        i, j = np.unravel_index(np.argmin(S), S.shape)
        raise ValidationError(f"negative slack {S[i, j]:.3g} at facet {i + 1}, vertex {j + 1}")
    S = np.maximum(S, 0.0)
    S.setflags(write=False)
    return SlackMatrix(S, P)


def generalized_slack(P: Polytope, Q_H) -> SlackMatrix:
    """Slacks of the vertices of ``P`` in the facets ``<h, x> <= 1`` of ``Q``.

    ``Q`` may be unbounded; only its facet normals (columns of ``Q_H``) are used.
    """
    Q_H = as_matrix(Q_H, "Q_H")
    if Q_H.shape[0] != P.dim:
        raise StructuralError(f"Q_H has {Q_H.shape[0]} rows, P lives in R^{P.dim}")
    f = Q_H.shape[1]
    if f > MAX_FACETS:
        raise StructuralError(f"{f} facets exceeds the supported {MAX_FACETS}")
    if f > DENSE_WARN_FACETS:
        warnings.warn(f"dense slack matrix with {f} rows", RuntimeWarning, stacklevel=2)
    S = 1.0 - Q_H.T @ P.V
    bad = np.argwhere(S < -NEG_TOL)
    if bad.size:
        i, j = bad[0]
        raise ValidationError(
            f"P is not contained in Q: vertex {j + 1} violates facet {i + 1} "
            f"(slack {S[i, j]:.3g})",
            [f"facet {a + 1}, vertex {b + 1}" for a, b in bad])
    S = np.maximum(S, 0.0)
    S.setflags(write=False)
    return SlackMatrix(S, P, Q_H)


def _bits(n):
    return [np.array(b, dtype=float) for b in itertools.product((0, 1), repeat=n)]


def cor_instance(n: int):
    """Vertices of COR(n), facets of Q(n), and their generalized slack matrix.

    Vertices are ``vec(b b^T)`` (row-major) for ``b`` in {0,1}^n, facets have
    normals ``vec(2 diag(a) - a a^T)``; rows of S are indexed by ``a`` and
    columns by ``b`` in lexicographic order. No Polytope is built since 0 is
    a vertex of COR(n), not an interior point.
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 5:
        raise StructuralError(f"cor_instance supports 1 <= n <= 5, got {n!r}")
    bs = _bits(int(n))
    V = np.array([np.outer(b, b).ravel() for b in bs])  # 2^n x n^2
    H = np.array([(2.0 * np.diag(a) - np.outer(a, a)).ravel() for a in bs])
    S = 1.0 - H @ V.T
    return V.T.copy(), H.T.copy(), S
