"""Membership tests, projections and the xi shift for the cones in use.

``O_in^n = {x : sqrt(n-1) ||x|| <= 1^T x}`` and ``O_out^n = {x : ||x|| <= 1^T x}``
are the inner/outer second-order approximations of the orthant, and dual to
each other. Both are taken to be ``R_+`` when n = 1. ``O_out`` is also the
(n-2)-th Renegar derivative cone of the orthant; no derivative-cone machinery
is implemented.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import StructuralError
from .model import ConeSpec

XI_ZERO_GUARD = 1e-14


def _vec(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise StructuralError(f"expected a nonempty vector, got shape {x.shape}")
    return x


def in_oin(x, tol: float = 0.0) -> bool:
    x = _vec(x)
    n = x.size
    if n == 1:
        return bool(x[0] >= -tol)
    return bool(math.sqrt(n - 1) * np.linalg.norm(x) <= x.sum() + tol)


def in_oout(x, tol: float = 0.0) -> bool:
    x = _vec(x)
    return bool(np.linalg.norm(x) <= x.sum() + tol)


@dataclass(frozen=True)
class ScaledSocParams:
    """``K_a = {x : a ||x|| <= omega^T x}``; its dual is ``K_b`` with a^2 + b^2 = 1."""

    omega: np.ndarray
    a: float

    def __post_init__(self):
        w = np.array(self.omega, dtype=float)
        if not 0.0 < self.a < 1.0:
            raise StructuralError(f"a must lie in (0, 1), got {self.a}")
        if abs(np.linalg.norm(w) - 1.0) > 1e-12:
            raise StructuralError("omega must be a unit vector")
        w.setflags(write=False)
        object.__setattr__(self, "omega", w)

    def dual(self) -> "ScaledSocParams":
        return ScaledSocParams(self.omega, math.sqrt(1.0 - self.a ** 2))


def in_scaled_soc(x, p: ScaledSocParams, tol: float = 0.0) -> bool:
    x = _vec(x)
    if x.shape != p.omega.shape:
        raise StructuralError("dimension mismatch between x and omega")
    return bool(p.a * np.linalg.norm(x) <= p.omega @ x + tol)


def xi(x) -> float:
    """Smallest ``t >= 0`` with ``x + t 1`` in ``O_in``, in closed form."""
    x = _vec(x)
    f = x.size
    if f < 2:
        raise StructuralError("xi needs f >= 2 (O_in^1 is the half-line; use max(0, -x))")
    nx = np.linalg.norm(x)
    if nx < XI_ZERO_GUARD:
        return 0.0
    s = x.sum() / (math.sqrt(f) * nx)
    s = min(1.0, max(-1.0, s))
    alpha = (math.sqrt((f - 1) * (1.0 - s * s)) - s) / math.sqrt(f)
    return max(0.0, nx * alpha)


def project_cone(x, K: ConeSpec) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (K.total_dim,):
        raise StructuralError(f"vector length {x.shape} does not match cone dim {K.total_dim}")
    kinds, dims = K.arrays()
    return kernels.project_blocks(np.ascontiguousarray(x), kinds, dims)
