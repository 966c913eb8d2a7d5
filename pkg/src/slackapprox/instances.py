"""Named small instances and a random-polygon generator."""
from __future__ import annotations

import numpy as np

from .factor import FactorPair
from .model import ConeSpec, Polytope
from .slack import generalized_slack


def square() -> Polytope:
    """``[-1,1]^2``, ordered so that the slack matrix is circulant."""
    H = np.array([[-1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, -1.0]]).T
    V = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0]]).T
    return Polytope(H, V)


def square_factors() -> FactorPair:
    """Rank-two nonnegative approximation of the square's slack matrix."""
    A = np.array([[4.0, 4.0, 0.0, 0.0], [0.0, 0.0, 4.0, 4.0]]) / 3.0
    B = np.array([[1.0, 1.0, 1.0, 0.0], [1.0, 0.0, 1.0, 1.0]])
    return FactorPair(A, B, ConeSpec.orthant(2))


def simplex(n: int = 2) -> Polytope:
    """``{x : x_i >= -1, sum x <= 1}``; slack matrix ``(n+1) I``."""
    H = np.hstack([-np.eye(n), np.ones((n, 1))])
    V = np.hstack([-np.ones((n, n)) + (n + 1) * np.eye(n), -np.ones((n, 1))])
    return Polytope(H, V)


def translated_simplex() -> Polytope:
    """The planar simplex shifted by (1/2, 1/2)."""
    H = np.array([[-2.0, 0.0], [0.0, -2.0], [0.5, 0.5]]).T
    V = np.array([[2.5, -0.5], [-0.5, 2.5], [-0.5, -0.5]]).T
    return Polytope(H, V)


def quadrilateral() -> Polytope:
    """Kite with vertices (1,0), (0,2), (-1,0), (0,-1/2)."""
    V = np.array([[1.0, 0.0], [0.0, 2.0], [-1.0, 0.0], [0.0, -0.5]]).T
    H = np.array([[1.0, -2.0], [1.0, 0.5], [-1.0, 0.5], [-1.0, -2.0]]).T
    return Polytope(H, V)


def nested_pair():
    """``P`` (a diamond) inside ``Q`` (a parallelogram), as ``(P, Q_H)``."""
    V = np.array([[0.5, 0.0], [0.0, 1.0], [-0.5, 0.0], [0.0, -1.0]]).T
    # P's own facets: |2x| + |y| <= 1
    H = np.array([[2.0, 1.0], [-2.0, 1.0], [-2.0, -1.0], [2.0, -1.0]]).T
    Q_H = np.array([[1.0, 0.0], [0.5, 0.5], [-1.0, 0.0], [-0.5, -0.5]]).T
    return Polytope(H, V), Q_H


def nested_factors(variant: int = 1) -> FactorPair:
    At = np.array([[0, 2, 1], [0, 1, 1.5], [2, 0, 1], [2, 1, 0.5]])
    B = np.array([[0.5, 0.5, 0, 0], [0, 0.5, 0.5, 0], [0.5, 0, 0.5, 1]])
    if variant == 2:
        At = np.hstack([At, np.array([[1.0], [0.0], [1.0], [2.0]])])
        B = np.vstack([B, np.zeros((1, 4))])
    elif variant != 1:
        raise ValueError("variant must be 1 or 2")
    return FactorPair(At.T, B, ConeSpec.orthant(At.shape[1]))


def nested_slack():
    P, Q_H = nested_pair()
    return generalized_slack(P, Q_H)


def random_polygon(f: int, rng: np.random.Generator) -> Polytope:
    """Polygon with ``f`` vertices at sorted random angles, radii in [0.7, 1.3]."""
    while True:
        t = np.sort(rng.uniform(0.0, 2.0 * np.pi, f))
        gaps = np.diff(np.concatenate([t, t[:1] + 2.0 * np.pi]))
        if gaps.max() >= np.pi * 0.9:
            continue
        r = rng.uniform(0.7, 1.3, f)
        pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
        hull = _convex_hull(pts)
        if len(hull) < 3:
            continue
        pts = pts[hull]
        normals = []
        for i in range(len(pts)):
            p, q = pts[i], pts[(i + 1) % len(pts)]
            nrm = np.array([q[1] - p[1], p[0] - q[0]])
            b = nrm @ p
            normals.append(nrm / b)
        return Polytope(np.array(normals).T, pts.T)


def _convex_hull(pts):
    # counter-clockwise input order is kept; drop points that are not strictly convex
    idx = list(range(len(pts)))
    changed = True
    while changed and len(idx) > 3:
        changed = False
        for k in range(len(idx)):
            a, b, c = pts[idx[k - 1]], pts[idx[k]], pts[idx[(k + 1) % len(idx)]]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            if cross <= 1e-9:
                del idx[k]
                changed = True
                break
    return idx
