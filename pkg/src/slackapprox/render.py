"""Deterministic SVG figures of planar bodies, drawn as radial curves.

Every body here is star-shaped about the origin, so each is drawn from its
radius along a fixed fan of rays. Before anything is written the radii are
checked against the expected nesting; a violation aborts the figure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .approx import (InnerBody, OuterBody, bisect_scale, dikin_ellipsoid, inner_body, outer_body,
                     quality_bounds)
from .errors import StructuralError, ValidationError
from .factor import FactorPair, verify_factorization
from .model import Polytope

COLORS = {"P": "#000000", "Inn": "#1f77b4", "Out": "#d62728", "inner_scaled": "#9ecae1",
          "outer_scaled": "#fc9272", "Dikin": "#2ca02c", "C_B": "#9467bd", "C_A": "#8c564b",
          "Inn_Q": "#17becf", "Q": "#7f7f7f"}
ORDER_TOL = 1e-5


@dataclass
class Figure:
    angles: np.ndarray
    curves: dict        # name -> radii
    order: list         # chains of names, inner to outer
    view: float
    polygons: dict = field(default_factory=dict)   # name -> 2 x k vertices, drawn exactly

    def check_order(self, tol: float = ORDER_TOL):
        bad = []
        for chain in self.order:
            for a, b in zip(chain, chain[1:]):
                ra, rb = self.curves[a], self.curves[b]
                k = np.flatnonzero(ra > rb * (1.0 + tol) + tol)
                if k.size:
                    bad.append(f"{a} exceeds {b} on {k.size} rays (first at angle "
                               f"{self.angles[k[0]]:.4f}: {ra[k[0]]:.6g} > {rb[k[0]]:.6g})")
        if bad:
            raise ValidationError("figure bodies are not nested as expected:\n" + "\n".join(bad), bad)


def _angles(rays):
    return 2.0 * np.pi * np.arange(rays) / rays


def _dirs(angles):
    return np.vstack([np.cos(angles), np.sin(angles)])


def _ccw(V):
    return V[:, np.argsort(np.arctan2(V[1], V[0]), kind="stable")]


def _poly_radius(H, d, cap=np.inf):
    g = float(np.max(H.T @ d))
    return cap if g <= 0 else min(cap, 1.0 / g)


def _gauge_radii(body, dirs):
    with np.errstate(divide="ignore"):
        return np.array([1.0 / body.gauge(dirs[:, k]) for k in range(dirs.shape[1])])


def approximation_figure(P: Polytope, F: Optional[FactorPair] = None, rays: int = 256,
                         bodies=("P", "Inn", "Out", "inner_scaled", "outer_scaled", "Dikin"),
                         boundary: str = "bisect", opts=None) -> Figure:
    if P.dim != 2:
        raise StructuralError(f"rendering supports n = 2 only, got n = {P.dim}")
    ang = _angles(rays)
    D = _dirs(ang)
    inn, out = inner_body(P, F, opts), outer_body(P, F, opts)
    if boundary == "gauge":
        r_in, r_out = _gauge_radii(inn, D), _gauge_radii(out, D)
    elif boundary == "bisect":
        r_in = np.array([bisect_scale(inn, D[:, k]) for k in range(rays)])
        r_out = np.array([bisect_scale(out, D[:, k]) for k in range(rays)])
    else:
        raise StructuralError(f"unknown boundary method {boundary!r}")
    r_p = np.array([_poly_radius(P.H, D[:, k]) for k in range(rays)])
    curves = {"P": r_p, "Inn": r_in, "Out": r_out}
    order = [["Inn", "P", "Out"]]
    if F is not None and ("inner_scaled" in bodies or "outer_scaled" in bodies):
        b = quality_bounds(P, F, opts)
        curves["inner_scaled"] = r_p / (1.0 + b.eps_mu)
        curves["outer_scaled"] = r_p * (1.0 + b.eps_xi_out)
        order += [["inner_scaled", "Inn"], ["Out", "outer_scaled"]]
    if "Dikin" in bodies:
        E = dikin_ellipsoid(P)
        curves["Dikin"] = np.array([np.linalg.norm(E.boundary(D[:, k])) for k in range(rays)])
        order.append(["Dikin", "Inn"])
    keep = {k: v for k, v in curves.items() if k in bodies}
    order = [[n for n in ch if n in keep] for ch in order]
    return Figure(ang, keep, [c for c in order if len(c) > 1],
                  1.1 * max(float(v.max()) for v in keep.values()), {"P": _ccw(P.V)})


def nested_figure(pair, F: FactorPair, rays: int = 256, view: float = 1.5, opts=None) -> Figure:
    from .nested import CAOracle, CBOracle
    if pair.n != 2:
        raise StructuralError(f"rendering supports n = 2 only, got n = {pair.n}")
    ang = _angles(rays)
    D = _dirs(ang)
    K = F.cone if F.m else None
    out = OuterBody(pair.P, F.B if F.m else None, K, opts)
    inn = InnerBody(pair.Q_H, F.A if F.m else None, K, opts)
    ca, cb = CAOracle(pair, F.A, F.cone, opts), CBOracle(pair, F.B, F.cone, opts)

    curves = {
        "P": np.array([_poly_radius(pair.P.H, D[:, k]) for k in range(rays)]),
        "Out": np.minimum(_gauge_radii(out, D), view),
        "C_B": np.minimum(_gauge_radii(cb, D), view),
        "C_A": np.minimum(_gauge_radii(ca, D), view),
        "Inn_Q": np.minimum(_gauge_radii(inn, D), view),
        "Q": np.array([_poly_radius(pair.Q_H, D[:, k], view) for k in range(rays)]),
    }
    exact = verify_factorization(pair.S, F)
    order = [["P", "Out", "C_B", "C_A", "Inn_Q", "Q"]] if exact else \
        [["P", "Out", "C_B"], ["C_A", "Inn_Q", "Q"]]
    return Figure(ang, curves, order, view, {"P": _ccw(pair.P.V)})


def to_svg(fig: Figure, size: int = 480, title: str = "") -> str:
    fig.check_order()
    s = size / (2.0 * fig.view)
    c = size / 2.0

    def path(pts):
        return "M " + " L ".join(f"{c + s * x:.3f} {c - s * y:.3f}" for x, y in pts) + " Z"

    def curve(name):
        if name in fig.polygons:
            return path(fig.polygons[name].T)
        r = fig.curves[name]
        return path(zip(r * np.cos(fig.angles), r * np.sin(fig.angles)))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size + 24}" '
           f'viewBox="0 0 {size} {size + 24}">',
           f'<rect width="{size}" height="{size + 24}" fill="#ffffff"/>']
    if title:
        out.append(f'<text x="8" y="{size + 16}" font-family="sans-serif" font-size="12">{title}</text>')
    for k, name in enumerate(fig.curves):
        col = COLORS.get(name, "#000000")
        dash = ' stroke-dasharray="4 3"' if name.endswith("scaled") else ""
        out.append(f'<path d="{curve(name)}" fill="none" stroke="{col}" '
                   f'stroke-width="1.2"{dash}><title>{name}</title></path>')
        out.append(f'<text x="8" y="{14 + 13 * k}" font-family="sans-serif" font-size="11" '
                   f'fill="{col}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
