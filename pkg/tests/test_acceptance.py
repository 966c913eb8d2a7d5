"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line; the lines are printed together at the
end of the pytest run (see conftest.py) and by ``python3 tests/test_acceptance.py``.
"""
import math
import time

import numpy as np
import pytest

from slackapprox import instances as I
from slackapprox.approx import (InnerBody, OuterBody, boundary_point, inn_contains, inner_body,
                                out_contains, outer_body, quality_bounds, ray_directions, soc_lift,
                                verify_polarity)
from slackapprox.cones import in_oin, in_oout, project_cone, xi
from slackapprox.factor import FactorPair, NMFOptions, factor_error, nmf, rank_one_factor
from slackapprox.model import ConeSpec
from slackapprox.nested import NestedPair, containment_chain, grid_points, set_agreement
from slackapprox.slack import _bits, cor_instance, slack_matrix
from slackapprox.solver import mu

RESULTS = {}

TITLES = {
    1: "square worked example",
    2: "containment certificates",
    3: "simplex closed forms",
    4: "polarity",
    5: "rank-one SVD",
    6: "lift equivalence",
    7: "nested chain",
    8: "property suites",
    9: "COR(n) desk-scale substitute",
}


def record(k, ok, detail):
    RESULTS[k] = (bool(ok), detail)
    assert ok, f"criterion {k} ({TITLES[k]}): {detail}"


def summary_lines():
    lines = []
    for k in sorted(TITLES):
        if k in RESULTS:
            ok, detail = RESULTS[k]
            lines.append(f"criterion {k} {'PASS' if ok else 'FAIL'}  {TITLES[k]}: {detail}")
        else:
            lines.append(f"criterion {k} NOT RUN  {TITLES[k]}")
    return lines


# 1 -------------------------------------------------------------------------

def test_c1_square_example():
    t0 = time.perf_counter()
    P, F = I.square(), I.square_factors()
    S = slack_matrix(P).S
    e = factor_error(S, F)
    b = quality_bounds(P, F)
    dt = time.perf_counter() - t0
    checks = {
        "norm_1_2": abs(e.norm_1_2 - 2 / 3 * math.sqrt(10)) <= 1e-12,
        "norm_2_inf": abs(e.norm_2_inf - 2 * math.sqrt(2 / 3)) <= 1e-12,
        "xi_in": abs(b.eps_xi_in - (1 / 3 + math.sqrt(3))) <= 1e-10,
        "xi_out": abs(b.eps_xi_out - math.sqrt(2)) <= 1e-10,
        "mu": abs(b.eps_mu - (math.sqrt(3) - 1)) <= 1e-5,
        "time": dt < 5.0,
    }
    record(1, all(checks.values()),
           f"norm_1_2={e.norm_1_2:.15g} norm_2_inf={e.norm_2_inf:.15g} "
           f"xi_in={b.eps_xi_in:.12g} xi_out={b.eps_xi_out:.12g} mu={b.eps_mu:.9g} "
           f"t={dt:.2f}s failed={[k for k, v in checks.items() if not v]}")


# 2 -------------------------------------------------------------------------

def test_c2_containment_certificates():
    t0 = time.perf_counter()
    P, F = I.square(), I.square_factors()
    b = quality_bounds(P, F)
    inn, out = inner_body(P, F), outer_body(P, F)
    bad_in = [(name, j) for name, eps in b.inner_tiers().items() for j in range(4)
              if not inn_contains(inn, P.V[:, j] / (1 + eps))]
    pts = [boundary_point(out, d, method="bisect") for d in ray_directions(2, 64).T]
    worst = -np.inf
    for eps in b.outer_tiers().values():
        for x in pts:
            worst = max(worst, float(np.max(P.H.T @ (x / (1 + eps)))))
    dt = time.perf_counter() - t0
    ok = not bad_in and worst <= 1 + 1e-6 and dt < 30
    record(2, ok, f"vertex failures={bad_in} max H^T x over scaled Out samples={worst:.9f} "
                  f"t={dt:.1f}s")


# 3 -------------------------------------------------------------------------

def _grid_disagreements(body_contains, q, grad, c, pts, margin=1e-4):
    bad = skipped = 0
    for x in pts.T:
        dist = abs(q(x) - c) / max(np.linalg.norm(grad(x)), 1e-300)
        if dist < margin:
            skipped += 1
            continue
        if body_contains(x) != (q(x) <= c):
            bad += 1
    return bad, skipped


def test_c3_simplex_closed_forms():
    pts = grid_points(41, 3.5)

    def q0(x):
        return 3 * (x[0] + x[1]) ** 2 + (x[0] - x[1]) ** 2

    def g0(x):
        s, d = x[0] + x[1], x[0] - x[1]
        return np.array([6 * s + 2 * d, 6 * s - 2 * d])

    def qi(x):
        return (3 * (x[0] + x[1]) - 2) ** 2 + 16 * (x[0] - x[1]) ** 2

    def gi(x):
        s, d = 3 * (x[0] + x[1]) - 2, x[0] - x[1]
        return np.array([6 * s + 32 * d, 6 * s - 32 * d])

    def qo(x):
        return 3 * (x[0] + x[1] - 1) ** 2 + (x[0] - x[1]) ** 2

    def go(x):
        s, d = x[0] + x[1] - 1, x[0] - x[1]
        return np.array([6 * s + 2 * d, 6 * s - 2 * d])

    P, T = I.simplex(2), I.translated_simplex()
    cases = {
        "simplex Inn": (InnerBody(P), inn_contains, q0, g0, 3.0),
        "simplex Out": (OuterBody(P), out_contains, q0, g0, 12.0),
        "translated Inn": (InnerBody(T), inn_contains, qi, gi, 16.0),
        "translated Out": (OuterBody(T), out_contains, qo, go, 12.0),
    }
    counts = {}
    for name, (body, fn, q, g, c) in cases.items():
        counts[name] = _grid_disagreements(lambda x: fn(body, x), q, g, c, pts)
    ok = all(bad == 0 for bad, _ in counts.values())
    record(3, ok, "disagreements (skipped near boundary): " +
           ", ".join(f"{k} {b} ({s})" for k, (b, s) in counts.items()))


# 4 -------------------------------------------------------------------------

def test_c4_polarity():
    sq, F = I.square(), I.square_factors()
    Pn, _ = I.nested_pair()
    Sn = slack_matrix(Pn).S
    exact = FactorPair(np.eye(Sn.shape[0]), Sn, ConeSpec.orthant(Sn.shape[0]))
    runs = {
        "square": verify_polarity(sq, F, 64, 1e-4),
        "simplex A=B=0": verify_polarity(I.simplex(2), None, 64, 1e-4),
        "nested P exact": verify_polarity(Pn, exact, 64, 1e-4),
    }
    A = np.array(F.A)
    A[0, 0] += 0.5
    control = verify_polarity(sq, F, 64, 1e-4, inner_A=A)
    ok = all(r.passed for r in runs.values()) and not control.passed
    detail = ", ".join(f"{k} {'pass' if r.passed else 'fail'}" for k, r in runs.items())
    record(4, ok, f"{detail}; perturbed control {'fails' if not control.passed else 'PASSES'} "
                  f"(max pairing {control.checks[0].max_pairing:.4f})")


# 5 -------------------------------------------------------------------------

def test_c5_rank_one():
    S = slack_matrix(I.quadrilateral()).S
    F = rank_one_factor(S)
    dA = float(np.abs(F.A[0] - [1.9130, 0.1621, 0.1621, 1.9130]).max())
    dB = float(np.abs(F.B[0] - [0.5630, 2.5951, 0.5630, 0.0550]).max())
    rng = np.random.default_rng(5)
    mats = [S] + [np.abs(rng.standard_normal((rng.integers(2, 9), rng.integers(2, 9))))
                  for _ in range(20)]
    ey = 0.0
    for M in mats:
        s = np.linalg.svd(M, compute_uv=False)
        res = np.linalg.norm(M - rank_one_factor(M).product()) ** 2
        ey = max(ey, abs(res - float((s[1:] ** 2).sum())))
    record(5, dA <= 1e-3 and dB <= 1e-3 and ey <= 1e-8,
           f"max |A - ref|={dA:.2e} max |B - ref|={dB:.2e} Eckart-Young residual err={ey:.1e}")


# 6 -------------------------------------------------------------------------

def test_c6_lift_equivalence():
    rng = np.random.default_rng(6)
    total = bad = skipped = 0
    dims_ok = True
    for _ in range(5):
        P = I.random_polygon(int(rng.integers(3, 13)), rng)
        S = slack_matrix(P).S
        for m in (1, 2, 3):
            F = nmf(S, m, NMFOptions(max_iters=2000, seed=int(rng.integers(1 << 30))))
            body = inner_body(P, F)
            L = soc_lift(body)
            dims_ok &= L.lift_dim == P.dim + m + 2
            for x in rng.uniform(-1.5, 1.5, size=(200, 2)):
                lv = body.level(x)
                total += 1
                if abs(lv) < 1e-5:
                    skipped += 1
                    continue
                bad += L.contains(x, 0.0) != (lv <= 0.0)
    record(6, bad == 0 and dims_ok,
           f"{total} points over 15 (polygon, m) pairs, disagreements={bad}, "
           f"within margin={skipped}, lift_dim==n+m+2: {dims_ok}")


# 7 -------------------------------------------------------------------------

def test_c7_nested_chain():
    pair = NestedPair(*I.nested_pair())
    pts = grid_points(41, 1.2)
    r1 = containment_chain(pair, I.nested_factors(1), pts)
    r2 = containment_chain(pair, I.nested_factors(2), pts)
    eq1 = set_agreement(r1.levels["C_A"], r1.levels["C_B"])
    w2 = r2.link("C_B<=C_A").strict_witness
    ok = (r1.passed and r2.passed and r1.exact and r2.exact and r1.undecided == 0
          and r2.undecided == 0 and all(l.checked for l in r1.links + r2.links)
          and eq1 == 0 and w2 is not None)
    record(7, ok, f"first: links {'ok' if r1.passed else 'FAIL'}, C_A/C_B disagreements={eq1}; "
                  f"second: links {'ok' if r2.passed else 'FAIL'}, C_B strictly inside C_A "
                  f"witness={None if w2 is None else [round(float(a), 4) for a in w2]}")


# 8 -------------------------------------------------------------------------

def _xi_bisect(x):
    if in_oin(x):
        return 0.0
    lo, hi = 0.0, 1.0
    while not in_oin(x + hi):
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if in_oin(x + mid) else (mid, hi)
    return hi


def test_c8_property_suites():
    rng = np.random.default_rng(8)
    fails = []
    # cone duality pairs
    worst = np.inf
    for _ in range(1000):
        f = int(rng.integers(2, 9))
        x = rng.standard_normal(f)
        x = x + xi(x)
        while True:
            y = rng.standard_normal(f) + 0.4
            if in_oout(y):
                break
        worst = min(worst, float(x @ y))
    if worst < -1e-9:
        fails.append(f"duality min <x,y>={worst:.2e}")
    # xi vs bisection
    dx = max(abs(xi(x) - _xi_bisect(x)) for x in
             (rng.standard_normal(int(rng.integers(2, 11))) * 2 for _ in range(1000)))
    if dx > 1e-6:
        fails.append(f"xi vs bisection {dx:.2e}")
    # mu <= xi <= ||.||
    order_bad = 0
    for _ in range(200):
        f, m = int(rng.integers(2, 7)), int(rng.integers(1, 4))
        A = np.abs(rng.standard_normal((m, f)))
        x = rng.standard_normal(f) * 2
        u, s = mu(x, A, ConeSpec.orthant(m)), xi(x)
        order_bad += not (u <= s + 1e-6 and s <= np.linalg.norm(x) + 1e-12)
    if order_bad:
        fails.append(f"mu<=xi<=norm violated {order_bad}x")
    # projection idempotence / nonexpansiveness
    K = ConeSpec.parse("orthant:3,soc:4,soc:3")
    proj_bad = 0
    for _ in range(500):
        a, b = rng.standard_normal(10) * 3, rng.standard_normal(10) * 3
        pa, pb = project_cone(a, K), project_cone(b, K)
        proj_bad += not (np.allclose(project_cone(pa, K), pa, atol=1e-12)
                         and np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12)
    if proj_bad:
        fails.append(f"projection property violated {proj_bad}x")
    # NMF monotonicity
    mono_bad = 0
    for _ in range(20):
        S = np.abs(rng.standard_normal((int(rng.integers(2, 8)), int(rng.integers(2, 8)))))
        _, tr = nmf(S, int(rng.integers(1, 4)), NMFOptions(max_iters=500, tol=0.0, debug=True),
                    return_trace=True)
        mono_bad += bool(np.any(np.diff(tr) > 1e-12 * (1 + tr[:-1])))
    if mono_bad:
        fails.append(f"NMF non-monotone {mono_bad}x")
    record(8, not fails, "; ".join(fails) or
           f"duality min {worst:.2e}, xi-bisection max err {dx:.1e}, 200 mu/xi/norm orderings, "
           "500 projection pairs, 20 NMF traces")


# 9 -------------------------------------------------------------------------

def test_c9_cor_substitute():
    ident = True
    errs = {}
    for n in range(1, 5):
        _, _, S = cor_instance(n)
        B = _bits(n)
        ident &= all(S[i, j] == (1 - a @ b) ** 2 for i, a in enumerate(B) for j, b in enumerate(B))
        errs[n] = float(np.linalg.norm(S - nmf(S, n).product()))
    pos = all(errs[n] > 0 for n in (2, 3, 4))
    record(9, ident and pos, f"identity n=1..4: {ident}; NMF error at m=n: " +
           ", ".join(f"n={n} {e:.4g}" for n, e in errs.items()))


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_c"):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(summary_lines()))
