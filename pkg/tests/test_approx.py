import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slackapprox import instances as I
from slackapprox.approx import (InnerBody, OuterBody, bisect_scale, boundary_point,
                                dikin_ellipsoid, inn_contains, inner_body, out_contains,
                                outer_body, quality_bounds, ray_directions, sonnevend_radius,
                                soc_lift, support, verify_polarity)
from slackapprox.cones import xi
from slackapprox.factor import FactorPair, NMFOptions, nmf
from slackapprox.model import ConeSpec, Polytope
from slackapprox.slack import slack_matrix

from conftest import cp, needs_cvxpy

SQ = I.square()
SQF = I.square_factors()


def quad(x):
    return 3 * (x[0] + x[1]) ** 2 + (x[0] - x[1]) ** 2


def on_level(d, q):
    d = np.asarray(d, float)
    return d * math.sqrt(q / quad(d))


@pytest.fixture(scope="module")
def sq_bodies():
    return inner_body(SQ, SQF), outer_body(SQ, SQF)


def test_origin_always_inside(rng):
    for _ in range(5):
        P = I.random_polygon(int(rng.integers(3, 9)), rng)
        assert inn_contains(InnerBody(P), np.zeros(2))
    assert inn_contains(inner_body(SQ, SQF), np.zeros(2))


def test_square_inner_examples(sq_bodies):
    inn, _ = sq_bodies
    assert inn_contains(inn, np.ones(2) / math.sqrt(3))
    assert not inn_contains(inn, 1.05 * np.ones(2))
    t = bisect_scale(inn, np.ones(2))
    assert t == pytest.approx(1 / math.sqrt(3), abs=1e-6)


def test_square_outer_examples(sq_bodies):
    _, out = sq_bodies
    for j in range(4):
        assert out_contains(out, SQ.V[:, j])
    assert not out_contains(out, 1.05 * math.sqrt(3) * np.array([1.0, 0.0]))
    assert bisect_scale(out, np.array([1.0, 0.0])) == pytest.approx(math.sqrt(3), abs=1e-6)


def test_outer_forms_agree(sq_bodies):
    _, out = sq_bodies
    for r in (1.6, 1.7, 1.76, 1.8):
        x = np.array([r, 0.0])
        assert out.contains(x) == out.contains(x, form="equality")


@pytest.mark.parametrize("d", [(1, 0), (1, 1), (-1, 2), (0.3, -1), (-1, -1)])
def test_simplex_zero_quadratics(d):
    P = I.simplex(2)
    inn, out = InnerBody(P), OuterBody(P)
    assert inn_contains(inn, on_level(d, 2.99))
    assert not inn_contains(inn, on_level(d, 3.01))
    assert out_contains(out, on_level(d, 11.9))
    assert not out_contains(out, on_level(d, 12.1))


def test_support_examples(sq_bodies):
    inn, out = sq_bodies
    r = support(InnerBody(I.simplex(2)), np.array([1.0, 1.0]))
    assert r.value == pytest.approx(1.0, abs=1e-5)
    r = support(inn, np.array([1.0, 1.0]))
    assert r.value == pytest.approx(2 / math.sqrt(3), abs=1e-5)
    assert r.dual_value == pytest.approx(r.value, abs=1e-5)
    for j in range(4):
        c = SQ.V[:, j]
        assert support(out, c).value >= c @ c - 1e-6


def test_support_matches_dense_boundary_sampling(sq_bodies):
    inn, _ = sq_bodies
    X = np.array([boundary_point(inn, d) for d in ray_directions(2, 720).T])
    for c in (np.array([1.0, 1.0]), np.array([1.0, -0.3]), np.array([-2.0, 0.5])):
        h = support(inn, c).value
        sampled = float(np.max(X @ c))
        assert sampled <= h + 1e-6
        # maxima at corners of Inn converge only linearly in the ray spacing
        assert h - sampled <= 2 * np.linalg.norm(c) * 2 * np.pi / 720
        x = inn.support_point(c)[1]
        assert inn_contains(inn, x, 1e-6) and x @ c == pytest.approx(h, abs=1e-6)


def test_sandwich_random(rng):
    for _ in range(3):
        P = I.random_polygon(int(rng.integers(4, 9)), rng)
        F = nmf(slack_matrix(P).S, 2, NMFOptions(max_iters=2000))
        inn, out = inner_body(P, F), outer_body(P, F)
        for d in ray_directions(2, 16).T:
            x = boundary_point(inn, d)
            assert np.max(P.H.T @ x) <= 1 + 1e-6
        for j in range(P.n_vertices):
            assert out_contains(out, P.V[:, j])


def test_exact_factorization_recovers_polytope():
    S = slack_matrix(SQ).S
    F = FactorPair(np.eye(4), S, ConeSpec.orthant(4))
    inn, out = inner_body(SQ, F), outer_body(SQ, F)
    for d in ray_directions(2, 64).T:
        r = 1.0 / SQ.gauge(d)
        assert bisect_scale(inn, d) == pytest.approx(r, abs=1e-5)
        assert bisect_scale(out, d) == pytest.approx(r, abs=1e-5)


def test_gauge_and_bisection_agree(sq_bodies):
    inn, out = sq_bodies
    for d in ray_directions(2, 12).T:
        assert 1 / inn.gauge(d) == pytest.approx(bisect_scale(inn, d), abs=1e-6)
        assert 1 / out.gauge(d) == pytest.approx(bisect_scale(out, d), abs=1e-6)


@needs_cvxpy
def test_inner_level_against_clarabel(rng):
    P, F = SQ, SQF
    inn = inner_body(P, F)
    f = P.n_facets
    for _ in range(20):
        x = rng.uniform(-1.3, 1.3, 2)
        t, y = cp.Variable(), cp.Variable(F.m, nonneg=True)
        w = 1 - P.H.T @ x - F.A.T @ y + t
        cp.Problem(cp.Minimize(t), [math.sqrt(f - 1) * cp.norm(w) <= cp.sum(w)]).solve(
            solver="CLARABEL")
        assert inn.level(x) == pytest.approx(t.value, abs=1e-5)


@needs_cvxpy
def test_outer_gauge_against_clarabel(rng):
    out = outer_body(SQ, SQF)
    for d in ray_directions(2, 10).T:
        z = cp.Variable(4)
        cons = [SQ.V @ z == d, cp.norm(z) <= cp.sum(z), SQF.B @ z >= 0]
        p = cp.Problem(cp.Minimize(cp.sum(z)), cons)
        p.solve(solver="CLARABEL")
        assert out.gauge(d) == pytest.approx(p.value, abs=1e-5)


def test_lift_matches_inner_square_zero(rng):
    body = InnerBody(SQ)
    L = soc_lift(body)
    assert L.lift_dim == 4 and L.cone.total_dim == 4
    for _ in range(100):
        x = rng.uniform(-1.5, 1.5, 2)
        if abs(body.level(x)) > 1e-5:
            assert L.contains(x) == body.contains(x)


def test_lift_structure():
    body = inner_body(SQ, SQF)
    L = soc_lift(body)
    M = np.hstack([SQ.H.T, SQF.A.T, -np.ones((4, 1))])
    assert L.lift_dim == 6
    assert L.cone == ConeSpec.parse("orthant:2,soc:6")
    assert np.allclose(np.tril(L.R, -1), 0.0)
    assert np.abs(L.R.T @ L.R - M.T @ M).max() <= 1e-10 * np.abs(M.T @ M).max()
    d = L.to_dict()
    assert set(d) == {"cone", "R", "F", "g", "offsets"}


def test_lift_dim_independent_of_f(rng):
    t = np.sort(rng.uniform(0, 2 * np.pi, 100))
    V = np.vstack([np.cos(t), np.sin(t)])
    # polygon with 100 facets tangent to the unit circle
    mid = (t + np.roll(t, -1) + np.where(np.arange(100) == 99, 2 * np.pi, 0)) / 2
    H = np.vstack([np.cos(mid), np.sin(mid)]) / np.cos((np.roll(t, -1) - t) % (2 * np.pi) / 2)
    P = Polytope(H, V)
    A = np.abs(rng.standard_normal((3, 100))) * 0.01
    L = soc_lift(InnerBody(P, A, ConeSpec.orthant(3)))
    assert L.lift_dim == 2 + 3 + 2
    assert L.R.shape == (6, 6)


def test_lift_exact_case_is_polytope(rng):
    S = slack_matrix(SQ).S
    F = FactorPair(np.eye(4), S, ConeSpec.orthant(4))
    L = soc_lift(inner_body(SQ, F))
    for _ in range(60):
        x = rng.uniform(-1.5, 1.5, 2)
        g = np.max(SQ.H.T @ x) - 1
        if abs(g) > 1e-4:
            assert L.contains(x) == (g <= 0)


def test_square_bounds():
    b = quality_bounds(SQ, SQF)
    assert b.eps_norm_in == pytest.approx(2 / 3 * math.sqrt(10), abs=1e-12)
    assert b.eps_xi_in == pytest.approx(1 / 3 + math.sqrt(3), abs=1e-10)
    assert b.eps_mu == pytest.approx(math.sqrt(3) - 1, abs=1e-5)
    assert b.eps_norm_out == pytest.approx(2 * math.sqrt(2 / 3), abs=1e-12)
    assert b.eps_xi_out == pytest.approx(math.sqrt(2), abs=1e-10)
    assert b.inner_ordered and b.outer_ordered and b.complete


def test_exact_bounds_zero():
    S = slack_matrix(SQ).S
    b = quality_bounds(SQ, FactorPair(np.eye(4), S, ConeSpec.orthant(4)))
    assert max(b.eps_mu, b.eps_xi_in, b.eps_norm_in, b.eps_xi_out, b.eps_norm_out) <= 1e-6


@pytest.mark.parametrize("n", [2, 3])
def test_zero_factor_bounds(n):
    P = I.simplex(n)
    b = quality_bounds(P, FactorPair.zero(n + 1, n + 1))
    assert b.eps_xi_in == pytest.approx(xi((n + 1) * np.eye(n + 1)[0]), abs=1e-12)
    assert b.eps_mu == pytest.approx(b.eps_xi_in, abs=1e-5)


def test_bound_order_random(rng):
    for _ in range(8):
        P = I.random_polygon(int(rng.integers(4, 9)), rng)
        F = nmf(slack_matrix(P).S, int(rng.integers(1, 4)), NMFOptions(max_iters=500))
        b = quality_bounds(P, F)
        assert b.inner_ordered and b.outer_ordered


def test_scaled_containments_square(sq_bodies):
    inn, out = sq_bodies
    b = quality_bounds(SQ, SQF)
    for eps in b.inner_tiers().values():
        for j in range(4):
            assert inn_contains(inn, SQ.V[:, j] / (1 + eps + 1e-7))
    for eps in b.outer_tiers().values():
        for d in ray_directions(2, 16).T:
            x = boundary_point(out, d) / (1 + eps + 1e-7)
            assert np.max(SQ.H.T @ x) <= 1 + 1e-6


def test_polarity_square_and_zero():
    assert verify_polarity(SQ, SQF, 64, 1e-4).passed
    assert verify_polarity(I.simplex(2), None, 64, 1e-4).passed


def test_polarity_negative_control():
    A = np.array(SQF.A)
    A[0, 0] += 0.5
    rep = verify_polarity(SQ, SQF, 64, 1e-4, inner_A=A)
    assert not rep.passed
    assert not rep.checks[0].passed and rep.checks[1].passed


def test_dikin_square(rng):
    E = dikin_ellipsoid(SQ)
    assert np.allclose(E.Gamma, 2 * np.eye(2))
    inn = InnerBody(SQ)
    for a in rng.uniform(0, 2 * np.pi, 500):
        x = E.boundary(np.array([math.cos(a), math.sin(a)]))
        assert x @ x == pytest.approx(0.5)
        assert inn_contains(inn, x)


def test_sonnevend_identity(rng):
    # sum of facet normals is zero: Inn_P(0) = sqrt(f/(f-1)) D
    inn = InnerBody(SQ)
    f = SQ.n_facets
    E = dikin_ellipsoid(SQ).scaled(sonnevend_radius(f))
    for d in ray_directions(2, 24).T:
        x = boundary_point(inn, d)
        assert (f - 1) * np.sum((SQ.H.T @ x) ** 2) == pytest.approx(f, abs=1e-5)
        assert E.value(x) == pytest.approx(E.radius ** 2, abs=1e-5)


def test_analytic_center_corollary():
    f = SQ.n_facets
    assert np.allclose(SQ.H.sum(axis=1), 0) and np.allclose(slack_matrix(SQ).S.sum(0), f)
    inn = InnerBody(SQ)
    for j in range(4):
        assert inn_contains(inn, SQ.V[:, j] / (f - 1))
        assert inn_contains(inn, SQ.V[:, j] / math.sqrt(f - 1))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_inner_inside_polytope_random(seed):
    r = np.random.default_rng(seed)
    P = I.random_polygon(int(r.integers(3, 8)), r)
    inn = InnerBody(P)
    d = r.standard_normal(2)
    x = boundary_point(inn, d)
    assert np.max(P.H.T @ x) <= 1 + 1e-6
