import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rigiscope import load, moving_frame
from rigiscope.errors import DimensionError
from rigiscope.framework import (build_epsilon_system, build_member_constraints,
                                 build_moving_frame_constraints)
from rigiscope.polycore import (CompiledSystem, Polynomial, PolySystem, bezout_number, poly_diff,
                                poly_eval, sum_of_squares, system_jacobian_eval)
from rigiscope.rigidity import build_critical_system


def x(k, n):
    return Polynomial.variable(k, n)


def random_poly(rng, nvars, degree, nterms=8):
    terms = {}
    for _ in range(nterms):
        mono = [0] * nvars
        for _ in range(rng.integers(0, degree + 1)):
            mono[rng.integers(nvars)] += 1
        terms[tuple(mono)] = complex(rng.standard_normal(), rng.standard_normal())
    return Polynomial(nvars, terms)


# -- evaluation -----------------------------------------------------------------


def test_eval_univariate():
    p = x(0, 1) ** 2 - 1
    assert poly_eval(p, [2 + 0j]) == 3 + 0j


def test_member_constraint_vanishes_at_own_configuration():
    fw = load("triangle")
    g = build_member_constraints(fw)
    p0 = fw.p0.reshape(-1)
    assert poly_eval(g[0], p0) == 0
    for p in g:
        assert abs(poly_eval(p, p0)) < 1e-12


def test_constant_terms_are_negative_squared_lengths():
    for name in ("triangle", "slingshot", "prism3", "fourbar"):
        fw = load(name)
        g = build_member_constraints(fw)
        lsq = fw.edge_lengths_sq()
        for p, l2 in zip(g, lsq):
            assert p.constant_term() == pytest.approx(-l2, abs=1e-15)


def test_epsilon_system_at_reduced_configuration_is_eps_to_the_fourth():
    fw = load("prism3")
    mf = moving_frame(fw)
    eps = 0.1
    q = build_epsilon_system(fw, mf, eps)
    pt = mf.reduced_config
    # floating-point bound for evaluating the expanded quartic by term summation
    scale = sum(abs(c) * np.prod(np.abs(pt) ** np.array(m)) for m, c in q.terms.items())
    assert abs(poly_eval(q, pt) - eps ** 4) < 1e-14 * scale
    tri = load("triangle")
    assert abs(poly_eval(build_epsilon_system(tri, moving_frame(tri), eps),
                         moving_frame(tri).reduced_config) - eps ** 4) < 1e-15


def test_eval_dimension_mismatch():
    with pytest.raises(DimensionError):
        poly_eval(x(0, 2), [1.0])


def test_eval_term_order_invariant():
    a = Polynomial(2, {(2, 0): 1.0, (0, 1): -3.0, (1, 1): 2j})
    b = Polynomial(2, {(1, 1): 2j, (2, 0): 1.0, (0, 1): -3.0})
    pt = [0.3 - 1j, 2.0]
    assert poly_eval(a, pt) == poly_eval(b, pt)
    assert a.terms == b.terms


def test_tiny_coefficients_dropped_and_zero_degree():
    p = Polynomial(1, {(1,): 1e-15, (0,): 0.0})
    assert p.is_zero and p.degree == -1
    q = x(0, 1) - x(0, 1)
    assert q.is_zero and q.terms == {}


# -- differentiation ------------------------------------------------------------


def test_diff_univariate():
    p = x(0, 1) ** 2 - 1
    assert poly_diff(p, 0).equals(2 * x(0, 1))


def test_diff_degree_drops_by_one():
    rng = np.random.default_rng(3)
    p = random_poly(rng, 3, 4)
    for k in range(3):
        if any(m[k] for m in p.terms):
            top = max(sum(m) for m in p.terms if m[k])
            assert poly_diff(p, k).degree == top - 1


def test_member_gradient_structure():
    fw = load("triangle")
    g = build_member_constraints(fw)[0]  # edge {1,2}
    pt = np.array([0.3, -0.2, 1.4, 0.5, 7.0, 8.0])
    grad = [poly_eval(poly_diff(g, k), pt) for k in range(6)]
    diff = pt[0:2] - pt[2:4]
    assert np.allclose(grad[0:2], 2 * diff)
    assert np.allclose(grad[2:4], -2 * diff)
    assert np.allclose(grad[4:6], 0)


def test_diff_index_out_of_range():
    with pytest.raises(DimensionError):
        poly_diff(x(0, 2), 2)


def test_diff_matches_central_difference_on_random_cubics():
    rng = np.random.default_rng(11)
    h = 1e-6
    for _ in range(20):
        p = random_poly(rng, 3, 3)
        pt = rng.uniform(-1, 1, 3) * np.exp(2j * np.pi * rng.random(3)) * rng.random(3)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd = (poly_eval(p, pt + e) - poly_eval(p, pt - e)) / (2 * h)
            assert abs(poly_eval(poly_diff(p, k), pt) - fd) < 1e-5


def test_diff_is_linear_and_obeys_product_rule():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a, b = random_poly(rng, 3, 3), random_poly(rng, 3, 3)
        for k in range(3):
            assert poly_diff(a + b, k).equals(poly_diff(a, k) + poly_diff(b, k))
            assert poly_diff(a * b, k).equals(poly_diff(a, k) * b + a * poly_diff(b, k), tol=1e-10)


# -- jacobians ------------------------------------------------------------------


def test_triangle_rigidity_matrix_rank():
    fw = load("triangle")
    J = system_jacobian_eval(build_member_constraints(fw), fw.p0.reshape(-1))
    assert J.shape == (3, 6)
    assert np.linalg.matrix_rank(J, tol=1e-10) == 3


def test_zero_system_jacobian():
    sys = PolySystem([Polynomial.zero(3), Polynomial.zero(3)])
    assert np.all(system_jacobian_eval(sys, np.ones(3)) == 0)


def test_epsilon_gradient_on_real_variety():
    # at a real point of V(ghat) the gradient of the quartic is 2 s grad s
    fw = load("fourbar")
    mf = moving_frame(fw)
    eps = 0.3
    q = build_epsilon_system(fw, mf, eps)
    # a nearby flexed square: node 3 = (1 + cos t, sin t), node 4 = (cos t, sin t)
    t = np.pi / 2 + 0.2
    full = np.array([0, 0, 1, 0, 1 + np.cos(t), np.sin(t), np.cos(t), np.sin(t)], float)
    from rigiscope.framework import project
    xr = project(mf, full)
    ghat = build_moving_frame_constraints(fw, mf)
    assert np.max(np.abs(ghat(xr))) < 1e-12
    r = xr - mf.reduced_config
    s = eps ** 2 - r @ r
    expect = 2 * s * (-2 * r)
    grad = system_jacobian_eval(PolySystem([q]), xr)[0]
    assert np.allclose(grad, expect, atol=1e-12)


def test_compiled_system_matches_direct_evaluation():
    rng = np.random.default_rng(2)
    sys = PolySystem([random_poly(rng, 4, 3) for _ in range(3)])
    comp = CompiledSystem(sys)
    pts = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
    F, J = comp.evaluate(pts)
    for p in range(5):
        assert np.allclose(F[p], sys(pts[p]), atol=1e-12)
        assert np.allclose(J[p], system_jacobian_eval(sys, pts[p]), atol=1e-12)


# -- degrees ------------------------------------------------------------------


def test_bezout_small():
    sys = PolySystem([x(0, 2) ** 2 - 1, x(1, 2) ** 2 - 4])
    assert bezout_number(sys) == 4


def test_bezout_errors():
    with pytest.raises(ValueError):
        bezout_number(PolySystem([x(0, 2)]))
    with pytest.raises(ValueError):
        bezout_number(PolySystem([x(0, 2), Polynomial.zero(2)]))


def test_bezout_slingshot_critical_system():
    fw = load("slingshot")
    crit = build_critical_system(fw, moving_frame(fw), 0.1, 0)
    assert crit.bezout() == 4 ** 8 == 65536


def test_bezout_prism_critical_system_from_polynomials():
    fw = load("prism3")
    crit = build_critical_system(fw, moving_frame(fw), 0.1, 0)
    degs = crit.degrees
    assert degs == [4] * 13 + [1]
    assert bezout_number(crit.polys(0.0)) == 67_108_864


def test_sum_of_squares_basic():
    assert sum_of_squares([x(0, 1)]).equals(x(0, 1) ** 2)
    p = sum_of_squares([x(0, 2) - 1, x(1, 2)])
    assert poly_eval(p, [1, 0]) == 0
    with pytest.raises(ValueError):
        sum_of_squares([])


@pytest.mark.parametrize("name", ["triangle", "slingshot", "prism3"])
def test_epsilon_system_is_quartic(name):
    fw = load(name)
    assert build_epsilon_system(fw, moving_frame(fw), 0.1).degree == 4


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-20, 20).map(lambda k: k / 8), min_size=2, max_size=2),
       st.lists(st.integers(-20, 20).map(lambda k: k / 8), min_size=2, max_size=2))
def test_sum_of_squares_real_zero_iff_all_zero(root, probe):
    # polys vanish together exactly at `root`
    polys = [x(0, 2) - root[0], x(1, 2) - root[1], (x(0, 2) - root[0]) * (x(1, 2) - root[1])]
    q = sum_of_squares(polys)
    assert abs(poly_eval(q, root)) < 1e-12
    vals = [poly_eval(p, probe).real for p in polys]
    qv = poly_eval(q, probe).real
    assert (qv == 0) == all(v == 0 for v in vals)
    assert qv >= -1e-12
