import time
import warnings

import numpy as np
import pytest

from oracles import fourbar_at_offset, fourbar_on_sphere, slingshot_node5_angle
from rigiscope import load, moving_frame
from rigiscope.errors import DegenerateDirection, DimensionError
from rigiscope.framework import (EdgeModel, build_epsilon_system, build_moving_frame_constraints,
                                 project_velocity, rigid_motion_basis)
from rigiscope.pathtrack import Status, TrackerSettings, parameter_track
from rigiscope.polycore import Polynomial, poly_eval
from rigiscope.rigidity import (CriticalSystem, DiscreteFlex, Termination, _nearest,
                                _OffsetFamily, build_critical_system, discrete_flex,
                                eps_local_rigidity, flex_direction, flex_param_homotopy,
                                is_sound_real_point, recover_multipliers, refine_real_point,
                                witness_hypersurface)


def member_residual(fw, mf, x):
    g, _ = EdgeModel(fw, mf).evaluate(np.atleast_2d(np.asarray(x, dtype=float)))
    return float(np.max(np.abs(g)))


@pytest.fixture(scope="module")
def fourbar_report():
    return eps_local_rigidity(load("fourbar"), 0.05, seed=0)


# -- critical system ------------------------------------------------------------------


@pytest.mark.parametrize("name", ["triangle", "fourbar", "slingshot", "prism3"])
def test_critical_system_is_square(name):
    fw = load(name)
    mf = moving_frame(fw)
    crit = build_critical_system(fw, mf, 0.1, 3)
    assert crit.nvars == crit.neqs == mf.N + 2
    assert len(crit.degrees) == mf.N + 2
    assert crit.bezout() == 4 ** (mf.N + 1)


def test_prism_total_degree():
    fw = load("prism3")
    assert build_critical_system(fw, moving_frame(fw), 0.1, 0).bezout() == 67_108_864


def test_first_row_at_t0_is_the_epsilon_quartic():
    fw = load("fourbar")
    mf = moving_frame(fw)
    crit = build_critical_system(fw, mf, 0.2, 1)
    G = build_epsilon_system(fw, mf, 0.2)
    n = mf.N + 2
    embedded = Polynomial(n, {m + (0, 0): c for m, c in G.terms.items()})
    assert crit.polys(0.0)[0].equals(embedded)


def test_structured_evaluation_matches_polynomials():
    fw = load("fourbar")
    mf = moving_frame(fw)
    crit = build_critical_system(fw, mf, 0.2, 1)
    rng = np.random.default_rng(0)
    w = rng.standard_normal((3, mf.N + 2)) + 1j * rng.standard_normal((3, mf.N + 2))
    t = np.array([0.0, 0.3 + 0.1j, 1.0])
    H, J, Ht = crit.evaluate_at(w, t)
    for p in range(3):
        sys = crit.polys(t[p])
        assert np.allclose(H[p], sys(w[p]), atol=1e-9)
        assert np.allclose(J[p], sys.jacobian(w[p]), atol=1e-9)
    assert np.allclose(Ht[:, 0], -crit.gamma * crit.z)


def test_random_data_properties_and_determinism():
    fw = load("slingshot")
    mf = moving_frame(fw)
    a = build_critical_system(fw, mf, 0.1, 5)
    b = build_critical_system(fw, mf, 0.1, 5)
    c = build_critical_system(fw, mf, 0.1, 6)
    assert a.gamma == b.gamma and np.array_equal(a.y, b.y) and a.z == b.z
    assert not np.array_equal(a.y, c.y)
    assert abs(abs(a.gamma) - 1) < 1e-15 and np.allclose(np.abs(a.alpha), 1)
    assert abs(a.g_eps(a.y[None, :])[0][0]) > 1e-6


def test_critical_system_requires_positive_eps():
    fw = load("triangle")
    with pytest.raises(ValueError):
        build_critical_system(fw, moving_frame(fw), -0.1, 0)
    with pytest.raises(ValueError):
        eps_local_rigidity(fw, 0.0)


# -- witness sets ------------------------------------------------------------------------


def test_witness_of_two_variable_quadric():
    x1, x2 = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
    w = witness_hypersurface(x1 * x1 + x2 * x2, seed=0)
    assert w.degree == 2
    for p in w.points:
        assert abs(poly_eval(w.polynomial, p)) < 1e-12


def test_witness_of_slingshot_quartic():
    fw = load("slingshot")
    mf = moving_frame(fw)
    G = build_epsilon_system(fw, mf, 0.1)
    w = witness_hypersurface(G, seed=2)
    assert w.degree == 4
    for p, tau in zip(w.points, w.params):
        assert np.allclose(p, w.base + tau * w.direction)
        assert abs(poly_eval(G, p)) < 1e-10


# -- epsilon-local rigidity ------------------------------------------------------------------


def test_triangle_is_eps_rigid_quickly():
    t0 = time.perf_counter()
    rep = eps_local_rigidity(load("triangle"), 0.1, seed=0)
    elapsed = time.perf_counter() - t0
    assert rep.u and rep.v and rep.R == []
    assert rep.n_paths == 256 and rep.witness_degree == 4
    assert rep.verdict == "epsilon-locally rigid at 0.1"
    assert elapsed < 10


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_triangle_verdict_is_seed_independent(seed):
    rep = eps_local_rigidity(load("triangle"), 0.1, seed=seed)
    assert rep.u and rep.v


def test_fourbar_real_points_match_oracle(fourbar_report):
    rep = fourbar_report
    assert rep.v and not rep.u
    assert len(rep.R) == 2
    expect = sorted([fourbar_on_sphere(0.05, -1), fourbar_on_sphere(0.05, +1)], key=tuple)
    got = sorted(rep.R, key=tuple)
    for a, b in zip(got, expect):
        assert np.max(np.abs(a - b)) < 1e-6


def test_reported_points_are_sound(fourbar_report):
    fw = load("fourbar")
    mf = moving_frame(fw)
    gh = build_moving_frame_constraints(fw, mf)
    for x in fourbar_report.R:
        assert np.max(np.abs(gh(x))) < 1e-8
        assert abs(np.linalg.norm(x - mf.reduced_config) - 0.05) < 1e-8
        assert is_sound_real_point(fw, mf, 0.05, x)
        assert len(x) == mf.N  # no multiplier components


def test_multipliers_exist_at_reported_points(fourbar_report):
    fw = load("fourbar")
    mf = moving_frame(fw)
    crit = build_critical_system(fw, mf, 0.05, 0)
    for x in fourbar_report.R:
        lam, res = recover_multipliers(crit, x)
        assert res < 1e-8
        assert abs(lam[0]) < 1e-6  # real points of a sum of squares are critical with lam0 = 0


def test_report_dict_and_determinism(fourbar_report):
    d = fourbar_report.to_dict()
    for key in ("u", "v", "R", "eps", "seed", "path_stats", "num_real", "verdict"):
        assert key in d
    assert sum(d["path_stats"]["stage1"].values()) == 4096
    again = eps_local_rigidity(load("fourbar"), 0.05, seed=0).to_dict()
    d.pop("timings"), again.pop("timings")
    assert again == d


def test_refine_real_point_lands_on_sphere():
    fw = load("fourbar")
    mf = moving_frame(fw)
    x = fourbar_on_sphere(0.1) + 1e-4
    xr = refine_real_point(fw, mf, 0.1, x)
    assert is_sound_real_point(fw, mf, 0.1, xr)
    assert not is_sound_real_point(fw, mf, 0.1, x)


# -- discrete flex ---------------------------------------------------------------------


def test_discrete_flex_fourbar_matches_oracle():
    flex = discrete_flex(load("fourbar"), 0.05, 5, seed=0)
    assert flex.terminated_reason == Termination("Completed")
    assert len(flex.points) == 6
    assert flex.eps_schedule == pytest.approx([0, 0.05, 0.1, 0.15, 0.2, 0.25])
    fw = load("fourbar")
    mf = moving_frame(fw)
    for j, p in enumerate(flex.points):
        assert np.max(np.abs(p - fourbar_on_sphere(0.05 * j, -1))) < 1e-6
        assert abs(np.linalg.norm(p - mf.reduced_config) - 0.05 * j) < 1e-6
        assert member_residual(fw, mf, p) < 1e-8


def test_discrete_flex_argument_checks():
    with pytest.raises(ValueError):
        discrete_flex(load("triangle"), 0.0, 3)
    with pytest.raises(ValueError):
        discrete_flex(load("triangle"), 0.1, 0)


def test_discrete_flex_stops_when_rigid():
    flex = discrete_flex(load("triangle"), 0.1, 3, seed=0)
    assert flex.terminated_reason == Termination("EpsLocallyRigidAt", 0.1)
    assert len(flex.points) == 1 and len(flex.reports) == 1
    assert str(flex.terminated_reason) == "EpsLocallyRigidAt(0.1)"


def test_nearest_breaks_ties_lexicographically():
    pts = [np.array([1.0, 0.0]), np.array([-1.0, 0.0]), np.array([0.0, 2.0])]
    assert np.array_equal(_nearest(pts, np.zeros(2), 1e-6), [-1.0, 0.0])


@pytest.mark.slow
def test_discrete_flex_slingshot_rigid_at_first_stage():
    flex = discrete_flex(load("slingshot"), 0.05, 3, seed=0)
    assert flex.terminated_reason == Termination("EpsLocallyRigidAt", 0.05)
    mf = moving_frame(load("slingshot"))
    assert len(flex.points) == 1 and np.array_equal(flex.points[0], mf.reduced_config)


@pytest.mark.slow
def test_discrete_flex_flexible_slingshot_walks_the_circle():
    fw = load("slingshot_flexible")
    flex = discrete_flex(fw, 0.05, 4, seed=0)
    assert flex.terminated_reason == Termination("Completed")
    assert len(flex.points) == 5
    angles = [slingshot_node5_angle(p) for p in flex.points]
    steps = np.diff(angles)
    assert np.all(steps > 0) or np.all(steps < 0)
    for p in flex.points:
        assert abs(np.hypot(p[5] - p[1], p[6] - p[2]) - 3.0) < 1e-6


# -- infinitesimal flex parameter homotopy -----------------------------------------------------


def test_flexdir_fourbar_matches_oracle():
    fw = load("fourbar")
    mf = moving_frame(fw)
    v = flex_direction(fw, 0)
    vhat = project_velocity(fw, mf, v)
    vhat /= np.linalg.norm(vhat)
    flex = flex_param_homotopy(fw, v, 0.05, 10)
    assert flex.terminated_reason == Termination("Completed")
    assert len(flex.points) == 11
    for j, p in enumerate(flex.points):
        assert np.all(np.isreal(p))
        assert np.max(np.abs(p - fourbar_at_offset(vhat, 0.05 * j, mf.reduced_config))) < 1e-6
        assert abs(vhat @ (p - mf.reduced_config) - 0.05 * j) < 1e-8
        assert member_residual(fw, mf, p) < 1e-8


def test_offset_family_round_trip_to_start():
    fw = load("fourbar")
    mf = moving_frame(fw)
    vhat = project_velocity(fw, mf, flex_direction(fw, 0))
    vhat /= np.linalg.norm(vhat)
    fam = _OffsetFamily(fw, mf, vhat)
    p0 = np.array(mf.reduced_config, dtype=float)
    out = parameter_track(fam, p0, [0.0], [0.1])
    assert out.status is Status.SUCCESS
    assert member_residual(fw, mf, out.endpoint.real) < 1e-8
    assert abs(vhat @ (out.endpoint.real - p0) - 0.1) < 1e-10
    back = parameter_track(fam, out.endpoint.real, [0.1], [0.0])
    assert np.max(np.abs(back.endpoint - p0)) < 1e-6


def test_flexdir_rejects_rigid_motion():
    fw = load("prism3")
    with pytest.raises(DegenerateDirection):
        flex_param_homotopy(fw, rigid_motion_basis(fw)[0], 0.01, 2)


def test_flexdir_warns_on_generic_direction():
    fw = load("fourbar")
    v = np.random.default_rng(0).standard_normal(8)
    with pytest.warns(UserWarning):
        flex_param_homotopy(fw, v, 0.01, 1)


def test_flexdir_dimension_and_argument_checks():
    fw = load("fourbar")
    with pytest.raises(DimensionError):
        flex_param_homotopy(fw, np.ones(5), 0.01, 1)
    with pytest.raises(ValueError):
        flex_param_homotopy(fw, flex_direction(fw), 0.0, 1)
    with pytest.raises(IndexError):
        flex_direction(fw, 1)


def test_flexdir_prism_least_squares_points_descend():
    fw = load("prism3")
    mf = moving_frame(fw)
    flex = flex_param_homotopy(fw, flex_direction(fw, 0), 0.01, 3)
    assert len(flex.points) == 4
    z = [lift_z(mf, p) for p in flex.points]
    assert np.all(np.diff(z) < 0)


def lift_z(mf, p):
    from rigiscope.framework import lift
    return float(np.max(lift(mf, p).reshape(6, 3)[3:, 2]))


def test_flexdir_with_residual_tolerance_stops_at_first_step():
    # with a residual tolerance, least-squares near-solutions are rejected
    for name in ("slingshot", "prism3"):
        fw = load(name)
        flex = flex_param_homotopy(fw, flex_direction(fw, 0), 0.01, 10, residual_tol=1e-6)
        assert flex.terminated_reason == Termination("NoRealSolutionsAt", 0.01)
        assert len(flex.points) == 1


def test_discrete_flex_result_serializes():
    fw = load("fourbar")
    flex = flex_param_homotopy(fw, flex_direction(fw, 0), 0.05, 2)
    d = flex.to_dict()
    assert d["terminated_reason"] == "Completed"
    assert len(d["configurations"]) == 3 and len(d["configurations"][0]) == 8
    assert isinstance(flex, DiscreteFlex)
