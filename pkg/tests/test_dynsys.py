import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastoball.assumptions import gamma_fn, upsilon_fn
from elastoball.constitutive import LameParameters, make_builtin
from elastoball.dynsys import (
    DynState,
    boundary_field_2d,
    classify_eigenvalues,
    dulac_divergence,
    fixed_points_2d,
    integrate_orbit,
    jacobian_2d,
    jacobian_fd,
    line_fixed_point_report,
    p_det_trace_closed_form,
    radius_from_state,
    sample_boundary_orbit,
    seed_unstable,
    terminal_point,
    v_from_radius,
    vector_field_3d,
)
from elastoball.errors import DomainError, InvalidParameterError, UnsupportedModelError
from elastoball.oracles import john_exact


class TestVectorField:
    @pytest.mark.parametrize("x_c", [0.3, 1.0, 1.4])
    def test_line_of_centres_is_fixed(self, admissible, x_c):
        np.testing.assert_allclose(vector_field_3d(admissible, (x_c, 1.0, 0.0)), 0.0, atol=1e-14)

    def test_terminal_point_is_fixed(self, admissible):
        y, v = terminal_point(admissible)
        np.testing.assert_allclose(vector_field_3d(admissible, (0.0, y, v)), 0.0, atol=1e-13)

    def test_john_by_hand(self, builtin):
        np.testing.assert_allclose(vector_field_3d(builtin("john"), DynState(0.0, 1.0, 0.5, 0.0)),
                                   [-0.5, 0.5, 0.0], atol=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(x=st.floats(0.0, 1.4), y=st.floats(0.01, 0.99), v=st.floats(0.0, 5.0))
    def test_formula(self, x, y, v):
        m = make_builtin("svk", LameParameters(1.0, 1.0))
        g, u = gamma_fn(m, x, y), upsilon_fn(m, x, y)
        w = u * (1 - y) - v
        want = [-g * (1 - y) * x, w * y, (4 * w + g * (2 - 7 * (1 - y))) * v]
        np.testing.assert_allclose(vector_field_3d(m, (x, y, v)), want, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("name", ["seth", "signorini"])
    def test_disabled_when_c_nonzero(self, builtin, name):
        with pytest.raises(UnsupportedModelError):
            vector_field_3d(builtin(name), (1.0, 0.5, 0.1))


class TestSeed:
    def test_john_direction(self, builtin):
        s = seed_unstable(builtin("john"), 2.0, 1e-8)
        want = np.array([2.0, 1.0, 0.0]) + 1e-8 * np.array([-1.0, -1.0, 5.0]) / np.sqrt(27)
        np.testing.assert_allclose(s.as_array(), want, rtol=0, atol=1e-22)

    def test_svk_direction(self, builtin):
        m = builtin("svk")
        assert gamma_fn(m, 1.0, 1.0) == pytest.approx(1.0)
        assert upsilon_fn(m, 1.0, 1.0) == pytest.approx(3.0)
        s = seed_unstable(m, 1.0, 1e-6)
        d = (s.as_array() - [1.0, 1.0, 0.0]) / 1e-6
        np.testing.assert_allclose(d, np.array([-0.5, -1.0, 5.0]) / np.linalg.norm([-0.5, -1, 5]), rtol=1e-9)

    def test_zero_eps_is_fixed_point(self, builtin):
        m = builtin("john")
        s = seed_unstable(m, 1.5, 0.0)
        orbit = integrate_orbit(m, s, stop="xi_span", xi_max=10.0)
        np.testing.assert_array_equal(orbit.final.as_array(), [1.5, 1.0, 0.0])

    def test_default_eps(self, builtin):
        s = seed_unstable(builtin("john"), 2.0)
        assert np.linalg.norm(s.as_array() - [2.0, 1.0, 0.0]) == pytest.approx(2e-8)

    def test_beyond_flat_threshold(self, builtin):
        with pytest.raises(InvalidParameterError):
            seed_unstable(builtin("svk"), 1.5)

    def test_seed_is_eigenvector(self, admissible):
        x_c = 0.9
        s = seed_unstable(admissible, x_c, 1e-7)
        f = vector_field_3d(admissible, s)
        d = s.as_array() - [x_c, 1.0, 0.0]
        lam = 2 * gamma_fn(admissible, x_c, 1.0)
        np.testing.assert_allclose(f, lam * d, rtol=1e-5, atol=1e-14)


class TestLineSpectrum:
    @pytest.mark.parametrize("x_c", [0.5, 1.0, 1.3])
    def test_matches_gamma_upsilon(self, admissible, x_c):
        rep = line_fixed_point_report(admissible, x_c)
        g, u = gamma_fn(admissible, x_c, 1.0), upsilon_fn(admissible, x_c, 1.0)
        got = sorted(e.real for e in rep.eigenvalues)
        np.testing.assert_allclose(got, sorted([-u, 0.0, 2 * g]), atol=1e-6)
        assert rep.classification == "nonhyperbolic"

    @pytest.mark.parametrize("eigs,label", [
        ([-1, -2], "sink"), ([1, 2], "source"), ([-1, 2], "saddle"), ([1e-12, -1], "nonhyperbolic"),
        ([-1 + 2j, -1 - 2j], "sink"),
    ])
    def test_classification(self, eigs, label):
        assert classify_eigenvalues(eigs) == label


class TestOrbits:
    def test_john_orbit_stays_in_region(self, builtin):
        m = builtin("john")
        orbit = integrate_orbit(m, seed_unstable(m, 2.0), stop="converge", tol_limit=1e-6)
        assert orbit.invariant and orbit.x_monotone
        assert np.all(orbit.states[1:, 1] < 1.0)
        y, v = terminal_point(m)
        assert np.linalg.norm(orbit.final.as_array() - [0.0, y, v]) < 1e-4

    @pytest.mark.parametrize("x_c", [1.05, 1.3])
    def test_admissible_orbits_converge(self, admissible, x_c):
        orbit = integrate_orbit(admissible, seed_unstable(admissible, x_c), stop="converge")
        assert orbit.event_xi is not None
        assert orbit.invariant
        y, v = terminal_point(admissible)
        assert np.linalg.norm(orbit.final.as_array() - [0.0, y, v]) < 1e-4

    def test_v_bounded(self, admissible):
        x_c = 1.2
        orbit = integrate_orbit(admissible, seed_unstable(admissible, x_c), stop="converge")
        xs, ys = np.meshgrid(np.linspace(0, x_c, 60), np.linspace(0, 1, 60))
        b = 4.0 if admissible.name == "svk" else 2.0
        D = np.max(b * np.abs(upsilon_fn(admissible, xs, ys)) + 2 * gamma_fn(admissible, xs, ys))
        assert np.max(orbit.states[:, 2]) < D / b * 1.01

    def test_stationary_at_p(self, builtin):
        m = builtin("svk")
        y, v = terminal_point(m)
        orbit = integrate_orbit(m, DynState(0.0, 0.0, y, v), stop="xi_span", xi_max=50.0)
        np.testing.assert_allclose(orbit.final.as_array(), [0.0, y, v], atol=1e-12)

    def test_pressure_event_found(self, builtin):
        m = builtin("svk")
        orbit = integrate_orbit(m, seed_unstable(m, 1.5 ** (1 / 3)), stop="p_rad")
        assert orbit.event_xi is not None
        u = orbit(orbit.event_xi)
        assert abs(m.p_rad_sum(u[0], u[1])) < 1e-8

    def test_unknown_stop(self, builtin):
        m = builtin("john")
        with pytest.raises(InvalidParameterError):
            integrate_orbit(m, seed_unstable(m, 1.2), stop="never")

    def test_trajectory_is_read_only(self, builtin):
        m = builtin("john")
        orbit = integrate_orbit(m, seed_unstable(m, 1.2), stop="p_rad")
        with pytest.raises(ValueError):
            orbit.states[0, 0] = 1.0


class TestRadius:
    def test_centre(self, builtin):
        assert radius_from_state(builtin("svk"), DynState(0.0, 1.2, 1.0, 0.0)) == 0.0

    @settings(max_examples=50, deadline=None)
    @given(r=st.floats(1e-3, 1e3), x=st.floats(0.05, 3.0), y=st.floats(0.05, 1.0))
    def test_round_trip(self, r, x, y):
        m = make_builtin("svk", LameParameters(1.0, 1.0))
        v = v_from_radius(m, r, x, y)
        assert radius_from_state(m, (x, y, v)) == pytest.approx(r, rel=1e-14)

    def test_domain(self, builtin):
        with pytest.raises(DomainError):
            radius_from_state(builtin("svk"), (0.0, 0.5, 1.0))

    def test_john_exact_profile(self):
        lame = LameParameters(1.0, 1.0)
        m = make_builtin("john", lame)
        ex = john_exact(lame)
        r = np.geomspace(1e-2, 1e2, 30)
        x = ex.eta(r) ** (1 / 3)
        y = ex.delta(r) / ex.eta(r)
        # v straight from its definition, a = -1, b = 2, lambda + 2 mu = 3
        v = 4 * np.pi / 9 * r**2 * x**5 * y**2
        np.testing.assert_allclose(radius_from_state(m, (x, y, v)), r, rtol=1e-13)

    def test_radius_increases_along_orbit(self, admissible):
        orbit = integrate_orbit(admissible, seed_unstable(admissible, 1.1), stop="converge")
        r = radius_from_state(admissible, orbit.states[1:].T)
        assert np.all(np.diff(r) > 0)


class TestBoundaryFlow:
    def test_terminal_points(self, builtin):
        y, v = terminal_point(builtin("john"))
        assert (y, v) == pytest.approx((0.6, 0.88))
        m = builtin("svk")
        y, v = terminal_point(m)
        assert y == pytest.approx(5 / 7)
        assert v == pytest.approx(2 / 7 * upsilon_fn(m, 0.0, 5 / 7))

    def test_fixed_points(self, admissible):
        pts = {p.label: p for p in fixed_points_2d(admissible)}
        assert {"P", "Q0", "Q1"} <= set(pts)
        for p in pts.values():
            np.testing.assert_allclose(boundary_field_2d(admissible, *p.location), 0.0, atol=1e-13)
        P = pts["P"]
        assert P.classification == "sink" and P.det > 0 and P.trace < 0
        det, tr = p_det_trace_closed_form(admissible)
        assert P.det == pytest.approx(det, rel=1e-8)
        assert P.trace == pytest.approx(tr, rel=1e-8)

    def test_john_fixed_point_values(self, builtin):
        pts = {p.label: p for p in fixed_points_2d(builtin("john"))}
        assert "Q2" not in pts
        assert pts["P"].det == pytest.approx(2 * 0.6 * 1.0 * 2.2)
        assert pts["P"].trace == pytest.approx(-2.6)

    def test_q2_condition(self, admissible):
        from elastoball.assumptions import classify_exponents

        e = classify_exponents(admissible)
        a, b = float(e.a), float(e.b)
        u0, g0 = upsilon_fn(admissible, 0.0, 0.0), gamma_fn(admissible, 0.0, 0.0)
        labels = [p.label for p in fixed_points_2d(admissible)]
        assert ("Q2" in labels) == (u0 > (a + 4) / b * g0)

    @pytest.mark.parametrize("y,v", [(0.3, 0.5), (0.7, 1.2), (0.5, 0.0), (0.0, 0.7)])
    def test_analytic_jacobian(self, admissible, y, v):
        fd = jacobian_fd(lambda u: boundary_field_2d(admissible, u[0], u[1]), [y, v], h=1e-6)
        np.testing.assert_allclose(jacobian_2d(admissible, y, v), fd, rtol=1e-6, atol=1e-6)

    def test_boundary_orbits_approach_p(self, admissible):
        y_s, v_s = terminal_point(admissible)
        _, y, v = sample_boundary_orbit(admissible, 0.5, 0.5 * v_s, xi_max=200.0)
        assert np.hypot(y[-1] - y_s, v[-1] - v_s) < 1e-6


class TestDulac:
    def test_john_by_hand(self, builtin):
        # phi = y^-3 / v = 8, expression 2 + y
        assert dulac_divergence(builtin("john"), 0.5, 1.0) == pytest.approx(-20.0)

    def test_near_centre_line(self, admissible):
        from elastoball.assumptions import classify_exponents

        b = float(classify_exponents(admissible).b)
        y, v = 1 - 1e-9, 2.0
        phi = y ** -(1 + b) / v
        want = -phi * upsilon_fn(admissible, 0.0, 1.0)
        assert dulac_divergence(admissible, y, v) == pytest.approx(want, rel=1e-7)

    def test_negative_on_grid(self, admissible):
        _, v_s = terminal_point(admissible)
        y, v = np.meshgrid(np.linspace(0, 1, 202)[1:-1], np.linspace(0, 5 * v_s, 201)[1:])
        assert np.all(dulac_divergence(admissible, y, v) < 0)
