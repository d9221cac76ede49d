"""The autonomous (x, y, v) system in the flow parameter xi, its fixed
points, and the two-dimensional boundary flow on ``x = 0``.

The variable ``v`` packs the radius into a bounded coordinate::

    v = 4 pi K^2 / (3 (lambda + 2 mu)) * r^2 * x^(6+a) * y^b

so that a regular centre is the line of fixed points ``L_c = {(x_c, 1, 0)}``
and the ball is the unstable manifold leaving that line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .assumptions import Rescaled, rescaled
from .constitutive import ConstitutiveModel
from .errors import DomainError, InvalidParameterError, StepSizeError, UnsupportedModelError

RTOL = 1e-10
ATOL = 1e-12
NONHYPERBOLIC_TOL = 1e-10


@dataclass(frozen=True)
class DynState:
    xi: float
    x: float
    y: float
    v: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.v], dtype=float)

    @classmethod
    def from_array(cls, u, xi: float = 0.0) -> "DynState":
        return cls(float(xi), float(u[0]), float(u[1]), float(u[2]))


@dataclass(frozen=True)
class FixedPointReport:
    label: str
    location: tuple[float, ...]
    eigenvalues: tuple[complex, ...]
    classification: str
    det: float | None = None
    trace: float | None = None


def _require_c_zero(resc: Rescaled):
    if resc.exponents.c != 0:
        raise UnsupportedModelError(
            f"the xi-system needs c = 0 (got c = {resc.exponents.c}); use the radial solver"
        )


def _coeffs(resc: Rescaled):
    return float(resc.exponents.a), float(resc.exponents.b)


def make_rhs(model: ConstitutiveModel):
    """Right-hand side ``f(xi, u)`` for scipy, with Gamma and Upsilon bound."""
    resc = rescaled(model)
    _require_c_zero(resc)
    a, b = _coeffs(resc)
    gamma, upsilon = resc.gamma, resc.upsilon

    def rhs(xi, u):
        x, y, v = u
        g = gamma(x, y)
        w = upsilon(x, y) * (1.0 - y) - v
        return np.array([
            -g * (1.0 - y) * x,
            w * y,
            (b * w + g * (2.0 - (6.0 + a) * (1.0 - y))) * v,
        ])

    return rhs


def vector_field_3d(model: ConstitutiveModel, state) -> np.ndarray:
    """``d(x, y, v)/dxi`` at a :class:`DynState` or an ``(x, y, v)`` triple."""
    u = state.as_array() if isinstance(state, DynState) else np.asarray(state, dtype=float)
    return make_rhs(model)(0.0, u)


def jacobian_fd(f, u, h: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian of ``f`` at ``u``."""
    u = np.asarray(u, dtype=float)
    n = u.size
    jac = np.empty((n, n))
    for k in range(n):
        step = h * max(1.0, abs(u[k]))
        e = np.zeros(n)
        e[k] = step
        jac[:, k] = (np.asarray(f(u + e)) - np.asarray(f(u - e))) / (2 * step)
    return jac


def classify_eigenvalues(eigs, tol: float = NONHYPERBOLIC_TOL) -> str:
    re = np.real(np.asarray(eigs))
    if np.any(np.abs(re) < tol):
        return "nonhyperbolic"
    if np.all(re < 0):
        return "sink"
    if np.all(re > 0):
        return "source"
    return "saddle"


def unstable_direction(model: ConstitutiveModel, x_c: float) -> np.ndarray:
    """Eigenvector for the eigenvalue ``2 Gamma(x_c, 1)`` on the line of centres."""
    resc = rescaled(model)
    return np.array([-x_c / 2.0, -1.0, 2.0 * resc.gamma(x_c, 1.0) + resc.upsilon(x_c, 1.0)])


def seed_unstable(model: ConstitutiveModel, x_c: float, eps: float | None = None,
                  x_flat: float | None = None) -> DynState:
    """Point at distance ``eps`` from ``(x_c, 1, 0)`` along the unstable eigenvector.

    ``eps`` defaults to ``1e-8 * x_c``.
    """
    resc = rescaled(model)
    _require_c_zero(resc)
    if x_flat is None:
        from .assumptions import find_x_flat
        x_flat = find_x_flat(model)
    if not 0 < x_c < x_flat:
        raise InvalidParameterError(f"x_c = {x_c} outside (0, X_flat = {x_flat})")
    g, u = resc.gamma(x_c, 1.0), resc.upsilon(x_c, 1.0)
    if not (g > 0 and u > 0):
        raise InvalidParameterError(f"Gamma = {g}, Upsilon = {u} at (x_c, 1) must be positive")
    eps = 1e-8 * x_c if eps is None else eps
    if eps < 0:
        raise InvalidParameterError("eps must be non-negative")
    e3 = unstable_direction(model, x_c)
    # e3 already points into v > 0, y < 1
    u0 = np.array([x_c, 1.0, 0.0]) + eps * e3 / np.linalg.norm(e3)
    return DynState.from_array(u0)


def line_fixed_point_report(model: ConstitutiveModel, x_c: float) -> FixedPointReport:
    """Spectrum at ``(x_c, 1, 0)``; expected ``{0, -Upsilon, 2 Gamma}``."""
    rhs = make_rhs(model)
    jac = jacobian_fd(lambda u: rhs(0.0, u), [x_c, 1.0, 0.0])
    eigs = np.linalg.eigvals(jac)
    eigs = eigs[np.argsort(eigs.real)]
    return FixedPointReport("Lc", (x_c, 1.0, 0.0), tuple(complex(e) for e in eigs),
                            classify_eigenvalues(eigs))


# -- orbit integration -------------------------------------------------------

@dataclass(frozen=True)
class OrbitTrajectory:
    """Accepted steps of an orbit plus its dense interpolant.

    ``states`` has shape ``(n, 3)`` holding ``(x, y, v)``.
    """

    xi: np.ndarray
    states: np.ndarray
    dense: object = field(repr=False)
    stop: str
    event_xi: float | None
    invariance_violations: tuple[str, ...]
    x_monotone: bool

    def __call__(self, xi):
        return self.dense(xi)

    @property
    def final(self) -> DynState:
        return DynState.from_array(self.states[-1], self.xi[-1])

    @property
    def invariant(self) -> bool:
        return not self.invariance_violations


def terminal_point(model: ConstitutiveModel) -> tuple[float, float]:
    """``(y*, v*)``, the limit of every orbit as r grows without bound."""
    resc = rescaled(model)
    a, _ = _coeffs(resc)
    y_star = (a + 4.0) / (a + 6.0)
    return y_star, float(2.0 * resc.upsilon0(y_star) / (a + 6.0))


def _check_invariance(states, x_c):
    msgs = []
    x, y, v = states[1:].T
    if np.any(x <= 0):
        msgs.append("x <= 0")
    if np.any(x >= x_c):
        msgs.append("x >= x_c")
    if np.any((y <= 0) | (y >= 1)):
        msgs.append("y outside (0, 1)")
    if np.any(v < 0):
        msgs.append("v < 0")
    return tuple(msgs)


def integrate_orbit(model: ConstitutiveModel, seed: DynState, stop: str = "p_rad",
                    xi_max: float = 2000.0, rtol: float = RTOL, atol: float = ATOL,
                    tol_limit: float = 1e-6) -> OrbitTrajectory:
    """Integrate from ``seed`` with DOP853 and dense output.

    ``stop`` is ``"p_rad"`` (first downward zero of the radial pressure),
    ``"converge"`` (within ``tol_limit`` of the terminal point) or
    ``"xi_span"`` (run to ``xi_max``).
    """
    rhs = make_rhs(model)
    u0 = seed.as_array()
    events = None
    if stop == "p_rad":
        def ev(xi, u):
            return model.p_rad_sum(u[0], u[1])
        ev.terminal, ev.direction = True, -1
        events = [ev]
    elif stop == "converge":
        y_star, v_star = terminal_point(model)
        target = np.array([0.0, y_star, v_star])

        def ev(xi, u):
            return np.linalg.norm(u - target) - tol_limit
        ev.terminal, ev.direction = True, -1
        events = [ev]
    elif stop != "xi_span":
        raise InvalidParameterError(f"unknown stopping rule {stop!r}")

    if np.allclose(rhs(0.0, u0), 0.0, atol=0.0, rtol=0.0):
        xi = np.array([seed.xi, seed.xi + xi_max])
        states = np.vstack([u0, u0])
        return OrbitTrajectory(xi, states, lambda t: np.broadcast_to(u0, np.shape(t) + (3,)).T.copy(),
                               stop, None, (), True)

    sol = solve_ivp(rhs, (seed.xi, seed.xi + xi_max), u0, method="DOP853", rtol=rtol,
                    atol=atol, dense_output=True, events=events)
    if sol.status == -1:
        raise StepSizeError(sol.message, DynState.from_array(sol.y[:, -1], sol.t[-1]))
    states = sol.y.T.copy()
    event_xi = None
    if events is not None and sol.t_events[0].size:
        event_xi = float(sol.t_events[0][0])
    viol = _check_invariance(states, u0[0] + 1e-300) if states.shape[0] > 1 else ()
    xs = states[:, 0]
    mono = bool(np.all(np.diff(xs) < 0)) if xs.size > 1 else True
    for arr in (sol.t, states):
        arr.setflags(write=False)
    return OrbitTrajectory(sol.t, states, sol.sol, stop, event_xi, viol, mono)


def radius_from_state(model: ConstitutiveModel, state, kappa_ref: float | None = None):
    """Invert the definition of ``v`` for r; vectorised over arrays of states."""
    resc = rescaled(model)
    a, b = _coeffs(resc)
    K = model.lame.kappa_ref if kappa_ref is None else kappa_ref
    if isinstance(state, DynState):
        x, y, v = state.x, state.y, state.v
    else:
        x, y, v = np.asarray(state, dtype=float)
    x, y, v = (np.asarray(t, dtype=float) for t in (x, y, v))
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("radius is undefined for x <= 0 or y <= 0")
    r2 = 3.0 * model.lame.longitudinal * v / (4.0 * np.pi * K**2) * x ** (-(6.0 + a)) * y ** (-b)
    return np.sqrt(np.maximum(r2, 0.0))[()]


def v_from_radius(model: ConstitutiveModel, r, x, y, kappa_ref: float | None = None):
    resc = rescaled(model)
    a, b = _coeffs(resc)
    K = model.lame.kappa_ref if kappa_ref is None else kappa_ref
    r, x, y = (np.asarray(t, dtype=float) for t in (r, x, y))
    return (4.0 * np.pi * K**2 / (3.0 * model.lame.longitudinal) * r**2 * x ** (6.0 + a) * y**b)[()]


# -- boundary flow on x = 0 --------------------------------------------------

def boundary_field_2d(model: ConstitutiveModel, y, v):
    """``d(y, v)/dxi`` of the flow restricted to ``x = 0``."""
    resc = rescaled(model)
    _require_c_zero(resc)
    a, b = _coeffs(resc)
    y, v = np.asarray(y, dtype=float), np.asarray(v, dtype=float)
    w = resc.upsilon0(y) * (1.0 - y) - v
    return np.stack([w * y, (b * w + resc.gamma0(y) * (2.0 - (6.0 + a) * (1.0 - y))) * v])


def jacobian_2d(model: ConstitutiveModel, y: float, v: float) -> np.ndarray:
    """Closed-form Jacobian of the boundary field."""
    resc = rescaled(model)
    a, b = _coeffs(resc)
    u0, g0 = float(resc.upsilon0(y)), float(resc.gamma0(y))
    w = u0 * (1 - y) - v
    s = 2 - (6 + a) * (1 - y)
    j11 = w if y == 0 else (float(resc.upsilon0_prime(y)) * (1 - y) - u0) * y + w
    if v == 0:
        j21 = 0.0
    else:
        du0 = float(resc.upsilon0_prime(y))
        dg0 = float(resc.gamma.d_dy()(0.0, y)) if resc.gamma.d_dy() else 0.0
        j21 = (b * (du0 * (1 - y) - u0) + dg0 * s + (6 + a) * g0) * v
    j22 = b * w + g0 * s - b * v
    return np.array([[j11, -y], [j21, j22]])


def _report(model, label, y, v, with_det=False):
    jac = jacobian_2d(model, y, v)
    eigs = np.linalg.eigvals(jac)
    eigs = eigs[np.argsort(eigs.real)]
    return FixedPointReport(
        label, (float(y), float(v)), tuple(complex(e) for e in eigs), classify_eigenvalues(eigs),
        det=float(np.linalg.det(jac)) if with_det else None,
        trace=float(np.trace(jac)) if with_det else None,
    )


def fixed_points_2d(model: ConstitutiveModel) -> list[FixedPointReport]:
    """P, Q0, Q1 and, when it lies in the quadrant, Q2."""
    resc = rescaled(model)
    _require_c_zero(resc)
    a, b = _coeffs(resc)
    y_star, v_star = terminal_point(model)
    out = [_report(model, "P", y_star, v_star, with_det=True),
           _report(model, "Q0", 0.0, 0.0),
           _report(model, "Q1", 1.0, 0.0)]
    u00, g00 = float(resc.upsilon0(0.0)), float(resc.gamma0(0.0))
    if u00 > (a + 4.0) * g00 / b:
        out.append(_report(model, "Q2", 0.0, u00 - (a + 4.0) * g00 / b))
    return out


def p_det_trace_closed_form(model: ConstitutiveModel) -> tuple[float, float]:
    """Determinant and trace at P from their closed forms."""
    resc = rescaled(model)
    _, b = _coeffs(resc)
    y, _ = terminal_point(model)
    u0, g0, du0 = (float(f(y)) for f in (resc.upsilon0, resc.gamma0, resc.upsilon0_prime))
    det = 2.0 * y * g0 * u0
    trace = -((b * u0 - y * du0) * (1 - y) + y * u0)
    return det, trace


def dulac_divergence(model: ConstitutiveModel, y, v):
    """Divergence of ``phi F`` with ``phi = y^-(1+b) / v``."""
    from .assumptions import dulac_expression
    resc = rescaled(model)
    _, b = _coeffs(resc)
    y, v = np.asarray(y, dtype=float), np.asarray(v, dtype=float)
    phi = y ** (-(1.0 + b)) / v
    return (-phi * dulac_expression(model, y))[()]


def sample_boundary_orbit(model: ConstitutiveModel, y0: float, v0: float, xi_max: float = 50.0,
                          n: int = 200, rtol: float = RTOL, atol: float = ATOL):
    """Trajectory of the boundary flow sampled at ``n`` equally spaced xi."""
    def rhs(xi, u):
        return boundary_field_2d(model, u[0], u[1])

    xi = np.linspace(0.0, xi_max, n)
    sol = solve_ivp(rhs, (0.0, xi_max), [y0, v0], method="DOP853", rtol=rtol, atol=atol, t_eval=xi)
    if sol.status == -1:
        raise StepSizeError(sol.message, DynState(float(sol.t[-1]), 0.0, *sol.y[:, -1]))
    return sol.t, sol.y[0], sol.y[1]
