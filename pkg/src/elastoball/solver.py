"""Static self-gravitating elastic balls.

Two independent constructions are provided:

* :func:`solve_ball` shoots along the unstable manifold of the xi-system and
  stops where the radial pressure first vanishes;
* :func:`solve_ball_radial` integrates the structure equations directly in r
  from a second-order centre expansion.

Units have G = 1 and the potential vanishes at infinity.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import make_interp_spline
from scipy.optimize import bisect

from .assumptions import ModelCertificate, certify, rescaled
from .constitutive import ConstitutiveModel, chi, p_iso
from .dynsys import (
    DynState,
    integrate_orbit,
    radius_from_state,
    seed_unstable,
    terminal_point,
)
from .errors import (
    AssumptionError,
    ElastoballError,
    HyperbolicityLossError,
    InvalidParameterError,
    NoCrossingError,
    StepSizeError,
    WindowError,
)

FOUR_PI_3 = 4.0 * np.pi / 3.0


@dataclass(frozen=True)
class SolveOptions:
    """Tolerances and switches shared by both solvers.

    ``eps`` is the seed distance relative to ``x_c``.  ``method`` is
    ``"auto"``, ``"xi"`` or ``"radial"``.
    """

    rtol: float = 1e-10
    atol: float = 1e-12
    eps: float = 1e-8
    n_grid: int = 2000
    experimental: bool = False
    xi_max: float = 2000.0
    r_max: float | None = None
    method: str = "auto"
    event_rtol: float = 1e-15
    event_maxiter: int = 80

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0 and self.eps >= 0):
            raise InvalidParameterError("tolerances must be positive")
        if self.n_grid < 50:
            raise InvalidParameterError("n_grid must be at least 50")
        if self.method not in ("auto", "xi", "radial"):
            raise InvalidParameterError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class BallSolution:
    """Radial profiles of a ball on ``[0, R]``; arrays are read-only."""

    r_grid: np.ndarray
    delta: np.ndarray
    eta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    m: np.ndarray
    p_rad: np.ndarray
    p_tan: np.ndarray
    phi: np.ndarray
    R: float
    M: float
    rho_c: float
    kappa_ref: float
    model_name: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("r_grid", "delta", "eta", "x", "y", "m", "p_rad", "p_tan", "phi"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def rho(self) -> np.ndarray:
        return self.kappa_ref * self.delta

    @property
    def delta_c(self) -> float:
        return self.rho_c / self.kappa_ref

    COLUMNS = ("r", "delta", "eta", "x", "y", "m", "p_rad", "p_tan", "phi")

    def columns(self) -> np.ndarray:
        return np.column_stack([self.r_grid, self.delta, self.eta, self.x, self.y,
                                self.m, self.p_rad, self.p_tan, self.phi])


@lru_cache(maxsize=64)
def model_certificate(model: ConstitutiveModel) -> ModelCertificate:
    return certify(model)


def _target_fractions(n: int, s_min: float = 1e-4, gap: float = 1e-7) -> np.ndarray:
    """Points in (0, 1] log-dense towards both ends."""
    half = n // 2
    inner = np.geomspace(s_min, 0.5, half, endpoint=False)
    outer = 1.0 - np.geomspace(gap, 0.5, n - half - 1)[::-1]
    return np.unique(np.concatenate([inner, outer, [1.0]]))


def _refine_event(f, lo: float, hi: float, rtol: float, maxiter: int) -> float:
    """Bisection for the downward zero of ``f`` in ``[lo, hi]``, nudging ``hi`` if needed."""
    flo = f(lo)
    if flo <= 0:
        raise NoCrossingError("event bracket does not start with positive pressure")
    width = hi - lo
    for _ in range(60):
        fhi = f(hi)
        if fhi <= 0:
            break
        hi += 1e-9 * width
        width *= 2
    else:
        raise NoCrossingError("could not bracket the pressure zero")
    if fhi == 0:
        return hi
    return bisect(f, lo, hi, xtol=1e-300, rtol=rtol, maxiter=maxiter, disp=False)


def _finish(model, r, x, y, phi, rho_c, K, metadata) -> BallSolution:
    eta = x**3
    delta = y * eta
    m = FOUR_PI_3 * K * eta * r**3
    p_rad = model.p_rad_sum(x, y)
    p_tan = model.p_tan_sum(x, y)
    return BallSolution(
        r_grid=r, delta=delta, eta=eta, x=x, y=y, m=m, p_rad=p_rad, p_tan=p_tan, phi=phi,
        R=float(r[-1]), M=float(m[-1]), rho_c=rho_c, kappa_ref=K, model_name=model.name,
        metadata=metadata,
    )


# Assumptions used only by the xi-construction; the radial solver does not need them.
XI_ONLY_ASSUMPTIONS = frozenset({"A3", "A4", "A5ii", "A6"})
# Models whose ball existence is an open problem; solved only with ``experimental``.
OPEN_EXISTENCE = frozenset({"signorini"})


def _check_window(cert: ModelCertificate, delta_c: float, opts: SolveOptions) -> list[str]:
    """Raise unless the run is covered; return the advisory failures."""
    if opts.experimental:
        return list(cert.failures)
    if not 1.0 < delta_c < cert.delta_max:
        raise WindowError(f"delta_c = {delta_c} outside (1, {cert.delta_max})")
    if cert.model_name in OPEN_EXISTENCE:
        raise AssumptionError(f"existence of {cert.model_name!r} balls is open; use experimental")
    fatal = [f for f in cert.failures if f not in XI_ONLY_ASSUMPTIONS]
    if fatal:
        raise AssumptionError(f"model {cert.model_name!r} fails {', '.join(fatal)}")
    return list(cert.failures)


def solve_ball(model: ConstitutiveModel, rho_c: float, kappa_ref: float | None = None,
               opts: SolveOptions | None = None) -> BallSolution:
    """Regular ball with central density ``rho_c``.

    Raises :class:`WindowError` or :class:`AssumptionError` unless
    ``opts.experimental``.  Models with ``c != 0`` or failing the sign
    conditions go to :func:`solve_ball_radial`; their failures of the
    xi-only assumptions are recorded in ``metadata["advisory"]``.
    """
    opts = opts or SolveOptions()
    K = model.lame.kappa_ref if kappa_ref is None else float(kappa_ref)
    if not (rho_c > 0 and K > 0):
        raise InvalidParameterError("rho_c and kappa_ref must be positive")
    delta_c = rho_c / K
    cert = model_certificate(model)
    advisory = _check_window(cert, delta_c, opts)
    exps = cert.exponents
    x_c = delta_c ** (1.0 / 3.0)
    if (opts.method == "radial" or exps is None or not exps.admissible
            or not x_c < cert.x_flat):
        if opts.method == "xi":
            raise InvalidParameterError("xi-shooting unavailable for this model or delta_c")
        sol = solve_ball_radial(model, rho_c, K, opts)
        sol.metadata["advisory"] = advisory
        return sol
    return _solve_xi(model, rho_c, K, opts, cert)


def _solve_xi(model, rho_c, K, opts, cert) -> BallSolution:
    resc = rescaled(model)
    a, b = float(resc.exponents.a), float(resc.exponents.b)
    delta_c = rho_c / K
    x_c = delta_c ** (1.0 / 3.0)
    eps = opts.eps * x_c
    seed = seed_unstable(model, x_c, eps, x_flat=cert.x_flat)
    # the seed offsets are O(eps); an absolute tolerance above rtol * eps would ignore them
    atol = min(opts.atol, opts.rtol * eps) if eps > 0 else opts.atol
    orbit = integrate_orbit(model, seed, stop="p_rad", xi_max=opts.xi_max,
                            rtol=opts.rtol, atol=atol)
    if orbit.event_xi is None:
        y_star, v_star = terminal_point(model)
        raise NoCrossingError(
            "radial pressure stayed positive along the orbit",
            {"final_state": orbit.final, "terminal_point": (0.0, y_star, v_star),
             "xi_end": float(orbit.xi[-1])},
        )
    dense = orbit.dense

    def p_of_xi(xi):
        u = dense(xi)
        return float(model.p_rad_sum(u[0], u[1]))

    lo = float(orbit.xi[-2]) if orbit.xi.size > 1 else 0.0
    xi_R = _refine_event(p_of_xi, lo, orbit.event_xi, opts.event_rtol, opts.event_maxiter)

    def gravity(xi, phi):
        u = dense(xi)
        r = radius_from_state(model, u, K)
        return [FOUR_PI_3 * K * u[0] ** 3 * r * r * resc.gamma(u[0], u[1])]

    # Potential offset accumulated along the orbit from the seed
    pot = solve_ivp(gravity, (0.0, xi_R), [0.0], method="DOP853", rtol=opts.rtol,
                    atol=atol * 1e-2, dense_output=True)

    # Invert r(xi) on a fine table, then evaluate states exactly at the chosen xi
    xi_f = np.unique(np.concatenate([np.linspace(0.0, xi_R, 8001), orbit.xi[orbit.xi < xi_R]]))
    u_f = dense(xi_f)
    r_f = radius_from_state(model, u_f, K)
    if np.any(np.diff(r_f) <= 0):
        raise ElastoballError("r(xi) is not strictly increasing along the orbit")
    R = float(r_f[-1])
    r_seed = float(r_f[0])
    targets = R * _target_fractions(opts.n_grid - 1)

    outer_t = targets[targets > r_seed]
    xi_out = np.interp(np.log(outer_t), np.log(r_f), xi_f)
    xi_out[-1] = xi_R
    xi_out = np.unique(xi_out)
    u_out = dense(xi_out)
    r_out = radius_from_state(model, u_out, K)
    phi_tilde_out = pot.sol(xi_out)[0]

    # Below the seed, the unstable manifold is tangent to e3 and v ~ r^2
    inner_r = targets[targets <= r_seed]
    u_c = np.array([x_c, 1.0, 0.0])
    u_s = seed.as_array()
    t = (inner_r / r_seed) ** 2
    u_in = u_c[:, None] + t[None, :] * (u_s - u_c)[:, None]

    r = np.concatenate([[0.0], inner_r, r_out])
    x = np.concatenate([[x_c], u_in[0], u_out[0]])
    y = np.concatenate([[1.0], u_in[1], u_out[1]])

    M = FOUR_PI_3 * K * x[-1] ** 3 * R**3
    phi_seed = -M / R - (pot.sol(xi_R)[0] - 0.0)
    phi_in = phi_seed - 0.5 * FOUR_PI_3 * K * delta_c * (r_seed**2 - np.concatenate([[0.0], inner_r]) ** 2)
    phi = np.concatenate([phi_in, -M / R - (pot.sol(xi_R)[0] - phi_tilde_out)])

    meta = {
        "method": "xi", "rtol": opts.rtol, "atol": atol, "eps": eps, "x_c": x_c,
        "xi_R": xi_R, "r_start": r_seed, "n_steps": int(orbit.xi.size),
        "invariance_violations": list(orbit.invariance_violations),
        "x_monotone": orbit.x_monotone, "a": a, "b": b,
    }
    return _finish(model, r, x, y, phi, rho_c, K, meta)


# -- direct radial integration ----------------------------------------------

def center_coefficients(model: ConstitutiveModel, delta_c: float, kappa_ref: float):
    """``(delta_2, eta_2)`` with ``delta ~ delta_c + delta_2 r^2`` at the centre."""
    x_c = delta_c ** (1.0 / 3.0)
    ddelta = float(model.dy_rad(x_c, 1.0)) / delta_c
    if ddelta <= 0:
        raise HyperbolicityLossError(f"d p_rad / d delta = {ddelta} <= 0 at the centre")
    d2 = -(2.0 * np.pi / 3.0) * kappa_ref**2 * delta_c**2 / ddelta
    return d2, 0.6 * d2


def radial_rhs(model: ConstitutiveModel, kappa_ref: float):
    """Right-hand side in r for ``(delta, eta, psi)`` with ``psi' = m / r^2``."""
    K2 = kappa_ref**2
    dx_rad, dy_rad, th = model.dx_rad, model.dy_rad, model.theta_quotient

    def rhs(r, u):
        delta, eta, _ = u
        x = np.cbrt(eta)
        y = delta / eta
        dyr = dy_rad(x, y)
        ddelta = dyr / eta
        deta = dx_rad(x, y) / (3.0 * x * x) - y / eta * dyr
        e = delta - eta
        # p_rad - p_tan = (e / eta) Theta keeps full precision near the centre
        aniso = e / eta * th(x, y)
        d_delta = (-(3.0 / r) * deta * e - (2.0 / r) * aniso - FOUR_PI_3 * K2 * r * delta * eta) / ddelta
        return [d_delta, 3.0 * e / r, FOUR_PI_3 * kappa_ref * eta * r]

    return rhs


def solve_ball_radial(model: ConstitutiveModel, rho_c: float, kappa_ref: float | None = None,
                      opts: SolveOptions | None = None) -> BallSolution:
    """Integrate the structure equations in r from the centre expansion."""
    opts = opts or SolveOptions()
    K = model.lame.kappa_ref if kappa_ref is None else float(kappa_ref)
    delta_c = rho_c / K
    if not (rho_c > 0 and K > 0):
        raise InvalidParameterError("rho_c and kappa_ref must be positive")
    d2, e2 = center_coefficients(model, delta_c, K)
    r0 = np.sqrt(1e-8 * delta_c / abs(d2))
    length = np.sqrt(delta_c / abs(d2))
    r_max = opts.r_max if opts.r_max is not None else 1e4 * length
    u0 = [delta_c + d2 * r0**2, delta_c + e2 * r0**2, 0.5 * FOUR_PI_3 * K * delta_c * r0**2]
    rhs = radial_rhs(model, K)

    def ev_pressure(r, u):
        return model.p_rad_sum(np.cbrt(u[1]), u[0] / u[1])
    ev_pressure.terminal, ev_pressure.direction = True, -1

    def ev_hyper(r, u):
        return model.dy_rad(np.cbrt(u[1]), u[0] / u[1])
    ev_hyper.terminal, ev_hyper.direction = True, -1

    def ev_density(r, u):
        return u[0]
    ev_density.terminal, ev_density.direction = True, -1

    if ev_pressure(r0, u0) <= 0:
        raise NoCrossingError("central radial pressure is not positive", {"delta_c": delta_c})
    sol = solve_ivp(rhs, (r0, r_max), u0, method="DOP853", rtol=opts.rtol, atol=opts.atol,
                    dense_output=True, events=[ev_pressure, ev_hyper, ev_density])
    if sol.status == -1:
        raise StepSizeError(sol.message, DynState(float(sol.t[-1]), float(np.cbrt(sol.y[1, -1])),
                                                  float(sol.y[0, -1] / sol.y[1, -1]), float("nan")))
    hit = [ev.size > 0 for ev in sol.t_events]
    if hit[1] and not hit[0]:
        raise HyperbolicityLossError(f"d p_rad / d delta vanished at r = {sol.t_events[1][0]}")
    if not hit[0]:
        raise NoCrossingError("radial pressure stayed positive up to r_max",
                              {"r_max": r_max, "final": sol.y[:, -1].tolist()})

    def p_of_r(r):
        return float(ev_pressure(r, sol.sol(r)))

    lo = float(sol.t[-2]) if sol.t.size > 1 else r0
    R = _refine_event(p_of_r, lo, float(sol.t_events[0][0]), opts.event_rtol, opts.event_maxiter)

    targets = R * _target_fractions(opts.n_grid - 1)
    targets[-1] = R
    inner = targets[targets < r0]
    outer = targets[targets >= r0]
    u_out = sol.sol(outer)
    delta_in = delta_c + d2 * inner**2
    eta_in = delta_c + e2 * inner**2
    psi_in = 0.5 * FOUR_PI_3 * K * delta_c * inner**2

    r = np.concatenate([[0.0], inner, outer])
    delta = np.concatenate([[delta_c], delta_in, u_out[0]])
    eta = np.concatenate([[delta_c], eta_in, u_out[1]])
    psi = np.concatenate([[0.0], psi_in, u_out[2]])
    x = np.cbrt(eta)
    y = delta / eta
    M = FOUR_PI_3 * K * eta[-1] * R**3
    phi = -M / R - (psi[-1] - psi)
    meta = {"method": "radial", "rtol": opts.rtol, "atol": opts.atol, "r_start": float(r0),
            "delta_2": d2, "eta_2": e2, "n_steps": int(sol.t.size)}
    return _finish(model, r, x, y, phi, rho_c, K, meta)


# -- verification -------------------------------------------------------------

@dataclass(frozen=True)
class BoundsReport:
    """Smallest relative margin of each inequality over ``(0, R]``."""

    hyperbolicity: float
    density: float
    mass_lower: float
    mass_upper: float
    p_rad_interior: float
    p_tan_interior: float
    surface_pressure: float

    @property
    def worst(self) -> float:
        return min(self.hyperbolicity, self.density, self.mass_lower, self.mass_upper)

    @property
    def ok(self) -> bool:
        return self.worst > 0 and self.p_rad_interior > 0 and self.p_tan_interior > 0


def verify_bounds(sol: BallSolution, model: ConstitutiveModel | None = None) -> BoundsReport:
    """Worst margins of the a-priori bounds at every grid point with r > 0.

    With a model, the hyperbolicity margin is d p_rad / d delta; otherwise it
    is estimated from the stored profiles.
    """
    r = sol.r_grid
    sel = r > 0
    rho, K, rho_c = sol.rho[sel], sol.kappa_ref, sol.rho_c
    rr, m = r[sel], sol.m[sel]
    if model is not None:
        hyp = model.dy_rad(sol.x[sel], sol.y[sel]) / sol.eta[sel]
        hyp_margin = float(np.min(hyp))
    else:
        hyp_margin = float("nan")
    ball = FOUR_PI_3 * rr**3
    density = (rho_c - rho) / rho_c
    lower = (m - ball * np.maximum(rho, K)) / m
    upper = (ball * rho_c - m) / m
    interior = r < sol.R
    scale = max(abs(float(sol.p_rad[0])), np.finfo(float).tiny)
    return BoundsReport(
        hyperbolicity=hyp_margin,
        density=float(np.min(density)),
        mass_lower=float(np.min(lower)),
        mass_upper=float(np.min(upper)),
        p_rad_interior=float(np.min(sol.p_rad[interior])),
        p_tan_interior=float(np.min(sol.p_tan[interior])),
        surface_pressure=float(abs(sol.p_rad[-1]) / scale),
    )


@dataclass(frozen=True)
class CenterReport:
    slope_ddelta: float
    slope_anisotropy: float
    chi_center: float
    deta_piso_center: float
    n_points: int

    @property
    def ok(self) -> bool:
        return (0.9 <= self.slope_ddelta <= 1.1 and 1.9 <= self.slope_anisotropy <= 2.1
                and abs(self.chi_center) < 1e-8 and abs(self.deta_piso_center) < 1e-5)


def verify_center_regularity(sol: BallSolution, model: ConstitutiveModel | None = None,
                             fraction: float = 0.1) -> CenterReport:
    """Fit the decay rates of ``delta'`` and ``delta - eta`` at the centre.

    Only integrated points are fitted: the segment below the starting radius
    is an analytic expansion and would fit its own exponent trivially.
    """
    r = sol.r_grid
    r_lo = 2.0 * sol.metadata.get("r_start", 0.0)
    sel = (r > r_lo) & (r < fraction * sol.R)
    n = int(np.count_nonzero(sel))
    if n < 20:
        warnings.warn(f"only {n} points below {fraction} R; centre fit is unreliable", RuntimeWarning)
    ddelta = np.gradient(sol.delta, r)
    aniso = (1.0 - sol.y) * sol.eta
    lr = np.log(r[sel])
    s1 = float(np.polyfit(lr, np.log(np.abs(ddelta[sel])), 1)[0]) if n >= 2 else float("nan")
    s2 = float(np.polyfit(lr, np.log(np.abs(aniso[sel])), 1)[0]) if n >= 2 else float("nan")
    chi_c = piso_c = float("nan")
    if model is not None:
        dc = sol.delta_c
        h = 1e-6 * dc
        chi_c = float(chi(model, dc))
        piso_c = float((p_iso(model, dc, dc + h) - p_iso(model, dc, dc - h)) / (2 * h))
    return CenterReport(s1, s2, chi_c, piso_c, n)


@dataclass(frozen=True)
class AsymptoticsReport:
    exponent: float
    expected_exponent: float
    y_end: float
    v_end: float
    y_star: float
    v_star: float
    r_end: float

    @property
    def terminal_distance(self) -> float:
        return float(np.hypot(self.y_end - self.y_star, self.v_end - self.v_star))


def continue_to_vacuum(model: ConstitutiveModel, rho_c: float, kappa_ref: float | None = None,
                       xi_span: float = 2000.0, opts: SolveOptions | None = None,
                       tol_limit: float = 1e-9) -> AsymptoticsReport:
    """Follow the orbit past the surface towards P and fit ``log x`` against ``log r``."""
    opts = opts or SolveOptions()
    K = model.lame.kappa_ref if kappa_ref is None else float(kappa_ref)
    resc = rescaled(model)
    a = float(resc.exponents.a)
    x_c = (rho_c / K) ** (1.0 / 3.0)
    seed_eps = opts.eps * x_c
    seed = seed_unstable(model, x_c, seed_eps)
    atol = min(opts.atol, opts.rtol * seed_eps) if seed_eps > 0 else opts.atol
    orbit = integrate_orbit(model, seed, stop="converge", xi_max=xi_span, rtol=opts.rtol,
                            atol=atol, tol_limit=tol_limit)
    xi_end = float(orbit.xi[-1])
    xi_tail = np.linspace(0.8 * xi_end, xi_end, 400)
    u = orbit.dense(xi_tail)
    r = radius_from_state(model, u, K)
    slope = float(np.polyfit(np.log(r), np.log(u[0]), 1)[0])
    y_star, v_star = terminal_point(model)
    return AsymptoticsReport(slope, -2.0 / (6.0 + a), float(u[1, -1]), float(u[2, -1]),
                             y_star, v_star, float(r[-1]))


# -- sweeps and residuals ----------------------------------------------------

@dataclass(frozen=True)
class SweepRecord:
    delta_c: float
    R: float = float("nan")
    M: float = float("nan")
    p_rad_center: float = float("nan")
    worst_margin: float = float("nan")
    error: str | None = None


def _sweep_one(args) -> SweepRecord:
    model, delta_c, K, opts = args
    try:
        sol = solve_ball(model, delta_c * K, K, opts)
        rep = verify_bounds(sol, model)
        return SweepRecord(delta_c, sol.R, sol.M, float(sol.p_rad[0]), rep.worst)
    except ElastoballError as exc:
        return SweepRecord(delta_c, error=f"{type(exc).__name__}: {exc}")


def sweep(model: ConstitutiveModel, delta_c_list, kappa_ref: float | None = None,
          opts: SolveOptions | None = None, workers: int | None = None) -> list[SweepRecord]:
    """Mass-radius table, one record per central density in input order."""
    K = model.lame.kappa_ref if kappa_ref is None else float(kappa_ref)
    jobs = [(model, float(d), K, opts or SolveOptions()) for d in delta_c_list]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs))
    return [_sweep_one(j) for j in jobs]


def _log_derivative(r, f):
    """``df/dr`` from a quintic interpolating spline in ``log r``."""
    spl = make_interp_spline(np.log(r), f, k=5)
    return spl(np.log(r), 1) / r


def _scaled(residual, *terms):
    """``|residual|`` over the largest term magnitude on the whole grid.

    A pointwise scale would divide integrator noise by terms that vanish
    linearly at the centre.
    """
    scale = float(np.max(np.abs(np.vstack(terms))))
    if scale == 0.0:
        return np.zeros_like(residual)
    return np.abs(residual) / scale


def profile_residuals(r, rho, m, p_rad, p_tan, phi) -> dict:
    """Scaled residuals of the momentum, potential and mass equations."""
    r, rho, m, p_rad, p_tan, phi = (np.asarray(t, dtype=float) for t in (r, rho, m, p_rad, p_tan, phi))
    dp = _log_derivative(r, p_rad)
    dphi = _log_derivative(r, phi)
    dm = _log_derivative(r, m)
    aniso = (2.0 / r) * (p_rad - p_tan)
    grav = rho * m / r**2
    return {
        "momentum": _scaled(dp + aniso + grav, dp, aniso, grav),
        "potential": _scaled(dphi - m / r**2, dphi, m / r**2),
        "mass": _scaled(dm - 4 * np.pi * rho * r**2, dm, 4 * np.pi * rho * r**2),
    }


def _thin(log_r, min_step: float) -> np.ndarray:
    """Indices keeping successive ``log r`` at least ``min_step`` apart, last point kept."""
    keep = [0]
    for i in range(1, log_r.size):
        if log_r[i] - log_r[keep[-1]] >= min_step:
            keep.append(i)
    if keep[-1] != log_r.size - 1:
        keep[-1] = log_r.size - 1
    return np.asarray(keep)


def residual_report(model: ConstitutiveModel, sol: BallSolution, trim: int = 2,
                    min_log_step: float = 1e-5) -> dict:
    """Max scaled residual per equation on the interior grid.

    Pressures are recomputed from ``model`` so a profile paired with the
    wrong material shows up.  ``trim`` points at each end are skipped
    because spline end conditions are one-sided there.  Points closer than
    ``min_log_step`` in ``log r`` are dropped first: differentiating across
    such gaps amplifies rounding of the profiles beyond the tolerances checked.
    """
    sel = np.nonzero(sol.r_grid > 0)[0]
    sel = sel[_thin(np.log(sol.r_grid[sel]), min_log_step)]
    p_rad = model.p_rad_sum(sol.x[sel], sol.y[sel])
    p_tan = model.p_tan_sum(sol.x[sel], sol.y[sel])
    res = profile_residuals(sol.r_grid[sel], sol.rho[sel], sol.m[sel], p_rad, p_tan, sol.phi[sel])
    inner = slice(trim, -trim if trim else None)
    out = {k: float(np.max(v[inner])) if v[inner].size else 0.0 for k, v in res.items()}
    out["max"] = max(out.values())
    return out


def residual(model: ConstitutiveModel, sol: BallSolution) -> float:
    """Largest scaled residual of the structure equations along ``sol``."""
    return residual_report(model, sol)["max"]


def with_options(opts: SolveOptions | None, **changes) -> SolveOptions:
    return replace(opts or SolveOptions(), **changes)
