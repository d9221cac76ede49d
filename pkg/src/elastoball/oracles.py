"""Closed-form self-similar balls for the Seth and John materials.

Both have ``delta, eta ~ r^(-k)`` and an irregular centre, so they test the
structure equations and the surface event but never centre regularity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constitutive import ConstitutiveModel, LameParameters
from .errors import InvalidParameterError, ModelMismatchError

FOUR_PI_3 = 4.0 * np.pi / 3.0


@dataclass(frozen=True)
class ExactSolution:
    """``delta = A_delta r^-k``, ``eta = A_eta r^-k`` with closed-form pressures.

    ``p_terms`` lists ``(c_rad, c_tan, s)`` meaning ``c * (d / r^2)^s``.
    """

    name: str
    lame: LameParameters
    kappa_ref: float
    d: float
    k: float
    a_delta: float
    a_eta: float
    p_terms: tuple[tuple[float, float, float], ...]
    radii: tuple[float, ...]

    def delta(self, r):
        return self.a_delta * np.asarray(r, dtype=float) ** (-self.k)

    def eta(self, r):
        return self.a_eta * np.asarray(r, dtype=float) ** (-self.k)

    def ddelta(self, r):
        r = np.asarray(r, dtype=float)
        return -self.k * self.delta(r) / r

    def deta(self, r):
        r = np.asarray(r, dtype=float)
        return -self.k * self.eta(r) / r

    def _pressure(self, r, col):
        r = np.asarray(r, dtype=float)
        q = self.d / r**2
        return sum(t[col] * q ** t[2] for t in self.p_terms)

    def p_rad(self, r):
        return self._pressure(r, 0)

    def p_tan(self, r):
        return self._pressure(r, 1)

    def mass(self, r):
        r = np.asarray(r, dtype=float)
        return FOUR_PI_3 * self.kappa_ref * self.eta(r) * r**3

    def dmass(self, r):
        r = np.asarray(r, dtype=float)
        return FOUR_PI_3 * self.kappa_ref * self.a_eta * (3.0 - self.k) * r ** (2.0 - self.k)

    @property
    def R(self) -> float:
        """Radius of the truncated ball (the smallest pressure zero)."""
        return self.radii[0]

    def potential(self, r):
        """``Phi`` with ``Phi' = m / r^2`` and ``Phi(R) = -m(R) / R``."""
        r = np.asarray(r, dtype=float)
        c = FOUR_PI_3 * self.kappa_ref * self.a_eta / (2.0 - self.k)
        R = self.R
        return c * (r ** (2.0 - self.k) - R ** (2.0 - self.k)) - self.mass(R) / R


def seth_exact(lame: LameParameters, kappa_ref: float | None = None) -> ExactSolution:
    """Self-similar Seth ball, ``eta = 2 delta = d^(3/4) r^(-3/2)``."""
    lam, mu = lame.lam, lame.mu
    K = lame.kappa_ref if kappa_ref is None else float(kappa_ref)
    p0 = (3 * lam + 2 * mu) / 2
    if not (mu > 0 and p0 > 0):
        raise InvalidParameterError("Seth solution needs mu > 0 and 3 lambda + 2 mu > 0")
    d = 3 * (9 * lam + 14 * mu) / (16 * np.pi * K**2)
    R = (9 * lam + 2 * mu) * np.sqrt(27 * lam + 42 * mu) / (np.sqrt(np.pi) * K * (48 * lam + 32 * mu))
    terms = ((-p0, -p0, 0.0), ((9 * lam + 2 * mu) / 8, (9 * lam + 8 * mu) / 8, 0.5))
    return ExactSolution("seth", lame, K, d, 1.5, d**0.75 / 2, d**0.75, terms, (float(R),))


def john_exact(lame: LameParameters, kappa_ref: float | None = None) -> ExactSolution:
    """Self-similar John ball, ``eta = (5/3) delta = d^(3/5) r^(-6/5)``; radii ``R+ < R-``."""
    lam, mu = lame.lam, lame.mu
    K = lame.kappa_ref if kappa_ref is None else float(kappa_ref)
    if lam <= 0:
        raise InvalidParameterError("John solution is stated for lambda > 0")
    L = lam + 2 * mu
    disc = (11 * L) ** 2 - 72 * mu * (3 * lam + 4 * mu)
    assert disc > 0 and np.isclose(disc, 121 * lam**2 + 268 * lam * mu + 196 * mu**2)
    d = 11 * L / (6 * np.pi * K**2)
    c = 6 * (3 * lam + 4 * mu)
    r_plus = np.sqrt(d) * (c / (11 * L + np.sqrt(disc))) ** 2.5
    r_minus = np.sqrt(d) * (c / (11 * L - np.sqrt(disc))) ** 2.5
    terms = ((2 * mu, 2 * mu, 0.0),
             (-11 / 3 * L, -11 / 5 * L, 0.2),
             (3 * lam + 4 * mu, 0.6 * (3 * lam + 4 * mu), 0.4))
    return ExactSolution("john", lame, K, d, 1.2, 0.6 * d**0.6, d**0.6, terms,
                         (float(r_plus), float(r_minus)))


def exact_residuals(model: ConstitutiveModel, exact: ExactSolution, r_grid) -> dict:
    """Pointwise scaled residuals of both structure equations along the exact profile.

    Pressures and their partials come from ``model``; profile derivatives
    are the analytic powers of r.
    """
    r = np.asarray(r_grid, dtype=float)
    K = exact.kappa_ref
    delta, eta = exact.delta(r), exact.eta(r)
    x, y = np.cbrt(eta), delta / eta
    dyr = model.dy_rad(x, y)
    ddelta_p = dyr / eta
    deta_p = model.dx_rad(x, y) / (3 * x * x) - y / eta * dyr
    terms = np.vstack([
        ddelta_p * exact.ddelta(r),
        (3 / r) * deta_p * (delta - eta),
        (2 / r) * (model.p_rad_sum(x, y) - model.p_tan_sum(x, y)),
        FOUR_PI_3 * K**2 * r * delta * eta,
    ])
    scale_a = np.max(np.abs(terms), axis=0)
    res_a = np.abs(terms.sum(axis=0)) / scale_a
    tb = np.vstack([exact.deta(r), 3 * (delta - eta) / r])
    res_b = np.abs(tb[0] - tb[1]) / np.max(np.abs(tb), axis=0)
    return {"momentum": res_a, "eta": res_b}


def residual_of_exact(model: ConstitutiveModel, exact: ExactSolution, r_grid,
                      check_name: bool = True) -> float:
    """Max scaled residual of the exact profile in ``model``'s structure equations.

    Raises :class:`ModelMismatchError` when the names differ, unless
    ``check_name`` is false (for deliberate wrong-model controls).
    """
    if check_name and model.name != exact.name:
        raise ModelMismatchError(f"exact solution {exact.name!r} paired with model {model.name!r}")
    res = exact_residuals(model, exact, r_grid)
    return float(max(np.max(v) for v in res.values()))


def exact_ball(exact: ExactSolution, r_grid):
    """:class:`~elastoball.solver.BallSolution` sampled from the exact profile on ``r_grid``."""
    from .solver import BallSolution

    r = np.asarray(r_grid, dtype=float)
    delta, eta = exact.delta(r), exact.eta(r)
    return BallSolution(
        r_grid=r, delta=delta, eta=eta, x=np.cbrt(eta), y=delta / eta, m=exact.mass(r),
        p_rad=exact.p_rad(r), p_tan=exact.p_tan(r), phi=exact.potential(r), R=float(r[-1]),
        M=float(exact.mass(r[-1])), rho_c=float("inf"), kappa_ref=exact.kappa_ref,
        model_name=exact.name, metadata={"method": "exact"},
    )
