"""Power-law stored energy functions and the constitutive functions they induce.

Variables: ``x = eta**(1/3)`` and ``y = delta/eta`` where ``delta = rho/K`` and
``eta`` is the mean density ratio.  A hyperelastic model derives both principal
pressures from a stored energy ``W(x, y)``::

    P_rad = x**3 y**2 dW/dy
    P_tan = x**3 y (x dW/dx - y dW/dy) / 2

Non-hyperelastic models (Seth) are given by their pressure sums directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import DomainError, InvalidParameterError, NotHyperelasticError
from .monomials import MonomialSum, RemovableQuotient, as_fraction

BUILTIN_NAMES = ("svk", "john", "hadamard_half", "seth", "signorini")

THETA_SWITCH = 1e-6


@dataclass(frozen=True)
class LameParameters:
    """Lame coefficients and reference density ``K``."""

    lam: float
    mu: float
    kappa_ref: float = 1.0

    def __post_init__(self):
        if not np.isfinite([self.lam, self.mu, self.kappa_ref]).all():
            raise InvalidParameterError("Lame parameters must be finite")
        if self.mu < 0:
            raise InvalidParameterError(f"shear modulus mu={self.mu} must be >= 0")
        if self.lam + 2 * self.mu <= 0:
            raise InvalidParameterError("strong ellipticity requires lambda + 2 mu > 0")
        if self.kappa_ref <= 0:
            raise InvalidParameterError("reference density must be positive")

    @property
    def longitudinal(self) -> float:
        """``lambda + 2 mu``."""
        return self.lam + 2 * self.mu

    @property
    def bulk_positive(self) -> bool:
        return 3 * self.lam + 2 * self.mu > 0

    def require_positive_bulk(self):
        if not self.bulk_positive:
            raise InvalidParameterError("this model requires 3 lambda + 2 mu > 0")


@dataclass(frozen=True)
class PowerLawGroup:
    gamma: Fraction
    terms: tuple[tuple[float, Fraction], ...]  # (alpha, beta)

    def __post_init__(self):
        object.__setattr__(self, "gamma", as_fraction(self.gamma))
        object.__setattr__(
            self, "terms", tuple((float(a), as_fraction(b)) for a, b in self.terms)
        )


@dataclass(frozen=True)
class PowerLawSpec:
    """``W(x, y) = sum_j x**gamma_j sum_i alpha_ij y**beta_ij + w0``.

    Structural rules (ordering, nonzero coefficients, single-term groups) are
    enforced on construction.  The normalization and linearization identities
    are checked separately by :func:`check_power_law_conditions` so that
    deliberately corrupted specs can still be built for testing.
    """

    groups: tuple[PowerLawGroup, ...]
    w0: float
    lame: LameParameters

    def __post_init__(self):
        groups = tuple(
            g if isinstance(g, PowerLawGroup) else PowerLawGroup(g[0], tuple(g[1]))
            for g in self.groups
        )
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "w0", float(self.w0))
        if len(groups) < 2:
            raise InvalidParameterError("a power-law stored energy needs at least two groups")
        gammas = [g.gamma for g in groups]
        if any(g1 >= g2 for g1, g2 in zip(gammas, gammas[1:])):
            raise InvalidParameterError(f"gamma exponents must increase strictly: {gammas}")
        for g in groups:
            if not g.terms:
                raise InvalidParameterError(f"group gamma={g.gamma} has no terms")
            betas = [b for _, b in g.terms]
            if any(b1 >= b2 for b1, b2 in zip(betas, betas[1:])):
                raise InvalidParameterError(f"beta exponents must increase strictly: {betas}")
            if any(a == 0 for a, _ in g.terms):
                raise InvalidParameterError("all alpha coefficients must be nonzero")
            if len(g.terms) == 1 and (g.gamma == 0 or betas[0] != g.gamma / 3):
                raise InvalidParameterError(
                    f"single-term group gamma={g.gamma} needs gamma != 0 and beta = gamma/3"
                )
        if all(b in (0, -1) for g in groups for _, b in g.terms):
            raise InvalidParameterError("at least one beta must differ from 0 and -1")

    @property
    def type_signature(self) -> tuple[int, ...]:
        return tuple(len(g.terms) for g in self.groups)

    def iter_terms(self):
        """Yield ``(j, i, gamma_j, alpha_ij, beta_ij)`` with zero-based indices."""
        for j, g in enumerate(self.groups):
            for i, (alpha, beta) in enumerate(g.terms):
                yield j, i, g.gamma, alpha, beta

    def energy_sum(self) -> MonomialSum:
        terms = [(alpha, gamma, beta) for _, _, gamma, alpha, beta in self.iter_terms()]
        terms.append((self.w0, 0, 0))
        return MonomialSum.from_terms(terms)


def condition_tolerance(lame: LameParameters) -> float:
    return 1e-10 * max(1.0, lame.longitudinal)


def check_power_law_conditions(spec: PowerLawSpec) -> dict:
    """Residuals of the normalization, linearization and equal-center-pressure identities.

    Returns a dict with one residual per identity plus ``ok``.
    """
    lame = spec.lame
    terms = list(spec.iter_terms())
    res = {
        "normalization": sum(a for *_, a, _ in terms) + spec.w0,
        "first_moment": sum(a * float(g) for _, _, g, a, _ in terms),
        "second_moment": sum(a * float(g) ** 2 for _, _, g, a, _ in terms)
        - 3 * (3 * lame.lam + 2 * lame.mu),
        "beta_moment": sum(a * float(b) ** 2 for *_, a, b in terms) - lame.longitudinal,
    }
    for j, g in enumerate(spec.groups):
        res[f"group_{j}"] = sum(a * float(b - g.gamma / 3) for a, b in g.terms)
    tol = condition_tolerance(lame)
    res["ok"] = all(abs(v) <= tol for v in res.values())
    return res


@dataclass(frozen=True)
class ConstitutiveModel:
    """Radial and tangential pressure functions of ``(x, y)``.

    ``spec`` is set for hyperelastic power-law models and ``None`` for
    models given directly by their pressures.
    """

    name: str
    lame: LameParameters
    p_rad_sum: MonomialSum
    p_tan_sum: MonomialSum
    spec: PowerLawSpec | None = None
    x_sharp_exact: float | None = field(default=None, compare=False)

    @property
    def hyperelastic(self) -> bool:
        return self.spec is not None

    @cached_property
    def dx_rad(self):
        return self.p_rad_sum.d_dx()

    @cached_property
    def dy_rad(self):
        return self.p_rad_sum.d_dy()

    @cached_property
    def dx_tan(self):
        return self.p_tan_sum.d_dx()

    @cached_property
    def dy_tan(self):
        return self.p_tan_sum.d_dy()

    @cached_property
    def anisotropy(self) -> MonomialSum:
        """``P_tan - P_rad``."""
        return self.p_tan_sum - self.p_rad_sum

    @cached_property
    def theta_quotient(self) -> RemovableQuotient:
        return RemovableQuotient(self.anisotropy, switch=THETA_SWITCH)

    def __reduce__(self):
        return (
            ConstitutiveModel,
            (self.name, self.lame, self.p_rad_sum, self.p_tan_sum, self.spec, self.x_sharp_exact),
        )


def _check_positive(**kw):
    for name, val in kw.items():
        if np.any(np.asarray(val) <= 0):
            raise DomainError(f"{name} must be positive")


def pressures_from_spec(spec: PowerLawSpec) -> tuple[MonomialSum, MonomialSum]:
    p_rad, p_tan = [], []
    for _, _, gamma, alpha, beta in spec.iter_terms():
        p_rad.append((alpha * float(beta), 3 + gamma, 1 + beta))
        p_tan.append((0.5 * alpha * float(gamma - beta), 3 + gamma, 1 + beta))
    return MonomialSum.from_terms(p_rad), MonomialSum.from_terms(p_tan)


def make_model(spec: PowerLawSpec, name: str = "custom", strict: bool = True,
               x_sharp_exact: float | None = None) -> ConstitutiveModel:
    """Build the hyperelastic model of a power-law spec.

    With ``strict`` the identities of :func:`check_power_law_conditions` must hold.
    """
    if strict:
        report = check_power_law_conditions(spec)
        if not report["ok"]:
            bad = {k: v for k, v in report.items() if k != "ok"}
            raise InvalidParameterError(f"power-law conditions violated: {bad}")
    p_rad, p_tan = pressures_from_spec(spec)
    return ConstitutiveModel(name, spec.lame, p_rad, p_tan, spec, x_sharp_exact)


def eval_stored_energy(spec: PowerLawSpec | ConstitutiveModel, x, y):
    if isinstance(spec, ConstitutiveModel):
        if spec.spec is None:
            raise NotHyperelasticError(f"model {spec.name!r} has no stored energy function")
        spec = spec.spec
    _check_positive(x=x, y=y)
    return spec.energy_sum()(x, y)


def eval_pressures(model: ConstitutiveModel, x, y):
    """``(P_rad, P_tan)`` at ``(x, y)``."""
    _check_positive(x=x, y=y)
    return model.p_rad_sum(x, y), model.p_tan_sum(x, y)


def pressure_partials(model: ConstitutiveModel, x, y) -> dict:
    """Analytic first partials of both pressures in ``(x, y)``."""
    _check_positive(x=x, y=y)
    return {
        "dx_rad": model.dx_rad(x, y),
        "dy_rad": model.dy_rad(x, y),
        "dx_tan": model.dx_tan(x, y),
        "dy_tan": model.dy_tan(x, y),
    }


def theta(model: ConstitutiveModel, x, y):
    """``(P_tan - P_rad) / (1 - y)`` continued through ``y = 1``."""
    _check_positive(x=x, y=y)
    return model.theta_quotient(x, y)


def to_xy(delta, eta):
    delta = np.asarray(delta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return np.cbrt(eta), delta / eta


def pressures_delta_eta(model: ConstitutiveModel, delta, eta):
    _check_positive(delta=delta, eta=eta)
    return eval_pressures(model, *to_xy(delta, eta))


def partials_delta_eta(model: ConstitutiveModel, delta, eta) -> dict:
    """``d/d delta`` and ``d/d eta`` of both pressures by the chain rule."""
    _check_positive(delta=delta, eta=eta)
    x, y = to_xy(delta, eta)
    eta = np.asarray(eta, dtype=float)
    d = pressure_partials(model, x, y)
    dx_deta = 1.0 / (3.0 * x * x)
    dy_deta = -y / eta
    return {
        "ddelta_rad": d["dy_rad"] / eta,
        "deta_rad": d["dx_rad"] * dx_deta + d["dy_rad"] * dy_deta,
        "ddelta_tan": d["dy_tan"] / eta,
        "deta_tan": d["dx_tan"] * dx_deta + d["dy_tan"] * dy_deta,
    }


def chi(model: ConstitutiveModel, delta):
    """Center anisotropy ``p_tan(delta, delta) - p_rad(delta, delta)``."""
    _check_positive(delta=delta)
    x = np.cbrt(np.asarray(delta, dtype=float))
    return model.anisotropy(x, np.ones_like(x))


def p_iso(model: ConstitutiveModel, delta, eta):
    p_rad, p_tan = pressures_delta_eta(model, delta, eta)
    return (p_rad + 2 * p_tan) / 3


# -- built-in materials ------------------------------------------------------

F = Fraction


def _svk(lame):
    lam, mu = lame.lam, lame.mu
    k = 3 * lam + 2 * mu
    groups = (
        (F(-4), ((lame.longitudinal / 8, F(-4)), (lam / 2, F(-2)), ((lam + mu) / 2, F(0)))),
        (F(-2), ((-k / 4, F(-2)), (-k / 2, F(0)))),
    )
    return PowerLawSpec(groups, 3 * k / 8, lame)


def _john(lame):
    lam, mu = lame.lam, lame.mu
    L = lame.longitudinal
    k = 3 * lam + 4 * mu
    groups = (
        (F(-3), ((-2 * mu, F(-1)),)),
        (F(-2), ((L / 2, F(-2)), (2 * L, F(-1)), (2 * L, F(0)))),
        (F(-1), ((-k, F(-1)), (-2 * k, F(0)))),
    )
    return PowerLawSpec(groups, (9 * lam + 10 * mu) / 2, lame)


def _hadamard_half(lame):
    lam, mu = lame.lam, lame.mu
    groups = (
        (F(-4), ((lam + mu, F(-2)), ((lam + mu) / 2, F(0)))),
        (F(-3), ((-lame.longitudinal, F(-1)),)),
        (F(-2), ((-lam / 2, F(-2)), (-lam, F(0)))),
    )
    return PowerLawSpec(groups, (2 * lam + mu) / 2, lame)


def _signorini(lame):
    lam, mu = lame.lam, lame.mu
    groups = (
        (F(-3), (((9 * lam + 5 * mu) / 8, F(-1)),)),
        (F(-1), ((-(3 * lam + mu) / 2, F(-1)), (-(3 * lam + mu) / 4, F(1)))),
        (F(1), (((lam + mu) / 2, F(-1)), ((lam + mu) / 2, F(1)), ((lam + mu) / 8, F(3)))),
    )
    return PowerLawSpec(groups, -mu, lame)


def _seth_pressures(lame):
    lam, mu = lame.lam, lame.mu
    p0 = (3 * lam + 2 * mu) / 2
    p_rad = MonomialSum.from_terms([(lam, 2, 0), (lame.longitudinal / 2, 2, 2), (-p0, 0, 0)])
    p_tan = MonomialSum.from_terms([(lam + mu, 2, 0), (lam / 2, 2, 2), (-p0, 0, 0)])
    return p_rad, p_tan


def builtin_spec(name: str, lame: LameParameters) -> PowerLawSpec:
    """The exact power-law spec of a hyperelastic built-in material."""
    makers = {"svk": _svk, "john": _john, "hadamard_half": _hadamard_half,
              "signorini": _signorini}
    if name not in makers:
        raise InvalidParameterError(f"no power-law spec for built-in {name!r}")
    return makers[name](lame)


def make_builtin(name: str, lame: LameParameters) -> ConstitutiveModel:
    """Saint Venant-Kirchhoff, John, Hadamard (k=1/2), Seth or Signorini material."""
    if name not in BUILTIN_NAMES:
        raise InvalidParameterError(f"unknown built-in {name!r}; choose from {BUILTIN_NAMES}")
    if name == "seth":
        if lame.mu <= 0 or 3 * lame.lam + 2 * lame.mu <= 0:
            raise InvalidParameterError("Seth model needs mu > 0 and 3 lambda + 2 mu > 0")
        p_rad, p_tan = _seth_pressures(lame)
        return ConstitutiveModel("seth", lame, p_rad, p_tan, None, None)
    x_sharp = None
    if name == "svk":
        lame.require_positive_bulk()
        x_sharp = np.inf
    elif name == "john":
        x_sharp = np.inf
    elif name == "hadamard_half":
        if lame.lam <= 0:
            raise InvalidParameterError("Hadamard k=1/2 model needs lambda > 0")
        x_sharp = float(np.sqrt((lame.lam + lame.mu) / lame.lam))
    return make_model(builtin_spec(name, lame), name=name, x_sharp_exact=x_sharp)


# -- model definition files --------------------------------------------------

_FILE_KEYS = {"lambda", "mu", "kappa_ref", "builtin", "groups", "w0", "name"}


def model_from_mapping(data: Mapping, strict: bool = True) -> ConstitutiveModel:
    """Build a model from the parsed contents of a model definition file."""
    unknown = set(data) - _FILE_KEYS
    if unknown:
        raise InvalidParameterError(f"unknown keys in model definition: {sorted(unknown)}")
    try:
        lame = LameParameters(float(data["lambda"]), float(data["mu"]),
                              float(data.get("kappa_ref", 1.0)))
    except KeyError as exc:
        raise InvalidParameterError(f"model definition is missing {exc.args[0]!r}") from None
    if "builtin" in data:
        if "groups" in data or "w0" in data:
            raise InvalidParameterError("give either 'builtin' or explicit 'groups', not both")
        return make_builtin(str(data["builtin"]), lame)
    if "groups" not in data or "w0" not in data:
        raise InvalidParameterError("explicit model needs 'groups' and 'w0'")
    groups = []
    for g in data["groups"]:
        if set(g) - {"gamma", "terms"}:
            raise InvalidParameterError(f"unknown keys in group: {sorted(set(g) - {'gamma', 'terms'})}")
        terms = []
        for t in g["terms"]:
            if set(t) - {"alpha", "beta"}:
                raise InvalidParameterError(f"unknown keys in term: {sorted(set(t) - {'alpha', 'beta'})}")
            terms.append((float(t["alpha"]), as_fraction(str(t["beta"]))))
        groups.append(PowerLawGroup(as_fraction(str(g["gamma"])), tuple(terms)))
    spec = PowerLawSpec(tuple(groups), float(data["w0"]), lame)
    return make_model(spec, name=str(data.get("name", "custom")), strict=strict)


def load_model_file(path, overrides: Mapping | None = None, strict: bool = True) -> ConstitutiveModel:
    """Read a TOML model definition; ``overrides`` replace top-level keys."""
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with Path(path).open("rb") as fh:
        data = tomllib.load(fh)
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return model_from_mapping(data, strict=strict)
