"""Exponent classification, the rescaled functions Gamma and Upsilon, and
numerical certification of the admissibility assumptions 1-8.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect, brentq

from .constitutive import (
    ConstitutiveModel,
    PowerLawSpec,
    chi,
    make_model,
    p_iso,
    pressure_partials,
)
from .errors import ClassificationError
from .monomials import MonomialSum, RemovableQuotient

X_SCAN_MAX = 1e3
FD_STEP = 1e-6


@dataclass(frozen=True)
class ExponentReport:
    """Exponents ``(a, b, c)`` and the data they were derived from.

    ``sigma``, ``p_index`` and ``q_index`` are only defined on the power-law
    route; models given by their pressures leave them ``None``.
    """

    a: Fraction
    b: Fraction
    c: Fraction
    gamma_star: Fraction
    beta_star: Fraction
    sigma: float | None = None
    p_index: int | None = None
    q_index: int | None = None
    route: str = "power_law"

    @property
    def abc(self) -> tuple[Fraction, Fraction, Fraction]:
        return self.a, self.b, self.c

    @property
    def admissible(self) -> bool:
        """The sign conditions a > -4, b > 0, c = 0."""
        return self.a > -4 and self.b > 0 and self.c == 0


def _sigma_tolerance(spec: PowerLawSpec) -> float:
    return 1e-10 * max(1.0, spec.lame.longitudinal)


def classify_power_law(spec: PowerLawSpec) -> ExponentReport:
    """Exponents of a hyperelastic power-law spec from gamma_*, beta_* and sigma."""
    nonflat = [
        [i for i, (_, beta) in enumerate(g.terms) if beta not in (0, -1)]
        for g in spec.groups
    ]
    candidates = [j for j, idx in enumerate(nonflat) if idx]
    if not candidates:
        raise ClassificationError("every beta is 0 or -1; P_rad does not depend on y")
    p = candidates[0]
    gamma_star = spec.groups[p].gamma
    beta_star = min(spec.groups[j].terms[i][1] for j in candidates for i in nonflat[j])
    q = next((i for i in nonflat[p] if spec.groups[p].terms[i][1] == beta_star), None)
    if q is None:
        raise ClassificationError(
            f"beta_*={beta_star} is not attained in the lowest group gamma_*={gamma_star}"
        )
    alpha_m1 = next((a for a, b in spec.groups[p].terms if b == -1), 0.0)
    alpha_0 = next((a for a, b in spec.groups[p].terms if b == 0), 0.0)
    sigma = float(3 + gamma_star) * alpha_m1 + float(gamma_star) * alpha_0
    if abs(sigma) <= _sigma_tolerance(spec):
        sigma = 0.0
    c = beta_star if (beta_star > 0 and sigma != 0.0) else Fraction(0)
    return ExponentReport(
        a=-3 - gamma_star, b=-beta_star, c=c, gamma_star=gamma_star,
        beta_star=beta_star, sigma=sigma, p_index=p, q_index=q, route="power_law",
    )


def _upsilon_numerator_pressures(model, a, b, c) -> MonomialSum:
    """``x^a y^(b-1+c) ((1-y) x dP_rad/dx + 2 (P_tan - P_rad)) / (lambda + 2 mu)``."""
    x_dx = model.dx_rad.shift(1, 0)
    inner = x_dx.times_one_minus_y() + model.anisotropy.scale(2.0)
    return inner.shift(a, b - 1 + c).scale(1.0 / model.lame.longitudinal)


def _upsilon_numerator_power_law(spec: PowerLawSpec, rep: ExponentReport) -> MonomialSum:
    """Same numerator from the stored energy, keeping only groups that reach P_rad's y-dependence."""
    terms = []
    for g in spec.groups:
        if all(beta in (0, -1) for _, beta in g.terms):
            continue
        dg = g.gamma - rep.gamma_star
        for alpha, beta in g.terms:
            terms.append((float(g.gamma) * alpha * float(beta + 1), dg, beta - rep.beta_star + rep.c))
            terms.append((-float(3 + g.gamma) * alpha * float(beta), dg, 1 + beta - rep.beta_star + rep.c))
    return MonomialSum.from_terms(terms).scale(1.0 / spec.lame.longitudinal)


def classify_from_pressures(model: ConstitutiveModel) -> ExponentReport:
    """Exponents read off the lowest powers in dP_rad/dy and the Upsilon numerator.

    Works for any model whose pressures are monomial sums, hyperelastic or not.
    """
    g0 = model.dy_rad
    if not g0:
        raise ClassificationError("P_rad does not depend on y")
    p_min = g0.min_x_exponent()
    q_min = g0.min_y_exponent()
    if g0.restrict_x(p_min).min_y_exponent() != q_min:
        raise ClassificationError("lowest y power of dP_rad/dy missing from its lowest x group")
    a, b = -p_min, -q_min
    t = _upsilon_numerator_pressures(model, a, b, 0)
    t = MonomialSum(tuple(term for term in t.terms))
    if not t or t.min_x_exponent() < 0:
        raise ClassificationError("Upsilon numerator is singular at x = 0")
    t0 = t.restrict_x(0)
    if not t0:
        raise ClassificationError("Upsilon vanishes identically on x = 0")
    q0 = t0.min_y_exponent()
    if q0 > 0:
        raise ClassificationError("Upsilon(0, 0) = 0 for every admissible c")
    c = -q0
    return ExponentReport(a=a, b=b, c=c, gamma_star=-3 - a, beta_star=-b, route="pressure")


def classify_exponents(obj) -> ExponentReport:
    """Classify a :class:`PowerLawSpec` or a :class:`ConstitutiveModel`."""
    if isinstance(obj, PowerLawSpec):
        return classify_power_law(obj)
    if obj.spec is not None:
        return classify_power_law(obj.spec)
    return classify_from_pressures(obj)


@dataclass(frozen=True)
class Rescaled:
    """Gamma and Upsilon of a classified model, continuous on the closed quadrant."""

    exponents: ExponentReport
    gamma: MonomialSum
    upsilon: RemovableQuotient

    def gamma0(self, y):
        return self.gamma(0.0, y)

    def upsilon0(self, y):
        return self.upsilon(0.0, y)

    def upsilon0_prime(self, y):
        return self.upsilon.d_dy(0.0, y)


@lru_cache(maxsize=128)
def rescaled(model: ConstitutiveModel) -> Rescaled:
    """Build Gamma and Upsilon; raises :class:`ClassificationError` when no exponents work."""
    rep = classify_exponents(model)
    gamma = model.dy_rad.shift(rep.a, rep.b).scale(1.0 / model.lame.longitudinal)
    if model.spec is not None:
        num = _upsilon_numerator_power_law(model.spec, rep)
    else:
        num = _upsilon_numerator_pressures(model, rep.a, rep.b, rep.c)
    for name, s in (("Gamma", gamma), ("Upsilon", num)):
        if s and (s.min_x_exponent() < 0 or s.min_y_exponent() < 0):
            raise ClassificationError(f"{name} is not continuous on the closed quadrant")
    return Rescaled(rep, gamma, RemovableQuotient(num))


def gamma_fn(model: ConstitutiveModel, x, y):
    return rescaled(model).gamma(x, y)


def upsilon_fn(model: ConstitutiveModel, x, y):
    return rescaled(model).upsilon(x, y)


# -- thresholds --------------------------------------------------------------

def _center_hyperbolicity(model):
    try:
        g = rescaled(model).gamma
        return lambda x: g(x, 1.0)
    except ClassificationError:
        return lambda x: model.dy_rad(x, 1.0)


def find_x_flat(model: ConstitutiveModel, x_scan_max: float = X_SCAN_MAX, n_scan: int = 4000) -> float:
    """First zero of Gamma(x, 1) beyond x = 1, or ``inf`` if none below ``x_scan_max``."""
    f = _center_hyperbolicity(model)
    xs = np.geomspace(1.0, x_scan_max, n_scan)
    vals = f(xs)
    bad = np.nonzero(vals <= 0)[0]
    if bad.size == 0:
        return float("inf")
    i = bad[0]
    if vals[i] == 0 or i == 0:
        return float(xs[i])
    return float(bisect(f, xs[i - 1], xs[i], xtol=1e-300, rtol=1e-14, maxiter=200))


@dataclass(frozen=True)
class XSharpResult:
    value: float
    method: str
    resolution: tuple[int, int] | None = None


def _min_ptan_on_positive_prad(model, x, ys):
    """Smallest P_tan over {y in (0,1): P_rad(x, y) >= 0}, including the zeros of P_rad."""
    pr = model.p_rad_sum(x, ys)
    pt = model.p_tan_sum(x, ys)
    mask = pr >= 0
    best = np.min(pt[mask]) if mask.any() else np.inf
    s = np.sign(pr)
    for k in np.nonzero(s[:-1] * s[1:] < 0)[0]:
        yr = brentq(lambda yy: model.p_rad_sum(x, yy), ys[k], ys[k + 1], xtol=1e-15, rtol=1e-14)
        best = min(best, float(model.p_tan_sum(x, yr)))
    return best


def scan_x_sharp(model: ConstitutiveModel, x_scan_max: float = X_SCAN_MAX,
                 n_x: int = 400, n_y: int = 400, refine: int = 4) -> XSharpResult:
    """Grid search for the smallest x where P_rad >= 0 fails to imply P_tan > 0."""
    xs = np.geomspace(1e-2, x_scan_max, n_x)
    ys = (np.arange(n_y) + 0.5) / n_y
    g = np.array([_min_ptan_on_positive_prad(model, x, ys) for x in xs])
    bad = np.nonzero(g <= 0)[0]
    if bad.size == 0:
        return XSharpResult(float("inf"), "grid", (n_x, n_y))
    i = bad[0]
    if i == 0:
        return XSharpResult(float(xs[0]), "grid", (n_x, n_y))
    fine = (np.arange(n_y * refine) + 0.5) / (n_y * refine)

    def gf(x):
        return _min_ptan_on_positive_prad(model, x, fine)

    lo, hi = xs[i - 1], xs[i]
    if gf(lo) <= 0:
        return XSharpResult(float(lo), "grid", (n_x, n_y * refine))
    if gf(hi) > 0:
        return XSharpResult(float(hi), "grid", (n_x, n_y * refine))
    root = bisect(gf, lo, hi, xtol=1e-300, rtol=1e-13, maxiter=200)
    return XSharpResult(float(root), "grid+bisection", (n_x, n_y * refine))


def find_x_sharp(model: ConstitutiveModel, x_scan_max: float = X_SCAN_MAX) -> float:
    """Tangential-positivity threshold; analytic for the admissible built-ins."""
    if model.x_sharp_exact is not None:
        return float(model.x_sharp_exact)
    return scan_x_sharp(model, x_scan_max).value


# -- identities --------------------------------------------------------------

def verify_hyper_identity(model: ConstitutiveModel, x_grid) -> float:
    """Max |Upsilon(x, 1) - 3 Gamma(x, 1)|."""
    r = rescaled(model)
    x = np.asarray(x_grid, dtype=float)
    return float(np.max(np.abs(r.upsilon(x, 1.0) - 3 * r.gamma(x, 1.0))))


def identity_56_sides(model: ConstitutiveModel, y, h: float = FD_STEP):
    """Both sides of the Upsilon_0 identity, Upsilon_0' by central differences."""
    r = rescaled(model)
    a, b, c = (float(v) for v in r.exponents.abc)
    y = np.asarray(y, dtype=float)
    u0 = r.upsilon0(y)
    du0 = (r.upsilon0(y + h) - r.upsilon0(y - h)) / (2 * h)
    lhs = ((b + c) * u0 - y * du0) * (1 - y) + y * u0
    rhs = y**c * ((a + 3) - a * y) * r.gamma0(y)
    return lhs, rhs


def verify_identity_56(model: ConstitutiveModel, y_grid) -> float:
    lhs, rhs = identity_56_sides(model, y_grid)
    return float(np.max(np.abs(lhs - rhs)))


def iso_identity_sides(model: ConstitutiveModel, delta, h: float = FD_STEP):
    """``(3/2) d_eta p_iso(delta, delta)`` and ``chi'(delta) - chi(delta)/delta``."""
    d = np.asarray(delta, dtype=float)
    lhs = 1.5 * (p_iso(model, d, d + h) - p_iso(model, d, d - h)) / (2 * h)
    rhs = (chi(model, d + h) - chi(model, d - h)) / (2 * h) - chi(model, d) / d
    return lhs, rhs


def verify_iso_identity(model: ConstitutiveModel, delta_grid) -> float:
    lhs, rhs = iso_identity_sides(model, delta_grid)
    return float(np.max(np.abs(lhs - rhs)))


def dulac_expression(model: ConstitutiveModel, y):
    """``(b Upsilon_0 - y Upsilon_0') (1 - y) + y Upsilon_0``."""
    r = rescaled(model)
    b = float(r.exponents.b)
    y = np.asarray(y, dtype=float)
    u0 = r.upsilon0(y)
    return (b * u0 - y * r.upsilon0_prime(y)) * (1 - y) + y * u0


# -- certificate -------------------------------------------------------------

@dataclass(frozen=True)
class AssumptionResult:
    label: str
    passed: bool | None  # None: could not be evaluated
    detail: str = ""
    witness: dict | None = None


@dataclass(frozen=True)
class ModelCertificate:
    model_name: str
    exponents: ExponentReport | None
    x_flat: float
    x_sharp: float
    delta_max: float
    x_scan_max: float
    x_sharp_method: str
    assumption_results: tuple[AssumptionResult, ...] = field(default_factory=tuple)

    def result(self, label: str) -> AssumptionResult:
        for r in self.assumption_results:
            if r.label == label:
                return r
        raise KeyError(label)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.assumption_results)

    @property
    def failures(self) -> list[str]:
        return [r.label for r in self.assumption_results if not r.passed]

    def summary(self) -> dict:
        exps = self.exponents
        return {
            "model": self.model_name,
            "a": None if exps is None else str(exps.a),
            "b": None if exps is None else str(exps.b),
            "c": None if exps is None else str(exps.c),
            "x_flat": self.x_flat,
            "x_sharp": self.x_sharp,
            "delta_max": self.delta_max,
            "x_scan_max": self.x_scan_max,
            "x_sharp_method": self.x_sharp_method,
            "assumptions": {r.label: r.passed for r in self.assumption_results},
            "witnesses": {r.label: r.witness for r in self.assumption_results if r.witness},
            "all_passed": self.all_passed,
        }


def _first_violation(xs, vals, strict_positive=True):
    bad = np.nonzero(vals <= 0 if strict_positive else vals < 0)[0]
    if bad.size == 0:
        return None
    k = bad[0]
    return {"at": np.atleast_1d(xs)[k].tolist() if np.ndim(xs) else float(xs), "value": float(vals.flat[k])}


def certify(model: ConstitutiveModel, x_scan_max: float = X_SCAN_MAX, n_grid: int = 200) -> ModelCertificate:
    """Check Assumptions 1-8 on grids and report the window ``Delta``.

    Failures are recorded in the certificate; nothing is raised.
    """
    lame = model.lame
    L = lame.longitudinal
    tol = 1e-10 * max(1.0, L)
    results = []

    # 1: stress-free reference and linear elasticity
    pr, pt = model.p_rad_sum(1.0, 1.0), model.p_tan_sum(1.0, 1.0)
    d = pressure_partials(model, 1.0, 1.0)
    want = {"dy_rad": L, "dx_rad": 3 * lame.lam + 2 * lame.mu,
            "dy_tan": lame.lam, "dx_tan": 3 * lame.lam + 2 * lame.mu}
    errs = {k: float(d[k] - v) for k, v in want.items()}
    ok1 = abs(pr) <= tol and abs(pt) <= tol and all(abs(e) <= tol for e in errs.values())
    results.append(AssumptionResult(
        "A1", ok1, f"P(1,1)=({float(pr):.3g},{float(pt):.3g}); linearization errors {errs}",
        None if ok1 else {"p_rad": float(pr), "p_tan": float(pt), **errs}))

    # 2: equal principal pressures at every center density
    xs = np.geomspace(0.1, 10.0, 200)
    scale = np.maximum(np.abs(model.p_rad_sum(xs, 1.0)), L)
    dev = np.abs(model.anisotropy(xs, 1.0)) / scale
    ok2 = bool(np.max(dev) <= 1e-10)
    results.append(AssumptionResult(
        "A2", ok2, f"max relative |P_rad(x,1) - P_tan(x,1)| = {np.max(dev):.3g}",
        None if ok2 else {"x": float(xs[np.argmax(dev)]), "value": float(np.max(dev))}))

    # 3: exponents
    try:
        resc = rescaled(model)
        exps = resc.exponents
        results.append(AssumptionResult("A3", True, f"(a,b,c)=({exps.a},{exps.b},{exps.c})"))
    except ClassificationError as exc:
        resc, exps = None, None
        results.append(AssumptionResult("A3", False, str(exc)))

    # 4: sign conditions
    if exps is None:
        results.append(AssumptionResult("A4", None, "exponents unavailable"))
    else:
        results.append(AssumptionResult(
            "A4", exps.admissible, f"needs a > -4, b > 0, c = 0; got a={exps.a}, b={exps.b}, c={exps.c}",
            None if exps.admissible else {"a": str(exps.a), "b": str(exps.b), "c": str(exps.c)}))

    x_flat = find_x_flat(model, x_scan_max)
    x_sharp_res = (XSharpResult(float(model.x_sharp_exact), "analytic")
                   if model.x_sharp_exact is not None else scan_x_sharp(model, x_scan_max))
    x_sharp = x_sharp_res.value
    X = min(x_flat, x_sharp)
    x_top = min(x_flat, x_scan_max)

    # 5(i), 5(ii): positivity on the center line
    xline = np.linspace(0.0, x_top, 4 * n_grid + 1)[1:-1]
    if resc is None:
        gl = model.dy_rad(xline, 1.0)
        w = _first_violation(xline, gl)
        results.append(AssumptionResult("A5i", w is None and x_flat > 1,
                                        f"X_flat={x_flat:.12g} (from dP_rad/dy)", w))
        results.append(AssumptionResult("A5ii", None, "Upsilon unavailable"))
    else:
        gl = resc.gamma(xline, 1.0)
        w = _first_violation(xline, gl)
        results.append(AssumptionResult("A5i", w is None and x_flat > 1,
                                        f"X_flat={x_flat:.12g}", w))
        ul = resc.upsilon(xline, 1.0)
        w = _first_violation(xline, ul)
        results.append(AssumptionResult("A5ii", w is None, "Upsilon(x,1) > 0 on (0, X_flat)", w))

    # 6: Gamma > 0 on [0, X_flat) x [0, 1); Upsilon_0 and the Dulac expression on (0, 1)
    if resc is None:
        results.append(AssumptionResult("A6", None, "Gamma/Upsilon unavailable"))
    else:
        gx = np.linspace(0.0, x_top, n_grid, endpoint=False)
        gy = np.linspace(0.0, 1.0, n_grid, endpoint=False)
        GX, GY = np.meshgrid(gx, gy, indexing="ij")
        gvals = resc.gamma(GX, GY)
        yo = np.linspace(0.0, 1.0, n_grid + 2)[1:-1]
        u0 = resc.upsilon0(yo)
        dul = dulac_expression(model, yo)
        witness = None
        if np.any(gvals <= 0):
            k = np.unravel_index(np.argmin(gvals), gvals.shape)
            witness = {"gamma_at": [float(GX[k]), float(GY[k])], "value": float(gvals[k])}
        elif np.any(u0 <= 0):
            witness = {"upsilon0_at": float(yo[np.argmin(u0)]), "value": float(np.min(u0))}
        elif np.any(dul <= 0):
            witness = {"dulac_at": float(yo[np.argmin(dul)]), "value": float(np.min(dul))}
        results.append(AssumptionResult(
            "A6", witness is None,
            f"needs positive minima; Gamma {np.min(gvals):.4g}, Upsilon_0 {np.min(u0):.4g}, "
            f"Dulac {np.min(dul):.4g}",
            witness))

    # 7: tangential pressure positivity
    results.append(AssumptionResult(
        "A7", x_sharp > 1, f"X_sharp={x_sharp:.12g} ({x_sharp_res.method})",
        None if x_sharp > 1 else {"x_sharp": x_sharp}))

    # 8: sign of the radial pressure along x = 1 and y = 1
    yo = np.linspace(0.0, 1.0, 4 * n_grid + 2)[1:-1]
    p1y = model.p_rad_sum(1.0, yo)
    xc = np.linspace(1.0, min(X, x_scan_max), 4 * n_grid + 2)[1:-1]
    px1 = model.p_rad_sum(xc, 1.0)
    witness = None
    if np.any(p1y >= 0):
        k = int(np.argmax(p1y))
        witness = {"p_rad(1,y)_at": float(yo[k]), "value": float(p1y[k])}
    elif np.any(px1 <= 0):
        k = int(np.argmin(px1))
        witness = {"p_rad(x,1)_at": float(xc[k]), "value": float(px1[k])}
    results.append(AssumptionResult("A8", witness is None,
                                    "P_rad(1,y) < 0 on (0,1), P_rad(x,1) > 0 on (1,X)", witness))

    return ModelCertificate(
        model_name=model.name, exponents=exps, x_flat=x_flat, x_sharp=x_sharp,
        delta_max=X**3, x_scan_max=x_scan_max, x_sharp_method=x_sharp_res.method,
        assumption_results=tuple(results),
    )


def hyperelastic_copy(spec: PowerLawSpec, name: str = "custom"):
    """Model from a spec without enforcing its identities (for corrupted test specs)."""
    return make_model(spec, name=name, strict=False)
