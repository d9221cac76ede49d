from fractions import Fraction as F

import numpy as np
import pytest

from elastoball.constitutive import LameParameters, PowerLawGroup, PowerLawSpec, make_builtin, make_model

ADMISSIBLE = ("svk", "john", "hadamard_half")
HYPERELASTIC = ("svk", "john", "hadamard_half", "signorini")


@pytest.fixture
def lame11():
    return LameParameters(1.0, 1.0)


@pytest.fixture(params=ADMISSIBLE)
def admissible(request, lame11):
    return make_builtin(request.param, lame11)


@pytest.fixture
def builtin(lame11):
    return lambda name: make_builtin(name, lame11)


def fluid_spec(lam=1.0, kappa_ref=1.0):
    """Barotropic material with p = (lam/2)(delta^2 - 1), independent of eta."""
    lame = LameParameters(lam, 0.0, kappa_ref)
    groups = (PowerLawGroup(F(-3), ((lam / 2, F(-1)),)), PowerLawGroup(F(3), ((lam / 2, F(1)),)))
    return PowerLawSpec(groups, -lam, lame)


def fluid_model(lam=1.0, kappa_ref=1.0):
    return make_model(fluid_spec(lam, kappa_ref), name="fluid")


def corrupted_svk(lame, factor=1.1):
    """SVK spec with one x^-2 coefficient scaled, breaking the per-group condition."""
    from elastoball.constitutive import builtin_spec

    spec = builtin_spec("svk", lame)
    g = spec.groups[-1]
    terms = ((g.terms[0][0] * factor, g.terms[0][1]),) + g.terms[1:]
    return PowerLawSpec((spec.groups[0], PowerLawGroup(g.gamma, terms)), spec.w0, lame)


def log_grid(lo, hi, n):
    return np.geomspace(lo, hi, n)


# (number, title, passed, detail) for each acceptance criterion that ran
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n, title, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
