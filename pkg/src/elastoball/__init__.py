"""Static self-gravitating elastic balls from power-law constitutive models."""

from .assumptions import (
    ExponentReport,
    ModelCertificate,
    certify,
    classify_exponents,
    find_x_flat,
    find_x_sharp,
    gamma_fn,
    upsilon_fn,
    verify_hyper_identity,
    verify_identity_56,
    verify_iso_identity,
)
from .constitutive import (
    BUILTIN_NAMES,
    ConstitutiveModel,
    LameParameters,
    PowerLawGroup,
    PowerLawSpec,
    check_power_law_conditions,
    eval_pressures,
    eval_stored_energy,
    load_model_file,
    make_builtin,
    make_model,
    theta,
)
from .dynsys import (
    DynState,
    FixedPointReport,
    OrbitTrajectory,
    boundary_field_2d,
    dulac_divergence,
    fixed_points_2d,
    integrate_orbit,
    radius_from_state,
    seed_unstable,
    vector_field_3d,
)
from .errors import *  # noqa: F401,F403
from .oracles import ExactSolution, john_exact, residual_of_exact, seth_exact
from .solver import (
    BallSolution,
    SolveOptions,
    continue_to_vacuum,
    residual,
    solve_ball,
    solve_ball_radial,
    sweep,
    verify_bounds,
    verify_center_regularity,
)

__version__ = "0.1.0"
