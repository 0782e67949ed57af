"""mvlab: numerical verification lab for mean value inequalities with
nonlinear Laplacian and Neumann bounds, and the energy-quantization bubble
detector built on them."""

from .constants import (
    BoundParams,
    ConstantLedger,
    DichotomyBranch,
    boundary_rhs,
    epsilon_ab,
    epsilon_prime,
    interior_rhs,
    make_ledger,
    mu_ab,
    quantization_dichotomy,
)
from .grid import (
    BALL,
    CAP_BOUNDARY,
    FLAT_BOUNDARY,
    HALF_BALL,
    INTERIOR,
    OUTSIDE,
    Domain,
    MetricSpec,
    ScalarField,
    conformal_metric,
    identity_metric,
    make_ball_domain,
    make_half_ball_domain,
    metric_deviation,
    polynomial_metric,
    sine_metric,
)
from .calculus import (
    ShellProfile,
    WeakTestSet,
    default_test_set,
    integrate,
    interpolate,
    laplacian,
    normal_derivative,
    shell_profile,
    vol_sphere,
    weak_subharmonic_test,
)
from .heinz import (
    HeinzReport,
    comparison_function_boundary,
    comparison_function_interior,
    heinz_scan,
)
from .verify import (
    VerificationReport,
    estimate_constant,
    fit_boundary_nonlinearity,
    fit_nonlinearity,
    monotonicity_suite,
    verify_boundary_mvi,
    verify_interior_mvi,
    verify_morrey,
)
from .quantization import (
    ConcentrationReport,
    DensitySequence,
    concentration_energy,
    detect_concentration,
    make_density_sequence,
)
from .synth import GeneratorSpec, bubble_mass, gen, gen_sequence, random_bubble_layout

__version__ = "0.1.0"
