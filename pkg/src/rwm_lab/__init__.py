"""rwm-lab: a random-walk Metropolis scaling laboratory.

Samplers for Gaussian and heavy-tailed scale-mixture targets, a pluggable
family of symmetric increment distributions, the analytic identities that
govern the acceptance statistic, and a reproducible sweep harness for
measuring how the iteration cost scales with dimension.
"""

__version__ = "0.1.0"

from .targets import (  # noqa: E402
    MixingKind,
    MixingLaw,
    TargetKind,
    TargetSpec,
    dirac1,
    inverse_gamma,
    log_density,
    marginal_expectation,
    sample_stationary,
    scale_mixture,
    standard_gaussian,
    student_t,
)
from .increments import (  # noqa: E402
    Family,
    IncrementSpec,
    SymmetryReport,
    coordinate_gaussian,
    flip_symmetry_check,
    gaussian_iso,
    sample_increment,
    sample_increment_block,
    spherical_shell,
    stable_iso,
    student_t_iso,
)
from .kernel import (  # noqa: E402
    ChainState,
    StepRecord,
    Trajectory,
    initial_state,
    propose_and_accept,
    run_chain,
    step,
)
from .analytic import (  # noqa: E402
    HeavyAcceptanceCtx,
    NSigma,
    SphereMarginal,
    alpha_heavy,
    alpha_light,
    beta_law_check,
    exchangeable_pair_check,
    gaussian_mixture_ctx,
    girsanov_residual,
    h_and_hd,
    hd_uniform_deviation,
    mu_k,
    nsigma_h_expectation,
    sample_sphere,
    sphere_marginal_distance,
    sphere_marginal_moment,
    student_t_mixture_ctx,
)
from .diagnostics import (  # noqa: E402
    RateFit,
    batch_means_se,
    bounded_square,
    degeneracy_statistic,
    ergodic_error,
    esjd,
    fit_rate,
    iact,
    threshold_crossing_m,
    z_oscillation,
)
from .harness import (  # noqa: E402
    ExperimentConfig,
    FitReport,
    SweepResult,
    fit_report,
    run_sweep,
)
from .verify import VerifyReport, verify_analytics  # noqa: E402
from .errors import ChainDivergenceError, ConfigError, QuadratureError  # noqa: E402
