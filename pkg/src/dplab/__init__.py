"""dplab: Dirichlet-process sampling and large-concentration limit checks.

The package samples Ferguson Dirichlet processes through two exact
representations (finite-dimensional Dirichlet marginals and truncated
stick-breaking), builds the limiting objects (Brownian bridge, quantile-
process covariance, bivariate Gaussian cell density), and verifies the
convergence statements by seeded Monte Carlo against closed-form targets.
"""

from .dp_core import (
    BaseMeasure,
    BorelSet,
    DpSample,
    PosteriorParams,
    TruncationPolicy,
    dp_cdf,
    dp_cross_moment,
    dp_moments,
    dp_quantile,
    exponential_base,
    normal_base,
    posterior_update,
    sample_fidi,
    stick_breaking_sample,
    uniform_base,
)
from .errors import (
    ArgumentError,
    ConfigError,
    DplabError,
    ParameterError,
    PartitionError,
    SingularDensityError,
    TruncationError,
)
from .harness import (
    ExperimentConfig,
    RunReport,
    emit_report,
    load_config,
    run_experiment,
    validate_config,
)
from .processes import (
    BivariateGaussianSpec,
    Grid,
    ProcessPath,
    QuadratureSpec,
    bb_cov,
    bivariate_density_integral,
    brownian_bridge_path,
    brownian_bridge_paths,
    limit_bivariate_density,
    limit_quantile_cov,
    quantile_process_path,
    scaled_bivariate_density,
    scaled_process_path,
    tv_distance_bivariate,
)
from .rvgen import (
    DirichletParams,
    RngStream,
    dirichlet_density,
    sample_beta,
    sample_dirichlet,
    sample_gamma,
)
from .verify import (
    Comparison,
    DensityTable,
    GcCurve,
    LevelCheck,
    McSummary,
    cvm_deviation,
    density_convergence_study,
    dl_inequality_check,
    donoho_liu_bounds,
    fidi_normality_check,
    gc_study,
    moment_check,
    modulus_check,
    posterior_check,
    quantile_limit_study,
    representation_check,
    sup_deviation,
)

__version__ = "0.1.0"
