"""Numerical laboratory for long-range dependent fields and their
non-Gaussian limit laws.

Layers, bottom up: special-function kernels (specfun), isotropic
covariance families with long-memory parameters (covmodels), observation
window geometry (geometry), Hermite expansions of pointwise functionals
(hermite), circulant-embedding field simulation (fieldsim), the
chi-square-series limit-law sampler (rosenblatt), closed-form convergence
rate exponents (ratelab), and the experiment driver plus CLI (expcli).
"""

from .covmodels import (
    CovarianceModel,
    LongMemoryParams,
    c2_constant,
    cauchy,
    covariance_eval,
    linnik,
    local_global,
    lrd_params,
    model_from_json,
    model_to_json,
    residual_exponent_fit,
    spectral_density,
    spectral_leading,
)
from .errors import (
    AccuracyError,
    CoverageError,
    DegenerateFitError,
    DomainError,
    EmbeddingError,
    IntegrabilityError,
    ParameterError,
    RankError,
    RegimeError,
    RosenlabError,
    UnsupportedModelError,
)
from .expcli import (
    ExperimentConfig,
    RhoRow,
    RhoTable,
    SlopeFit,
    config_from_json,
    config_to_json,
    rate_experiment,
    slope_fit,
    smoothing_inequality_check,
)
from .fieldsim import (
    GridField,
    SimulationPlan,
    export_field,
    functional_integral,
    import_field,
    ks_distance,
    normalized_statistic,
    reduction_check,
    simulate_field,
)
from .geometry import (
    ball,
    ball_ft_radial,
    distance_integral,
    distance_pdf,
    indicator_ft,
    rectangle,
    set_from_json,
    set_to_json,
    uniform_sample,
    volume,
)
from .hermite import (
    HermiteExpansion,
    functional_catalog,
    hermite_coefficients,
    hermite_rank,
)
from .ratelab import (
    RateInputs,
    SupMinSearch,
    curve_table,
    geometric_term,
    inputs_from_model,
    inputs_from_params,
    kappa0_identity_check,
    kappa1,
    kappa_bound,
    supmin_inner,
    supmin_outer,
)
from .rosenblatt import (
    EigenSeries,
    RosenblattKernel,
    build_kernel,
    calibrate_series,
    cumulant,
    density_estimate,
    eigen_series,
    sample,
    series_from_json,
    series_to_json,
    variance_oracle,
)
from .specfun import (
    bessel_j,
    bessel_k,
    gamma_fn,
    hermite_poly,
    hyp1f2,
    incomplete_beta,
    y_d_kernel,
)

__version__ = "0.1.0"
