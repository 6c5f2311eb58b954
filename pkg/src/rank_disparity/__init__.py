"""Rank-dependent health-disparity indices for SES-ordered groups.

The package computes Rényi-type disparity indices and their relatives
(generalized entropy, Atkinson, concentration and achievement indices) for
populations partitioned into ordered socioeconomic groups, together with
design-based and resampling inference.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    GroupedDistribution,
    GroupRecord,
    IndexKind,
    IndexParams,
    IndexValue,
    RankWeights,
    Reference,
    achievement_my,
    achievement_wagstaff,
    atkinson_ratio,
    atkinson_standardize,
    concentration_classical,
    concentration_extended,
    concentration_two_param,
    convenient_regression,
    ge_index,
    ge_standardized,
    inverse_transform,
    power_transform,
    rank_positions,
    regression_path,
    relative_disparities,
    renyi_from_achievement,
    renyi_index,
    renyi_limit_alpha_inf,
    ri_ge_convert,
    ses_weights,
    slope_index,
    social_evaluation,
)
from .errors import (  # noqa: E402
    DegenerateReference,
    DegenerateRegression,
    DegenerateTest,
    DesignError,
    DomainError,
    EmptyGroup,
    InvalidInput,
    ParseError,
    RankDisparityError,
)
from .inference import (  # noqa: E402
    IndexEstimate,
    Method,
    RegistryRates,
    SurveyMicrodata,
    delta_method_variance,
    difference_test,
    linearized_variance,
    survey_totals,
)
from .resampling import (  # noqa: E402
    BootstrapConfig,
    NullSimConfig,
    bootstrap_difference,
    poisson_null_test,
    rescaled_bootstrap,
)
from .data_io import (  # noqa: E402
    DesignSpec,
    GroupedTable,
    emit_results,
    load_fixture,
    parse_grouped_csv,
    parse_microdata_csv,
    synthesize_microdata,
)
