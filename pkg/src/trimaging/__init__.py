"""Wideband computational time-reversal imaging built on per-cell decision
statistics, with exact distribution theory and Monte Carlo validation."""

from .errors import (
    ConfigError,
    DegenerateDenominator,
    SeriesNonConvergence,
    SingularFoldyLax,
    SingularGreen,
    TrimagingError,
    UnsupportedStatistic,
    ZeroTau,
    ZeroXi,
)
from .forward import MdmSet, ScattererSet, scattering_matrix, synthesize_mdm, vectorize
from .imaging import (
    STATISTICS,
    ImageGridSpec,
    ImageMap,
    XiVector,
    glr_stat,
    gm_stat,
    hm_stat,
    likelihood_image_stat,
    mf_image_stat,
    mis,
    ml_image_stat,
    na_stat,
    rao_stat,
    render_map,
    wald_stat,
    xi,
)
from .scene import (
    ArrayLayout,
    FrequencyPlan,
    Position2D,
    SteeringSet,
    default_layout,
    default_plan,
    green,
    linear_array,
    steering,
)
from .theory import (
    ComplexChiSquareLaw,
    ComplexFLaw,
    NoncentralityField,
    SnrVector,
    cchi2_cdf,
    cchi2_pdf,
    cchi2_sample,
    cf_cdf,
    cf_logpdf,
    cf_pdf,
    cf_sample,
    mpi_stat,
    noncentrality_explicit,
    noncentrality_field,
    noncentrality_projection,
    predict_stat_law,
    snr_vector,
)
from .validate import (
    McConfig,
    McReport,
    cfar_experiment,
    ks_critical,
    ks_distance,
    ks_experiment,
    mc_report,
    run_average,
)

__version__ = "0.1.0"
