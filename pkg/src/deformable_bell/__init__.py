"""Two-party sign games on the circle, flat and with density-deformed coordinates."""

from .analytic import (
    DesignError,
    DetectorQuadruple,
    HolonomyReport,
    InconsistentQuadrupleError,
    chsh_value,
    corr_deform,
    corr_flat,
    design_density,
    holonomy,
)
from .circle import add, sign_of, wrap
from .density import (
    AngularDensity,
    DensityValidationError,
    cdf,
    from_table,
    make_quantum,
    make_uniform,
    validate,
)
from .gamma import DeformationMap, build, gamma_inverse
from .montecarlo import (
    ChshReport,
    CorrelationEstimate,
    ExperimentConfig,
    run_chsh,
    run_correlation,
    run_sweep,
    zero_mean_check,
)

__version__ = "0.1.0"
