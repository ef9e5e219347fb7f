"""Minimum-phase FIR filters from Cholesky factors of banded Toeplitz Gramians."""
from .design import (
    DesignFailure,
    DesignSpec,
    LiftReport,
    LinearPhaseRipples,
    WaterfallPoint,
    convert_ripples,
    design_minphase,
    lift_prototype,
    measure_gamma_psd,
    waterfall_sweep,
)
from .gramian import (
    AllPassMatrix,
    CholeskyFactor,
    GramianSystem,
    NotPositiveDefinite,
    build_allpass,
    build_gramian,
    cholesky,
    extract_minphase,
    min_eigenvalue,
)
from .orchard_wilson import (
    NonConvergence,
    ResidualReport,
    SolverConfig,
    jacobian,
    refine,
    residual,
    verify_definition,
)
from .signal_core import (
    FirFilter,
    FrequencyGrid,
    LinearPhasePrototype,
    amplitude_response,
    autocorrelation,
    convolve,
    energy_concentration,
    frequency_response_magnitude,
    zeros,
)
from .conversion import MmseConfig, TransformResult, mmse_transform, spectral_equality_check, transform

__version__ = "0.1.0"
