"""Secrecy capacity of finite-memory Gaussian MIMO wiretap channels.

The channel has a finite-length matrix impulse response to both the
legitimate receiver and the eavesdropper, colored noise with finite
correlation length at each, and a per-symbol transmit power budget.  The
capacity is computed in the frequency domain: scalar channels by a
closed-form waterfilling allocation, general MIMO channels by per-DFT-bin
covariance optimization on the PSD cone with a cross-bin power split, plus
a strict-positivity test and a reduction for periodically time-varying
(power-line style) channels.
"""

__version__ = "0.1.0"

from .channel import (
    Bin,
    BinSet,
    MatrixTapSequence,
    MimoWiretapChannel,
    NoiseAutocorrelation,
    SpectralPoint,
    build_bins,
    circular_autocorrelation,
    frequency_response,
    noise_spectral_density,
)
from .errors import (
    BlockTooShort,
    DimensionMismatch,
    IoError,
    NoPositiveRegion,
    NotPositiveDefinite,
    ParseError,
    PeriodTooShort,
    SingularNoise,
    ValidationError,
    WiresecError,
)
from .mimo import (
    AllocationOptions,
    BinOptimizerOptions,
    CapacityResult,
    CovarianceAllocation,
    PsdCovariance,
    allocate_and_optimize,
    convergence_study,
    maximize_bin,
    per_bin_rate,
    per_bin_rate_gradient,
    project_psd_trace,
)
from .oracles import (
    McBinCovariance,
    OracleConfig,
    mc_noise_dft_covariance,
    rank_one_sphere_oracle,
    scalar_grid_oracle,
)
from .plc import (
    PlcBlockChannel,
    PlcChannel,
    build_block_channel,
    plc_secrecy_capacity,
    simulate_block,
    simulate_lptv,
)
from .positivity import PositivityReport, max_gain_ratio, positivity_check, whiten
from .scalar import (
    SnrDensityGrid,
    WaterfillingSolution,
    discrete_scalar_capacity,
    snr_densities,
    waterfill,
)
