"""Sparse time-frequency analysis with complex-time distributions.

Quadratic and fourth-order complex-time distributions, their ambiguity-domain
counterparts, compressive-sensing reconstruction from a masked ambiguity
plane, L-statistics denoising and instantaneous-frequency tracking.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DomainError,
    FormatError,
    InvalidArgument,
    NumericError,
    NumericWarning,
    SparseTFDError,
    TrackingError,
)
from .signals import (  # noqa: E402
    ImpulseNoiseSpec,
    PhaseSpec,
    PhaseTerm,
    Signal,
    add_impulse_noise,
    complex_power,
    eval_complex_lag,
    gen_fm_signal,
    monocomponent_spec,
    two_component_spec,
)
from .tfd import (  # noqa: E402
    AmbiguityKind,
    AmbiguityMatrix,
    Kernel,
    TFKind,
    TFMatrix,
    ambiguity,
    ambiguity_to_tf,
    cohen,
    gaussian_kernel,
    spectrogram,
    tf_to_ambiguity,
    wigner,
)
from .ctd import (  # noqa: E402
    CTDWindow,
    MomentMatrix,
    ambiguity_complex,
    ambiguity_real,
    combine_ambiguity,
    ctd_direct,
    ctd_from_ambiguity,
    ctd_via_ambiguity,
    kernel_filter,
    moment,
)
from .csr import (  # noqa: E402
    Mask,
    MeasurementSet,
    SolverConfig,
    SolverReport,
    adjoint_op,
    build_mask,
    forward_op,
    ista_solve,
    select_measurements,
    soft_threshold,
)
from .robust import (  # noqa: E402
    TrimPolicy,
    lstat_denoise,
    robust_initial_estimate,
    robust_initial_transform,
)
from .ifest import IFTrack, IFTruth, MSEResult, estimate_if, mse_if  # noqa: E402
from .io import export_matrix, load_signal, save_signal  # noqa: E402
