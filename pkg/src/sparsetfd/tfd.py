"""Classical quadratic time-frequency distributions on a square circular grid.

Conventions shared by every module:

* A TF grid ``values[n, m]`` is indexed by time sample ``n`` and frequency
  bin ``m``; ``freq_axis[m]`` gives cycles/sample.
* An ambiguity grid ``values[i, j]`` is indexed by doppler ``theta = i - N//2``
  and lag ``k = j - N//2``, so the origin sits at ``[N//2, N//2]``.
* The two planes are related by a unitary 2D DFT: forward over time with
  ``exp(-j 2pi theta n / N)`` and inverse over frequency with
  ``exp(+j 2pi m k / N)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgument, NumericError
from .signals import Signal

__all__ = [
    "TFKind",
    "AmbiguityKind",
    "TFMatrix",
    "AmbiguityMatrix",
    "Kernel",
    "centered_bins",
    "lag_product",
    "tf_to_ambiguity",
    "ambiguity_to_tf",
    "real_part_checked",
    "spectrogram",
    "wigner",
    "ambiguity",
    "gaussian_kernel",
    "ones_kernel",
    "cohen",
]

IMAG_RESIDUE_TOL = 1e-6


class TFKind(str, enum.Enum):
    SPEC = "SPEC"
    WD = "WD"
    COHEN = "COHEN"
    CTD4 = "CTD4"
    SPARSE = "SPARSE"


class AmbiguityKind(str, enum.Enum):
    PLAIN = "PLAIN"
    REAL_TIME = "REAL_TIME"
    COMPLEX_TIME = "COMPLEX_TIME"
    COMBINED = "COMBINED"


def _check_square(values):
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise InvalidArgument(f"expected a square grid, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise NumericError("grid contains non-finite values")


@dataclass(frozen=True)
class TFMatrix:
    values: np.ndarray
    freq_axis: np.ndarray
    kind: TFKind
    time_axis: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values)
        _check_square(values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", TFKind(self.kind))
        object.__setattr__(self, "freq_axis", np.asarray(self.freq_axis, dtype=float))
        if self.time_axis is None:
            object.__setattr__(self, "time_axis", np.arange(values.shape[0]))
        if self.kind is TFKind.SPEC and (np.iscomplexobj(values) or values.min() < 0):
            raise InvalidArgument("spectrogram values must be real and non-negative")

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def bin_width(self) -> float:
        """Cycles/sample spanned by one frequency bin."""
        return float(self.freq_axis[1] - self.freq_axis[0])

    def replace(self, **changes) -> "TFMatrix":
        return replace(self, **changes)


@dataclass(frozen=True)
class AmbiguityMatrix:
    values: np.ndarray
    kind: AmbiguityKind = AmbiguityKind.PLAIN

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        _check_square(values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", AmbiguityKind(self.kind))

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def origin(self) -> complex:
        c = self.N // 2
        return complex(self.values[c, c])

    def replace(self, **changes) -> "AmbiguityMatrix":
        return replace(self, **changes)


@dataclass(frozen=True)
class Kernel:
    values: np.ndarray
    family: str = "gaussian"
    delta: float | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        _check_square(values)
        if values.min() < 0 or values.max() > 1:
            raise InvalidArgument("kernel values must lie in [0, 1]")
        object.__setattr__(self, "values", values)

    @property
    def N(self) -> int:
        return self.values.shape[0]


def centered_bins(N: int) -> np.ndarray:
    """Integer coordinates ``-N//2 .. N - N//2 - 1`` of a centered axis."""
    return np.arange(N) - N // 2


def lag_product(x: Signal | np.ndarray) -> np.ndarray:
    """Instantaneous autocorrelation ``p[n, k] = x[n+k] * conj(x[n-k])``.

    Columns follow the centered lag convention, column ``j`` is lag
    ``k = j - N//2``. Both :func:`wigner` and :func:`ambiguity` start here.
    """
    s = x.samples if isinstance(x, Signal) else np.asarray(x, dtype=complex)
    N = s.size
    n = np.arange(N)[:, None]
    k = centered_bins(N)[None, :]
    return s[(n + k) % N] * np.conj(s[(n - k) % N])


def _lag_dft(p: np.ndarray) -> np.ndarray:
    # columns are centered lags; DFT over the lag value, not the column index
    return np.fft.fft(np.fft.ifftshift(p, axes=1), axis=1)


def tf_to_ambiguity(values: np.ndarray) -> np.ndarray:
    """Unitary 2D DFT from a TF grid to an origin-centered ambiguity grid."""
    a = np.fft.fft(np.fft.ifft(values, axis=1), axis=0)
    return np.fft.fftshift(a, axes=(0, 1))


def ambiguity_to_tf(values: np.ndarray) -> np.ndarray:
    """Inverse of :func:`tf_to_ambiguity`."""
    a = np.fft.ifftshift(values, axes=(0, 1))
    return np.fft.fft(np.fft.ifft(a, axis=0), axis=1)


def real_part_checked(values: np.ndarray, tol: float = IMAG_RESIDUE_TOL) -> np.ndarray:
    """Drop a negligible imaginary residue; raise if it is not negligible."""
    scale = np.abs(values).max()
    if scale == 0:
        return np.zeros(values.shape)
    residue = np.abs(values.imag).max()
    if residue > tol * scale:
        raise NumericError(
            f"imaginary residue {residue:.3g} exceeds {tol:g} of peak {scale:.3g}")
    return values.real.copy()


def spectrogram(x: Signal, window) -> TFMatrix:
    """Squared magnitude of the circular short-time Fourier transform.

    ``SPEC[n, m] = |sum_k x[n+k] w[k] exp(-j 2pi m k / N)|**2`` with ``k``
    running over the window, centered on sample ``n``.
    """
    w = np.asarray(window, dtype=float)
    L = w.size
    N = x.N
    if L % 2 == 0:
        raise InvalidArgument("window length must be odd")
    if L > N:
        raise InvalidArgument("window longer than the signal")
    if not np.isclose(np.abs(w).max(), 1.0):
        raise InvalidArgument("window must have unit peak")
    k = np.arange(L) - L // 2
    n = np.arange(N)[:, None]
    frames = np.zeros((N, N), dtype=complex)
    frames[:, k % N] = x.samples[(n + k) % N] * w
    values = np.abs(np.fft.fft(frames, axis=1)) ** 2
    return TFMatrix(values, np.arange(N) / N, TFKind.SPEC)


def wigner(x: Signal) -> TFMatrix:
    """Discrete circular Wigner distribution over the full lag range.

    A pure tone at ``f0`` cycles/sample peaks at bin ``round(2 f0 N) mod N``;
    ``freq_axis[m] = m / (2N)``.
    """
    values = real_part_checked(_lag_dft(lag_product(x)))
    return TFMatrix(values, np.arange(x.N) / (2 * x.N), TFKind.WD)


def ambiguity(x: Signal) -> AmbiguityMatrix:
    """Ambiguity function ``A[theta, k] = sum_n p[n, k] exp(-j 2pi theta n / N)``."""
    a = np.fft.fftshift(np.fft.fft(lag_product(x), axis=0), axes=0)
    return AmbiguityMatrix(a, AmbiguityKind.PLAIN)


def gaussian_kernel(N: int, delta: float) -> Kernel:
    """``exp(-(tau**2 + theta**2) / delta**2)`` on centered bin coordinates."""
    if not delta > 0:
        raise InvalidArgument("delta must be positive")
    c = centered_bins(N).astype(float)
    values = np.exp(-(c[:, None] ** 2 + c[None, :] ** 2) / float(delta) ** 2)
    return Kernel(values, "gaussian", float(delta))


def ones_kernel(N: int) -> Kernel:
    return Kernel(np.ones((N, N)), "none", None)


def cohen(x: Signal, kernel: Kernel) -> TFMatrix:
    """Cohen-class distribution from a kernel-weighted ambiguity function."""
    if kernel.N != x.N:
        raise InvalidArgument(f"kernel is {kernel.N}x{kernel.N}, signal has N={x.N}")
    a = ambiguity(x).values * kernel.values
    values = real_part_checked(ambiguity_to_tf(a))
    return TFMatrix(values, np.arange(x.N) / (2 * x.N), TFKind.COHEN)
