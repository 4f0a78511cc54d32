"""Complex-lag moments and the fourth-order complex-time distribution.

Two routes are provided. The direct route builds the moment ``R4[n, k]`` and
takes a DFT over the lag. The ambiguity route builds separate real-time and
complex-time ambiguity functions, filters each with a kernel, merges them
through an epsilon-window convolution and maps the result back to the TF plane.

Lag convention for order 4: column ``k`` (centered) evaluates the signal at
``n +- k/4`` and ``n +- j k/4``, so a tone at ``f0`` peaks at bin
``round(f0 N)``. Order 2 keeps the Wigner convention ``n +- k``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .signals import Signal, eval_complex_lag
from .tfd import (
    AmbiguityKind,
    AmbiguityMatrix,
    Kernel,
    TFKind,
    TFMatrix,
    ambiguity,
    ambiguity_to_tf,
    centered_bins,
    lag_product,
    real_part_checked,
)

__all__ = [
    "MomentMatrix",
    "CTDWindow",
    "BRANCH_TOL",
    "moment",
    "complex_lag_factor",
    "ctd_direct",
    "ambiguity_real",
    "ambiguity_complex",
    "kernel_filter",
    "combine_ambiguity",
    "ctd_from_ambiguity",
    "ctd_via_ambiguity",
]

BRANCH_TOL = 1e-3
BRANCH_WARN_DENSITY = 0.10
_CUT_SNAP = BRANCH_TOL


@dataclass(frozen=True)
class MomentMatrix:
    """Moment ``R[n, k]`` plus a mask of cells evaluated near the branch cut."""

    values: np.ndarray
    order: int
    branch_mask: np.ndarray

    @property
    def flag_density(self) -> float:
        return float(self.branch_mask.mean())


@dataclass(frozen=True)
class CTDWindow:
    """Window ``W`` over the ``N`` centered epsilon bins."""

    values: np.ndarray
    family: str
    width: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if not np.isclose(v.max(), 1.0):
            raise InvalidArgument("window must have unit peak")

    @classmethod
    def make(cls, N: int, family: str = "rect", width: int | None = None) -> "CTDWindow":
        """Build a window; ``width=None`` (or ``N``) means full width."""
        width = N if width is None else int(width)
        if family == "delta":
            width = 1
        if width < 1 or width > N or (width != N and width % 2 == 0):
            raise InvalidArgument("window width must be odd and <= N, or exactly N")
        e = centered_bins(N)
        half = width // 2
        inside = np.ones(N, bool) if width == N else np.abs(e) <= half
        if family in ("rect", "delta"):
            v = inside.astype(float)
        elif family == "hann":
            v = np.where(inside, np.cos(np.pi * e / (width + 1)) ** 2, 0.0)
        else:
            raise InvalidArgument(f"unknown window family {family!r}")
        return cls(v, family, width)

    @property
    def N(self) -> int:
        return self.values.size

    def lag_response(self) -> np.ndarray:
        """``w[d] = (1/N) sum_eps W[eps] exp(j 2pi eps d / N)`` on centered ``d``."""
        N = self.N
        e = centered_bins(N)
        return np.exp(2j * np.pi * np.outer(e, e) / N) @ self.values / N


def _check_order(order):
    if order not in (2, 4):
        raise InvalidArgument(f"unsupported moment order {order}; use 2 or 4")


def _samples(x):
    return x.samples if isinstance(x, Signal) else np.asarray(x, dtype=complex)


def _quarter_offsets(N, lag_scale):
    return centered_bins(N) * lag_scale / 4.0


def _real_lag_part(x, lag_scale=1.0, band=None):
    offs = _quarter_offsets(x.size, lag_scale)
    plus = eval_complex_lag(x, offs, 0.0, band).T
    minus = eval_complex_lag(x, -offs, 0.0, band).T
    return plus * np.conj(minus)


def complex_lag_factor(x, lag_scale: float = 1.0, band: float | None = None):
    """Complex-lag part ``x(n + jk/4)**(-j) * x(n - jk/4)**(+j)`` of the moment.

    Returns ``(values, branch_mask)``. Cells where either base is exactly zero
    are set to zero and flagged along with near-branch-cut cells.
    """
    s = _samples(x)
    offs = _quarter_offsets(s.size, lag_scale)
    up = eval_complex_lag(s, 0.0, offs, band).T
    down = eval_complex_lag(s, 0.0, -offs, band).T
    zero = (up == 0) | (down == 0)
    up = np.where(zero, 1.0, up)
    down = np.where(zero, 1.0, down)
    arg_up, arg_down = np.angle(up), np.angle(down)
    near_cut = (np.abs(arg_up) > np.pi - BRANCH_TOL) | (np.abs(arg_down) > np.pi - BRANCH_TOL)
    # principal branch, arg in (-pi, pi]; rounding can land a value that sits
    # on the cut at -pi, so flagged values below the cut are moved to +pi
    arg_up = np.where(arg_up < -np.pi + _CUT_SNAP, np.pi, arg_up)
    arg_down = np.where(arg_down < -np.pi + _CUT_SNAP, np.pi, arg_down)
    log_up = np.log(np.abs(up)) + 1j * arg_up
    log_down = np.log(np.abs(down)) + 1j * arg_down
    values = np.exp(-1j * log_up + 1j * log_down)
    values[zero] = 0.0
    return values, near_cut | zero


def moment(x: Signal, order: int = 4, band: float | None = None,
           lag_scale: float = 1.0) -> MomentMatrix:
    """Complex-time moment ``R_order[n, k]``.

    Order 2 is the Wigner product ``x[n+k] conj(x[n-k])``. Order 4 is
    ``x(n+k/4) conj(x(n-k/4)) x(n+jk/4)**(-j) x(n-jk/4)**(+j)`` with every
    fractional or complex argument evaluated spectrally.

    A :class:`~sparsetfd.errors.NumericWarning` is issued when more than 10%
    of cells were evaluated within ``BRANCH_TOL`` of the branch cut.
    """
    _check_order(order)
    s = _samples(x)
    N = s.size
    if not np.any(s):
        return MomentMatrix(np.zeros((N, N), complex), order, np.zeros((N, N), bool))
    if order == 2:
        return MomentMatrix(lag_product(s), 2, np.zeros((N, N), bool))
    cfac, mask = complex_lag_factor(s, lag_scale, band)
    values = _real_lag_part(s, lag_scale, band) * cfac
    m = MomentMatrix(values, 4, mask)
    if m.flag_density > BRANCH_WARN_DENSITY:
        from .errors import NumericWarning

        warnings.warn(
            f"{m.flag_density:.1%} of moment cells lie near the branch cut",
            NumericWarning, stacklevel=2)
    return m


def _lag_dft(values):
    return np.fft.fft(np.fft.ifftshift(values, axes=1), axis=1)


def ctd_direct(x: Signal, order: int = 4, lag_window=None,
               band: float | None = None) -> TFMatrix:
    """Complex-time distribution by lag DFT of the moment.

    Parameters
    ----------
    x : Signal
    order : {2, 4}
    lag_window : array_like, optional
        Real weights over the ``N`` centered lags, applied before the DFT.
        Large complex lags amplify out-of-band content exponentially, so a
        short window is usually wanted for non-periodic or noisy input.
    band : float, optional
        Passed to :func:`~sparsetfd.signals.eval_complex_lag`.
    """
    R = moment(x, order, band=band).values
    if lag_window is not None:
        R = R * np.asarray(lag_window, dtype=float)[None, :]
    N = x.N
    if order == 2:
        return TFMatrix(real_part_checked(_lag_dft(R)), np.arange(N) / (2 * N), TFKind.WD)
    return TFMatrix(_lag_dft(R), np.arange(N) / N, TFKind.CTD4)


def ambiguity_real(x: Signal, order: int = 4, lag_scale: float = 1.0,
                   band: float | None = None) -> AmbiguityMatrix:
    """DFT over time of ``x(n + k/order') conj(x(n - k/order'))``.

    For ``order=2`` this is the plain ambiguity function.
    """
    _check_order(order)
    if order == 2:
        return ambiguity(x).replace(kind=AmbiguityKind.REAL_TIME)
    r = _real_lag_part(_samples(x), lag_scale, band)
    a = np.fft.fftshift(np.fft.fft(r, axis=0), axes=0)
    return AmbiguityMatrix(a, AmbiguityKind.REAL_TIME)


def ambiguity_complex(x: Signal, order: int = 4, literal_imag_part: bool = False,
                      lag_scale: float = 1.0, band: float | None = None) -> AmbiguityMatrix:
    """DFT over time of the complex-lag factor of the fourth-order moment.

    With ``literal_imag_part=True`` the imaginary part of the full moment is
    transformed instead.
    """
    if order != 4:
        raise InvalidArgument("the complex-time ambiguity function needs order 4")
    s = _samples(x)
    if literal_imag_part:
        r = (_real_lag_part(s, lag_scale, band) * complex_lag_factor(s, lag_scale, band)[0]).imag
    else:
        r = complex_lag_factor(s, lag_scale, band)[0]
    a = np.fft.fftshift(np.fft.fft(r, axis=0), axes=0)
    return AmbiguityMatrix(a, AmbiguityKind.COMPLEX_TIME)


def kernel_filter(a: AmbiguityMatrix, k: Kernel) -> AmbiguityMatrix:
    if a.N != k.N:
        raise InvalidArgument(f"kernel is {k.N}x{k.N}, ambiguity is {a.N}x{a.N}")
    return a.replace(values=a.values * k.values)


def combine_ambiguity(ar: AmbiguityMatrix, act: AmbiguityMatrix,
                      w: CTDWindow | None = None) -> AmbiguityMatrix:
    """Merge real-time and complex-time ambiguity functions.

    ``A[th, t] = sum_{t1} wl[t - 2 t1] sum_{th1} ar[th1, t1] act[th - th1, t - t1]``
    where ``wl`` is :meth:`CTDWindow.lag_response`, taken as zero outside
    ``[-N/2, N/2)``. The doppler sum is a circular convolution done by FFT.
    With the full-width rectangular window this collapses to
    ``A[th, t] = sum_{th1} ar[th1, t/2] act[th - th1, t/2]`` on even ``t``.
    """
    if ar.kind is not AmbiguityKind.REAL_TIME or act.kind is not AmbiguityKind.COMPLEX_TIME:
        raise InvalidArgument("combine_ambiguity needs REAL_TIME and COMPLEX_TIME inputs")
    N = ar.N
    if act.N != N:
        raise InvalidArgument("ambiguity grids differ in size")
    w = CTDWindow.make(N) if w is None else w
    if w.N != N:
        raise InvalidArgument("window length differs from the grid")
    wl = w.lag_response()
    c = N // 2
    AR = np.fft.fft(np.fft.ifftshift(ar.values, axes=0), axis=0)
    ACT = np.fft.fft(np.fft.ifftshift(act.values, axes=0), axis=0)
    lags = centered_bins(N)
    out = np.zeros((N, N), complex)
    for j, tau in enumerate(lags):
        d = tau - 2 * lags
        ok = (d >= -c) & (d < N - c) & (wl[np.clip(d + c, 0, N - 1)] != 0)
        if not ok.any():
            continue
        t1 = np.nonzero(ok)[0]
        weight = wl[d[t1] + c]
        partner = (tau - lags[t1] + c) % N
        spec = (AR[:, t1] * ACT[:, partner]) @ weight
        out[:, j] = np.fft.fftshift(np.fft.ifft(spec))
    return AmbiguityMatrix(out, AmbiguityKind.COMBINED)


def ctd_from_ambiguity(a: AmbiguityMatrix, take_real: bool = False) -> TFMatrix:
    """Map an ambiguity grid back to the TF plane.

    The result is complex unless ``take_real`` is set, in which case an
    imaginary residue above 1e-6 of the peak raises
    :class:`~sparsetfd.errors.NumericError`.
    """
    values = ambiguity_to_tf(a.values)
    if take_real:
        values = real_part_checked(values)
    return TFMatrix(values, np.arange(a.N) / a.N, TFKind.CTD4)


def ctd_via_ambiguity(x: Signal, kernel: Kernel | None = None,
                      window: CTDWindow | None = None, band: float | None = None) -> TFMatrix:
    """Fourth-order CTD through separately filtered ambiguity functions.

    Both ambiguity functions are sampled on a doubled lag grid so the
    epsilon-window merge lands back on the direct route's lag grid. A
    full-width rectangular window leaves every odd output lag empty, which
    folds the frequency axis onto itself with period ``N/2``; the default
    full-width Hann window instead interpolates odd lags from their
    neighbours. The merged grid is rescaled so its origin equals the signal
    energy.
    """
    N = x.N
    ar = ambiguity_real(x, 4, lag_scale=2.0, band=band)
    act = ambiguity_complex(x, 4, lag_scale=2.0, band=band)
    if kernel is not None:
        ar, act = kernel_filter(ar, kernel), kernel_filter(act, kernel)
    if window is None:
        window = CTDWindow.make(N, "hann")
    merged = combine_ambiguity(ar, act, window)
    origin = merged.origin
    if origin != 0:
        merged = merged.replace(values=merged.values * (x.energy / origin))
    return ctd_from_ambiguity(merged)
