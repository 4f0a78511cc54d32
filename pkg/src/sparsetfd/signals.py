"""Test-signal generation, fractional/complex-time evaluation and impulse noise.

Signals are treated as one period of an N-periodic sequence everywhere, so
every shift (integer, fractional or imaginary) is circular.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidArgument, NumericError

__all__ = [
    "Signal",
    "PhaseTerm",
    "PhaseSpec",
    "ImpulseNoiseSpec",
    "gen_fm_signal",
    "eval_complex_lag",
    "complex_power",
    "add_impulse_noise",
    "signed_frequencies",
    "two_component_spec",
    "monocomponent_spec",
]


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled complex signal.

    Parameters
    ----------
    samples : array_like
        Complex samples, length ``N`` (even, at least 8).
    sample_rate : float
        Samples per unit time. Metadata only.
    t_start : float
        Time of the first sample.
    """

    samples: np.ndarray
    sample_rate: float = 1.0
    t_start: float = 0.0

    def __post_init__(self):
        x = np.array(self.samples, dtype=complex, copy=True).ravel()
        if x.size < 8 or x.size % 2:
            raise InvalidArgument(f"signal length must be even and >= 8, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise InvalidArgument("signal samples must be finite")
        if not self.sample_rate > 0:
            raise InvalidArgument("sample_rate must be positive")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    @property
    def N(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t_start + np.arange(self.N) / self.sample_rate

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))

    def __len__(self):
        return self.N


@dataclass(frozen=True)
class PhaseTerm:
    """One additive phase term.

    ``kind="cosine"`` contributes ``coeff * cos(rate * t)``;
    ``kind="linear"`` contributes ``coeff * rate * t``.
    """

    coeff: float
    kind: str
    rate: float

    def __post_init__(self):
        if self.kind not in ("cosine", "linear"):
            raise InvalidArgument(f"unknown phase term kind {self.kind!r}")
        if not (np.isfinite(self.coeff) and np.isfinite(self.rate)):
            raise InvalidArgument("phase term coefficients must be finite")

    def phase(self, t):
        if self.kind == "cosine":
            return self.coeff * np.cos(self.rate * t)
        return self.coeff * self.rate * t

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "cosine":
            return -self.coeff * self.rate * np.sin(self.rate * t)
        return np.full_like(t, self.coeff * self.rate)


@dataclass(frozen=True)
class PhaseSpec:
    """Phase law of a single unit-amplitude FM component."""

    terms: tuple[PhaseTerm, ...]
    t_start: float = 0.0
    t_end: float | None = None

    def __post_init__(self):
        terms = tuple(
            t if isinstance(t, PhaseTerm) else PhaseTerm(*t) for t in self.terms
        )
        if not terms:
            raise InvalidArgument("phase spec needs at least one term")
        object.__setattr__(self, "terms", terms)
        if self.t_end is not None and not self.t_end > self.t_start:
            raise InvalidArgument("t_end must exceed t_start")

    def phase(self, t):
        t = np.asarray(t, dtype=float)
        return sum(term.phase(t) for term in self.terms)

    def phase_derivative(self, t):
        """Angular instantaneous frequency (radians per unit time)."""
        t = np.asarray(t, dtype=float)
        return sum(term.derivative(t) for term in self.terms)


@dataclass(frozen=True)
class ImpulseNoiseSpec:
    count: int
    amplitude_scale: float = 1.0
    seed: int = 0
    # optional (rows, cols) index arrays limiting where impulses may land
    region: tuple[np.ndarray, np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.count < 0:
            raise InvalidArgument("impulse count must be non-negative")
        if not self.amplitude_scale > 0:
            raise InvalidArgument("amplitude_scale must be positive")
        if self.seed < 0:
            raise InvalidArgument("seed must be unsigned")


def _as_specs(spec) -> list[PhaseSpec]:
    if isinstance(spec, PhaseSpec):
        return [spec]
    specs = list(spec)
    if not specs:
        raise InvalidArgument("empty phase spec")
    return specs


def gen_fm_signal(spec: PhaseSpec | Sequence[PhaseSpec], N: int,
                  sample_rate: float | None = None) -> Signal:
    """Sum of unit-amplitude components ``exp(j*phi_c(t_n))``.

    ``t_n = t_start + n / sample_rate``. When ``sample_rate`` is omitted it is
    derived from the interval of the first component, ``N / (t_end - t_start)``.
    """
    specs = _as_specs(spec)
    if N % 2 or N < 8:
        raise InvalidArgument(f"N must be even and >= 8, got {N}")
    first = specs[0]
    if sample_rate is None:
        if first.t_end is None:
            raise InvalidArgument("sample_rate required when the spec has no t_end")
        sample_rate = N / (first.t_end - first.t_start)
    t = first.t_start + np.arange(N) / sample_rate
    x = np.zeros(N, dtype=complex)
    for s in specs:
        x += np.exp(1j * s.phase(t))
    return Signal(x, sample_rate=float(sample_rate), t_start=first.t_start)


def signed_frequencies(N: int) -> np.ndarray:
    """Angular frequency of each FFT bin, in radians per sample, in [-pi, pi)."""
    return 2 * np.pi * np.fft.fftfreq(N)


def _lag_weights(N, a, b, band):
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    w = signed_frequencies(N)
    W = np.exp(1j * np.outer(a, w) - np.outer(b, w))
    # the Nyquist bin has no unique signed frequency; keep it only for pure
    # integer shifts where exp(j*pi*a) is unambiguous
    exact = (b == 0) & (a == np.round(a))
    W[~exact, N // 2] = 0.0
    if band is not None:
        W[:, np.abs(w) > 2 * np.pi * band] = 0.0
    return W


SPECTRAL_FLOOR = 1e-12


def eval_complex_lag(x: Signal | np.ndarray, a, b=0.0, band: float | None = None,
                     floor: float = SPECTRAL_FLOOR):
    """Evaluate a periodic band-limited signal at times ``n + a + j*b``.

    Parameters
    ----------
    x : Signal or ndarray
        Input samples.
    a, b : float or array_like
        Real and imaginary lag in samples. Arrays broadcast against each
        other and produce one output row per lag.
    band : float, optional
        If given, spectral bins with ``|f| > band`` cycles/sample are dropped
        before weighting. This tames the exponential gain ``exp(-w*b)`` on
        out-of-band leakage.
    floor : float
        Spectral bins below ``floor`` times the peak bin magnitude are treated
        as rounding noise and zeroed, otherwise the gain ``exp(-w*b)`` turns
        them into visible error. Set to 0 to keep every bin.

    Returns
    -------
    ndarray
        Shape ``(N,)`` for scalar lags, otherwise ``(n_lags, N)``.
    """
    samples = x.samples if isinstance(x, Signal) else np.asarray(x, dtype=complex)
    N = samples.size
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    if np.any(np.abs(b) > N / 4):
        raise DomainError(f"imaginary lag exceeds guard N/4 = {N / 4}")
    X = np.fft.fft(samples)
    if floor > 0:
        X[np.abs(X) < floor * np.abs(X).max()] = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        Y = X[None, :] * _lag_weights(N, a, b, band)
    if not np.all(np.isfinite(Y)):
        raise NumericError("non-finite spectrum after complex-lag weighting")
    y = np.fft.ifft(Y, axis=-1)
    return y[0] if scalar else y


def complex_power(z, p):
    """Principal-branch power ``exp(p * Log z)``; raises on ``z == 0``."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("complex_power of zero")
    out = np.exp(p * np.log(z))
    return out[()] if out.ndim == 0 else out


def add_impulse_noise(m, spec: ImpulseNoiseSpec):
    """Return a copy of an ambiguity matrix with ``spec.count`` random impulses.

    Impulse magnitudes are uniform in ``[0.5, 1] * amplitude_scale * max|m|``
    with uniform phase; cells are distinct and drawn from ``spec.region`` when
    given, else from the whole grid.
    """
    from .tfd import AmbiguityMatrix

    values = m.values if isinstance(m, AmbiguityMatrix) else np.asarray(m)
    out = np.array(values, dtype=complex, copy=True)
    if spec.region is None:
        rows, cols = np.indices(out.shape)
        rows, cols = rows.ravel(), cols.ravel()
    else:
        rows, cols = (np.asarray(r).ravel() for r in spec.region)
    if spec.count >= rows.size:
        raise InvalidArgument("impulse count must be smaller than the number of cells")
    if spec.count:
        rng = np.random.default_rng(spec.seed)
        pick = rng.choice(rows.size, size=spec.count, replace=False)
        peak = np.abs(values).max()
        mag = rng.uniform(0.5, 1.0, spec.count) * spec.amplitude_scale * peak
        phase = rng.uniform(0.0, 2 * np.pi, spec.count)
        out[rows[pick], cols[pick]] += mag * np.exp(1j * phase)
    if isinstance(m, AmbiguityMatrix):
        return m.replace(values=out)
    return out


def two_component_spec(t_start: float = -1.0, t_end: float = 1.0) -> list[PhaseSpec]:
    """Two FM components with fast sinusoidal IF variation (radar benchmark)."""
    pi = np.pi
    c1 = PhaseSpec(
        ((1.0, "cosine", pi), (0.5, "cosine", 4 * pi), (1.0, "linear", 2.25 * pi)),
        t_start, t_end)
    c2 = PhaseSpec(
        ((0.5, "cosine", pi), (0.5, "cosine", 3 * pi), (0.5, "cosine", 4 * pi),
         (1.0, "linear", -4 * pi)),
        t_start, t_end)
    return [c1, c2]


def monocomponent_spec(t_start: float = -1.0, t_end: float = 1.0) -> PhaseSpec:
    """Periodically modulated single component (rotating reflector)."""
    pi = np.pi
    return PhaseSpec(
        ((4.0, "cosine", pi), (2 / 3, "cosine", 3 * pi), (2 / 3, "cosine", 5 * pi)),
        t_start, t_end)
