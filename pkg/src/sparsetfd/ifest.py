"""Instantaneous-frequency tracking on TF planes and MSE against the phase law."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, TrackingError
from .signals import PhaseSpec, Signal
from .tfd import TFMatrix

__all__ = [
    "IFTrack",
    "IFTruth",
    "MSEResult",
    "column_peaks",
    "estimate_if",
    "mse_if",
    "FAIL_FRACTION",
]

# share of interior columns allowed to be untracked before a component fails
FAIL_FRACTION = 0.25


@dataclass(frozen=True)
class IFTrack:
    """Per-column frequency bin of one component.

    Columns where lock was lost carry the previous estimate forward and are
    marked ``False`` in ``tracked``.
    """

    bins: np.ndarray
    tracked: np.ndarray
    component: int
    freq_axis: np.ndarray

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=int)
        tracked = np.asarray(self.tracked, dtype=bool)
        if bins.shape != tracked.shape:
            raise InvalidArgument("bins and tracked differ in length")
        nf = len(self.freq_axis)
        if bins.size and (bins.min() < 0 or bins.max() >= nf):
            raise InvalidArgument("track bins outside the frequency axis")
        object.__setattr__(self, "bins", bins)
        object.__setattr__(self, "tracked", tracked)

    @property
    def frequencies(self) -> np.ndarray:
        """Tracked frequency in cycles/sample, read off ``freq_axis``."""
        return np.asarray(self.freq_axis)[self.bins]


@dataclass(frozen=True)
class IFTruth:
    """True instantaneous frequency, cycles/sample, one row per component."""

    freqs: np.ndarray

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.freqs, dtype=float))
        if not np.all(np.isfinite(f)):
            raise InvalidArgument("truth must be finite")
        object.__setattr__(self, "freqs", f)

    @classmethod
    def from_specs(cls, specs, signal: Signal) -> "IFTruth":
        specs = [specs] if isinstance(specs, PhaseSpec) else list(specs)
        t = signal.times
        rows = [s.phase_derivative(t) / (2 * np.pi * signal.sample_rate) for s in specs]
        return cls(np.array(rows))

    @property
    def K(self) -> int:
        return self.freqs.shape[0]

    def bins(self, freq_axis) -> np.ndarray:
        """Fractional bin positions on a uniform axis starting at 0."""
        freq_axis = np.asarray(freq_axis, dtype=float)
        width = freq_axis[1] - freq_axis[0]
        return np.mod(self.freqs / width, len(freq_axis))


@dataclass(frozen=True)
class MSEResult:
    """Per-component MSE in squared bins over ``interior`` columns.

    ``mse[c]`` and ``failed_components[c]`` refer to truth component ``c``;
    ``assignment[c]`` is the track matched to it.
    """

    mse: tuple[float, ...]
    interior: tuple[int, int]
    failed_components: tuple[bool, ...]
    assignment: tuple[int, ...]

    @property
    def failed(self) -> bool:
        return any(self.failed_components)


def _circ(d, n):
    return (d + n / 2) % n - n / 2


def column_peaks(col: np.ndarray, K: int, sep: int) -> list[int]:
    """Up to ``K`` largest circular local maxima at least ``sep`` bins apart.

    A local maximum exceeds its left neighbour and is not below its right
    one. Equal heights are ranked by lower bin.
    """
    nf = col.size
    left = np.roll(col, 1)
    right = np.roll(col, -1)
    cand = np.flatnonzero((col > left) & (col >= right))
    cand = cand[np.lexsort((cand, -col[cand]))]
    chosen: list[int] = []
    for i in cand:
        if all(abs(_circ(i - j, nf)) >= sep for j in chosen):
            chosen.append(int(i))
            if len(chosen) == K:
                break
    return chosen


def estimate_if(tf: TFMatrix, K: int = 1, sep: int | None = None,
                lock: float | None = None) -> list[IFTrack]:
    """Track the ``K`` strongest ridges of ``|tf.values|`` across time.

    Parameters
    ----------
    tf : TFMatrix
    K : int
        Number of components.
    sep : int, optional
        Minimum peak spacing in bins, default ``ceil(N_f / (8K))``.
    lock : float, optional
        Largest move in bins between columns, default ``N_f / 8``.

    Notes
    -----
    Peaks in a column are assigned to tracks by the permutation with the
    smallest total circular distance to the previous estimates, with ties
    resolved toward lower bins.
    """
    if K < 1:
        raise InvalidArgument("K must be at least 1")
    mag = np.abs(tf.values)
    if not np.all(np.isfinite(mag)):
        raise InvalidArgument("TF matrix must be finite")
    nt, nf = mag.shape
    sep = math.ceil(nf / (8 * K)) if sep is None else int(sep)
    lock = nf / 8 if lock is None else float(lock)
    first = column_peaks(mag[0], K, sep)
    if len(first) < K:
        raise TrackingError(f"found {len(first)} separated peaks in the first column, need {K}")
    bins = np.zeros((K, nt), int)
    tracked = np.ones((K, nt), bool)
    bins[:, 0] = sorted(first)
    for n in range(1, nt):
        prev = bins[:, n - 1]
        peaks = column_peaks(mag[n], K, sep)
        best = None
        for perm in itertools.permutations(range(len(peaks)), min(K, len(peaks))):
            cost = sum(abs(_circ(peaks[p] - prev[i], nf)) for i, p in enumerate(perm))
            key = (cost, [peaks[p] for p in perm])
            if best is None or key < best[0]:
                best = (key, perm)
        assigned = best[1] if best else ()
        for i in range(K):
            if i < len(assigned) and abs(_circ(peaks[assigned[i]] - prev[i], nf)) <= lock:
                bins[i, n] = peaks[assigned[i]]
            else:
                bins[i, n] = prev[i]
                tracked[i, n] = False
    return [IFTrack(bins[i], tracked[i], i, tf.freq_axis) for i in range(K)]


def mse_if(tracks, truth: IFTruth) -> MSEResult:
    """MSE in squared bins between tracks and truth over interior columns.

    ``ceil(N_t/10)`` columns are dropped at each edge. Bin differences are
    circular. Tracks are matched to truth components by the assignment with
    the smallest total MSE.
    """
    tracks = [tracks] if isinstance(tracks, IFTrack) else list(tracks)
    if not tracks:
        raise InvalidArgument("no tracks")
    nt = tracks[0].bins.size
    if truth.freqs.shape[1] != nt or any(t.bins.size != nt for t in tracks):
        raise InvalidArgument("track and truth lengths differ")
    if len(tracks) < truth.K:
        raise InvalidArgument(f"{len(tracks)} tracks for {truth.K} truth components")
    nf = len(tracks[0].freq_axis)
    true_bins = truth.bins(tracks[0].freq_axis)
    edge = math.ceil(nt / 10)
    sl = slice(edge, nt - edge)
    cost = np.array([[np.mean(_circ(t.bins[sl] - true_bins[c, sl], nf) ** 2)
                      for t in tracks] for c in range(truth.K)])
    best = min(itertools.permutations(range(len(tracks)), truth.K),
               key=lambda p: (sum(cost[c, p[c]] for c in range(truth.K)), p))
    mse = tuple(float(cost[c, best[c]]) for c in range(truth.K))
    failed = tuple(bool(np.mean(~tracks[best[c]].tracked[sl]) > FAIL_FRACTION)
                   for c in range(truth.K))
    return MSEResult(mse, (edge, nt - edge), failed, tuple(best))
