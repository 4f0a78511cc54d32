"""L-statistics for ambiguity planes corrupted by impulses.

Two order relations are used on complex values. :func:`lstat_denoise` ranks
cells by magnitude and removes whole cells. The initial transforms trim the
real and imaginary parts of the modulated terms independently before summing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .tfd import AmbiguityMatrix, TFKind, TFMatrix, centered_bins

__all__ = [
    "TrimPolicy",
    "discard_mask",
    "lstat_denoise",
    "trimmed_sum",
    "robust_initial_transform",
    "robust_initial_estimate",
]


@dataclass(frozen=True)
class TrimPolicy:
    """Fractions of smallest (``P``) and largest (``Q``) values to discard."""

    P: float = 0.0
    Q: float = 0.0
    guard_origin: bool = True
    guard_radius: int = 2

    def __post_init__(self):
        if not (0 <= self.P < 1 and 0 <= self.Q < 1):
            raise InvalidArgument("P and Q must lie in [0, 1)")
        if self.P + self.Q >= 1:
            raise InvalidArgument("P + Q must be below 1")
        if self.guard_radius < 0:
            raise InvalidArgument("guard_radius must be non-negative")

    def counts(self, n: int) -> tuple[int, int]:
        return round(self.P * n), round(self.Q * n)


def _guard(N, policy):
    if not policy.guard_origin:
        return np.zeros((N, N), bool)
    c = np.abs(centered_bins(N))
    return np.maximum(c[:, None], c[None, :]) <= policy.guard_radius


def discard_mask(a: AmbiguityMatrix, policy: TrimPolicy) -> np.ndarray:
    """Boolean grid of the cells :func:`lstat_denoise` would zero.

    Counts are ``round(P*N**2)`` and ``round(Q*N**2)``; guarded cells never
    take part in the ranking. Ties are broken by storage order.
    """
    N = a.N
    low, high = policy.counts(N * N)
    out = np.zeros((N, N), bool)
    candidates = np.flatnonzero(~_guard(N, policy))
    mag = np.abs(a.values).ravel()[candidates]
    order = candidates[np.argsort(mag, kind="stable")]
    if low:
        out.flat[order[:low]] = True
    if high:
        out.flat[order[::-1][:high]] = True
    return out


def lstat_denoise(a: AmbiguityMatrix, policy: TrimPolicy) -> AmbiguityMatrix:
    """Zero the extreme-magnitude cells of an ambiguity plane."""
    drop = discard_mask(a, policy)
    if not drop.any():
        return a
    return a.replace(values=np.where(drop, 0.0, a.values))


def trimmed_sum(terms, policy: TrimPolicy, literal_bounds: bool = False, axis: int = -1):
    """Part-wise trimmed sum along ``axis``, rescaled by ``n / kept``.

    Real and imaginary parts are sorted separately; the lowest ``round(P*n)``
    and highest ``round(Q*n)`` of each are dropped. With ``literal_bounds``
    the sorted positions ``P..Q`` (inclusive, as counts) are summed instead
    and no rescaling is applied.
    """
    terms = np.moveaxis(np.asarray(terms, dtype=complex), axis, -1)
    n = terms.shape[-1]
    low, high = policy.counts(n)
    if literal_bounds:
        lo, hi = low, min(high, n - 1) + 1
        scale = 1.0
    else:
        lo, hi = low, n - high
        scale = n / (hi - lo)
    re = np.sort(terms.real, axis=-1)[..., lo:hi].sum(axis=-1)
    im = np.sort(terms.imag, axis=-1)[..., lo:hi].sum(axis=-1)
    return scale * (re + 1j * im)


def _modulation(theta, tau, n, m, N):
    # same kernel as ambiguity_to_tf
    return np.exp(2j * np.pi * (np.multiply.outer(n, theta) - np.multiply.outer(m, tau)) / N)


def robust_initial_transform(a: AmbiguityMatrix, policy: TrimPolicy, target,
                             literal_bounds: bool = False) -> complex:
    """Trimmed inverse-transform coefficient of ``a`` at TF cell ``target``.

    Forms ``a[theta, tau] * exp(+j 2pi theta n / N) * exp(-j 2pi tau m / N)``
    over all cells and applies :func:`trimmed_sum`. With ``P = Q = 0`` the
    result is ``N * ambiguity_to_tf(a.values)[n, m]``.
    """
    N = a.N
    n, m = (int(t) for t in target)
    if not (0 <= n < N and 0 <= m < N):
        raise InvalidArgument(f"target {target} outside the {N}x{N} grid")
    c = centered_bins(N)
    theta, tau = np.meshgrid(c, c, indexing="ij")
    terms = a.values.ravel() * _modulation(theta.ravel(), tau.ravel(), n, m, N)
    return complex(trimmed_sum(terms, policy, literal_bounds))


def robust_initial_estimate(meas, policy: TrimPolicy, literal_bounds: bool = False,
                            chunk: int = 1024) -> TFMatrix:
    """Trimmed adjoint of a measurement set, usable as a solver start.

    Each TF cell receives the trimmed sum of the modulated measured values,
    scaled by ``1/N`` so that ``P = Q = 0`` reproduces
    :func:`~sparsetfd.csr.adjoint_op`.
    """
    N = meas.N
    c = N // 2
    theta = meas.rows - c
    tau = meas.cols - c
    n, m = (i.ravel() for i in np.indices((N, N)))
    out = np.empty(N * N, complex)
    for start in range(0, N * N, chunk):
        sl = slice(start, start + chunk)
        terms = meas.values[None, :] * _modulation(theta, tau, n[sl], m[sl], N)
        out[sl] = trimmed_sum(terms, policy, literal_bounds) / N
    return TFMatrix(out.reshape(N, N), np.arange(N) / N, TFKind.SPARSE)
