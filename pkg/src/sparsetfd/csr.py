"""Sparse TF reconstruction from masked ambiguity-domain samples.

The measurement operator is the unitary 2D DFT of :func:`~sparsetfd.tfd.tf_to_ambiguity`
restricted to a set of ambiguity cells, so its spectral norm is at most one
and a unit gradient step is safe. Nothing of size ``N**2 x N**2`` is formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, NumericError
from .tfd import (
    AmbiguityMatrix,
    TFKind,
    TFMatrix,
    ambiguity_to_tf,
    tf_to_ambiguity,
)

__all__ = [
    "Mask",
    "MeasurementSet",
    "SolverConfig",
    "SolverReport",
    "build_mask",
    "select_measurements",
    "forward_op",
    "adjoint_op",
    "soft_threshold",
    "ista_solve",
    "atom_matrix",
]


@dataclass(frozen=True)
class Mask:
    """Centered ``S x S`` block of an ``N x N`` ambiguity grid."""

    S: int
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise InvalidArgument("grid size must be positive")
        if self.S < 1 or self.S % 2 == 0:
            raise InvalidArgument(f"mask side must be odd and positive, got {self.S}")
        if self.S > self.N:
            raise InvalidArgument(f"mask side {self.S} exceeds grid {self.N}")

    @property
    def span(self) -> range:
        """Storage rows (and columns) covered by the block."""
        h = (self.S - 1) // 2
        c = self.N // 2
        return range(c - h, c + h + 1)

    @property
    def size(self) -> int:
        return self.S * self.S

    @property
    def coverage(self) -> float:
        return self.size / self.N ** 2

    def cells(self) -> tuple[np.ndarray, np.ndarray]:
        """Row-major storage indices of every cell in the block."""
        r = np.arange(self.span.start, self.span.stop)
        rows, cols = np.meshgrid(r, r, indexing="ij")
        return rows.ravel(), cols.ravel()

    def as_bool(self) -> np.ndarray:
        out = np.zeros((self.N, self.N), bool)
        out[self.span.start:self.span.stop, self.span.start:self.span.stop] = True
        return out


def build_mask(N: int, S: int) -> Mask:
    return Mask(int(S), int(N))


@dataclass(frozen=True)
class MeasurementSet:
    """Measured ambiguity samples.

    ``rows`` and ``cols`` are storage indices into the origin-centered grid;
    :attr:`entries` gives the same cells as centered ``(theta, tau, value)``.
    """

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    N: int
    seed: int = 0
    fraction: float = 1.0
    mask: Mask | None = field(default=None, compare=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.intp).ravel()
        cols = np.asarray(self.cols, dtype=np.intp).ravel()
        values = np.asarray(self.values, dtype=complex).ravel()
        if not (rows.size == cols.size == values.size):
            raise InvalidArgument("rows, cols and values differ in length")
        _check_idx((rows, cols), self.N)
        if np.unique(rows * self.N + cols).size != rows.size:
            raise InvalidArgument("measurement cells must be distinct")
        if self.mask is not None:
            inside = self.mask.as_bool()[rows, cols]
            if not inside.all():
                raise InvalidArgument("measurement cells must lie inside the mask")
        for name, v in (("rows", rows), ("cols", cols), ("values", values)):
            object.__setattr__(self, name, v)

    @property
    def idx(self) -> tuple[np.ndarray, np.ndarray]:
        return self.rows, self.cols

    @property
    def M(self) -> int:
        return self.rows.size

    @property
    def entries(self) -> list[tuple[int, int, complex]]:
        c = self.N // 2
        return [(int(r - c), int(k - c), complex(v))
                for r, k, v in zip(self.rows, self.cols, self.values)]

    def subset(self, keep) -> "MeasurementSet":
        """Measurements whose boolean ``keep`` flag is set."""
        keep = np.asarray(keep, bool)
        return MeasurementSet(self.rows[keep], self.cols[keep], self.values[keep],
                              self.N, self.seed, self.fraction, self.mask)


def select_measurements(a: AmbiguityMatrix, mask: Mask | None, fraction: float,
                        seed: int = 0) -> MeasurementSet:
    """Draw ``round(fraction * S**2)`` distinct mask cells uniformly at random.

    ``mask=None`` selects from the whole grid. Selection depends only on
    ``(seed, N, S, fraction)``; cells are returned in row-major order.
    Python's ``round`` is used, so a tie such as ``0.5 * 625`` gives 312.
    """
    if not 0 < fraction <= 1:
        raise InvalidArgument(f"fraction must lie in (0, 1], got {fraction}")
    if seed < 0:
        raise InvalidArgument("seed must be unsigned")
    N = a.N
    if mask is None:
        rows, cols = (i.ravel() for i in np.indices((N, N)))
    else:
        if mask.N != N:
            raise InvalidArgument(f"mask grid {mask.N} differs from ambiguity grid {N}")
        rows, cols = mask.cells()
    count = max(1, round(fraction * rows.size))
    rng = np.random.default_rng(seed)
    pick = np.sort(rng.choice(rows.size, size=count, replace=False))
    r, c = rows[pick], cols[pick]
    return MeasurementSet(r, c, a.values[r, c], N, seed, float(fraction), mask)


def _check_idx(idx, N):
    rows, cols = (np.asarray(i) for i in idx)
    if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= N or cols.max() >= N):
        raise InvalidArgument("measurement index outside the grid")


def forward_op(sigma, idx) -> np.ndarray:
    """Unitary TF-to-ambiguity transform of ``sigma`` sampled at ``idx``.

    Parameters
    ----------
    sigma : TFMatrix or ndarray
        ``N x N`` TF plane.
    idx : tuple of ndarray
        Storage ``(rows, cols)`` of the wanted ambiguity cells.
    """
    values = sigma.values if isinstance(sigma, TFMatrix) else np.asarray(sigma)
    _check_idx(idx, values.shape[0])
    return tf_to_ambiguity(values)[idx[0], idx[1]]


def adjoint_op(v, idx, N: int) -> TFMatrix:
    """Zero-fill ``v`` at ``idx`` and apply the unitary inverse transform."""
    v = np.asarray(v, dtype=complex).ravel()
    rows, cols = (np.asarray(i).ravel() for i in idx)
    if v.size != rows.size:
        raise InvalidArgument(f"{v.size} values for {rows.size} indices")
    _check_idx((rows, cols), N)
    full = np.zeros((N, N), complex)
    full[rows, cols] = v
    return TFMatrix(ambiguity_to_tf(full), np.arange(N) / N, TFKind.SPARSE)


def atom_matrix(idx, support, N: int) -> np.ndarray:
    """Dense columns of the measurement operator for TF cells in ``support``.

    Entry ``[i, s]`` is the response at ambiguity cell ``idx[i]`` to a unit
    impulse at TF cell ``support[s] = (n, m)``:
    ``exp(-j 2pi theta n / N) exp(+j 2pi tau m / N) / N``.
    """
    c = N // 2
    theta = np.asarray(idx[0]) - c
    tau = np.asarray(idx[1]) - c
    n, m = (np.asarray(s) for s in support)
    phase = -np.outer(theta, n) + np.outer(tau, m)
    return np.exp(2j * np.pi * phase / N) / N


def soft_threshold(z, t):
    """Shrink complex magnitudes by ``t``, keeping the phase."""
    z = np.asarray(z, dtype=complex)
    mag = np.abs(z)
    scale = np.maximum(mag - t, 0.0) / np.where(mag > 0, mag, 1.0)
    return z * scale


@dataclass(frozen=True)
class SolverConfig:
    """ISTA settings.

    ``lambda_rel`` scales the penalty by ``max|adjoint(v)|``. With ``debias``
    the final support is refit by least squares when it has fewer cells than
    there are measurements, which removes the shrinkage bias of the penalty.
    """

    lambda_rel: float = 0.05
    step: float = 1.0
    max_iters: int = 2000
    rel_tol: float = 1e-6
    debias: bool = True

    def __post_init__(self):
        if not 0 < self.lambda_rel <= 1:
            raise InvalidArgument("lambda_rel must lie in (0, 1]")
        if not 0 < self.step <= 1:
            raise InvalidArgument("step must lie in (0, 1]")
        if self.max_iters < 1:
            raise InvalidArgument("max_iters must be positive")
        if not self.rel_tol > 0:
            raise InvalidArgument("rel_tol must be positive")


@dataclass(frozen=True)
class SolverReport:
    iterations: int
    objective: float
    trace: tuple[float, ...]
    converged: bool
    lam: float = 0.0
    support: int = 0
    debiased: bool = False


_MIN_STEP = 1e-10
_DEBIAS_MAX_SUPPORT = 4000


def ista_solve(meas: MeasurementSet, cfg: SolverConfig | None = None,
               init=None) -> tuple[TFMatrix, SolverReport]:
    """Minimize ``lam*||s||_1 + ||A s - v||**2 / 2`` by soft thresholding.

    The iteration starts from ``adjoint(v)`` unless ``init`` (an ``N x N``
    plane, e.g. from :func:`~sparsetfd.robust.robust_initial_estimate`) is
    given. A step that would raise the objective is retried with half the step
    size, so the objective trace never increases.

    Returns
    -------
    sigma : TFMatrix
        Complex sparse plane, kind SPARSE.
    report : SolverReport
    """
    cfg = SolverConfig() if cfg is None else cfg
    if meas.M == 0:
        raise InvalidArgument("no measurements")
    N = meas.N
    idx = meas.idx
    v = meas.values
    axis = np.arange(N) / N

    def fwd(s):
        return tf_to_ambiguity(s)[idx]

    def grad(s):
        full = np.zeros((N, N), complex)
        full[idx] = fwd(s) - v
        return ambiguity_to_tf(full)

    def objective(s):
        r = fwd(s) - v
        f = 0.5 * float(np.vdot(r, r).real) + lam * float(np.abs(s).sum())
        if not np.isfinite(f):
            raise NumericError("objective is not finite")
        return f

    adj_v = adjoint_op(v, idx, N).values
    lam = cfg.lambda_rel * float(np.abs(adj_v).max())
    if lam == 0 or np.abs(adj_v).max() <= lam:
        # zero satisfies the optimality condition outright
        zero = np.zeros((N, N), complex)
        f0 = objective(zero)
        return (TFMatrix(zero, axis, TFKind.SPARSE),
                SolverReport(1, f0, (f0,), True, lam, 0, False))

    s = adj_v.copy() if init is None else np.array(
        init.values if isinstance(init, TFMatrix) else init, dtype=complex)
    if s.shape != (N, N):
        raise InvalidArgument("initial plane has the wrong shape")
    f = objective(s)
    trace = [f]
    step = cfg.step
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        g = grad(s)
        while True:
            cand = soft_threshold(s - step * g, step * lam)
            fc = objective(cand)
            if fc <= f or step < _MIN_STEP:
                break
            step /= 2
        if fc > f:
            converged = True
            break
        change = f - fc
        s, f = cand, fc
        trace.append(f)
        if change <= cfg.rel_tol * max(abs(f), np.finfo(float).tiny):
            converged = True
            break

    support = np.nonzero(s)
    debiased = False
    n_supp = support[0].size
    if cfg.debias and 0 < n_supp < meas.M and n_supp <= _DEBIAS_MAX_SUPPORT:
        A = atom_matrix(idx, support, N)
        coef = np.linalg.lstsq(A, v, rcond=None)[0]
        refit = np.zeros((N, N), complex)
        refit[support] = coef
        r = A @ coef - v
        # keep the refit only if it does not worsen the data fit
        if np.vdot(r, r).real <= np.vdot(fwd(s) - v, fwd(s) - v).real:
            s = refit
            debiased = True
    report = SolverReport(it, f, tuple(trace), converged, lam, int(n_supp), debiased)
    return TFMatrix(s, axis, TFKind.SPARSE), report
