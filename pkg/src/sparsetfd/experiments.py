"""Reference experiments and the pipelines they share.

Every run writes into its own output directory: matrices (CSV and PGM), IF
tracks and truth, an MSE summary and a ``manifest.txt`` of ``key=value``
lines. All randomness flows from explicit seeds, so reruns are
byte-identical.
"""

from __future__ import annotations

import dataclasses
import math
import os
import warnings
from dataclasses import dataclass

import numpy as np

from .csr import SolverConfig, SolverReport, build_mask, ista_solve, select_measurements
from .ctd import CTDWindow, ctd_direct, ctd_via_ambiguity, moment
from .errors import InvalidArgument, NumericWarning, TrackingError
from .ifest import IFTrack, IFTruth, MSEResult, estimate_if, mse_if
from .io import export_matrix, load_signal
from .robust import TrimPolicy, discard_mask, lstat_denoise, robust_initial_estimate
from .signals import (
    ImpulseNoiseSpec,
    Signal,
    add_impulse_noise,
    gen_fm_signal,
    monocomponent_spec,
    two_component_spec,
)
from .tfd import (
    AmbiguityKind,
    AmbiguityMatrix,
    TFMatrix,
    cohen,
    gaussian_kernel,
    tf_to_ambiguity,
    wigner,
)

__all__ = [
    "EXPERIMENTS",
    "TABLE1_CS_ROWS",
    "FIG6_ROWS",
    "FAIL_MSE",
    "ExperimentConfig",
    "Evaluation",
    "ctd_ambiguity",
    "cs_reconstruct",
    "evaluate",
    "agreement",
    "example2_pipelines",
    "run_experiment",
]

EXPERIMENTS = ("example1", "example2", "table1", "fig6", "custom")

# (mask side, fraction); the 10x10 and 20x20 masks of the benchmark become 11
# and 21 because a centered mask needs an odd side
TABLE1_CS_ROWS = ((7, 1.0), (11, 1.0), (15, 0.7), (21, 0.6), (25, 0.4), (25, 0.5), (25, 0.6))
FIG6_ROWS = ((7, 1.0), (11, 1.0), (15, 0.7), (21, 0.6))
COHEN_DELTAS = (120.0, 80.0, 20.0)

# an IF estimate this far off (bins squared) counts as failed
FAIL_MSE = 500.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment run.

    ``N=None`` picks the experiment default (90, or 128 for example2, or the
    file length for custom).
    """

    experiment: str = "example1"
    N: int | None = None
    mask_side: int = 25
    fraction: float = 0.6
    kernel_deltas: tuple[float, ...] = COHEN_DELTAS
    window: str = "hann"
    trim: TrimPolicy = TrimPolicy(0.0, 0.005)
    solver: SolverConfig = SolverConfig()
    seeds: tuple[int, ...] = (0,)
    input_path: str | None = None
    output_dir: str = "out"
    components: int = 1
    impulses: int = 10
    impulse_scale: float = 5.0
    noise: bool = True

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidArgument(f"unknown experiment {self.experiment!r}")
        if self.experiment == "custom" and not self.input_path:
            raise InvalidArgument("custom experiment needs an input path")
        if not self.seeds or any(s < 0 for s in self.seeds):
            raise InvalidArgument("seeds must be a non-empty list of unsigned integers")
        if self.window not in ("rect", "hann", "delta"):
            raise InvalidArgument(f"unknown window family {self.window!r}")
        if self.components < 1 or self.impulses < 0 or not self.impulse_scale > 0:
            raise InvalidArgument("components >= 1, impulses >= 0, impulse_scale > 0 required")
        if not 0 < self.fraction <= 1:
            raise InvalidArgument("fraction must lie in (0, 1]")
        if self.mask_side < 1 or self.mask_side % 2 == 0:
            raise InvalidArgument("mask side must be odd and positive")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Evaluation:
    """IF tracks of one distribution and their error against the truth."""

    tracks: list[IFTrack] | None
    result: MSEResult | None
    failed: bool
    reason: str = ""

    @property
    def mse(self) -> tuple[float, ...]:
        if self.result is None:
            return ()
        return self.result.mse


def ctd_ambiguity(x: Signal) -> AmbiguityMatrix:
    """Ambiguity plane of the fourth-order CTD, the source of CS measurements."""
    return AmbiguityMatrix(tf_to_ambiguity(ctd_direct(x, 4).values), AmbiguityKind.COMBINED)


def cs_reconstruct(a: AmbiguityMatrix, S: int, fraction: float, seed: int,
                   solver: SolverConfig | None = None, drop=None,
                   init_policy: TrimPolicy | None = None) -> tuple[TFMatrix, SolverReport]:
    """Masked random measurements of ``a`` followed by :func:`ista_solve`.

    ``drop`` is an optional boolean grid of cells to leave out of the
    measurement set. With ``init_policy`` the solver starts from the trimmed
    adjoint of :func:`robust_initial_estimate`.
    """
    meas = select_measurements(a, build_mask(a.N, S), fraction, seed)
    if drop is not None:
        meas = meas.subset(~np.asarray(drop)[meas.rows, meas.cols])
    init = None if init_policy is None else robust_initial_estimate(meas, init_policy)
    return ista_solve(meas, solver, init=init)


def evaluate(tf: TFMatrix, truth: IFTruth | None, K: int) -> Evaluation:
    """Track ``K`` components and score them.

    A run fails when tracking cannot start, when a component loses lock on
    more than a quarter of the interior, or when its MSE exceeds
    :data:`FAIL_MSE`.
    """
    try:
        tracks = estimate_if(tf, K)
    except TrackingError as e:
        return Evaluation(None, None, True, str(e))
    if truth is None:
        return Evaluation(tracks, None, False)
    res = mse_if(tracks, truth)
    reasons = []
    if res.failed:
        reasons.append("lock lost")
    if max(res.mse) > FAIL_MSE:
        reasons.append("mse above threshold")
    return Evaluation(tracks, res, bool(reasons), ", ".join(reasons))


def agreement(a: IFTrack, b: IFTrack, tol: int = 1) -> float:
    """Share of interior columns where two tracks are within ``tol`` bins."""
    n = a.bins.size
    nf = len(a.freq_axis)
    edge = math.ceil(n / 10)
    d = (a.bins - b.bins + nf // 2) % nf - nf // 2
    return float(np.mean(np.abs(d[edge:n - edge]) <= tol))


def _benchmark(N):
    specs = two_component_spec()
    x = gen_fm_signal(specs, N)
    return x, IFTruth.from_specs(specs, x)


def example2_pipelines(N: int = 128, seed: int = 0, S: int = 25, fraction: float = 0.5,
                       impulses: int = 10, impulse_scale: float = 5.0,
                       policy: TrimPolicy = TrimPolicy(0.0, 0.005),
                       solver: SolverConfig | None = None, robust_init: bool = True) -> dict:
    """Clean, noisy and trimmed CS pipelines on the rotating-reflector signal.

    Impulses land on cells of the measurement mask, where they can reach the
    solver. The trimmed pipeline zeroes the ``policy`` extremes of the noisy
    plane, leaves zeroed cells out of the measurement set and, with
    ``robust_init``, starts the solver from the part-wise trimmed adjoint.
    """
    spec = monocomponent_spec()
    x = gen_fm_signal(spec, N)
    truth = IFTruth.from_specs(spec, x)
    clean = ctd_ambiguity(x)
    mask = build_mask(N, S)
    noisy = add_impulse_noise(
        clean, ImpulseNoiseSpec(impulses, impulse_scale, seed, region=mask.cells()))
    drop = discard_mask(noisy, policy)
    trimmed = lstat_denoise(noisy, policy)
    init = policy if robust_init else None
    out = {"signal": x, "truth": truth, "clean_plane": clean, "noisy_plane": noisy,
           "trimmed_plane": trimmed}
    for name, plane, dropped, ip in (("clean", clean, None, None),
                                     ("noisy", noisy, None, None),
                                     ("trimmed", trimmed, drop, init)):
        sigma, rep = cs_reconstruct(plane, S, fraction, seed, solver, dropped, ip)
        out[name] = (sigma, rep, evaluate(sigma, truth, 1))
    ref = out["clean"][2].tracks
    for name in ("noisy", "trimmed"):
        ev = out[name][2]
        out[name + "_agreement"] = (agreement(ev.tracks[0], ref[0])
                                    if ev.tracks and ref else 0.0)
    return out


# ---------------------------------------------------------------- run output


class _Run:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.dir = cfg.output_dir
        os.makedirs(self.dir, exist_ok=True)
        if not os.access(self.dir, os.W_OK):
            raise PermissionError(f"output directory {self.dir} is not writable")
        self.files: list[str] = []
        self.manifest: list[tuple[str, str]] = []
        self.summary: list[dict] = []

    def note(self, key, value):
        self.manifest.append((key, str(value)))

    def matrix(self, name, m):
        for ext in ("csv", "pgm"):
            path = os.path.join(self.dir, f"{name}.{ext}")
            export_matrix(m, path, ext)
            self.files.append(os.path.basename(path))

    def tracks(self, name, tracks, truth: IFTruth | None, tf: TFMatrix):
        path = os.path.join(self.dir, f"{name}_if.csv")
        cols = []
        header = []
        for t in tracks or []:
            header += [f"track{t.component}_bin", f"track{t.component}_tracked"]
            cols += [t.bins.astype(float), t.tracked.astype(float)]
        if truth is not None:
            tb = truth.bins(tf.freq_axis)
            for c in range(truth.K):
                header.append(f"truth{c}_bin")
                cols.append(tb[c])
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("column," + ",".join(header) + "\n")
            for n in range(tf.N):
                fh.write(",".join([str(n)] + [_fmt(c[n]) for c in cols]) + "\n")
        self.files.append(os.path.basename(path))

    def report(self, prefix, rep: SolverReport):
        self.note(f"{prefix}.iterations", rep.iterations)
        self.note(f"{prefix}.objective", repr(rep.objective))
        self.note(f"{prefix}.converged", rep.converged)
        self.note(f"{prefix}.support", rep.support)
        self.note(f"{prefix}.debiased", rep.debiased)

    def row(self, distribution, ev: Evaluation, K, **extra):
        row = {"distribution": distribution, **extra}
        if ev.result is not None:
            mse = ev.mse
        else:
            # no truth gives no score; a failed track scores infinity
            mse = (math.inf if ev.failed else "",) * K
        for c in range(K):
            row[f"mse_c{c + 1}"] = mse[c]
        row["failed"] = int(ev.failed)
        self.summary.append(row)

    def write_summary(self, name="mse_summary.csv", rows=None):
        rows = self.summary if rows is None else rows
        path = os.path.join(self.dir, name)
        keys: list[str] = []
        for r in rows:
            keys += [k for k in r if k not in keys]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(keys) + "\n")
            for r in rows:
                fh.write(",".join(_fmt(r.get(k, "")) for k in keys) + "\n")
        self.files.append(name)

    def finish(self):
        cfg = self.cfg
        head = [("experiment", cfg.experiment), ("mask_side", cfg.mask_side),
                ("fraction", cfg.fraction),
                ("kernel_deltas", " ".join(_fmt(d) for d in cfg.kernel_deltas)),
                ("window", cfg.window), ("trim.P", cfg.trim.P), ("trim.Q", cfg.trim.Q),
                ("trim.guard_origin", cfg.trim.guard_origin),
                ("trim.guard_radius", cfg.trim.guard_radius),
                ("solver.lambda_rel", cfg.solver.lambda_rel), ("solver.step", cfg.solver.step),
                ("solver.max_iters", cfg.solver.max_iters),
                ("solver.rel_tol", cfg.solver.rel_tol), ("solver.debias", cfg.solver.debias),
                ("seeds", " ".join(str(s) for s in cfg.seeds)),
                ("input_path", cfg.input_path or ""), ("components", cfg.components),
                ("impulses", cfg.impulses), ("impulse_scale", cfg.impulse_scale),
                ("noise", cfg.noise)]
        lines = [f"{k}={v}" for k, v in head + self.manifest]
        lines.append("files=" + " ".join(self.files))
        with open(os.path.join(self.dir, "manifest.txt"), "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v.is_integer() and abs(v) < 1e15:
            return str(int(v))
        return repr(v)
    return str(v)


def _branch_density(run: _Run, x: Signal):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericWarning)
        density = moment(x, 4).flag_density
    run.note("branch_flag_density", repr(density))


def _baselines(run: _Run, x: Signal, truth, K, deltas, save=True):
    dists = [("WD", wigner(x))]
    dists += [(f"Cohen_delta{_fmt(d)}", cohen(x, gaussian_kernel(x.N, d))) for d in deltas]
    dists.append(("CTD4_direct", ctd_direct(x, 4)))
    evals = {}
    for name, tf in dists:
        ev = evaluate(tf, truth, K)
        evals[name] = ev
        if save:
            run.matrix(name, tf)
            run.tracks(name, ev.tracks, truth, tf)
        run.row(name, ev, K, mask="", fraction="", seed="")
    return evals


def _via_ambiguity(run: _Run, x: Signal, truth, K, cfg: ExperimentConfig):
    kernel = gaussian_kernel(x.N, cfg.kernel_deltas[0]) if cfg.kernel_deltas else None
    tf = ctd_via_ambiguity(x, kernel, CTDWindow.make(x.N, cfg.window))
    ev = evaluate(tf, truth, K)
    run.matrix("CTD4_via_ambiguity", tf)
    run.tracks("CTD4_via_ambiguity", ev.tracks, truth, tf)
    run.row("CTD4_via_ambiguity", ev, K, mask="", fraction="", seed="")


def _cs_rows(run: _Run, a, truth, K, rows, seeds, solver, save_seed=None):
    per_run = {}
    for S, frac in rows:
        for seed in seeds:
            sigma, rep = cs_reconstruct(a, S, frac, seed, solver)
            ev = evaluate(sigma, truth, K)
            tag = f"CS_{S}x{S}_{round(frac * 100)}pct_seed{seed}"
            run.report(tag, rep)
            if save_seed is None or seed == save_seed:
                run.matrix(tag, sigma)
                run.tracks(tag, ev.tracks, truth, sigma)
            run.row("CTD4+CS", ev, K, mask=S, fraction=frac, seed=seed)
            per_run[(S, frac, seed)] = ev
    return per_run


def _median_rows(per_run, rows, seeds, K):
    out = []
    for S, frac in rows:
        evs = [per_run[(S, frac, s)] for s in seeds]
        row = {"distribution": "CTD4+CS", "mask": S, "fraction": frac,
               "seeds": " ".join(str(s) for s in seeds)}
        for c in range(K):
            vals = [ev.mse[c] if ev.result is not None else math.inf for ev in evs]
            row[f"median_mse_c{c + 1}"] = float(np.median(vals))
        row["failed_runs"] = sum(ev.failed for ev in evs)
        # a configuration is failed when most of its seeds fail
        row["failed"] = int(2 * row["failed_runs"] > len(evs))
        out.append(row)
    return out


def _run_example1(run: _Run, cfg: ExperimentConfig):
    N = cfg.N or 90
    x, truth = _benchmark(N)
    _branch_density(run, x)
    _baselines(run, x, truth, 2, cfg.kernel_deltas)
    _via_ambiguity(run, x, truth, 2, cfg)
    a = ctd_ambiguity(x)
    run.matrix("CTD4_ambiguity", a)
    _cs_rows(run, a, truth, 2, ((cfg.mask_side, cfg.fraction),), cfg.seeds, cfg.solver)
    run.write_summary()


def _run_table1(run: _Run, cfg: ExperimentConfig, rows=TABLE1_CS_ROWS):
    N = cfg.N or 90
    x, truth = _benchmark(N)
    _branch_density(run, x)
    base = _baselines(run, x, truth, 2, cfg.kernel_deltas)
    a = ctd_ambiguity(x)
    per_run = _cs_rows(run, a, truth, 2, rows, cfg.seeds, cfg.solver, save_seed=cfg.seeds[0])
    run.write_summary("mse_runs.csv")
    table = []
    for name, ev in base.items():
        row = {"distribution": name, "mask": "", "fraction": "", "seeds": ""}
        for c in range(2):
            row[f"median_mse_c{c + 1}"] = ev.mse[c] if ev.result is not None else math.inf
        row["failed_runs"] = int(ev.failed)
        row["failed"] = int(ev.failed)
        table.append(row)
    table += _median_rows(per_run, rows, cfg.seeds, 2)
    run.write_summary("mse_summary.csv", table)


def _run_example2(run: _Run, cfg: ExperimentConfig):
    N = cfg.N or 128
    impulses = cfg.impulses if cfg.noise else 0
    for seed in cfg.seeds:
        res = example2_pipelines(N, seed, cfg.mask_side, cfg.fraction, impulses,
                                 cfg.impulse_scale, cfg.trim, cfg.solver)
        if seed == cfg.seeds[0]:
            _branch_density(run, res["signal"])
            for key in ("clean_plane", "noisy_plane", "trimmed_plane"):
                run.matrix(f"ambiguity_{key.split('_')[0]}", res[key])
        for name in ("clean", "noisy", "trimmed"):
            sigma, rep, ev = res[name]
            tag = f"{name}_seed{seed}"
            run.report(tag, rep)
            run.matrix(f"CS_{tag}", sigma)
            run.tracks(f"CS_{tag}", ev.tracks, res["truth"], sigma)
            extra = {"seed": seed}
            if name != "clean":
                extra["agreement_with_clean"] = res[name + "_agreement"]
            run.row(f"CTD4+CS_{name}", ev, 1, **extra)
    run.write_summary()


def _run_fig6(run: _Run, cfg: ExperimentConfig):
    N = cfg.N or 90
    x, truth = _benchmark(N)
    _branch_density(run, x)
    a = ctd_ambiguity(x)
    _cs_rows(run, a, truth, 2, FIG6_ROWS, cfg.seeds, cfg.solver)
    run.write_summary()


def _run_custom(run: _Run, cfg: ExperimentConfig):
    notes: list[str] = []
    x = load_signal(cfg.input_path, notes)
    for i, n in enumerate(notes):
        run.note(f"note{i}", n)
    if cfg.N is not None and cfg.N != x.N:
        raise InvalidArgument(f"config N={cfg.N} but the file holds {x.N} samples")
    run.note("N", x.N)
    run.note("sample_rate", repr(x.sample_rate))
    _branch_density(run, x)
    K = cfg.components
    _baselines(run, x, None, K, cfg.kernel_deltas)
    _via_ambiguity(run, x, None, K, cfg)
    a = ctd_ambiguity(x)
    run.matrix("CTD4_ambiguity", a)
    S = min(cfg.mask_side, x.N - 1 if x.N % 2 == 0 else x.N)
    _cs_rows(run, a, None, K, ((S, cfg.fraction),), cfg.seeds, cfg.solver)
    run.write_summary()


_RUNNERS = {"example1": _run_example1, "example2": _run_example2, "table1": _run_table1,
            "fig6": _run_fig6, "custom": _run_custom}


def run_experiment(cfg: ExperimentConfig) -> list[str]:
    """Run ``cfg`` and return the artifact file names written to its
    output directory (the manifest last)."""
    run = _Run(cfg)
    if cfg.experiment != "custom":
        run.note("N", cfg.N or (128 if cfg.experiment == "example2" else 90))
    _RUNNERS[cfg.experiment](run, cfg)
    run.finish()
    return run.files + ["manifest.txt"]
