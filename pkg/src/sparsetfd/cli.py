"""Command-line front end.

Every subcommand accepts ``--config FILE``; the file holds ``key = value``
lines whose keys are long option names (dashes or underscores). Options
given on the command line win over the file.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import __version__
from .csr import SolverConfig, build_mask, ista_solve, select_measurements
from .ctd import CTDWindow, ambiguity_complex, ambiguity_real, ctd_direct, ctd_via_ambiguity
from .errors import FormatError, NumericWarning, SparseTFDError
from .experiments import EXPERIMENTS, ExperimentConfig, ctd_ambiguity, run_experiment
from .ifest import estimate_if
from .io import export_matrix, load_signal, read_matrix_csv, save_signal
from .robust import TrimPolicy, lstat_denoise
from .signals import PhaseSpec, gen_fm_signal, monocomponent_spec, two_component_spec
from .tfd import (
    AmbiguityKind,
    AmbiguityMatrix,
    TFKind,
    TFMatrix,
    ambiguity,
    cohen,
    gaussian_kernel,
    spectrogram,
    wigner,
)

__all__ = ["main", "build_parser", "read_config"]


def read_config(path) -> dict[str, str]:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"expected 'key = value', got {line!r}", line=lineno)
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def parse_seeds(text: str) -> tuple[int, ...]:
    """``"0-4"``, ``"0,2,5"`` or ``"3"``."""
    seeds: list[int] = []
    for part in text.replace(" ", ",").split(","):
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            seeds += range(int(lo), int(hi) + 1)
        else:
            seeds.append(int(part))
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return tuple(seeds)


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(" ", ",").split(",") if v)


def _solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--lambda-rel", type=float, default=0.05)
    g.add_argument("--step", type=float, default=1.0)
    g.add_argument("--max-iters", type=int, default=2000)
    g.add_argument("--rel-tol", type=float, default=1e-6)
    g.add_argument("--debias", type=parse_bool, default=True)


def _trim_flags(p):
    g = p.add_argument_group("trimming")
    g.add_argument("--trim-p", type=float, default=0.0, help="fraction of smallest values dropped")
    g.add_argument("--trim-q", type=float, default=0.005, help="fraction of largest values dropped")
    g.add_argument("--guard-origin", type=parse_bool, default=True)
    g.add_argument("--guard-radius", type=int, default=2)


def _cs_flags(p):
    p.add_argument("--mask-side", type=int, default=25)
    p.add_argument("--fraction", type=float, default=0.6)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsetfd", description="Sparse complex-time TF analysis.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="key = value file supplying defaults")
        return p

    p = add("gen", "write a test signal")
    p.add_argument("--signal", choices=("two-component", "example2", "tone"),
                   default="two-component")
    p.add_argument("-N", "--N", type=int, default=None)
    p.add_argument("--freq", type=float, default=0.125, help="tone frequency, cycles/sample")
    p.add_argument("-o", "--output")

    p = add("tfd", "compute a TF distribution of a signal file")
    p.add_argument("-i", "--input")
    p.add_argument("--kind", choices=("spec", "wd", "cohen", "ctd4", "ctd4-amb"), default="wd")
    p.add_argument("--delta", type=float, default=20.0, help="Gaussian kernel width")
    p.add_argument("--window-len", type=int, default=31, help="spectrogram window length")
    p.add_argument("--window", choices=("rect", "hann", "delta"), default="hann",
                   help="epsilon window for ctd4-amb")
    p.add_argument("--band", type=float, default=None)
    p.add_argument("--complex", action="store_true")
    p.add_argument("-o", "--output")

    p = add("ambiguity", "compute an ambiguity plane of a signal file")
    p.add_argument("-i", "--input")
    p.add_argument("--kind", choices=("plain", "real", "complex", "ctd4"), default="plain")
    p.add_argument("--complex", action="store_true")
    p.add_argument("-o", "--output")

    p = add("reconstruct", "sparse CTD4 reconstruction of a signal file")
    p.add_argument("-i", "--input")
    _cs_flags(p)
    p.add_argument("--seed", type=int, default=0)
    _solver_flags(p)
    p.add_argument("--complex", action="store_true")
    p.add_argument("-o", "--output")

    p = add("denoise", "L-statistics trimming of an ambiguity CSV")
    p.add_argument("-i", "--input", help="CSV written with --complex")
    _trim_flags(p)
    p.add_argument("-o", "--output")

    p = add("ifest", "track IF ridges in a TF CSV")
    p.add_argument("-i", "--input")
    p.add_argument("-K", "--components", type=int, default=1)
    p.add_argument("--freq-scale", type=float, default=None,
                   help="cycles/sample per bin; default from the CSV kind")
    p.add_argument("-o", "--output")

    p = add("experiment", "run a reference experiment")
    p.add_argument("--experiment", choices=EXPERIMENTS, default="example1")
    p.add_argument("-N", "--N", type=int, default=None)
    _cs_flags(p)
    p.add_argument("--kernel-deltas", type=parse_floats, default=(120.0, 80.0, 20.0))
    p.add_argument("--window", choices=("rect", "hann", "delta"), default="hann",
                   help="epsilon window of the via-ambiguity CTD4")
    _trim_flags(p)
    _solver_flags(p)
    p.add_argument("--seeds", type=parse_seeds, default=(0,))
    p.add_argument("--input-path", default=None)
    p.add_argument("--output-dir", default="out")
    p.add_argument("-K", "--components", type=int, default=1)
    p.add_argument("--impulses", type=int, default=10)
    p.add_argument("--impulse-scale", type=float, default=5.0)
    p.add_argument("--noise", type=parse_bool, default=True)

    p = add("export", "convert a matrix CSV to CSV or PGM")
    p.add_argument("-i", "--input")
    p.add_argument("--format", choices=("csv", "pgm"), default=None)
    p.add_argument("--complex", action="store_true")
    p.add_argument("-o", "--output")
    return parser


_REQUIRED = {"gen": ("output",), "tfd": ("input", "output"), "ambiguity": ("input", "output"),
             "reconstruct": ("input", "output"), "denoise": ("input", "output"),
             "ifest": ("input", "output"), "export": ("input", "output"), "experiment": ()}


def _apply_config(parser, argv):
    """Parse ``argv``, taking defaults from ``--config`` when one is given."""
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    if args.config:
        values = read_config(args.config)
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, raw in values.items():
            if key not in known or key in ("config", "help"):
                raise FormatError(f"unknown config key {key!r} for '{args.command}'")
            if isinstance(known[key], argparse._StoreTrueAction):
                defaults[key] = parse_bool(raw)
            else:
                # argparse runs string defaults through the option's type
                defaults[key] = raw
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    missing = [f"--{d}" for d in _REQUIRED[args.command] if getattr(args, d) is None]
    if missing:
        sub.error("missing required option " + ", ".join(missing))
    return args


def _solver(args) -> SolverConfig:
    return SolverConfig(args.lambda_rel, args.step, args.max_iters, args.rel_tol, args.debias)


def _trim(args) -> TrimPolicy:
    return TrimPolicy(args.trim_p, args.trim_q, args.guard_origin, args.guard_radius)


def _cmd_gen(args):
    if args.signal == "two-component":
        x = gen_fm_signal(two_component_spec(), args.N or 90)
    elif args.signal == "example2":
        x = gen_fm_signal(monocomponent_spec(), args.N or 128)
    else:
        N = args.N or 64
        spec = PhaseSpec(((1.0, "linear", 2 * np.pi * args.freq),), 0.0, float(N))
        x = gen_fm_signal(spec, N, sample_rate=1.0)
    save_signal(x, args.output)


def _cmd_tfd(args):
    x = load_signal(args.input)
    if args.kind == "spec":
        L = min(args.window_len, x.N - 1 if x.N % 2 == 0 else x.N)
        tf = spectrogram(x, np.hanning(L + 2)[1:-1] / np.hanning(L + 2)[1:-1].max())
    elif args.kind == "wd":
        tf = wigner(x)
    elif args.kind == "cohen":
        tf = cohen(x, gaussian_kernel(x.N, args.delta))
    elif args.kind == "ctd4":
        tf = ctd_direct(x, 4, band=args.band)
    else:
        tf = ctd_via_ambiguity(x, gaussian_kernel(x.N, args.delta),
                               CTDWindow.make(x.N, args.window), band=args.band)
    export_matrix(tf, args.output, complex_pairs=args.complex)


def _cmd_ambiguity(args):
    x = load_signal(args.input)
    a = {"plain": lambda: ambiguity(x), "real": lambda: ambiguity_real(x, 4),
         "complex": lambda: ambiguity_complex(x, 4), "ctd4": lambda: ctd_ambiguity(x)}[args.kind]()
    export_matrix(a, args.output, complex_pairs=args.complex)


def _cmd_reconstruct(args):
    x = load_signal(args.input)
    a = ctd_ambiguity(x)
    meas = select_measurements(a, build_mask(x.N, args.mask_side), args.fraction, args.seed)
    sigma, rep = ista_solve(meas, _solver(args))
    export_matrix(sigma, args.output, complex_pairs=args.complex)
    print(f"iterations={rep.iterations} objective={rep.objective!r} "
          f"converged={rep.converged} support={rep.support}")


def _cmd_denoise(args):
    data, meta = read_matrix_csv(args.input)
    kind = meta.get("kind", "PLAIN")
    a = AmbiguityMatrix(data, kind if kind in AmbiguityKind.__members__ else AmbiguityKind.PLAIN)
    out = lstat_denoise(a, _trim(args))
    export_matrix(out, args.output, complex_pairs=np.iscomplexobj(data))


def _cmd_ifest(args):
    data, meta = read_matrix_csv(args.input)
    N = data.shape[1]
    kind = meta.get("kind", "NONE")
    if args.freq_scale is not None:
        step = args.freq_scale
    else:
        step = 1 / (2 * N) if kind in ("WD", "COHEN") else 1 / N
    tf = TFMatrix(np.abs(data), np.arange(N) * step,
                  kind if kind in TFKind.__members__ else TFKind.SPARSE)
    tracks = estimate_if(tf, args.components)
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        cols = []
        for t in tracks:
            cols += [f"track{t.component}_bin", f"track{t.component}_freq",
                     f"track{t.component}_tracked"]
        fh.write("column," + ",".join(cols) + "\n")
        for n in range(tf.N):
            cells = [str(n)]
            for t in tracks:
                cells += [str(t.bins[n]), repr(float(t.frequencies[n])), str(int(t.tracked[n]))]
            fh.write(",".join(cells) + "\n")


def _cmd_experiment(args):
    cfg = ExperimentConfig(
        experiment=args.experiment, N=args.N, mask_side=args.mask_side, fraction=args.fraction,
        kernel_deltas=tuple(args.kernel_deltas), window=args.window, trim=_trim(args),
        solver=_solver(args), seeds=tuple(args.seeds), input_path=args.input_path,
        output_dir=args.output_dir, components=args.components, impulses=args.impulses,
        impulse_scale=args.impulse_scale, noise=args.noise)
    files = run_experiment(cfg)
    print(f"wrote {len(files)} files to {cfg.output_dir}")


def _cmd_export(args):
    data, meta = read_matrix_csv(args.input)
    export_matrix(data, args.output, args.format, kind=meta.get("kind", ""),
                  complex_pairs=args.complex)


_COMMANDS = {"gen": _cmd_gen, "tfd": _cmd_tfd, "ambiguity": _cmd_ambiguity,
             "reconstruct": _cmd_reconstruct, "denoise": _cmd_denoise, "ifest": _cmd_ifest,
             "experiment": _cmd_experiment, "export": _cmd_export}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except (FormatError, OSError) as e:
        print(f"sparsetfd: error: {e}", file=sys.stderr)
        return 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NumericWarning)
            _COMMANDS[args.command](args)
    except (SparseTFDError, OSError, ValueError) as e:
        print(f"sparsetfd {args.command}: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
