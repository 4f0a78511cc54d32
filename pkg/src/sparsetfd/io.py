"""Signal and matrix files.

Signal text format: one sample per line, ``re,im`` or a bare real value,
blank lines ignored, ``#`` comment lines may carry ``key=value`` metadata
(``sample_rate``, ``t_start``). Files ending in ``.bin`` or ``.f64`` hold raw
little-endian float64 pairs.
"""

from __future__ import annotations

import os
import re

import numpy as np

from .errors import FormatError, InvalidArgument, NumericError
from .signals import Signal

__all__ = [
    "load_signal",
    "read_samples",
    "save_signal",
    "analytic",
    "export_matrix",
    "read_matrix_csv",
    "to_pgm_bytes",
]

_META = re.compile(r"(\w+)\s*=\s*(\S+)")
_BINARY_SUFFIXES = (".bin", ".f64")


def analytic(x: np.ndarray) -> np.ndarray:
    """Analytic signal of a real sequence by zeroing negative-frequency bins."""
    N = x.size
    X = np.fft.fft(np.asarray(x, dtype=float))
    h = np.zeros(N)
    h[0] = 1.0
    h[1:(N + 1) // 2] = 2.0
    if N % 2 == 0:
        h[N // 2] = 1.0
    return np.fft.ifft(X * h)


def _parse_text(path):
    meta: dict[str, str] = {}
    values = []
    real_only = True
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                meta.update(_META.findall(line))
                continue
            parts = [p.strip() for p in line.split(",")]
            try:
                nums = [float(p) for p in parts]
            except ValueError:
                raise FormatError(f"cannot parse sample {line!r}", line=lineno) from None
            if len(nums) == 1:
                values.append(complex(nums[0], 0.0))
            elif len(nums) == 2:
                values.append(complex(nums[0], nums[1]))
                real_only = False
            else:
                raise FormatError(f"expected 're,im' but got {len(nums)} fields", line=lineno)
    return np.array(values, dtype=complex), meta, real_only


def read_samples(path, notes: list | None = None) -> tuple[np.ndarray, dict[str, float]]:
    """Parse a signal file into raw samples plus metadata, without the
    length rules of :class:`~sparsetfd.signals.Signal`.

    Real-valued text files (one field per line) are made analytic; a note is
    appended to ``notes`` when that happens.
    """
    path = os.fspath(path)
    if path.endswith(_BINARY_SUFFIXES):
        raw = np.fromfile(path, dtype="<f8")
        if raw.size % 2:
            raise FormatError("binary signal must hold an even number of float64 values")
        x = raw[0::2] + 1j * raw[1::2]
        meta, real_only = {}, False
    else:
        x, meta, real_only = _parse_text(path)
    if real_only and x.size:
        x = analytic(x.real)
        if notes is not None:
            notes.append("real-valued input converted to analytic form")
    try:
        info = {"sample_rate": float(meta.get("sample_rate", 1.0)),
                "t_start": float(meta.get("t_start", 0.0))}
    except ValueError:
        raise FormatError("bad metadata value in header") from None
    return x, info


def load_signal(path, notes: list | None = None) -> Signal:
    """Read a signal file; see :func:`read_samples`."""
    x, info = read_samples(path, notes)
    try:
        return Signal(x, **info)
    except InvalidArgument as e:
        raise FormatError(str(e)) from None


def save_signal(signal: Signal, path) -> None:
    """Write ``signal`` in the text format with full float precision."""
    path = os.fspath(path)
    if path.endswith(_BINARY_SUFFIXES):
        pairs = np.column_stack([signal.samples.real, signal.samples.imag]).astype("<f8")
        pairs.tofile(path)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# sample_rate={signal.sample_rate!r} t_start={signal.t_start!r}\n")
        for z in signal.samples:
            fh.write(f"{float(z.real)!r},{float(z.imag)!r}\n")


def to_pgm_bytes(values) -> bytes:
    """8-bit P5 image of ``|values|`` scaled linearly from min to max.

    A matrix with no dynamic range renders as all zeros.
    """
    m = np.abs(np.asarray(values))
    if m.ndim != 2:
        raise InvalidArgument("PGM export needs a 2D matrix")
    if not np.all(np.isfinite(m)):
        raise NumericError("cannot export non-finite values")
    lo, hi = m.min(), m.max()
    if hi > lo:
        pix = np.rint((m - lo) / (hi - lo) * 255).astype(np.uint8)
    else:
        pix = np.zeros(m.shape, np.uint8)
    rows, cols = m.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + pix.tobytes()


def export_matrix(values, path, fmt: str | None = None, kind: str = "",
                  complex_pairs: bool = False) -> None:
    """Write a matrix as CSV magnitudes or a PGM heatmap.

    Parameters
    ----------
    values : array_like or object with ``values`` and ``kind``
    path : str or PathLike
    fmt : {"csv", "pgm"}, optional
        Taken from the file suffix when omitted.
    kind : str
        Recorded in the CSV header.
    complex_pairs : bool
        CSV only: write ``re,im`` column pairs instead of magnitudes.
    """
    if hasattr(values, "values"):
        kind = kind or getattr(getattr(values, "kind", ""), "value", "")
        values = values.values
    values = np.asarray(values)
    path = os.fspath(path)
    fmt = (fmt or os.path.splitext(path)[1].lstrip(".")).lower()
    if fmt == "pgm":
        data = to_pgm_bytes(values)
        with open(path, "wb") as fh:
            fh.write(data)
        return
    if fmt != "csv":
        raise InvalidArgument(f"unknown export format {fmt!r}")
    if values.ndim == 1:
        values = values[None, :]
    if not np.all(np.isfinite(values)):
        raise NumericError("cannot export non-finite values")
    rows, cols = values.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# rows={rows} cols={cols} kind={kind or 'NONE'}"
                 f"{' complex=1' if complex_pairs else ''}\n")
        for row in values:
            if complex_pairs:
                cells = (f"{float(z.real)!r},{float(z.imag)!r}" for z in row.astype(complex))
            else:
                cells = (repr(float(v)) for v in np.abs(row))
            fh.write(",".join(cells) + "\n")


def read_matrix_csv(path) -> tuple[np.ndarray, dict[str, str]]:
    """Parse a file written by :func:`export_matrix` (format ``csv``)."""
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise FormatError("missing '# rows= cols=' header", line=1)
        meta = dict(_META.findall(header))
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError:
                raise FormatError("non-numeric cell", line=lineno) from None
    data = np.array(rows)
    if meta.get("complex") == "1":
        data = data[:, 0::2] + 1j * data[:, 1::2]
    expect = (int(meta.get("rows", data.shape[0])), int(meta.get("cols", data.shape[1])))
    if data.shape != expect:
        raise FormatError(f"header says {expect}, body has {data.shape}")
    return data, meta
