"""Loaders for delimited cube files and PCM wave recordings.

:func:`provenance` gives the JSON-ready record (path, SHA-256, loader
configuration) stored alongside anything derived from an input file.
"""
from __future__ import annotations

import csv
import hashlib
import math
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.io import wavfile

from .delay import TimeSeriesCube
from .errors import (ChannelMismatch, IncompleteGrid, InvalidConfig, ParseError, TooShort,
                     UnsupportedFormat)
from .secants import DataMatrix


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def provenance(path, config) -> dict:
    """``{"path", "sha256", "config"}`` for a loaded file."""
    cfg = config.to_dict() if hasattr(config, "to_dict") else dict(config)
    return {"path": str(Path(path).resolve()), "sha256": file_sha256(path), "config": cfg}


# ---------------------------------------------------------------- CSV cubes

@dataclass(frozen=True)
class CsvCubeSpec:
    """Long-format table: one row per ``(time, site)`` with ``v`` variable columns."""

    path: str
    time_column: str
    site_column: str
    variable_columns: tuple
    delimiter: str = ","

    def __post_init__(self):
        cols = tuple(self.variable_columns)
        if not cols:
            raise InvalidConfig("variable_columns must be non-empty")
        if len(set(cols)) != len(cols):
            raise InvalidConfig("variable_columns contains duplicates")
        if len(self.delimiter) != 1:
            raise InvalidConfig("delimiter must be a single character")
        object.__setattr__(self, "path", str(self.path))
        object.__setattr__(self, "variable_columns", cols)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variable_columns"] = list(self.variable_columns)
        return d


def _sort_key(label: str):
    """Numeric labels sort numerically, everything else lexically after them."""
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


def load_cube(spec: CsvCubeSpec) -> TimeSeriesCube:
    """Read a long-format CSV into a ``T x P x v`` cube.

    Times and sites are sorted (numerically when every label parses as a
    number).  Every ``(time, site)`` pair must appear exactly once.
    """
    try:
        fh = open(spec.path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{spec.path}: cannot open ({exc.strerror})") from exc
    with fh:
        reader = csv.reader(fh, delimiter=spec.delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{spec.path}: empty file, header row required") from None
        needed = (spec.time_column, spec.site_column) + spec.variable_columns
        missing = [c for c in needed if c not in header]
        if missing:
            raise ParseError(f"{spec.path}: header lacks column(s) {missing}")
        ti, si = header.index(spec.time_column), header.index(spec.site_column)
        vi = [header.index(c) for c in spec.variable_columns]
        records = {}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{spec.path}:{line_no}: expected {len(header)} fields, got {len(row)}")
            key = (row[ti].strip(), row[si].strip())
            values = []
            for j in vi:
                try:
                    x = float(row[j])
                except ValueError:
                    raise ParseError(
                        f"{spec.path}:{line_no}: column {header[j]!r} is not numeric: {row[j]!r}"
                    ) from None
                if not math.isfinite(x):
                    raise ParseError(f"{spec.path}:{line_no}: column {header[j]!r} is not finite")
                values.append(x)
            if key in records:
                raise ParseError(f"{spec.path}:{line_no}: duplicate (time, site) = {key}")
            records[key] = values
    if not records:
        raise ParseError(f"{spec.path}: no data rows")

    times = sorted({t for t, _ in records}, key=_sort_key)
    sites = sorted({s for _, s in records}, key=_sort_key)
    cube = np.empty((len(times), len(sites), len(spec.variable_columns)))
    for a, t in enumerate(times):
        for b, s in enumerate(sites):
            try:
                cube[a, b] = records[(t, s)]
            except KeyError:
                raise IncompleteGrid(
                    f"{spec.path}: no row for (time={t!r}, site={s!r}); "
                    f"{len(times)} times x {len(sites)} sites needs {len(times) * len(sites)} rows, "
                    f"found {len(records)}") from None
    return TimeSeriesCube(cube, dt_label=Path(spec.path).stem)


def save_cube(cube: TimeSeriesCube, path, variable_names: Optional[Sequence[str]] = None,
              time_column: str = "time", site_column: str = "site") -> CsvCubeSpec:
    """Write ``cube`` in the long format read by :func:`load_cube`."""
    names = list(variable_names) if variable_names else [f"var{k}" for k in range(cube.v)]
    if len(names) != cube.v:
        raise InvalidConfig(f"{len(names)} variable names for {cube.v} variables")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([time_column, site_column] + names)
        for t in range(cube.T):
            for p in range(cube.P):
                w.writerow([t, p] + [repr(float(x)) for x in cube.samples[t, p]])
    return CsvCubeSpec(str(path), time_column, site_column, tuple(names))


def load_matrix(path, delimiter: str = ",", label: Optional[str] = None) -> DataMatrix:
    """Numeric ``N x n`` table, one point per row.

    A leading non-numeric row is taken as a header and skipped.
    """
    rows = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot open ({exc.strerror})") from exc
    with fh:
        for line_no, row in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                if line_no == 1:
                    continue
                raise ParseError(f"{path}:{line_no}: non-numeric field in {row!r}") from None
            if len(rows[-1]) != len(rows[0]):
                raise ParseError(f"{path}:{line_no}: expected {len(rows[0])} fields, got {len(rows[-1])}")
    if len(rows) < 2:
        raise ParseError(f"{path}: need at least two data rows")
    X = np.array(rows)
    if not np.all(np.isfinite(X)):
        raise ParseError(f"{path}: NaN or Inf entries")
    return DataMatrix(X, label=label if label is not None else Path(path).stem)


# -------------------------------------------------------------------- audio

@dataclass(frozen=True)
class AudioWindowConfig:
    """Decimate, then cut windows of ``window_len`` decimated samples every ``hop``.

    ``hop`` defaults to ``window_len // 2``.  ``raw_stride`` replaces block
    averaging by plain sample picking.
    """

    decimation: int = 100
    window_len: int = 5000
    hop: Optional[int] = None
    channels: Optional[int] = None
    raw_stride: bool = False

    def __post_init__(self):
        if self.decimation < 1 or self.window_len < 1:
            raise InvalidConfig("decimation and window_len must be >= 1")
        if self.hop is not None and self.hop < 1:
            raise InvalidConfig("hop must be >= 1")
        if self.channels is not None and self.channels < 1:
            raise InvalidConfig("channels must be >= 1")

    @property
    def step(self) -> int:
        return self.hop if self.hop is not None else max(1, self.window_len // 2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["resolved_hop"] = self.step
        return d


_PCM_SCALE = {np.dtype("uint8"): (128.0, 128.0), np.dtype("int16"): (0.0, 32768.0),
              np.dtype("int32"): (0.0, 2147483648.0)}


def read_wav(path) -> tuple[int, np.ndarray]:
    """Sample rate and a ``samples x channels`` float array scaled to [-1, 1)."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", wavfile.WavFileWarning)
            rate, data = wavfile.read(path)
    except (ValueError, EOFError) as exc:
        raise UnsupportedFormat(f"{path}: not a readable PCM wave file ({exc})") from exc
    if data.dtype in _PCM_SCALE:
        offset, scale = _PCM_SCALE[data.dtype]
        x = (data.astype(float) - offset) / scale
    elif data.dtype in (np.float32, np.float64):
        x = data.astype(float)
    else:
        raise UnsupportedFormat(f"{path}: unsupported sample type {data.dtype}")
    if x.ndim == 1:
        x = x[:, None]
    return int(rate), x


def decimate(signal: np.ndarray, factor: int, raw_stride: bool = False) -> np.ndarray:
    """Mean of each full block of ``factor`` samples along axis 0 (or every ``factor``-th sample)."""
    signal = np.asarray(signal, dtype=float)
    if factor == 1:
        return signal.copy()
    if raw_stride:
        return signal[::factor].copy()
    n = (len(signal) // factor) * factor
    return signal[:n].reshape(n // factor, factor, *signal.shape[1:]).mean(axis=1)


def window_points(signal: np.ndarray, window_len: int, hop: int) -> np.ndarray:
    """Sliding windows of a ``samples x channels`` signal, channels concatenated per point."""
    L, C = signal.shape
    if L < window_len:
        raise TooShort(f"{L} samples after decimation, one window needs {window_len}")
    count = (L - window_len) // hop + 1
    idx = np.arange(count)[:, None] * hop + np.arange(window_len)[None, :]
    # (count, window_len, C) -> channel-major concatenation
    return np.transpose(signal[idx], (0, 2, 1)).reshape(count, C * window_len)


def load_audio_windows(path, config: AudioWindowConfig = AudioWindowConfig()) -> DataMatrix:
    """Windowed points of a wave recording.

    Each point is channel 0's window followed by channel 1's, and so on, so
    its dimension is ``channels * window_len``.
    """
    _, x = read_wav(path)
    if config.channels is not None and x.shape[1] != config.channels:
        raise ChannelMismatch(f"{path}: has {x.shape[1]} channel(s), expected {config.channels}")
    y = decimate(x, config.decimation, config.raw_stride)
    return DataMatrix(window_points(y, config.window_len, config.step), label=Path(path).stem)


def write_wav(path, rate: int, signal: np.ndarray) -> None:
    """Write a float signal in [-1, 1] as 16-bit PCM."""
    s = np.clip(np.asarray(signal, dtype=float), -1.0, 1.0 - 1.0 / 32768)
    wavfile.write(path, rate, np.round(s * 32768).astype(np.int16))
