"""Channel description files, CSV emission, and run manifests.

Channel files are strict JSON: integer antenna counts and memory, a power
budget, tap arrays of length memory+1 holding row-major 2-D matrices, and
noise autocorrelation arrays of the same length (lag 0 first).  Parsing
reports the offending field path; model invariants violated by otherwise
well-formed files surface as ValidationError naming the field.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .channel import MatrixTapSequence, MimoWiretapChannel, NoiseAutocorrelation
from .errors import (
    DimensionMismatch,
    IoError,
    NotPositiveDefinite,
    ParseError,
    PeriodTooShort,
    ValidationError,
)
from .plc import PlcChannel


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ParseError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc.msg}", line=exc.lineno) from exc


def _get(obj, field, kind):
    if field not in obj:
        raise ParseError("missing required field", field=field)
    value = obj[field]
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError("expected an integer", field=field)
    elif kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError("expected a number", field=field)
        value = float(value)
    elif kind is list:
        if not isinstance(value, list):
            raise ParseError("expected an array", field=field)
    return value


def _matrix_list(obj, field, length, rows, cols):
    raw = _get(obj, field, list)
    if len(raw) != length:
        raise ParseError(
            f"expected {length} entries (memory + 1), got {len(raw)}", field=field
        )
    out = np.empty((length, rows, cols))
    for i, entry in enumerate(raw):
        where = f"{field}[{i}]"
        try:
            mat = np.asarray(entry, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError("expected a row-major 2-D numeric array", field=where) from exc
        if mat.shape != (rows, cols):
            raise ParseError(
                f"expected shape ({rows}, {cols}), got {mat.shape}", field=where
            )
        out[i] = mat
    return out


def parse_channel_file(path) -> MimoWiretapChannel:
    """Load and fully validate a MIMO wiretap channel description."""
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise ParseError("top-level JSON value must be an object")
    nt = _get(obj, "nt", int)
    nr = _get(obj, "nr", int)
    ne = _get(obj, "ne", int)
    memory = _get(obj, "memory", int)
    power = _get(obj, "power", float)
    if min(nt, nr, ne) < 1:
        raise ValidationError("nt", "antenna counts must be positive")
    if memory < 0:
        raise ValidationError("memory", "memory must be non-negative")
    if not power > 0:
        raise ValidationError("power", "power must be positive")

    h = _matrix_list(obj, "h_taps", memory + 1, nr, nt)
    g = _matrix_list(obj, "g_taps", memory + 1, ne, nt)
    cw = _matrix_list(obj, "cw", memory + 1, nr, nr)
    cu = _matrix_list(obj, "cu", memory + 1, ne, ne)

    def noise(field, lags):
        try:
            return NoiseAutocorrelation(lags)
        except (NotPositiveDefinite, DimensionMismatch) as exc:
            raise ValidationError(field, str(exc)) from exc

    try:
        return MimoWiretapChannel(
            rx_taps=MatrixTapSequence(h),
            eve_taps=MatrixTapSequence(g),
            rx_noise=noise("cw", cw),
            eve_noise=noise("cu", cu),
            power=power,
        )
    except DimensionMismatch as exc:
        raise ValidationError("h_taps/g_taps", str(exc)) from exc


def parse_plc_file(path) -> PlcChannel:
    """Load and validate a periodic (LPTV + cyclostationary noise) description."""
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise ParseError("top-level JSON value must be an object")
    t_ch = _get(obj, "t_ch", int)
    t_noise = _get(obj, "t_noise", int)
    power = _get(obj, "power", float)
    if t_ch < 1 or t_noise < 1:
        raise ValidationError("t_ch", "periods must be positive integers")
    if not power > 0:
        raise ValidationError("power", "power must be positive")

    def table(field, period):
        raw = _get(obj, field, list)
        if len(raw) != period:
            raise ParseError(f"expected one row per phase ({period})", field=field)
        try:
            arr = np.asarray(raw, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError("expected a 2-D numeric array", field=field) from exc
        if arr.ndim != 2:
            raise ParseError("expected a 2-D array [phase][lag]", field=field)
        return arr

    h = table("h_lptv", t_ch)
    g = table("g_lptv", t_ch)
    cw = table("cw_cyclo", t_noise)
    cu = table("cu_cyclo", t_noise)
    try:
        return PlcChannel(rx_taps=h, eve_taps=g, rx_noise=cw, eve_noise=cu, power=power)
    except PeriodTooShort as exc:
        raise ValidationError("h_lptv/g_lptv", str(exc)) from exc
    except ValueError as exc:
        raise ValidationError("cw_cyclo/cu_cyclo", str(exc)) from exc


def format_float(x) -> str:
    """Deterministic, round-trip-safe decimal rendering for CSV cells."""
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(
                    ",".join(
                        str(c) if isinstance(c, (int, str)) else format_float(c)
                        for c in row
                    )
                    + "\n"
                )
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


@dataclass
class RunManifest:
    """Resolved invocation record written alongside every output file."""

    verb: str
    input_path: str
    params: dict
    seed: int | None
    version: str = __version__
    wall_clock_s: float | None = None

    def write(self, out_path):
        target = str(out_path) + ".manifest.json"
        try:
            with open(target, "w", encoding="utf-8") as fh:
                json.dump(dataclasses.asdict(self), fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            raise IoError(f"cannot write {target}: {exc}") from exc
        return target


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False
