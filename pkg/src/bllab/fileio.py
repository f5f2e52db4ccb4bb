"""Configuration files (JSON with rational strings) and atomic output."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import Configuration, IntervalUnion, as_rational, format_rational, measure_vector


class ConfigFormatError(ValueError):
    """Malformed configuration file; the message names the offending location."""


@dataclass(frozen=True)
class ConfigFile:
    config: Configuration
    e: tuple[Fraction, ...]
    sets: Optional[tuple[IntervalUnion, ...]] = None


def _rational(value, where: str) -> Fraction:
    if not isinstance(value, (str, int)) or isinstance(value, bool):
        raise ConfigFormatError(f"{where}: expected a rational string, got {value!r}")
    try:
        return as_rational(value)
    except (TypeError, ValueError) as exc:
        raise ConfigFormatError(f"{where}: {exc}") from None


def _list(value, where: str) -> list:
    if not isinstance(value, list):
        raise ConfigFormatError(f"{where}: expected an array")
    return value


def parse_config(data, source: str = "config") -> ConfigFile:
    if not isinstance(data, dict):
        raise ConfigFormatError(f"{source}: top level must be an object")
    for key in ("m", "rows", "e"):
        if key not in data:
            raise ConfigFormatError(f"{source}: missing field '{key}'")
    m = data["m"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ConfigFormatError(f"{source}: m: expected a positive integer")
    rows = []
    for j, row in enumerate(_list(data["rows"], f"{source}: rows")):
        row = _list(row, f"{source}: rows[{j}]")
        if len(row) != m:
            raise ConfigFormatError(f"{source}: rows[{j}]: length {len(row)}, expected m = {m}")
        vals = tuple(_rational(v, f"{source}: rows[{j}][{c}]") for c, v in enumerate(row))
        if not any(vals):
            raise ConfigFormatError(f"{source}: rows[{j}]: zero row")
        rows.append(vals)
    e = [_rational(v, f"{source}: e[{j}]") for j, v in enumerate(_list(data["e"], f"{source}: e"))]
    if len(e) != len(rows):
        raise ConfigFormatError(f"{source}: e: {len(e)} entries for {len(rows)} rows")
    for j, v in enumerate(e):
        if v <= 0:
            raise ConfigFormatError(f"{source}: e[{j}]: must be strictly positive")
    sets = None
    if data.get("sets") is not None:
        raw = _list(data["sets"], f"{source}: sets")
        if len(raw) != len(rows):
            raise ConfigFormatError(f"{source}: sets: {len(raw)} slots for {len(rows)} rows")
        sets = []
        for j, slot in enumerate(raw):
            pairs = []
            for k, pair in enumerate(_list(slot, f"{source}: sets[{j}]")):
                pair = _list(pair, f"{source}: sets[{j}][{k}]")
                if len(pair) != 2:
                    raise ConfigFormatError(f"{source}: sets[{j}][{k}]: expected [lo, hi]")
                lo = _rational(pair[0], f"{source}: sets[{j}][{k}][0]")
                hi = _rational(pair[1], f"{source}: sets[{j}][{k}][1]")
                if lo > hi:
                    raise ConfigFormatError(f"{source}: sets[{j}][{k}]: lo > hi")
                pairs.append((lo, hi))
            sets.append(IntervalUnion.from_pairs(pairs))
        sets = tuple(sets)
    name = data.get("name", os.path.splitext(os.path.basename(source))[0])
    return ConfigFile(Configuration(m, tuple(rows), name=str(name)), measure_vector(e), sets)


def load_config(path: str) -> ConfigFile:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigFormatError(f"{path}: cannot read ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise ConfigFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(data, path)


def config_to_json(cf: ConfigFile) -> dict:
    out = {
        "name": cf.config.name,
        "m": cf.config.m,
        "rows": [[format_rational(v) for v in r] for r in cf.config.rows],
        "e": [format_rational(v) for v in cf.e],
    }
    if cf.sets is not None:
        out["sets"] = [[[format_rational(lo), format_rational(hi)] for lo, hi in s.pairs()] for s in cf.sets]
    return out


def dumps_config(cf: ConfigFile) -> str:
    return json.dumps(config_to_json(cf), indent=2, ensure_ascii=False) + "\n"


def atomic_write(path: str, text: str):
    """Write UTF-8 text with LF endings via a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
