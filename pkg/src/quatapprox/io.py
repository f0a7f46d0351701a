"""Config files, typed parameter coercion, and artifact writing.

Config files are flat ``key = value`` text: one pair per line, ``#`` starts
a comment, blank lines are ignored, keys may not repeat.  Every coercion
error names the offending key so a bad run is diagnosable from stderr.

Numbers are written to CSV with 17 significant digits, so every float
round-trips exactly through its textual form; JSON uses the shortest
exact repr for the same reason.  The manifest is the only artifact with a
timestamp, which keeps data files byte-identical across reruns.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .hurwitz import HurwitzInt
from .metrical import ApproxFunction, DimensionFunction

ENV_PREFIX = "QUATAPPROX_"


# ---------------------------------------------------------------------------
# flat key = value config files
# ---------------------------------------------------------------------------

def parse_config_text(text):
    """Parse flat key = value lines into a string-to-string dict."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ValidationError(f"config line {lineno}: empty key")
        if key in out:
            raise ValidationError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_config(path):
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"config file not found: {path}")
    return parse_config_text(p.read_text())


# ---------------------------------------------------------------------------
# typed coercion (one function per parameter kind)
# ---------------------------------------------------------------------------

def _fail(key, value, expected):
    raise ValidationError(f"parameter {key!r}: {value!r} is not {expected}")


def coerce_int(key, value):
    try:
        return int(str(value), 10)
    except ValueError:
        _fail(key, value, "an integer")


def coerce_u64(key, value):
    n = coerce_int(key, value)
    if not 0 <= n < 2 ** 64:
        _fail(key, value, "a 64-bit unsigned seed")
    return n


def coerce_float(key, value):
    try:
        x = float(value)
    except ValueError:
        _fail(key, value, "a real number")
    if not math.isfinite(x):
        _fail(key, value, "a finite real number")
    return x


def coerce_str(key, value):
    return str(value)


def coerce_choice(*choices):
    def inner(key, value):
        if value not in choices:
            _fail(key, value, f"one of {', '.join(choices)}")
        return value

    return inner


def coerce_reals4(key, value):
    """Four comma-separated coordinates; fractions like 1/3 stay exact."""
    parts = [t.strip() for t in str(value).split(",")]
    if len(parts) != 4:
        _fail(key, value, "four comma-separated coordinates")
    out = []
    for t in parts:
        try:
            out.append(Fraction(t) if "/" in t else float(t))
        except (ValueError, ZeroDivisionError):
            _fail(key, value, "four comma-separated coordinates")
    return tuple(out)


def coerce_int_list(key, value):
    try:
        return [int(t.strip(), 10) for t in str(value).split(",") if t.strip()]
    except ValueError:
        _fail(key, value, "comma-separated integers")


def coerce_quat(key, value):
    try:
        return HurwitzInt.parse(str(value))
    except ValidationError:
        _fail(key, value, 'a quaternion literal like "2+1i+0j+0k"')


def _spec_fields(key, value):
    head, _, rest = str(value).partition(":")
    fields = {}
    for item in rest.split(","):
        item = item.strip()
        if not item:
            continue
        name, eq, num = item.partition("=")
        if not eq:
            _fail(key, value, "a spec like power:v=3,scale=1")
        fields[name.strip()] = coerce_float(key, num.strip())
    return head.strip(), fields


def coerce_psi(key, value):
    """Approximation-function specs: power:v=3[,scale=..],
    power_log:v=2,w=0.5[,scale=..], const:c=10."""
    head, fields = _spec_fields(key, value)
    try:
        if head == "power":
            return ApproxFunction.power(fields.pop("v"), **fields)
        if head == "power_log":
            return ApproxFunction.power_log(
                fields.pop("v"), fields.pop("w"), **fields
            )
        if head == "const":
            return ApproxFunction.constant(fields.pop("c"))
    except (KeyError, TypeError):
        _fail(key, value, "a complete psi spec (power needs v, const needs c)")
    _fail(key, value, "one of power:, power_log:, const:")


def coerce_dim(key, value):
    """Dimension-function specs: power:s=4."""
    head, fields = _spec_fields(key, value)
    try:
        if head == "power":
            return DimensionFunction.power(fields.pop("s"))
    except (KeyError, TypeError):
        _fail(key, value, "a complete dimension spec (power needs s)")
    _fail(key, value, "a dimension spec like power:s=4")


def psi_label(psi):
    """The v_or_psi_id column: bare v for plain power laws, else the
    describe() string."""
    if psi.kind == "power" and psi.scale == 1.0:
        return fmt_cell(psi.v)
    return psi.describe()


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------

def fmt_cell(value):
    """CSV cell text: floats at 17 significant digits, everything else str."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_csv(path, fieldnames, rows):
    """One table, fixed column order, deterministic bytes."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([fmt_cell(row[k]) for k in fieldnames])


class _ArtifactEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, Fraction):
            return str(o)
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        return super().default(o)


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, cls=_ArtifactEncoder)
        fh.write("\n")


class Emitter:
    """Writes tables and reports under one output directory in the chosen
    format; collects the file list for the manifest."""

    def __init__(self, out_dir, fmt):
        self.out_dir = Path(out_dir)
        self.fmt = fmt
        self.files = []
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ValidationError(f"output directory not writable: {e}")

    def _record(self, path):
        self.files.append(path.name)
        return path

    def table(self, name, fieldnames, rows):
        """A tabular artifact: CSV columns in order, or a JSON row list."""
        if self.fmt == "csv":
            path = self._record(self.out_dir / f"{name}.csv")
            write_csv(path, fieldnames, rows)
        else:
            path = self._record(self.out_dir / f"{name}.json")
            write_json(path, [{k: row[k] for k in fieldnames} for row in rows])
        return path

    def report(self, name, payload):
        """A structured (non-tabular) artifact; always JSON."""
        path = self._record(self.out_dir / f"{name}.json")
        write_json(path, payload)
        return path


def write_manifest(emitter, subcommand, resolved, seed, wall_time):
    """The run record: full resolved config, seed, versions, wall time.

    The timestamp lives only here so the data files stay byte-identical
    when a recorded config is re-run.
    """
    from . import __version__

    payload = {
        "subcommand": subcommand,
        "config": {k: fmt_cell(v) for k, v in resolved.items()},
        "seed": seed,
        "versions": {
            "quatapprox": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "wall_time_s": round(wall_time, 6),
        "written": sorted(emitter.files),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    write_json(emitter.out_dir / "manifest.json", payload)
