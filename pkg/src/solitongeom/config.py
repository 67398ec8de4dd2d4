"""Run configuration: flag/file merging, validation and parsing of compact value syntax.

Values use small textual forms shared by flags and config files::

    surface   sphere:r=2 | ellipsoid:a=1,b=1.5,c=2 | torus:R=2,r=0.5 | plane:d=3
              cylinder:r=1.4142 | circle:r=1 | line | canonical:p=1,n=2
              spiral-cylinder:arctan,m=1,a=1[,d=1] | spiral-curve:exp
    profile   arctan:m=1,a=1 | exp | constant:value=0 | poly:coeffs=1;0;1
    grid      81x81              ranges  -0.5:0.5,-0.5:0.5
    t, s      lo:hi[:count]      box     -2:2,-2:2
    cells     400 | 400x300      p0      0,0,0

A config file holds ``key = value`` lines (``#`` comments); keys are the
long flag names.  Flags given on the command line override file values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from solitongeom.errors import ConfigError
from solitongeom.gallery import (ArctanProfile, ConstantProfile, ExpProfile, PolynomialProfile,
                                 SpiralCurve, SpiralCurveSpec, canonical_shrinker, spiral_cylinder)
from solitongeom.surface import (ORIENTATIONS, Circle, Cylinder, Ellipsoid, Line, ParamGrid,
                                 Plane, Sphere, Torus)

COMMANDS = ("frames", "identities", "omission", "spiral", "canonical")
IDENTITY_NAMES = ("grad", "div", "master", "shrinker")
SPIRAL_CHECKS = ("conditions", "chain", "curvature", "properness", "weighted", "exp-bound")
FORMATS = ("csv", "json", "svg")


@dataclass
class RunConfig:
    command: str
    surface: str | None = None
    orientation: str | None = None
    grid: str | None = None
    ranges: str | None = None
    refine: bool = False
    identities: str = "all"
    profile: str = "arctan:m=1,a=1"
    d: float = 1.0
    checks: str = "all"
    t: str | None = None
    s: str | None = None
    box: str | None = None
    cells: str = "200"
    cover_tol: float | None = None
    p0: str | None = None
    trap_radius: float = 1.2
    T_values: str = "50,100,200,400"
    asymptotic_T: float | None = None
    n: int = 2
    samples: int = 101
    format: str = "csv,json,svg"
    threads: int = 1
    out: str = "out"

    def provenance(self):
        """Every computation-relevant setting (the output path is excluded)."""
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "out"}


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_BOOL_TRUE = ("1", "true", "yes", "on")
_BOOL_FALSE = ("0", "false", "no", "off")


def _coerce(key, value, line=None):
    kind = _FIELD_TYPES[key]
    if value is None:
        return None
    try:
        if "bool" in kind:
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in _BOOL_TRUE:
                return True
            if text in _BOOL_FALSE:
                return False
            raise ValueError(f"expected a boolean, got {value!r}")
        if kind.startswith("int"):
            return int(value)
        if kind.startswith("float"):
            out = float(value)
            if not math.isfinite(out):
                raise ValueError("must be finite")
            return out
        return str(value).strip()
    except ValueError as exc:
        raise ConfigError(key, str(exc), line) from None


def read_config_file(path):
    """Parse a ``key = value`` file; returns ``{key: (value, line_number)}``."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(key, "unknown key", lineno)
        out[key] = (value, lineno)
    return out


def build_config(command, flags, file_values=None):
    """Merge defaults < file < flags and validate everything up front."""
    if command not in COMMANDS:
        raise ConfigError("command", f"must be one of {COMMANDS}")
    file_values = file_values or {}
    if "command" in file_values and file_values["command"][0] != command:
        raise ConfigError("command", "config file names a different command", file_values["command"][1])
    merged, lines = {}, {}
    for key, (value, lineno) in file_values.items():
        if key == "command":
            continue
        merged[key] = _coerce(key, value, lineno)
        lines[key] = lineno
    for key, value in flags.items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(key, "unknown option")
        merged[key] = _coerce(key, value)
        lines.pop(key, None)
    cfg = RunConfig(command=command, **merged)
    try:
        resolve(cfg)
    except ConfigError as exc:
        if exc.line is None and exc.field in lines:
            raise ConfigError(exc.field, exc.message, lines[exc.field]) from None
        raise
    return cfg


# ---------------------------------------------------------------------------
# value parsers


def _kv(text, field):
    """``a=1,b=2,flag`` -> (positional tokens, dict)."""
    pos, kv = [], {}
    for token in filter(None, (p.strip() for p in text.split(","))):
        if "=" in token:
            k, v = (x.strip() for x in token.split("=", 1))
            kv[k] = v
        else:
            pos.append(token)
    return pos, kv


def _float(v, field):
    try:
        out = float(v)
    except ValueError:
        raise ConfigError(field, f"not a number: {v!r}") from None
    if not math.isfinite(out):
        raise ConfigError(field, "must be finite")
    return out


def parse_interval(text, field, need_count=False, default_step=None):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(field, f"expected lo:hi[:count], got {text!r}")
    lo, hi = _float(parts[0], field), _float(parts[1], field)
    if not hi > lo:
        raise ConfigError(field, "interval must have hi > lo")
    if len(parts) == 3:
        try:
            count = int(parts[2])
        except ValueError:
            raise ConfigError(field, f"bad sample count {parts[2]!r}") from None
        if count < 2:
            raise ConfigError(field, "sample count must be at least 2")
    elif need_count:
        raise ConfigError(field, "a sample count is required (lo:hi:count)")
    else:
        count = int(math.ceil((hi - lo) / default_step)) + 1 if default_step else None
    return lo, hi, count


def parse_box(text, field="box"):
    box = []
    for part in text.split(","):
        lo, hi, _ = parse_interval(part.strip(), field)
        box.append((lo, hi))
    if len(box) not in (2, 3):
        raise ConfigError(field, "box needs 2 or 3 axes")
    return tuple(box)


def parse_counts(text, field, dims=None):
    try:
        counts = tuple(int(c) for c in str(text).lower().split("x"))
    except ValueError:
        raise ConfigError(field, f"expected counts like 81x81, got {text!r}") from None
    if dims is not None:
        if len(counts) == 1:
            counts = counts * dims
        if len(counts) != dims:
            raise ConfigError(field, f"expected {dims} counts")
    if any(c < 1 for c in counts):
        raise ConfigError(field, "counts must be positive")
    return counts


def parse_point(text, field, dims):
    vals = tuple(_float(v, field) for v in text.split(","))
    if len(vals) != dims:
        raise ConfigError(field, f"expected {dims} coordinates")
    return vals


def parse_profile(text, field="profile"):
    family, _, rest = text.partition(":")
    family = family.strip()
    _, kv = _kv(rest, field)
    return _make_profile(family, kv, field)


def _make_profile(family, kv, field):
    try:
        if family == "arctan":
            allowed = {"m", "a"}
            _reject(kv, allowed, field)
            return ArctanProfile(m=_float(kv.get("m", 1.0), field), a=_float(kv.get("a", 1.0), field))
        if family == "exp":
            _reject(kv, set(), field)
            return ExpProfile()
        if family == "constant":
            _reject(kv, {"value"}, field)
            return ConstantProfile(_float(kv.get("value", 0.0), field))
        if family == "poly":
            _reject(kv, {"coeffs"}, field)
            return PolynomialProfile(tuple(_float(c, field) for c in kv.get("coeffs", "0").split(";")))
    except ValueError as exc:
        raise ConfigError(field, str(exc)) from None
    raise ConfigError(field, f"unknown profile family {family!r}")


def _reject(kv, allowed, field):
    extra = sorted(set(kv) - allowed)
    if extra:
        raise ConfigError(field, f"unknown parameter(s) {', '.join(extra)}")


_BUILDERS = {
    "sphere": (Sphere, {"r": float, "cap": str}),
    "ellipsoid": (Ellipsoid, {"a": float, "b": float, "c": float, "cap": str}),
    "plane": (Plane, {"d": float}),
    "cylinder": (Cylinder, {"r": float}),
    "torus": (Torus, {"R": float, "r": float}),
    "circle": (Circle, {"r": float}),
    "line": (Line, {"d": float}),
}


def parse_surface(text, orientation=None, field="surface"):
    name, _, rest = text.partition(":")
    name = name.strip()
    pos, kv = _kv(rest, field)
    extra = {} if orientation is None else {"orientation": orientation}
    try:
        if name in _BUILDERS:
            cls, schema = _BUILDERS[name]
            _reject(kv, set(schema), field)
            if pos:
                raise ConfigError(field, f"unexpected token(s) {pos}")
            args = {k: (_float(v, field) if schema[k] is float else v) for k, v in kv.items()}
            return cls(**args, **extra)
        if name == "canonical":
            _reject(kv, {"p", "n"}, field)
            spec = canonical_shrinker(int(kv.get("p", 2)), int(kv.get("n", 2)))
            if orientation is not None:
                spec = type(spec)(**{**_init_args(spec), "orientation": orientation})
            return spec
        if name in ("spiral-cylinder", "spiral-curve"):
            if len(pos) != 1:
                raise ConfigError(field, "spiral surfaces need exactly one profile family token")
            d = _float(kv.pop("d", 1.0), field)
            curve = SpiralCurve(_make_profile(pos[0], kv, field), d)
            if name == "spiral-cylinder":
                return spiral_cylinder(curve.profile, d, **extra)
            return SpiralCurveSpec(curve=curve, **extra)
    except (ValueError, TypeError) as exc:
        raise ConfigError(field, str(exc)) from None
    raise ConfigError(field, f"unknown surface builder {name!r}")


def _init_args(spec):
    if isinstance(spec, Sphere):
        return {"r": spec.r, "cap": spec.cap}
    return {f.name: getattr(spec, f.name) for f in fields(spec) if f.init}


# ---------------------------------------------------------------------------
# resolution into objects


@dataclass
class Resolved:
    spec: object = None
    grid: ParamGrid = None
    profile: object = None
    t: tuple = None
    s: tuple = None
    box: tuple = None
    cells: tuple = None
    p0: tuple = None
    T_values: tuple = None
    identities: tuple = ()
    checks: tuple = ()
    formats: tuple = ()


def _choices(text, allowed, field):
    items = tuple(x.strip() for x in text.split(",") if x.strip())
    if items == ("all",):
        return allowed
    bad = [x for x in items if x not in allowed]
    if bad or not items:
        raise ConfigError(field, f"choose from {', '.join(allowed)} or 'all'")
    return items


def resolve(cfg):
    """Turn a :class:`RunConfig` into builder objects; raises ConfigError on any bad value."""
    r = Resolved()
    if cfg.orientation is not None and cfg.orientation not in ORIENTATIONS:
        raise ConfigError("orientation", f"must be one of {ORIENTATIONS}")
    if cfg.threads < 1:
        raise ConfigError("threads", "must be at least 1")
    r.formats = _choices(cfg.format, FORMATS, "format")
    cmd = cfg.command

    if cmd in ("frames", "identities", "omission"):
        if cfg.surface is None:
            raise ConfigError("surface", "required for this command")
        r.spec = parse_surface(cfg.surface, cfg.orientation)
        ranges = r.spec.default_ranges if cfg.ranges is None else parse_box(cfg.ranges, "ranges")[:r.spec.n]
        if cfg.ranges is not None and len(parse_box(cfg.ranges, "ranges")) != r.spec.n:
            raise ConfigError("ranges", f"need {r.spec.n} parameter interval(s)")
        if cfg.t is not None:
            lo, hi, count = parse_interval(cfg.t, "t", default_step=0.01)
            ranges = ((lo, hi),) + tuple(ranges[1:])
        # an explicit t interval sets the first axis; remaining axes stay coarse unless given
        default_counts = "41" if cfg.t is None else "5"
        counts = parse_counts(cfg.grid or default_counts, "grid", r.spec.n)
        if cfg.t is not None:
            counts = (count,) + counts[1:]
        if any(not np.isfinite(lo) or not np.isfinite(hi) for lo, hi in ranges):
            raise ConfigError("ranges", "parameter ranges must be finite")
        try:
            r.grid = ParamGrid(ranges, counts)
        except ValueError as exc:
            raise ConfigError("grid", str(exc)) from None
        for axis, (lo, hi) in enumerate(ranges):
            dlo, dhi = r.spec.domain[axis]
            if lo < dlo or hi > dhi:
                raise ConfigError("ranges", f"axis {axis} leaves the chart domain [{dlo}, {dhi}]")
    if cmd == "identities":
        r.identities = _choices(cfg.identities, IDENTITY_NAMES, "identities")
    if cmd == "omission":
        dims = 2 if (r.spec.vertical or r.spec.ambient_dim == 2) else 3
        r.box = parse_box(cfg.box or ",".join(["-2:2"] * dims))
        if len(r.box) == 2 and r.spec.ambient_dim == 3 and not r.spec.vertical:
            raise ConfigError("box", "a planar box needs a vertical cylinder or a planar curve")
        r.cells = parse_counts(cfg.cells, "cells", len(r.box))
        if cfg.cover_tol is not None and cfg.cover_tol < 0:
            raise ConfigError("cover_tol", "must be non-negative")
        if cfg.s is not None:
            lo, hi, _ = parse_interval(cfg.s, "s")
            r.s = (lo, hi)
        r.p0 = parse_point(cfg.p0 or ",".join(["0"] * r.spec.ambient_dim), "p0", r.spec.ambient_dim)
    if cmd == "spiral":
        r.profile = parse_profile(cfg.profile)
        if not cfg.d > 0:
            raise ConfigError("d", "must be positive")
        r.checks = _choices(cfg.checks, SPIRAL_CHECKS, "checks")
        r.t = parse_interval(cfg.t or "-50:50:2001", "t", need_count=True)
        r.s = parse_interval(cfg.s or "-100:100:2001", "s", need_count=True)
        try:
            r.T_values = tuple(_float(v, "T_values") for v in cfg.T_values.split(","))
        except AttributeError:
            raise ConfigError("T_values", "expected comma-separated values") from None
        if any(b <= a for a, b in zip(r.T_values, r.T_values[1:])) or r.T_values[0] <= 0:
            raise ConfigError("T_values", "must be positive and strictly increasing")
        if "properness" in r.checks and not cfg.trap_radius > cfg.d:
            raise ConfigError("trap_radius", "must exceed d")
        horizon = max(abs(r.t[0]), abs(r.t[1]))
        if cfg.asymptotic_T is not None and cfg.asymptotic_T < horizon:
            raise ConfigError("asymptotic_T", "must be at least max|t|")
    if cmd == "canonical":
        if cfg.n not in (1, 2):
            raise ConfigError("n", "must be 1 or 2")
        if cfg.samples < 5:
            raise ConfigError("samples", "must be at least 5")
    return r
