"""Experiment configuration files.

A config is INI text with four sections::

    [experiment]
    preset = gpe2d
    scheme = esqm
    dt = 0.001
    steps = 1000
    stride = 10
    diagnostics = mass, energy, lz

    [grid]
    points = 64, 64
    half_widths = 8, 8

    [model]
    omega = -0.5
    beta = 100

    [initial]
    source = builtin

Without a preset, ``[model]`` must name a ``family`` and give its matrices
inline (rows separated by ``;``).  Every error carries the line it refers to.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .diagnostics import COLUMNS
from .presets import (
    PRESETS,
    CubicNonlinearity,
    KineticModel,
    PotentialNonlinearity,
    SchrodingerModel,
    TransportModel,
    get_preset,
)
from .propagators import SCHEMES


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based or ``None`` for file-level problems."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


EXPERIMENT_KEYS = ("preset", "scheme", "dt", "steps", "final_time", "stride", "seed",
                   "diagnostics", "output", "pivot", "snapshot_every")
GRID_KEYS = ("points", "half_widths")
INITIAL_KEYS = ("source", "path")

# preset parameter -> parser
PRESET_PARAMS = {
    "transport3d": {"beta": float},
    "transport4d": {},
    "fp": {},
    "kfp": {"data": str},
    "qm2d-magnetic": {"eps": float},
    "gpe2d": {"omega": float, "beta": float, "gamma": "vector"},
    "gpe2d-aniso": {"omega": float, "beta": float, "gamma": "vector"},
    "qm3d-periodic": {},
    "qm3d-magnetic": {"alpha": float},
}

INLINE_KEYS = {
    "transport": ("family", "M", "pivot"),
    "kfp": ("family",),
    "fp": ("family",),
    "qm": ("family", "B", "V", "beta", "alpha", "time_scale", "energy_scale"),
}


@dataclass
class ExperimentConfig:
    preset: Optional[str]
    model: object
    scheme: str
    dt: float
    steps: int
    points: tuple
    half_widths: tuple
    stride: int = 1
    seed: int = 0
    diagnostics: tuple = ("l2_norm",)
    output: Optional[str] = None
    pivot: Optional[int] = None
    snapshot_every: int = 0
    params: dict = field(default_factory=dict)
    initial: str = "builtin"
    initial_path: Optional[str] = None
    final_time: Optional[float] = None

    @property
    def family(self) -> str:
        return self.model.family

    def dump(self) -> str:
        """Normalized config text; numbers are written with ``repr``."""
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        exp = {"scheme": self.scheme, "dt": repr(float(self.dt)), "steps": str(self.steps),
               "stride": str(self.stride), "seed": str(self.seed),
               "diagnostics": ", ".join(self.diagnostics),
               "snapshot_every": str(self.snapshot_every)}
        if self.preset:
            exp = {"preset": self.preset, **exp}
        if self.output:
            exp["output"] = self.output
        if self.pivot is not None:
            exp["pivot"] = str(self.pivot)
        cp["experiment"] = exp
        cp["grid"] = {"points": ", ".join(str(p) for p in self.points),
                      "half_widths": ", ".join(repr(float(r)) for r in self.half_widths)}
        cp["model"] = {k: _format_value(v) for k, v in self._model_items()}
        init = {"source": self.initial}
        if self.initial_path:
            init["path"] = self.initial_path
        cp["initial"] = init
        lines = []
        for sec in cp.sections():
            lines.append(f"[{sec}]")
            lines.extend(f"{k} = {v}" for k, v in cp[sec].items())
            lines.append("")
        return "\n".join(lines)

    def _model_items(self):
        if self.preset:
            return sorted(self.params.items())
        m = self.model
        out = [("family", m.family)]
        if m.family == "transport":
            out.append(("M", m.M))
        elif m.family == "qm":
            out += [("B", m.B), ("V", m.V), ("time_scale", m.time_scale),
                    ("energy_scale", m.energy_scale)]
            nl = m.nonlinearity
            if isinstance(nl, CubicNonlinearity):
                out.append(("beta", nl.beta))
            elif isinstance(nl, PotentialNonlinearity):
                out.append(("alpha", nl.alpha))
        return out


def _format_value(v) -> str:
    if isinstance(v, str):
        return v
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        return repr(float(a))
    if a.ndim == 1:
        return ", ".join(repr(float(x)) for x in a)
    return "; ".join(" ".join(repr(float(x)) for x in row) for row in a)


_KEY_RE = re.compile(r"^\s*([^=:\s][^=:]*?)\s*[=:]")
_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")


def _line_index(text: str) -> dict:
    """``(section, key) -> line`` and ``(section, None) -> line`` for headers."""
    idx = {}
    section = None
    for i, raw in enumerate(text.splitlines(), start=1):
        if raw.lstrip().startswith(("#", ";")) or not raw.strip():
            continue
        m = _SECTION_RE.match(raw)
        if m:
            section = m.group(1).strip()
            idx.setdefault((section, None), i)
            continue
        if raw[:1].isspace():
            continue  # continuation line
        m = _KEY_RE.match(raw)
        if m and section is not None:
            idx.setdefault((section, m.group(1).strip().lower()), i)
    return idx


class _Reader:
    def __init__(self, cp, lines):
        self.cp = cp
        self.lines = lines

    def line(self, section, key=None):
        return self.lines.get((section, key.lower() if key else None))

    def fail(self, section, key, message):
        raise ConfigError(message, self.line(section, key))

    def get(self, section, key):
        if not self.cp.has_section(section) or not self.cp.has_option(section, key):
            return None
        return self.cp.get(section, key).strip()

    def number(self, section, key, kind=float, default=None):
        raw = self.get(section, key)
        if raw is None or raw == "":
            return default
        try:
            val = kind(raw)
        except ValueError:
            self.fail(section, key, f"{key} must be {'an integer' if kind is int else 'a number'}, got {raw!r}")
        if kind is float and not math.isfinite(val):
            self.fail(section, key, f"{key} must be finite")
        return val

    def vector(self, section, key, kind=float):
        raw = self.get(section, key)
        if raw is None:
            return None
        try:
            return tuple(kind(p) for p in re.split(r"[,\s]+", raw) if p)
        except ValueError:
            self.fail(section, key, f"{key} must be a list of {'integers' if kind is int else 'numbers'}")

    def matrix(self, section, key):
        raw = self.get(section, key)
        if raw is None:
            return None
        try:
            rows = [[float(x) for x in re.split(r"[,\s]+", r.strip()) if x]
                    for r in re.split(r"[;\n]", raw) if r.strip()]
            a = np.array(rows, dtype=float)
        except ValueError:
            self.fail(section, key, f"{key} must be a matrix with rows separated by ';'")
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            self.fail(section, key, f"{key} must be square, got shape {a.shape}")
        return a


def _check_keys(r: _Reader, section: str, allowed) -> None:
    if not r.cp.has_section(section):
        return
    allowed_l = {a.lower() for a in allowed}
    for key in r.cp.options(section):
        if key not in allowed_l:
            r.fail(section, key, f"unknown key {key!r} in [{section}]; expected one of {sorted(allowed)}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate config text; raises :class:`ConfigError`."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any section", exc.lineno) from None
    r = _Reader(cp, _line_index(text))
    for sec in cp.sections():
        if sec not in ("experiment", "grid", "model", "initial"):
            r.fail(sec, None, f"unknown section [{sec}]")
    if not cp.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    _check_keys(r, "experiment", EXPERIMENT_KEYS)
    _check_keys(r, "grid", GRID_KEYS)
    _check_keys(r, "initial", INITIAL_KEYS)

    preset_name = r.get("experiment", "preset") or None
    preset = None
    params = {}
    if preset_name is not None:
        if preset_name not in PRESETS:
            r.fail("experiment", "preset", f"unknown preset {preset_name!r}; choose from {sorted(PRESETS)}")
        allowed = PRESET_PARAMS[preset_name]
        _check_keys(r, "model", allowed)
        for key, kind in allowed.items():
            if kind == "vector":
                val = r.vector("model", key)
            elif kind is str:
                val = r.get("model", key)
            else:
                val = r.number("model", key)
            if val is not None:
                params[key] = val
        if preset_name == "kfp" and params.get("data", "random") not in ("random", "maxwellian"):
            r.fail("model", "data", "data must be 'random' or 'maxwellian'")
        preset = get_preset(preset_name, **params)
        model = preset.model
    else:
        model = _inline_model(r)

    n = model.dims
    points = r.vector("grid", "points", int)
    half_widths = r.vector("grid", "half_widths")
    if preset is not None:
        points = points or preset.points
        half_widths = half_widths or preset.half_widths
    elif points is None or half_widths is None:
        r.fail("grid", None, "inline models need [grid] points and half_widths")
    if len(points) == 1 and n > 1:
        points = points * n
    if len(half_widths) == 1 and n > 1:
        half_widths = half_widths * n
    if len(points) != n:
        r.fail("grid", "points", f"points has {len(points)} entries but the model is {n}-dimensional")
    if len(half_widths) != n:
        r.fail("grid", "half_widths", f"half_widths has {len(half_widths)} entries but the model is {n}-dimensional")
    if any(p < 2 for p in points):
        r.fail("grid", "points", "each axis needs at least 2 points")
    if any(not h > 0 for h in half_widths):
        r.fail("grid", "half_widths", "half widths must be positive")

    scheme = r.get("experiment", "scheme") or (preset.scheme if preset else SCHEMES[model.family][0])
    allowed_schemes = preset.schemes if preset else SCHEMES[model.family]
    if scheme not in allowed_schemes:
        r.fail("experiment", "scheme",
               f"scheme {scheme!r} is not valid for {preset_name or model.family}; choose from {list(allowed_schemes)}")
    if scheme == "bw" and n != 2:
        r.fail("experiment", "scheme", "bw needs a two-dimensional model")

    dt = r.number("experiment", "dt", float, preset.dt if preset else None)
    if dt is None:
        r.fail("experiment", None, "dt is required for inline models")
    if not dt > 0:
        r.fail("experiment", "dt", "dt must be positive")
    steps = r.number("experiment", "steps", int)
    final_time = r.number("experiment", "final_time", float)
    if final_time is not None and final_time < 0:
        r.fail("experiment", "final_time", "final_time must be non-negative")
    if steps is None:
        if final_time is not None:
            steps = int(round(final_time / dt))
        else:
            steps = preset.steps if preset else 1
    elif final_time is not None and abs(steps * dt - final_time) > dt:
        r.fail("experiment", "final_time",
               f"final_time {final_time!r} disagrees with steps*dt = {steps * dt!r} by more than one step")
    if steps < 0:
        r.fail("experiment", "steps", "steps must be non-negative")
    stride = r.number("experiment", "stride", int, preset.stride if preset else 1)
    if stride < 1:
        r.fail("experiment", "stride", "stride must be at least 1")
    seed = r.number("experiment", "seed", int, 0)
    snap = r.number("experiment", "snapshot_every", int, 0)
    if snap < 0:
        r.fail("experiment", "snapshot_every", "snapshot_every must be non-negative")
    pivot = r.number("experiment", "pivot", int)
    if pivot is not None and not 0 <= pivot < n:
        r.fail("experiment", "pivot", f"pivot must lie in [0, {n - 1}]")

    raw_diag = r.get("experiment", "diagnostics")
    if raw_diag is None:
        diags = preset.diagnostics if preset else ("l2_norm",)
    else:
        diags = tuple(d for d in re.split(r"[,\s]+", raw_diag) if d) or ("l2_norm",)
    valid = set(COLUMNS) | {"probe"}
    for d in diags:
        if d not in valid:
            r.fail("experiment", "diagnostics", f"unknown diagnostic {d!r}; choose from {sorted(valid)}")
    _check_diagnostics(r, diags, model, preset, n)

    source = r.get("initial", "source") or "builtin"
    path = r.get("initial", "path")
    if source not in ("builtin", "snapshot"):
        r.fail("initial", "source", "source must be 'builtin' or 'snapshot'")
    if source == "snapshot" and not path:
        r.fail("initial", "source", "a snapshot source needs a path")
    if source == "builtin" and preset is None:
        r.fail("initial", "source", "inline models need a snapshot initial condition")

    return ExperimentConfig(preset_name, model, scheme, dt, steps, tuple(points),
                            tuple(float(h) for h in half_widths), stride, seed, diags,
                            r.get("experiment", "output") or None, pivot, snap, params,
                            source, path, final_time)


def _check_diagnostics(r, diags, model, preset, n):
    family = model.family
    needs = {
        "energy": family == "qm",
        "lz": family == "qm" and n == 2,
        "s_x1": n == 2, "s_x2": n == 2, "xc_1": n == 2, "xc_2": n == 2,
        "entropy": family == "fp",
        "l2_error": preset is not None and preset.exact is not None,
        "probe": preset is not None and preset.probe is not None,
    }
    for d in diags:
        if not needs.get(d, True):
            r.fail("experiment", "diagnostics", f"diagnostic {d!r} is not available for this model")


def _inline_model(r: _Reader):
    family = r.get("model", "family")
    if family is None:
        r.fail("experiment", None, "give either a preset or [model] family")
    if family not in INLINE_KEYS:
        r.fail("model", "family", f"unknown family {family!r}; choose from {sorted(INLINE_KEYS)}")
    _check_keys(r, "model", INLINE_KEYS[family])
    if family in ("kfp", "fp"):
        return KineticModel(family)
    if family == "transport":
        m = r.matrix("model", "M")
        if m is None:
            r.fail("model", "family", "transport models need M")
        if np.any(np.diag(m) != 0):
            r.fail("model", "M", "M must have a zero diagonal")
        return TransportModel(m, r.number("model", "pivot", int))
    b = r.matrix("model", "B")
    v = r.matrix("model", "V")
    if b is None or v is None:
        r.fail("model", "family", "qm models need B and V")
    if b.shape != v.shape:
        r.fail("model", "V", f"V has shape {v.shape} but B has {b.shape}")
    if np.max(np.abs(b + b.T)) > 1e-14 * max(1.0, np.max(np.abs(b))):
        r.fail("model", "B", "B must be skew-symmetric")
    if np.max(np.abs(v - v.T)) > 1e-14 * max(1.0, np.max(np.abs(v))):
        r.fail("model", "V", "V must be symmetric")
    beta = r.number("model", "beta")
    alpha = r.number("model", "alpha")
    if beta is not None and alpha is not None:
        r.fail("model", "alpha", "choose one of beta (cubic) and alpha (potential)")
    nl = CubicNonlinearity(beta) if beta is not None else (
        PotentialNonlinearity(alpha) if alpha is not None else None)
    return SchrodingerModel(b, v, nl, r.number("model", "time_scale", default=1.0),
                            r.number("model", "energy_scale", default=1.0))


def preset_config(name: str, **params) -> ExperimentConfig:
    """Config equivalent to ``[experiment] preset = name`` with defaults."""
    lines = ["[experiment]", f"preset = {name}"]
    if params:
        lines.append("[model]")
        lines += [f"{k} = {_format_value(v)}" for k, v in params.items()]
    return parse_config("\n".join(lines) + "\n")


def with_overrides(cfg: ExperimentConfig, dt=None, steps=None, scheme=None, seed=None,
                   output=None) -> ExperimentConfig:
    """Apply command-line overrides and re-validate the affected fields."""
    changes = {}
    if dt is not None:
        if not dt > 0:
            raise ConfigError("--dt must be positive")
        changes["dt"] = float(dt)
        if steps is None and cfg.final_time is not None:
            changes["steps"] = int(round(cfg.final_time / dt))
    if steps is not None:
        if steps < 0:
            raise ConfigError("--steps must be non-negative")
        changes["steps"] = int(steps)
        changes["final_time"] = None
    if scheme is not None:
        allowed = get_preset(cfg.preset, **cfg.params).schemes if cfg.preset else SCHEMES[cfg.family]
        if scheme not in allowed:
            raise ConfigError(f"--scheme {scheme!r} is not valid here; choose from {list(allowed)}")
        if scheme == "bw" and cfg.model.dims != 2:
            raise ConfigError("bw needs a two-dimensional model")
        changes["scheme"] = scheme
    if seed is not None:
        changes["seed"] = int(seed)
    if output is not None:
        changes["output"] = output
    return replace(cfg, **changes)
