"""Run orchestration and the reports behind the ``plan`` and ``verify`` commands."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import ConfigError, ExperimentConfig
from .diagnostics import DiagnosticSeries, nearest_node, observe
from .grid import Field, GridSpec, read_snapshot, write_snapshot
from .plans import (
    ConsistencyError,
    fp_plan,
    kfp_plan,
    shear_factorize,
    triangular_split,
    verify_plan,
)
from .presets import TABLE_PRESETS, get_preset, periodic_lambdas
from .propagators import make_stepper
from .symplectic import (
    characteristic_polynomial,
    frequencies,
    qm_symbol,
    symbol_of_model,
    transport_symbol,
)
from .tables import PERIODIC_LAMBDAS, SHEAR_3D, SHEAR_4D, TRIANGULAR, compare_shears, compare_triangular

GATE_TOL = 1e-10
IDENTITY_TOL = 1e-11
TABLE_TOL = 1e-12
SPECTRUM_TOL = 1e-10

PERIODIC_FREQUENCIES = np.pi / 180 * np.array([20.0, 75.0, 132.0])
# X^6 + (407/120) X^4 + (123/80) X^2 - 7/384, as printed
PERIODIC_POLYNOMIAL = np.array([1.0, 0.0, 407 / 120, 0.0, 123 / 80, 0.0, -7 / 384])


class VerificationGateError(RuntimeError):
    """An exact plan failed its matrix identity before a run."""


@dataclass
class RunResult:
    series: DiagnosticSeries
    final: Field
    snapshots: list = field(default_factory=list)
    gate_residual: Optional[float] = None
    transforms_per_step: int = 0


def _spec(cfg: ExperimentConfig) -> GridSpec:
    return GridSpec(cfg.half_widths, cfg.points)


def initial_field(cfg: ExperimentConfig) -> Field:
    spec = _spec(cfg)
    if cfg.initial == "snapshot":
        try:
            f, _ = read_snapshot(cfg.initial_path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read initial snapshot: {exc}") from None
        if f.spec.points != spec.points or not np.allclose(f.spec.half_widths, spec.half_widths):
            raise ConfigError("initial snapshot grid does not match [grid]")
        if not f.is_physical:
            raise ConfigError("initial snapshot must be in physical state")
        return f
    preset = get_preset(cfg.preset, **cfg.params)
    return preset.initial_field(spec, cfg.seed)


def gate_plan(stepper) -> Optional[tuple]:
    """``(plan, symbol, t)`` for the exact quadratic part of a stepper, if any."""
    p = stepper.plans
    model = stepper.model
    if "splitting" in p:
        return p["quadratic"], qm_symbol(model.B, model.V), p["splitting"].t
    if "step" in p and p["step"].exactness == "exact-in-time":
        return p["step"], symbol_of_model(model), p["step"].t
    if "rotation" in p and p["rotation"].exactness == "exact-in-time":
        return p["rotation"], transport_symbol(-model.B), p["rotation"].t
    return None


def build_stepper(cfg: ExperimentConfig):
    stepper = make_stepper(cfg.model, cfg.scheme, _spec(cfg), cfg.dt, cfg.pivot)
    stepper.model = cfg.model
    return stepper


def check_gate(stepper) -> Optional[float]:
    g = gate_plan(stepper)
    if g is None:
        return None
    plan, symbol, t = g
    rep = verify_plan(plan, symbol, t)
    if not rep.relative_residual <= GATE_TOL:
        raise VerificationGateError(
            f"plan identity residual {rep.relative_residual:.3e} exceeds {GATE_TOL:g}")
    return rep.relative_residual


def run(cfg: ExperimentConfig, output: Optional[str] = None) -> RunResult:
    """Build the stepper (with the verification gate), integrate and record diagnostics.

    When ``output`` (or ``cfg.output``) is set, ``diagnostics.csv``,
    ``config.ini``, ``final.qspl`` and periodic snapshots are written there.
    """
    out_dir = output or cfg.output
    f = initial_field(cfg)
    try:
        stepper = build_stepper(cfg)
    except ConsistencyError as exc:
        raise VerificationGateError(str(exc)) from exc
    residual = check_gate(stepper)

    preset = get_preset(cfg.preset, **cfg.params) if cfg.preset else None
    exact = preset.exact if preset is not None else None
    probe = preset.probe if preset is not None else None
    names = tuple(n for n in cfg.diagnostics if n != "probe")
    columns = names + (("probe_re", "probe_im") if "probe" in cfg.diagnostics else ())
    series = DiagnosticSeries(columns)
    probe_idx = nearest_node(f.spec, probe) if probe is not None else None

    def record(field_, step):
        t = step * cfg.dt
        vals = observe(names, field_, cfg.model, exact, t)
        if probe_idx is not None and "probe" in cfg.diagnostics:
            z = field_.values[probe_idx]
            vals.update(probe_re=z.real, probe_im=z.imag)
        series.append(t, vals)

    snaps = []
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "config.ini"), "w", encoding="utf-8") as fh:
            fh.write(cfg.dump())

    stops = set(range(0, cfg.steps + 1, cfg.stride)) | {cfg.steps}
    if cfg.snapshot_every:
        stops |= set(range(0, cfg.steps + 1, cfg.snapshot_every))
    record(f, 0)
    done = 0
    for stop in sorted(stops):
        if stop == 0:
            continue
        f = stepper.advance(f, stop - done)
        done = stop
        if stop % cfg.stride == 0 or stop == cfg.steps:
            record(f, stop)
        if out_dir and cfg.snapshot_every and stop % cfg.snapshot_every == 0 and stop != cfg.steps:
            path = os.path.join(out_dir, f"snap_{stop:06d}.qspl")
            write_snapshot(path, f, stop * cfg.dt)
            snaps.append(path)
    if out_dir:
        series.to_csv(os.path.join(out_dir, "diagnostics.csv"))
        write_snapshot(os.path.join(out_dir, "final.qspl"), f, cfg.steps * cfg.dt)
    return RunResult(series, f, snaps, residual, stepper.transforms_per_step())


def period_return(series: DiagnosticSeries, period: float) -> float:
    """``max |psi(t + period) - psi(t)|`` at the probe node over recorded times."""
    t = np.asarray(series.times)
    z = series.column("probe_re") + 1j * series.column("probe_im")
    worst = 0.0
    for i, ti in enumerate(t):
        j = np.flatnonzero(np.abs(t - (ti + period)) < 1e-9 * max(1.0, period))
        if j.size:
            worst = max(worst, float(abs(z[j[0]] - z[i])))
    return worst


# ---------------------------------------------------------------- verify

@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<42s} {self.value:.3e}  (tol {self.tol:.0e})"


def _check(name, value, tol) -> Check:
    return Check(name, float(value), tol, bool(value <= tol))


def _exact_plan(preset, dt) -> Optional[tuple]:
    """``(plan, symbol, t)`` of the preset's exact quadratic plan at step ``dt``."""
    fam = preset.family
    model = preset.model
    if fam == "transport":
        fact = shear_factorize(model.M, dt, model.pivot)
        return fact.plan(), symbol_of_model(model), dt
    if fam == "kfp":
        return kfp_plan(dt), symbol_of_model(model), dt
    if fam == "fp":
        return fp_plan(dt), symbol_of_model(model), dt
    tau = model.time_scale * dt
    ts = triangular_split(qm_symbol(model.B, model.V), tau)
    return ts.plan(), qm_symbol(model.B, model.V), tau


def verify(preset_name: str, dt: Optional[float] = None, **params) -> list:
    """Identity, table and spectrum checks for a preset; returns :class:`Check` items."""
    preset = get_preset(preset_name, **params)
    checks = []
    table_dt = _table_dt(preset)
    dt = preset.dt if dt is None else float(dt)
    if dt == 0:
        checks.append(Check("identity at dt=0", 0.0, IDENTITY_TOL, True))
    else:
        plan, sym, t = _exact_plan(preset, dt)
        rep = verify_plan(plan, sym, t)
        checks.append(_check(f"plan identity (dt={dt:g})", rep.residual, IDENTITY_TOL))
    if preset.table and table_dt is not None and (dt == table_dt or dt == preset.dt):
        checks += table_checks(preset)
    if preset_name == "qm3d-periodic":
        checks += spectrum_checks(preset)
    return checks


def _table_dt(preset) -> Optional[float]:
    if preset.table == "transport3d":
        return SHEAR_3D["dt"]
    if preset.table == "transport4d":
        return SHEAR_4D["dt"]
    if preset.table in TRIANGULAR:
        return TRIANGULAR[preset.table]["dt"]
    return None


def table_checks(preset) -> list:
    name = preset.table
    if name in ("transport3d", "transport4d"):
        ref = SHEAR_3D if name == "transport3d" else SHEAR_4D
        fact = shear_factorize(preset.model.M, ref["dt"], ref["pivot"])
        comps = compare_shears(name, fact, ref)
    else:
        ref = TRIANGULAR[name]
        model = preset.model
        ts = triangular_split(qm_symbol(model.B, model.V), model.time_scale * ref["dt"])
        comps = compare_triangular(name, ts)
    return [_check(f"table {c.name} {c.entry}", c.relative, TABLE_TOL) for c in comps]


def spectrum_checks(preset) -> list:
    sym = qm_symbol(preset.model.B, preset.model.V)
    om = frequencies(sym)
    poly = characteristic_polynomial(sym, scale=math.pi / 3)
    lam = periodic_lambdas()
    return [
        _check("frequencies", float(np.max(np.abs(om - PERIODIC_FREQUENCIES))), SPECTRUM_TOL),
        _check("scaled characteristic polynomial",
               float(np.max(np.abs(poly - PERIODIC_POLYNOMIAL))), SPECTRUM_TOL),
        _check("printed cubic roots", float(np.max(np.abs(lam - PERIODIC_LAMBDAS))), 1e-13),
    ]


def verify_tables() -> list:
    """Every embedded coefficient table against a fresh computation."""
    checks = table_checks(get_preset("transport3d")) + table_checks(get_preset("transport4d"))
    for preset_name, params in TABLE_PRESETS.values():
        checks += table_checks(get_preset(preset_name, **params))
    return checks


# ---------------------------------------------------------------- plan

def _fmt_matrix(a, width=22) -> list:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return ["  ".join(f"{x:{width}.15f}" for x in row) for row in a]


def plan_report(preset_name: str, dt: Optional[float] = None, pivot: Optional[int] = None,
                **params) -> str:
    """Coefficient tables of the preset's exact plan as aligned text."""
    preset = get_preset(preset_name, **params)
    dt = preset.dt if dt is None else float(dt)
    model = preset.model
    lines = [f"preset {preset_name}  dt = {dt!r}"]
    if dt == 0:
        lines.append("dt = 0: every factor is the identity")
        return "\n".join(lines) + "\n"
    fam = preset.family
    if fam == "transport":
        fact = shear_factorize(model.M, dt, pivot if pivot is not None else model.pivot)
        lines.append(f"pivot axis {fact.pivot + 1}")
        lines.append(f"{'y_left':>10s}  " + _fmt_matrix(fact.y_left)[0])
        for k in sorted(fact.y_mid):
            lines.append(f"{'y_' + str(k + 1):>10s}  " + _fmt_matrix(fact.y_mid[k])[0])
        lines.append(f"{'y_right':>10s}  " + _fmt_matrix(fact.y_right)[0])
        plan, sym, t = fact.plan(), symbol_of_model(model), dt
    elif fam == "qm":
        tau = model.time_scale * dt
        ts = triangular_split(qm_symbol(model.B, model.V), tau)
        for key in ("A", "L", "U", "V_left", "V_right"):
            lines.append(f"{key}:")
            lines += ["    " + row for row in _fmt_matrix(getattr(ts, key))]
        lines.append(f"iterations {ts.iterations}")
        plan, sym, t = ts.plan(), qm_symbol(model.B, model.V), tau
    else:
        plan, sym, t = _exact_plan(preset, dt)
        for i, fac in enumerate(plan.factors):
            lines.append(f"[{i}] {fac.kind}" + (f" axis {fac.axis + 1}" if fac.axis >= 0 else ""))
            lines += ["    " + row for row in _fmt_matrix(np.real(fac.coeff))]
    rep = verify_plan(plan, sym, t)
    lines.append(f"matrix residual {rep.residual:.3e}  scalar discrepancy {rep.scalar_discrepancy:.3e}")
    return "\n".join(lines) + "\n"
