"""Apply splitting plans to fields with as few partial transforms as possible.

Factors are lowered to multiplier passes on the mixed physical/frequency grid.
A factor only constrains the axes it touches (a shear along ``j`` needs ``j``
in frequency and its source axes in physical state), so transforms are issued
lazily: an axis is transformed only when the next factor requires it in the
other state.  This is what brings the triangular Schrodinger step down to
``2n`` transforms.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .grid import (
    FREQUENCY,
    PHYSICAL,
    Field,
    GridSpec,
    broadcast_nodes,
    transform_inplace,
)
from .plans import (
    ElementaryFactor,
    PointwiseStage,
    SplittingPlan,
    bw_substeps,
    kinetic_factor,
    quadratic_phase_factor,
    rotation_plan,
    triangular_plan,
    triangular_split,
)
from .symplectic import qm_symbol

_EXP_FLOOR = -700.0
_FULL_TABLE_LIMIT = 1 << 21

_UNIMODULAR = ("translation", "linear_phase", "fourier_quadratic", "quadratic_phase", "shear")


def _is_unimodular(op) -> bool:
    if isinstance(op, PointwiseStage):
        return True
    if op.kind == "scalar":
        return np.real(op.coeff) == 0
    return op.kind in _UNIMODULAR


def application_order(plan: SplittingPlan) -> list:
    """Factors in the order they act on a field (rightmost first)."""
    return list(reversed(plan.factors))


# ---------------------------------------------------------------- schedule

@dataclass
class Pass:
    ops: list
    state: tuple

    @property
    def dynamic(self) -> list:
        return [op for op in self.ops if isinstance(op, PointwiseStage)]

    @property
    def static(self) -> list:
        return [op for op in self.ops if not isinstance(op, PointwiseStage)]


@dataclass
class Schedule:
    """Sequence of ``("forward"|"inverse", axis)`` and :class:`Pass` entries."""

    entries: list
    start: tuple
    end: tuple
    naive_transforms: int = 0

    @property
    def transforms(self) -> int:
        return sum(1 for e in self.entries if isinstance(e, tuple))

    @property
    def passes(self) -> int:
        return sum(1 for e in self.entries if isinstance(e, Pass))

    @property
    def physical_passes(self) -> int:
        return sum(1 for e in self.entries
                   if isinstance(e, Pass) and all(s == PHYSICAL for s in e.state))

    def steps(self) -> list:
        out = []
        for e in self.entries:
            if isinstance(e, tuple):
                out.append(f"{'F' if e[0] == 'forward' else 'F^-1'}_{e[1] + 1}")
            else:
                out.append("x".join(_op_label(op) for op in e.ops))
        return out


def _op_label(op) -> str:
    if isinstance(op, PointwiseStage):
        return op.label
    if op.kind == "shear":
        return f"shear_{op.axis + 1}"
    return op.kind


def _requirements(op, n):
    f = set(op.frequency_axes)
    p = op.physical_axes
    p = set(range(n)) if p is None else set(p)
    if f & p:
        raise ValueError(f"factor {_op_label(op)} needs an axis in both states")
    return f, p


def schedule(ops, n: int, start=None, end=None, fuse: bool = True) -> Schedule:
    """Lower ops (in application order) into transforms and multiplier passes.

    ``ops`` may be a :class:`SplittingPlan` (converted to application order).
    With ``fuse`` consecutive ops sharing a representation are merged into one
    multiplier pass; otherwise each op is its own pass.
    """
    if isinstance(ops, SplittingPlan):
        ops = application_order(ops)
    start = tuple(start) if start is not None else (PHYSICAL,) * n
    end = tuple(end) if end is not None else (PHYSICAL,) * n
    state = list(start)
    entries = []
    current: Optional[Pass] = None
    naive = 0
    for op in ops:
        if isinstance(op, ElementaryFactor) and op.is_identity:
            continue
        need_f, need_p = _requirements(op, n)
        naive += 2 * len(need_f)
        moves = [("forward", j) for j in sorted(need_f) if state[j] == PHYSICAL]
        moves += [("inverse", j) for j in sorted(need_p) if state[j] == FREQUENCY]
        if moves:
            current = None
            for d, j in moves:
                entries.append((d, j))
                state[j] = FREQUENCY if d == "forward" else PHYSICAL
        joinable = (
            fuse and current is not None
            and (not isinstance(op, PointwiseStage) or all(_is_unimodular(o) for o in current.static))
        )
        if joinable:
            current.ops.append(op)
        else:
            current = Pass([op], tuple(state))
            entries.append(current)
    for j in range(n):
        if state[j] != end[j]:
            entries.append(("forward" if end[j] == FREQUENCY else "inverse", j))
            state[j] = end[j]
    return Schedule(entries, start, end, naive)


# ---------------------------------------------------------------- multipliers

def _coords(spec: GridSpec, state, axes):
    return {j: broadcast_nodes(spec, j, state[j]) for j in axes}


def _quadratic_exponent(spec, state, m, coeff):
    axes = sorted(set(np.flatnonzero(np.any(m != 0, axis=0))))
    c = _coords(spec, state, axes)
    terms = []
    for a in axes:
        for b in axes:
            if b < a or m[a, b] == 0:
                continue
            w = m[a, b] if a == b else 2 * m[a, b]
            terms.append(coeff * w * c[a] * c[b])
    return terms


def _exponent_terms(op: ElementaryFactor, spec: GridSpec, state) -> list:
    """Broadcastable arrays whose sum is the log of the multiplier."""
    k = op.kind
    if k == "scalar":
        return [np.asarray(op.coeff)]
    if k == "translation":
        return [1j * op.coeff * broadcast_nodes(spec, op.axis, FREQUENCY)]
    if k == "linear_phase":
        return [1j * op.coeff * broadcast_nodes(spec, op.axis, PHYSICAL)]
    if k == "shear":
        w = broadcast_nodes(spec, op.axis, FREQUENCY)
        return [1j * ck * broadcast_nodes(spec, q, PHYSICAL) * w
                for q, ck in enumerate(op.coeff) if ck != 0]
    if k == "fourier_quadratic":
        return _quadratic_exponent(spec, state, op.coeff, -1j)
    if k == "quadratic_phase":
        return _quadratic_exponent(spec, state, op.coeff, 1j)
    if k in ("gaussian", "fourier_gaussian"):
        return _quadratic_exponent(spec, state, op.coeff, -1.0)
    raise ValueError(k)


def _safe_exp(z):
    z = np.asarray(z)
    if np.iscomplexobj(z):
        low = z.real < _EXP_FLOOR
    else:
        low = z < _EXP_FLOOR
    if np.any(low):
        warnings.warn("multiplier exponent below -700 saturated to 0", RuntimeWarning, stacklevel=3)
        out = np.exp(np.where(low, 0.0, z))
        out[np.broadcast_to(low, out.shape)] = 0.0
        return out
    return np.exp(z)


class MultiplierCache:
    """Precomputed multiplier tables keyed by (ops, representation)."""

    def __init__(self, spec: GridSpec):
        self.spec = spec
        self._tables = {}
        self._keep = []

    def tables(self, ops, state) -> list:
        key = (tuple(id(o) for o in ops), tuple(state))
        hit = self._tables.get(key)
        if hit is not None:
            return hit
        self._keep.append(tuple(ops))
        terms = []
        for op in ops:
            terms.extend(_exponent_terms(op, self.spec, state))
        if not terms:
            out = []
        else:
            shape = np.broadcast_shapes(*[np.shape(t) for t in terms])
            if int(np.prod(shape)) <= _FULL_TABLE_LIMIT:
                total = sum(terms[1:], terms[0])
                out = [_safe_exp(total)]
            else:
                out = [_safe_exp(t) for t in terms]
        self._tables[key] = out
        return out


# ---------------------------------------------------------------- execution

class Executor:
    """Runs schedules on raw storage-order arrays for one grid."""

    def __init__(self, spec: GridSpec):
        self.spec = spec
        self.cache = MultiplierCache(spec)
        self._phys = [broadcast_nodes(spec, j, PHYSICAL) for j in range(spec.dims)]

    def run(self, values: np.ndarray, sched: Schedule) -> np.ndarray:
        v = values
        for e in sched.entries:
            if isinstance(e, tuple):
                v = transform_inplace(v, self.spec, e[1], e[0])
                continue
            dyn = e.dynamic
            if dyn:
                rho = np.abs(v) ** 2
                phase = sum(st.dt * st.func(self._phys, rho) for st in dyn)
            if v is values:
                v = v.astype(np.complex128, copy=True)
            for tab in self.cache.tables(e.static, e.state):
                v *= tab
            if dyn:
                v *= np.exp(-1j * phase)
        return v


def apply_plan(f: Field, plan: SplittingPlan, executor: Optional[Executor] = None,
               fuse: bool = True) -> Field:
    """Apply a plan to a physical-state field and return the physical result."""
    if not f.is_physical:
        raise ValueError("apply_plan expects a field in physical state")
    ex = executor or Executor(f.spec)
    sched = schedule(plan, f.spec.dims, fuse=fuse)
    return Field(f.spec, ex.run(f.values.copy(), sched))


def esqm_step(psi: Field, plan: SplittingPlan, nonlinearity: Optional[Callable], dt: float,
              executor: Optional[Executor] = None) -> Field:
    """One step ``N(dt/2) o plan o N(dt/2)`` with ``N`` the pointwise nonlinear phase."""
    ops = _esqm_ops(plan, nonlinearity, dt)
    ex = executor or Executor(psi.spec)
    return Field(psi.spec, ex.run(psi.values.copy(), schedule(ops, psi.spec.dims, fuse=False)))


def _esqm_ops(plan, nonlinearity, dt):
    core = application_order(plan)
    if nonlinearity is None:
        return core
    half = PointwiseStage(nonlinearity, 0.5 * dt)
    return [half] + core + [half]


def fused_esqm_run(psi0: Field, plan: SplittingPlan, nonlinearity: Optional[Callable], dt: float,
                   steps: int, executor: Optional[Executor] = None) -> Field:
    """``steps`` ESQM steps with the phase multipliers at step boundaries merged."""
    ops = _esqm_ops(plan, nonlinearity, dt) * int(steps)
    ex = executor or Executor(psi0.spec)
    return Field(psi0.spec, ex.run(psi0.values.copy(), schedule(ops, psi0.spec.dims, fuse=True)))


# ---------------------------------------------------------------- steppers

@dataclass
class Stepper:
    """Time stepper: a fixed op sequence (application order) repeated each step."""

    name: str
    spec: GridSpec
    step_ops: list
    dt: float
    exactness: str = "order-2"
    plans: dict = field(default_factory=dict)
    fuse: bool = True

    def __post_init__(self):
        self.executor = Executor(self.spec)
        self._schedules = {}

    def schedule_for(self, steps: int) -> Schedule:
        s = self._schedules.get(steps)
        if s is None:
            s = schedule(self.step_ops * steps, self.spec.dims, fuse=self.fuse)
            self._schedules[steps] = s
        return s

    def advance(self, f: Field, steps: int = 1) -> Field:
        if steps == 0:
            return f.copy()
        vals = self.executor.run(f.values.copy(), self.schedule_for(steps))
        return Field(self.spec, vals)

    def transforms_per_step(self) -> int:
        """Transforms of one interior step in a long fused run."""
        return self.schedule_for(3).transforms - self.schedule_for(2).transforms

    def passes_per_step(self) -> int:
        return self.schedule_for(3).passes - self.schedule_for(2).passes

    @property
    def shears_per_step(self) -> int:
        return sum(1 for op in self.step_ops
                   if isinstance(op, ElementaryFactor) and op.kind == "shear")


def plan_stepper(name: str, spec: GridSpec, plan: SplittingPlan, dt: float) -> Stepper:
    return Stepper(name, spec, application_order(plan), dt, plan.exactness, {"step": plan})


def schrodinger_stepper(scheme: str, spec: GridSpec, b, v, dt: float,
                        nonlinearity: Optional[Callable] = None, time_scale: float = 1.0,
                        pivot: Optional[int] = None, splitting=None) -> Stepper:
    """Composite steppers for ``i d_t psi = -Delta psi/2 - i(Bx).grad psi + V psi + f psi``.

    ``time_scale`` maps one physical step ``dt`` to model time ``time_scale*dt``.
    """
    b = np.asarray(b, dtype=float)
    v = np.asarray(v, dtype=float)
    n = b.shape[0]
    tau = time_scale * dt

    def nl(scale):
        return [PointwiseStage(nonlinearity, scale)] if nonlinearity is not None else []

    if scheme == "esqm":
        ts = splitting if splitting is not None else triangular_split(qm_symbol(b, v), tau)
        plan = triangular_plan(ts)
        ops = nl(0.5 * tau) + application_order(plan) + nl(0.5 * tau)
        return Stepper("esqm", spec, ops, dt, "exact-in-time" if nonlinearity is None else "order-2",
                       {"quadratic": plan, "splitting": ts})
    if scheme in ("esr", "strang"):
        rot = rotation_plan(b, tau, exact=(scheme == "esr"), pivot=pivot)
        half_v = [quadratic_phase_factor(v, 0.5 * tau)] + nl(0.5 * tau)
        kin = kinetic_factor(n, 0.5 * tau)
        ops = half_v + [kin] + application_order(rot) + [kin] + half_v[::-1]
        return Stepper(scheme, spec, ops, dt, "order-2", {"rotation": rot})
    if scheme == "bw":
        if n != 2:
            raise ValueError("bw is defined for two-dimensional models")
        x_half, y_half = bw_substeps(b, 0.5 * tau)
        full_n = [quadratic_phase_factor(v, tau)] + nl(tau)
        ops = y_half[::-1] + x_half[::-1] + full_n + x_half[::-1] + y_half[::-1]
        return Stepper("bw", spec, ops, dt, "order-2", {})
    raise ValueError(f"unknown scheme {scheme!r} for a Schrodinger model")


SCHEMES = {
    "transport": ("esr", "strang"),
    "kfp": ("exact", "strang"),
    "fp": ("exact",),
    "qm": ("esqm", "esr", "strang", "bw"),
}


def make_stepper(model, scheme: str, spec: GridSpec, dt: float,
                 pivot: Optional[int] = None) -> Stepper:
    """Stepper for any supported model family (see :data:`SCHEMES`)."""
    from .plans import esr_transport_plan, fp_plan, kfp_plan, strang_kfp_plan, strang_transport_plan

    family = model.family
    allowed = SCHEMES.get(family)
    if allowed is None:
        raise ValueError(f"unknown model family {family!r}")
    if scheme not in allowed:
        raise ValueError(f"scheme {scheme!r} is not available for {family} models; choose from {allowed}")
    if spec.dims != model.dims:
        raise ValueError(f"grid has {spec.dims} axes but the model has {model.dims}")
    pivot = pivot if pivot is not None else getattr(model, "pivot", None)
    if family == "transport":
        if scheme == "esr":
            plan = esr_transport_plan(model.M, dt, pivot)
        else:
            plan = strang_transport_plan(model.M, dt)
        return plan_stepper(scheme, spec, plan, dt)
    if family == "kfp":
        plan = kfp_plan(dt) if scheme == "exact" else strang_kfp_plan(dt)
        return plan_stepper(scheme, spec, plan, dt)
    if family == "fp":
        return plan_stepper(scheme, spec, fp_plan(dt), dt)
    return schrodinger_stepper(scheme, spec, model.B, model.V, dt, model.nonlinearity,
                               model.time_scale, pivot)


_REFERENCE = {"strang-directional": "strang", "esr-composite": "esr", "bw": "bw"}


def reference_stepper(name: str, model, spec: GridSpec, dt: float) -> Stepper:
    """Second-order comparison steppers by their descriptive names."""
    try:
        scheme = _REFERENCE[name]
    except KeyError:
        raise ValueError(f"unknown reference scheme {name!r}; choose from {sorted(_REFERENCE)}") from None
    return make_stepper(model, scheme, spec, dt)
