"""Splitting plans: elementary factors and the coefficient solvers producing them.

A :class:`SplittingPlan` lists factors left to right exactly as in the operator
product, so the rightmost factor acts first on a field.  Every elementary
factor is ``exp(-S^w)`` for a degree-two symbol ``S``; :func:`factor_symbol`
returns it and :func:`verify_plan` checks a plan against a target flow.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .symplectic import (
    QuadraticSymbol,
    SplittingRadiusError,
    log_near_identity,
    mat_exp,
    standard_symplectic,
)

FACTOR_KINDS = (
    "translation",        # exp(alpha d_j)
    "linear_phase",       # exp(i alpha x_j)
    "fourier_quadratic",  # exp(i a(grad)),  a(grad) = div(a grad)
    "quadratic_phase",    # exp(i x^T a x)
    "shear",              # exp((c . x) d_j), c_j = 0
    "gaussian",           # exp(-x^T b x),  b >= 0
    "fourier_gaussian",   # exp(div(b grad)),  b >= 0
    "scalar",             # exp(gamma)
)


class ConsistencyError(RuntimeError):
    """A freshly computed splitting failed its own matrix identity."""


@dataclass(frozen=True)
class ElementaryFactor:
    """One factor of an exact splitting.

    ``axis`` is used by ``translation``, ``linear_phase`` and ``shear`` (the
    differentiated axis); ``coeff`` is a scalar, a coefficient vector (shear)
    or an ``n x n`` matrix (quadratic kinds).
    """

    kind: str
    coeff: object
    axis: int = -1
    n: int = 0

    def __post_init__(self):
        if self.kind not in FACTOR_KINDS:
            raise ValueError(f"unknown factor kind {self.kind!r}")
        if self.kind in ("fourier_quadratic", "quadratic_phase", "gaussian", "fourier_gaussian"):
            m = np.array(self.coeff, dtype=float)
            m = 0.5 * (m + m.T)
            if self.kind in ("gaussian", "fourier_gaussian"):
                ev = np.linalg.eigvalsh(m) if m.size else np.zeros(1)
                if ev.min() < -1e-12 * max(1.0, np.abs(ev).max()):
                    raise ValueError(f"{self.kind} needs a positive semidefinite form")
            m.setflags(write=False)
            object.__setattr__(self, "coeff", m)
            object.__setattr__(self, "n", m.shape[0])
        elif self.kind == "shear":
            c = np.array(self.coeff, dtype=float)
            if not 0 <= self.axis < c.size:
                raise ValueError("shear axis out of range")
            if c[self.axis] != 0.0:
                raise ValueError("a shear cannot depend on its own axis")
            c.setflags(write=False)
            object.__setattr__(self, "coeff", c)
            object.__setattr__(self, "n", c.size)
        elif self.kind == "scalar":
            object.__setattr__(self, "coeff", complex(self.coeff))
        else:
            object.__setattr__(self, "coeff", float(self.coeff))
            if self.axis < 0 or (self.n and self.axis >= self.n):
                raise ValueError("axis out of range")

    # axes which must be in frequency / physical state when the factor is applied
    @property
    def frequency_axes(self) -> frozenset:
        if self.kind in ("translation", "shear"):
            return frozenset([self.axis])
        if self.kind in ("fourier_quadratic", "fourier_gaussian"):
            return _support(self.coeff)
        return frozenset()

    @property
    def physical_axes(self) -> frozenset:
        if self.kind == "linear_phase":
            return frozenset([self.axis])
        if self.kind == "shear":
            return frozenset(int(k) for k in np.flatnonzero(self.coeff))
        if self.kind in ("quadratic_phase", "gaussian"):
            return _support(self.coeff)
        return frozenset()

    @property
    def is_identity(self) -> bool:
        if self.kind == "scalar":
            return self.coeff == 0
        return not np.any(np.asarray(self.coeff))


def _support(m: np.ndarray) -> frozenset:
    rows = np.flatnonzero(np.any(m != 0, axis=0) | np.any(m != 0, axis=1))
    return frozenset(int(k) for k in rows)


@dataclass(frozen=True)
class PointwiseStage:
    """Non-quadratic phase ``exp(-i dt f(x, |psi|^2))`` inside a composite step."""

    func: Callable
    dt: float
    label: str = "nonlinear"

    frequency_axes = frozenset()

    @property
    def physical_axes(self):
        return None  # every axis


@dataclass
class SplittingPlan:
    factors: list
    provenance: str = ""
    exactness: str = "exact-in-time"
    t: float = 0.0

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    def __add__(self, other: "SplittingPlan") -> "SplittingPlan":
        ex = "exact-in-time" if (self.exactness == other.exactness == "exact-in-time") else "order-2"
        return SplittingPlan(list(self.factors) + list(other.factors),
                             f"{self.provenance}+{other.provenance}", ex, self.t)

    @property
    def shear_count(self) -> int:
        return sum(1 for f in self.factors if isinstance(f, ElementaryFactor) and f.kind == "shear")

    @property
    def is_quadratic(self) -> bool:
        return all(isinstance(f, ElementaryFactor) for f in self.factors)


def _dims(plan: SplittingPlan) -> int:
    for f in plan.factors:
        if isinstance(f, ElementaryFactor) and f.n:
            return f.n
    raise ValueError("cannot infer dimension of the plan")


def factor_symbol(f: ElementaryFactor, n: Optional[int] = None) -> QuadraticSymbol:
    """Symbol ``S`` with ``f = exp(-S^w)`` (``xi`` stands for ``-i d``)."""
    n = n or f.n
    q = np.zeros((2 * n, 2 * n), dtype=complex)
    y = np.zeros(2 * n, dtype=complex)
    c = 0.0
    k = f.kind
    if k == "translation":
        y[n + f.axis] = -1j * f.coeff
    elif k == "linear_phase":
        y[f.axis] = -1j * f.coeff
    elif k == "fourier_quadratic":
        q[n:, n:] = 1j * f.coeff
    elif k == "quadratic_phase":
        q[:n, :n] = -1j * f.coeff
    elif k == "shear":
        q[:n, n + f.axis] = -0.5j * f.coeff
        q[n + f.axis, :n] = -0.5j * f.coeff
    elif k == "gaussian":
        q[:n, :n] = f.coeff
    elif k == "fourier_gaussian":
        q[n:, n:] = f.coeff
    elif k == "scalar":
        c = -f.coeff
    return QuadraticSymbol(q, y, c)


def _affine_flow(p: QuadraticSymbol, t: float) -> np.ndarray:
    """Flow of ``X' = -i J grad p`` on the augmented space ``(X, 1)``."""
    n2 = 2 * p.n
    j = standard_symplectic(p.n)
    gen = np.zeros((n2 + 1, n2 + 1), dtype=complex)
    gen[:n2, :n2] = -2j * (j @ p.Q)
    gen[:n2, n2] = -1j * (j @ p.Y)
    return mat_exp(t * gen)


@dataclass
class VerificationReport:
    residual: float
    scalar_discrepancy: float
    flow: np.ndarray
    product: np.ndarray

    @property
    def relative_residual(self) -> float:
        return self.residual / max(1.0, float(np.max(np.abs(self.flow))))


def verify_plan(plan: SplittingPlan, target: QuadraticSymbol, t: float) -> VerificationReport:
    """Compare the product of factor flows with the flow of ``target`` over ``t``."""
    n = target.n
    prod = np.eye(2 * n + 1, dtype=complex)
    gamma = 0.0
    for f in plan.factors:
        if not isinstance(f, ElementaryFactor):
            raise ValueError("plan contains a non-quadratic stage")
        s = factor_symbol(f, n)
        prod = prod @ _affine_flow(s, 1.0)
        gamma += -s.c
    flow = _affine_flow(target, t)
    res = float(np.max(np.abs(prod - flow)))
    disc = float(abs(gamma - (-t * target.c)))
    return VerificationReport(res, disc, flow[:2 * n, :2 * n], prod[:2 * n, :2 * n])


# ---------------------------------------------------------------- shears

@dataclass
class ShearFactorization:
    """``exp(tM) = S_r S_{k_last} ... S_{k_first} S_l`` with ``S = I + t e_s y^T``.

    At the operator level this is
    ``exp(t Mx.grad) = exp(t y_l.x d_i) prod_k exp(t y_k.x d_k) exp(t y_r.x d_i)``
    with ``k`` ascending.
    """

    n: int
    pivot: int
    t: float
    y_left: np.ndarray
    y_right: np.ndarray
    y_mid: dict
    residual: float = 0.0
    M: np.ndarray = None

    def shear_matrices(self) -> list:
        """Pull-back matrices in operator order (left, middle..., right)."""
        out = [_shear_matrix(self.n, self.pivot, self.t * self.y_left)]
        for k in sorted(self.y_mid):
            out.append(_shear_matrix(self.n, k, self.t * self.y_mid[k]))
        out.append(_shear_matrix(self.n, self.pivot, self.t * self.y_right))
        return out

    def product(self) -> np.ndarray:
        """Pull-back matrix ``S_r ... S_l``; equals ``exp(tM)``."""
        p = np.eye(self.n)
        for s in self.shear_matrices():
            p = s @ p
        return p

    def plan(self) -> SplittingPlan:
        fs = [ElementaryFactor("shear", self.t * self.y_left, self.pivot)]
        for k in sorted(self.y_mid):
            fs.append(ElementaryFactor("shear", self.t * self.y_mid[k], k))
        fs.append(ElementaryFactor("shear", self.t * self.y_right, self.pivot))
        return SplittingPlan([f for f in fs if not f.is_identity] or fs[:1],
                             "shear-factorization", "exact-in-time", self.t)


def _shear_matrix(n, axis, c):
    s = np.eye(n)
    s[axis] += c
    return s


def admissible_pivots(m) -> list:
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    return [i for i in range(n) if all(m[j, i] != 0 for j in range(n) if j != i)]


def _pack_layout(n, pivot):
    slots = [pivot] + [k for k in range(n) if k != pivot] + [pivot]
    free = [[j for j in range(n) if j != s] for s in slots]
    return slots, free


def _unpack(z, n, pivot):
    slots, free = _pack_layout(n, pivot)
    ys = []
    p = 0
    for idx in free:
        y = np.zeros(n)
        y[idx] = z[p:p + n - 1]
        p += n - 1
        ys.append(y)
    return slots, ys


def _shear_product(z, n, pivot, t):
    slots, ys = _unpack(z, n, pivot)
    p = np.eye(n)
    # operator order l, mid..., r acts on x as S_r ... S_l
    for s, y in zip(slots, ys):
        p = _shear_matrix(n, s, t * y) @ p
    return p


def _initial_guess(m, pivot):
    n = m.shape[0]
    slots, free = _pack_layout(n, pivot)
    z = []
    for pos, (s, idx) in enumerate(zip(slots, free)):
        row = m[s].copy()
        row[s] = 0.0
        if pos in (0, len(slots) - 1):
            row = 0.5 * row
        z.extend(row[idx])
    return np.array(z)


def _newton(m, t, pivot, z0, tol, max_iter=60, h=1e-7):
    """Damped Newton with a finite-difference Jacobian and step halving."""
    n = m.shape[0]
    target = mat_exp(t * m)
    scale = max(1.0, float(np.max(np.abs(target))))

    def resid(z):
        return (_shear_product(z, n, pivot, t) - target).ravel()

    z = z0.copy()
    r = resid(z)
    best = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        if best <= tol * scale:
            break
        jac = np.empty((r.size, z.size))
        for q in range(z.size):
            dz = z.copy()
            dz[q] += h
            jac[:, q] = (resid(dz) - r) / h
        step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        lam = 1.0
        while lam >= 1e-4:
            z_new = z + lam * step
            r_new = resid(z_new)
            err = float(np.max(np.abs(r_new)))
            if np.isfinite(err) and err < best:
                break
            lam *= 0.5
        else:
            break
        z, r, best = z_new, r_new, err
    return (z, best) if best <= 1e-12 * scale else (None, best)


def shear_factorize(m, t: float, pivot: Optional[int] = None, tol: float = 1e-15) -> ShearFactorization:
    """Factor ``exp(tM)`` into ``n + 1`` shears around a pivot axis.

    Newton iteration on the ``n^2 - 1`` free shear coefficients with a
    finite-difference Jacobian.  When Newton fails at ``t`` the solve is
    continued from ``t/2`` (recursively) and the result used as a starting point.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("M must be square")
    if np.any(np.diag(m) != 0):
        raise ValueError("M must have a zero diagonal")
    if n == 1 or not np.any(m):
        piv = 0 if pivot is None else pivot
        zero = np.zeros(n)
        mid = {k: zero.copy() for k in range(n) if k != piv}
        return ShearFactorization(n, piv, float(t), zero.copy(), zero.copy(), mid, 0.0, m)
    piv_ok = admissible_pivots(m)
    if pivot is None:
        if not piv_ok:
            raise ValueError("no pivot column with all off-diagonal entries nonzero")
        pivot = piv_ok[0]
    elif pivot not in piv_ok:
        raise ValueError(f"pivot {pivot} has a zero off-diagonal entry in its column")

    def solve(tt, depth):
        z, _ = _newton(m, tt, pivot, _initial_guess(m, pivot), tol)
        if z is not None:
            return z
        if depth >= 12:
            raise SplittingRadiusError("t beyond factorization radius")
        zh = solve(tt / 2, depth + 1)
        z, _ = _newton(m, tt, pivot, zh, tol)
        if z is None:
            raise SplittingRadiusError("t beyond factorization radius")
        return z

    z = solve(float(t), 0)
    slots, ys = _unpack(z, n, pivot)
    mid = {s: y for s, y in zip(slots[1:-1], ys[1:-1])}
    res = float(np.max(np.abs(_shear_product(z, n, pivot, t) - mat_exp(t * m))))
    return ShearFactorization(n, pivot, float(t), ys[0], ys[-1], mid, res, m)


def esr_transport_plan(m, t: float, pivot: Optional[int] = None) -> SplittingPlan:
    """Exact plan for ``exp(t M x.grad)`` built from the shear factorization."""
    return shear_factorize(m, t, pivot).plan()


def strang_transport_plan(m, t: float) -> SplittingPlan:
    """Directional Strang splitting of ``exp(t M x.grad)`` (``2n - 1`` shears)."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    half = [ElementaryFactor("shear", 0.5 * t * m[j], j) for j in range(n - 1)]
    mid = [ElementaryFactor("shear", t * m[n - 1], n - 1)]
    return SplittingPlan(half + mid + half[::-1], "strang-directional", "order-2", t)


# ---------------------------------------------------------------- kinetic plans

def kfp_matrix(t: float) -> np.ndarray:
    th, sh = np.tanh(t), np.sinh(t)
    return 0.5 * np.array([[0.5 * (t - th * (1 - sh ** 2)), sh ** 2],
                           [sh ** 2, np.sinh(2 * t)]])


def kfp_plan(t: float) -> SplittingPlan:
    """Exact splitting of ``exp(-t(v^2 - d_v^2 + v d_x))`` on ``(x, v)``."""
    if not t > 0:
        raise ValueError("t must be positive")
    th = np.tanh(t)
    a = kfp_matrix(t)
    g = ElementaryFactor("gaussian", np.diag([0.0, 0.5 * th]))
    fs = [g, ElementaryFactor("fourier_gaussian", a),
          ElementaryFactor("shear", [0.0, -th], 0), g]
    return SplittingPlan(fs, "kfp-closed-form", "exact-in-time", t)


def fp_coefficients(t: float) -> tuple:
    """``(alpha_t, beta_t, A_t)`` of the Fokker-Planck splitting."""
    alpha = 0.5 * np.sqrt((1 - np.exp(-t)) * np.exp(-t))
    beta = 0.5 * np.sqrt(np.expm1(t))
    s2 = np.sinh(t / 2) ** 2
    a = 0.5 * np.array([[np.exp(2 * t) + 2 * t + 3 - 4 * np.exp(t), -4 * s2],
                        [-4 * s2, -np.expm1(-2 * t)]])
    return alpha, beta, a


def fp_plan(t: float) -> SplittingPlan:
    """Exact splitting of ``exp(-t(v d_x - d_v^2 - d_v v))`` on ``(x, v)``."""
    if not t > 0:
        raise ValueError("t must be positive")
    alpha, beta, a = fp_coefficients(t)
    evv = np.diag([0.0, 1.0])
    fs = [ElementaryFactor("scalar", t / 2),
          ElementaryFactor("shear", [0.0, -np.expm1(t)], 0),
          ElementaryFactor("fourier_gaussian", a),
          ElementaryFactor("fourier_quadratic", alpha * evv),
          ElementaryFactor("quadratic_phase", -beta * evv),
          ElementaryFactor("fourier_quadratic", -beta * evv),
          ElementaryFactor("quadratic_phase", alpha * evv)]
    return SplittingPlan(fs, "fp-closed-form", "exact-in-time", t)


def strang_kfp_plan(t: float) -> SplittingPlan:
    """Strang splitting of the KFP generator into ``v^2``, ``d_v^2`` and ``v d_x`` flows."""
    evv = np.diag([0.0, 1.0])
    g = ElementaryFactor("gaussian", 0.5 * t * evv)
    d = ElementaryFactor("fourier_gaussian", 0.5 * t * evv)
    s = ElementaryFactor("shear", [0.0, -t], 0)
    return SplittingPlan([g, d, s, d, g], "strang-kfp", "order-2", t)


# ---------------------------------------------------------------- triangular splitting

@dataclass
class IterationState:
    k: int
    A: np.ndarray
    L: np.ndarray
    U: np.ndarray
    Vm: np.ndarray
    D: np.ndarray
    residual: float


@dataclass
class TriangularSplitting:
    """Coefficients of
    ``exp(-t p^w) = e^{-i t x.Vl x} prod_j e^{-t (Ux)_j d_j} e^{i t div(A grad)} prod_j e^{-t (Lx)_j d_j} e^{-i t x.Vr x}``.
    """

    n: int
    t: float
    A: np.ndarray
    L: np.ndarray
    U: np.ndarray
    V_left: np.ndarray
    V_right: np.ndarray
    iterations: int = 0
    history: list = field(default_factory=list)
    residual: float = 0.0

    def plan(self) -> SplittingPlan:
        return triangular_plan(self)


def triangular_plan(ts: TriangularSplitting) -> SplittingPlan:
    n, t = ts.n, ts.t
    fs = [ElementaryFactor("quadratic_phase", -t * ts.V_left)]
    for j in range(n - 1):
        fs.append(ElementaryFactor("shear", -t * ts.U[j], j))
    fs.append(ElementaryFactor("fourier_quadratic", t * ts.A))
    for j in range(1, n):
        fs.append(ElementaryFactor("shear", -t * ts.L[j], j))
    fs.append(ElementaryFactor("quadratic_phase", -t * ts.V_right))
    return SplittingPlan(fs, "triangular", "exact-in-time", t)


def qm_parts(p: QuadraticSymbol) -> tuple:
    """Recover ``(B, V)`` from ``p = i(|xi|^2/2 + (Bx).xi + x^T V x)``."""
    n = p.n
    h = p.Q / 1j
    if np.max(np.abs(h.imag)) > 1e-12 * max(1.0, np.max(np.abs(h))):
        raise ValueError("symbol is not of Schrodinger type")
    h = h.real
    if np.max(np.abs(h[n:, n:] - 0.5 * np.eye(n))) > 1e-14:
        raise ValueError("kinetic block must be |xi|^2/2")
    b = 2.0 * h[n:, :n]
    v = h[:n, :n]
    if np.max(np.abs(b + b.T)) > 1e-12 * max(1.0, np.max(np.abs(b))):
        raise ValueError("B must be skew-symmetric")
    return b, v


def _block_shear(n, row, t, z):
    g = np.zeros((2 * n, 2 * n))
    g[:n, :n] = t * row
    g[n:, n:] = -t * row.T
    return g


def triangular_iteration(b, v, t: float, max_iter: int = 100, tol: float = 1e-14):
    """Fixed-point iteration for the triangular splitting; yields IterationState."""
    n = b.shape[0]
    eye = np.eye(n)
    z = np.zeros((n, n))
    jm = standard_symplectic(n)
    l0, u0 = np.tril(b, -1), np.triu(b, 1)
    a, l, u, vm = 0.5 * eye, l0.copy(), u0.copy(), v.copy()
    for k in range(max_iter):
        gens = []
        for j in range(n - 1):
            row = np.zeros((n, n))
            row[j] = u[j]
            gens.append(_block_shear(n, row, t, z))
        gens.append(np.block([[z, 2 * t * a], [z, z]]))
        for j in range(1, n):
            row = np.zeros((n, n))
            row[j] = l[j]
            gens.append(_block_shear(n, row, t, z))
        gens.append(np.block([[z, z], [-2 * t * vm, z]]))
        # each factor is I + G with G nilpotent; accumulate P - I exactly
        e = np.zeros((2 * n, 2 * n))
        for g in gens:
            e = e + g + e @ g
        mlog = -(jm @ log_near_identity(e)).real / t
        vt = 0.5 * mlog[:n, :n]
        off = mlog[n:, :n]
        at = 0.5 * mlog[n:, n:]
        d = np.diag(np.diag(off)) / t
        lt, ut = np.tril(off, -1), np.triu(off, 1)
        a_new = a + 0.5 * eye - at
        l_new = l + l0 - lt
        u_new = u + u0 - ut
        v_new = vm + v - vt + 0.5 * t * (d @ b - b @ d) + 0.5 * t * t * d @ d
        change = max(np.max(np.abs(a_new - a)), np.max(np.abs(l_new - l)),
                     np.max(np.abs(u_new - u)), np.max(np.abs(v_new - vm)))
        a, l, u, vm = a_new, l_new, u_new, v_new
        yield IterationState(k + 1, a, l, u, vm, d, float(change))


def triangular_split(p: QuadraticSymbol, t: float, max_iter: int = 100,
                     tol: float = 1e-14) -> TriangularSplitting:
    """Coefficients of the triangular exact splitting of ``exp(-t p^w)``.

    The iteration stops once the max-norm change drops below ``tol`` relative
    to the size of the iterates (absolute for iterates of unit size).
    """
    b, v = qm_parts(p)
    n = b.shape[0]
    if t == 0:
        z = np.zeros((n, n))
        return TriangularSplitting(n, 0.0, 0.5 * np.eye(n), np.tril(b, -1), np.triu(b, 1),
                                   z.copy(), v.copy(), 0, [], 0.0)
    history = []
    state = None
    stall = 0
    try:
        for state in triangular_iteration(b, v, t, max_iter):
            history.append(state.residual)
            size = max(1.0, np.max(np.abs(state.Vm)), np.max(np.abs(state.L)),
                       np.max(np.abs(state.U)))
            if not np.isfinite(state.residual) or state.residual > 1e6 * size:
                raise SplittingRadiusError("step beyond splitting radius")
            if state.residual < tol * size:
                break
            if len(history) > 3 and state.residual >= min(history[:-1]) and state.residual < 1e-11 * size:
                stall += 1
                if stall >= 5:
                    break
        else:
            if state.residual > 1e-11 * size:
                raise SplittingRadiusError("step beyond splitting radius")
    except SplittingRadiusError as exc:
        raise SplittingRadiusError("Δt beyond splitting radius; reduce step") from exc
    ts = TriangularSplitting(n, float(t), state.A, state.L, state.U,
                             -0.5 * state.D, state.Vm + 0.5 * state.D,
                             state.k, history)
    rep = verify_plan(ts.plan(), p, t)
    ts.residual = rep.residual
    if rep.relative_residual > 1e-10:
        raise ConsistencyError(f"triangular splitting failed its identity (residual {rep.residual:.3e})")
    return ts


# ---------------------------------------------------------------- Schrodinger reference plans

def quadratic_phase_factor(v, dt: float) -> ElementaryFactor:
    """``exp(-i dt x^T V x)``."""
    return ElementaryFactor("quadratic_phase", -dt * np.asarray(v, dtype=float))


def kinetic_factor(n: int, dt: float, axes: Optional[Sequence[int]] = None) -> ElementaryFactor:
    """``exp(i dt Delta/2)`` restricted to ``axes`` (all by default)."""
    a = np.zeros((n, n))
    for j in (range(n) if axes is None else axes):
        a[j, j] = 0.5 * dt
    return ElementaryFactor("fourier_quadratic", a)


def rotation_plan(b, dt: float, exact: bool, pivot: Optional[int] = None) -> SplittingPlan:
    """``exp(-dt (Bx).grad)`` either exactly (shears) or by directional Strang."""
    m = -np.asarray(b, dtype=float)
    if exact:
        return esr_transport_plan(m, dt, pivot)
    return strang_transport_plan(m, dt)


def bw_substeps(b, dt: float) -> tuple:
    """2D sub-flows ``X`` and ``Y`` (each a kinetic part along one axis plus its shear)."""
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    x = [kinetic_factor(n, dt, [0]), ElementaryFactor("shear", -dt * b[0], 0)]
    y = [kinetic_factor(n, dt, [1]), ElementaryFactor("shear", -dt * b[1], 1)]
    return x, y
