"""Model descriptions, initial data and the preset catalog."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .grid import Field, GridSpec
from .symplectic import (
    QuadraticSymbol,
    fp_symbol,
    kfp_symbol,
    mat_exp,
    qm_symbol,
    transport_symbol,
)


# ---------------------------------------------------------------- models

@dataclass
class TransportModel:
    """``d_t f = (M x) . grad f`` with exact solution ``f0(exp(tM) x)``."""

    M: np.ndarray
    pivot: Optional[int] = None
    family: str = "transport"

    def __post_init__(self):
        self.M = np.asarray(self.M, dtype=float)

    @property
    def dims(self) -> int:
        return self.M.shape[0]

    def symbol(self) -> QuadraticSymbol:
        return transport_symbol(self.M)

    def pulled_back(self, f0: Callable, t: float) -> Callable:
        e = mat_exp(t * self.M)

        def g(*x):
            y = [sum(e[i, k] * x[k] for k in range(len(x))) for i in range(len(x))]
            return f0(*y)
        return g


@dataclass
class KineticModel:
    """KFP ``d_t f + v^2 f - d_v^2 f + v d_x f = 0`` or FP ``d_t f + v d_x f - d_v^2 f - d_v(v f) = 0``."""

    kind: str = "kfp"

    @property
    def family(self) -> str:
        return self.kind

    @property
    def dims(self) -> int:
        return 2

    def symbol(self) -> QuadraticSymbol:
        return kfp_symbol() if self.kind == "kfp" else fp_symbol()


@dataclass
class CubicNonlinearity:
    """``f(x, rho) = beta rho``."""

    beta: float

    def __call__(self, x, rho):
        return self.beta * rho

    def primitive(self, x, rho):
        return 0.5 * self.beta * rho ** 2


@dataclass
class PotentialNonlinearity:
    """``f(x, rho) = V_nq(x)``, a bounded periodic potential scaled by ``alpha``."""

    alpha: float
    period: float = 10.0
    shift: float = 5.0

    def potential(self, x):
        k = 2 * np.pi / self.period
        total = 60.0
        for xj in x:
            total = total + 20.0 * np.cos(k * (xj + self.shift))
        return self.alpha * total

    def __call__(self, x, rho):
        return self.potential(x)

    def primitive(self, x, rho):
        return self.potential(x) * rho


@dataclass
class SchrodingerModel:
    """``i d_tau psi = -Delta psi/2 - i(Bx).grad psi + x^T V x psi + f(x,|psi|^2) psi``.

    Physical time ``t`` and model time ``tau = time_scale * t``.  Energies are
    reported as ``energy_scale`` times the model functional.
    """

    B: np.ndarray
    V: np.ndarray
    nonlinearity: Optional[Callable] = None
    time_scale: float = 1.0
    energy_scale: float = 1.0
    pivot: Optional[int] = None
    family: str = "qm"

    def __post_init__(self):
        self.B = np.asarray(self.B, dtype=float)
        self.V = np.asarray(self.V, dtype=float)

    @property
    def dims(self) -> int:
        return self.B.shape[0]

    def symbol(self) -> QuadraticSymbol:
        return qm_symbol(self.B, self.V)


# ---------------------------------------------------------------- constants

TRANSPORT_3D_M = np.array([[0.0, -0.036, -0.679],
                           [0.036, 0.0, -0.758],
                           [0.679, 0.758, 0.0]])

_M4_PRINTED = np.array([[0.0, 1.0, -1.5, -3.0],
                        [-1.0, 0.0, 2.0, 1.0],
                        [1.5, -2.0, 0.0, 0.0],
                        [3.0, -1.0, 0.0, 0.0]])
# the published 4D coefficients factor exp(t M) for the transpose of the display
TRANSPORT_4D_M = _M4_PRINTED.T.copy()

PERIODIC_CUBIC = (7200.0, -72196.0, 222088.0, -216341.0)
PERIODIC_GUESS = (2.27017996551810, 2.53418020791380, 5.22286204879033)

MAGNETIC_FIELD_3D = np.array([1.0, 0.1, 2.0])


def periodic_lambdas(tol: float = 1e-15) -> np.ndarray:
    """Roots of the cubic behind the periodic potential, polished by Newton."""
    c = np.array(PERIODIC_CUBIC)
    dc = np.polyder(c)
    out = []
    for x in PERIODIC_GUESS:
        for _ in range(50):
            step = np.polyval(c, x) / np.polyval(dc, x)
            x -= step
            if abs(step) <= tol * abs(x):
                break
        out.append(x)
    return np.array(out)


def cross_matrix(b) -> np.ndarray:
    """``C`` with ``C y = b x y``."""
    b1, b2, b3 = b
    return np.array([[0.0, -b3, b2], [b3, 0.0, -b1], [-b2, b1, 0.0]])


def rotation_b(omega: float) -> np.ndarray:
    return omega * np.array([[0.0, 1.0], [-1.0, 0.0]])


def harmonic_v(gamma) -> np.ndarray:
    return 0.5 * np.diag(np.asarray(gamma, dtype=float) ** 2)


# ---------------------------------------------------------------- initial data

def transport3d_initial(beta: float = 0.06):
    c = 1.0 / (2.0 * (np.pi * beta) ** 2)

    def f0(x1, x2, x3):
        bump = np.exp(-(x1 - 0.3) ** 2 / beta) + np.exp(-(x1 + 0.3) ** 2 / beta)
        return c * bump * np.exp(-x2 ** 2 / beta) * np.exp(-x3 ** 2 / beta)
    return f0


def transport4d_initial():
    c = (2.0 / np.pi) ** 4

    def f0(*x):
        return c * np.exp(-sum(xj ** 2 for xj in x))
    return f0


def maxwellian(v):
    return np.exp(-0.5 * v ** 2) / math.sqrt(2 * math.pi)


def fp_initial(v_half_width: float = 7.0):
    def f0(x, v):
        return maxwellian(v) * (1.0 + 0.5 * np.sin(x) * np.cos(np.pi * v / v_half_width))
    return f0


def kfp_maxwellian(x_half_width: float = 4.0):
    """Maxwellian in ``v`` modulated periodically in ``x`` so transport acts."""
    def f0(x, v):
        return maxwellian(v) * (1.0 + 0.5 * np.cos(np.pi * x / x_half_width))
    return f0


def random_initial(spec: GridSpec, seed: int) -> Field:
    """Uniform random samples normalized to unit discrete L1 norm."""
    rng = np.random.default_rng(seed)
    vals = rng.random(spec.points)
    vals /= spec.cell_volume * np.sum(np.abs(vals))
    return Field.from_canonical(spec, vals)


def qm2d_initial(eps: float):
    def psi0(x1, x2):
        env = np.exp(-20 * (x1 - 0.05) ** 2 - 20 * (x2 - 0.1) ** 2)
        return env * np.exp(1j * np.sin(x1) * np.sin(x2) / eps)
    return psi0


def softplus(z, width):
    return width * np.logaddexp(0.0, z / width)


def thomas_fermi_surrogate(spec: GridSpec, beta: float, gamma, shift=(0.0, 0.0),
                           softening: float = 0.5) -> Field:
    """Smoothed Thomas-Fermi profile, unit discrete mass, used without a ground-state file."""
    g1, g2 = gamma
    mu = math.sqrt(beta * g1 * g2 / math.pi)

    def prof(x1, x2):
        y1, y2 = x1 - shift[0], x2 - shift[1]
        v = 0.5 * (g1 ** 2 * y1 ** 2 + g2 ** 2 * y2 ** 2)
        return np.sqrt(softplus(mu - v, softening) / beta)
    f = Field.from_function(spec, prof)
    f.values /= math.sqrt(spec.cell_volume * np.sum(np.abs(f.values) ** 2))
    return f


RELAX_SCHEDULE = ((0.01, 300), (0.002, 500), (0.0005, 500))


def relaxed_ground_state(spec: GridSpec, beta: float, gamma, shift=(0.0, 0.0),
                         schedule=RELAX_SCHEDULE) -> Field:
    """Non-rotating ground-state surrogate, optionally translated by ``shift``.

    Starts from :func:`thomas_fermi_surrogate` and runs a normalized
    imaginary-time Strang iteration (Gaussian factors for the linear part,
    pointwise decay for the cubic term).  The result is close enough to
    stationary that the shifted condensate does not shed mass to the box
    edges, which would otherwise pollute angular-momentum diagnostics.
    """
    from .plans import ElementaryFactor
    from .propagators import Executor
    from .propagators import schedule as lower

    n = spec.dims
    v = harmonic_v(gamma)
    ex = Executor(spec)
    vals = thomas_fermi_surrogate(spec, beta, gamma).values
    for tau, steps in schedule:
        ops = [ElementaryFactor("gaussian", 0.5 * tau * v),
               ElementaryFactor("fourier_gaussian", 0.5 * tau * np.eye(n)),
               ElementaryFactor("gaussian", 0.5 * tau * v)]
        sched = lower(ops, n)
        for _ in range(steps):
            vals = vals * np.exp(-0.5 * tau * beta * np.abs(vals) ** 2)
            vals = ex.run(vals, sched)
            vals *= np.exp(-0.5 * tau * beta * np.abs(vals) ** 2)
            vals /= math.sqrt(spec.cell_volume * np.sum(np.abs(vals) ** 2))
    vals = vals.real.astype(np.complex128)
    if any(shift):
        moves = [ElementaryFactor("translation", -float(c), j, n) for j, c in enumerate(shift) if c]
        vals = ex.run(vals, lower(moves, n))
    return Field(spec, vals)


def periodic3d_initial():
    c = (2.0 / np.pi) ** 3

    def psi0(x1, x2, x3):
        common = np.exp(-x1 ** 2) * np.exp(-(x3 - 1) ** 2)
        return c * common * (np.exp(-x2 ** 2) + 1j * np.exp(-(x2 + 1) ** 2))
    return psi0


def magnetic3d_initial():
    c = 2 ** 0.375 / np.pi ** 1.5

    def psi0(x1, x2, x3):
        return c * np.exp(-(np.sqrt(2) / 2) * ((x1 - 1) ** 2 + x2 ** 2 + x3 ** 2))
    return psi0


# ---------------------------------------------------------------- catalog

@dataclass
class Preset:
    name: str
    model: object
    half_widths: tuple
    points: tuple
    dt: float
    steps: int
    scheme: str
    schemes: tuple
    initial: Callable  # (spec, seed) -> Field
    diagnostics: tuple = ("l2_norm",)
    stride: int = 1
    params: dict = field(default_factory=dict)
    exact: Optional[Callable] = None  # (t) -> coordinate function
    qualitative: bool = False
    table: Optional[str] = None
    probe: Optional[tuple] = None

    @property
    def family(self) -> str:
        return self.model.family

    def grid(self, points=None, half_widths=None) -> GridSpec:
        return GridSpec(half_widths if half_widths is not None else self.half_widths,
                        points if points is not None else self.points)

    def initial_field(self, spec: Optional[GridSpec] = None, seed: int = 0) -> Field:
        return self.initial(spec or self.grid(), seed)


def _sampled(func):
    return lambda spec, seed: Field.from_function(spec, func)


def _transport3d(**kw):
    beta = kw.get("beta", 0.06)
    model = TransportModel(TRANSPORT_3D_M, pivot=2)
    f0 = transport3d_initial(beta)
    return Preset("transport3d", model, (2.0,) * 3, (64,) * 3, 0.3, 100, "esr", ("esr", "strang"),
                  _sampled(f0), ("l2_error", "l2_norm"), 1, {"beta": beta},
                  exact=lambda t: model.pulled_back(f0, t), table="transport3d")


def _transport4d(**kw):
    model = TransportModel(TRANSPORT_4D_M, pivot=1)
    f0 = transport4d_initial()
    return Preset("transport4d", model, (5.0,) * 4, (47,) * 4, 0.05, 600, "esr", ("esr", "strang"),
                  _sampled(f0), ("l2_error", "l2_norm"), 10, {},
                  exact=lambda t: model.pulled_back(f0, t), table="transport4d")


def _fp(**kw):
    return Preset("fp", KineticModel("fp"), (math.pi, 7.0), (27, 181), 0.1, 200, "exact",
                  ("exact",), _sampled(fp_initial(7.0)), ("entropy", "l2_norm"), 1)


def _kfp(**kw):
    data = kw.get("data", "random")
    if data == "random":
        init = random_initial
    else:
        init = _sampled(kfp_maxwellian(4.0))
    return Preset("kfp", KineticModel("kfp"), (4.0, 15.0), (199, 199), 0.1, 1000, "exact",
                  ("exact", "strang"), init, ("l2_norm",), 1, {"data": data})


def _qm2d_magnetic(**kw):
    eps = kw.get("eps", 1.0 / 32.0)
    s = 1.0 / (2.0 * eps)
    model = SchrodingerModel(rotation_b(s), 0.5 * s ** 2 * np.eye(2), None,
                             time_scale=eps, energy_scale=eps ** 2)
    return Preset("qm2d-magnetic", model, (3 * math.pi,) * 2, (256, 256), 0.3, 1000, "esqm",
                  ("esqm", "esr", "strang", "bw"), _sampled(qm2d_initial(eps)),
                  ("mass", "energy"), 1, {"eps": eps}, table="qm2d-magnetic")


def _gpe2d(**kw):
    omega = kw.get("omega", -0.5)
    beta = kw.get("beta", 100.0)
    gamma = tuple(kw.get("gamma", (1.0, 1.0)))
    model = SchrodingerModel(rotation_b(omega), harmonic_v(gamma), CubicNonlinearity(beta))
    table = {-0.5: "gpe2d-rot", 0.0: "gpe2d-still"}.get(omega)
    if gamma != (1.0, 1.0):
        table = None
    return Preset("gpe2d", model, (8.0, 8.0), (256, 256), 1e-3, 1000, "esqm",
                  ("esqm", "esr", "bw"),
                  lambda spec, seed: relaxed_ground_state(spec, beta, gamma, (1.0, 1.0)),
                  ("mass", "energy", "lz", "s_x1", "s_x2", "xc_1", "xc_2"), 10,
                  {"omega": omega, "beta": beta, "gamma": gamma}, qualitative=True, table=table)


def _gpe2d_aniso(**kw):
    beta = kw.get("beta", 1000.0)
    omega = kw.get("omega", 0.9)
    gamma = tuple(kw.get("gamma", (1.05, 0.95)))
    model = SchrodingerModel(rotation_b(omega), harmonic_v(gamma), CubicNonlinearity(beta))
    return Preset("gpe2d-aniso", model, (8.0, 8.0), (128, 128), 1e-3, 4000, "esqm", ("esqm",),
                  lambda spec, seed: relaxed_ground_state(spec, beta, (1.0, 1.0)),
                  ("mass", "energy", "lz"), 100, {"omega": omega, "beta": beta, "gamma": gamma},
                  qualitative=True, table="gpe2d-aniso")


def _qm3d_periodic(**kw):
    b = np.pi / 3 * np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
    v = np.pi ** 2 / 9 * np.diag(periodic_lambdas())
    model = SchrodingerModel(b, v)
    return Preset("qm3d-periodic", model, (8.0,) * 3, (96,) * 3, 0.2, 3600, "esqm",
                  ("esqm", "esr", "strang"), _sampled(periodic3d_initial()),
                  ("mass", "energy"), 100, {}, table="qm3d-periodic", probe=(0.0, 0.0, 0.0))


def _qm3d_magnetic(**kw):
    alpha = kw.get("alpha", 0.1)
    bvec = MAGNETIC_FIELD_3D
    # A(x) = x cross b gives the drift -(C x).grad with C y = b cross y
    b = cross_matrix(bvec)
    v = 0.5 * (bvec @ bvec * np.eye(3) - np.outer(bvec, bvec))
    model = SchrodingerModel(b, v, PotentialNonlinearity(alpha), pivot=1)
    return Preset("qm3d-magnetic", model, (5.0,) * 3, (64,) * 3, 0.05, 20, "esqm",
                  ("esqm", "esr", "strang"), _sampled(magnetic3d_initial()),
                  ("mass", "energy"), 1, {"alpha": alpha}, table="qm3d-magnetic")


PRESETS = {
    "transport3d": _transport3d,
    "transport4d": _transport4d,
    "fp": _fp,
    "kfp": _kfp,
    "qm2d-magnetic": _qm2d_magnetic,
    "gpe2d": _gpe2d,
    "gpe2d-aniso": _gpe2d_aniso,
    "qm3d-periodic": _qm3d_periodic,
    "qm3d-magnetic": _qm3d_magnetic,
}

# fixture name -> (preset, parameter overrides)
TABLE_PRESETS = {
    "qm2d-magnetic": ("qm2d-magnetic", {}),
    "gpe2d-rot": ("gpe2d", {"omega": -0.5}),
    "gpe2d-still": ("gpe2d", {"omega": 0.0}),
    "gpe2d-aniso": ("gpe2d-aniso", {}),
    "qm3d-periodic": ("qm3d-periodic", {}),
    "qm3d-magnetic": ("qm3d-magnetic", {}),
}


def get_preset(name: str, **params) -> Preset:
    try:
        build = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return build(**params)
