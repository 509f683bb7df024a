"""Observables, error metrics and the per-step diagnostic table.

Integrals are rectangle-rule quadratures with weight ``prod h_j``; derivatives
are spectral.  All reductions go through ``np.sum`` (pairwise summation), so
values are reproducible run to run.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.fft

from .grid import PHYSICAL, Field, broadcast_nodes
from .presets import maxwellian


def _physical(f: Field) -> np.ndarray:
    if not f.is_physical:
        raise ValueError("diagnostics expect a field in physical state")
    return f.values


def _quad(f: Field, density) -> float:
    return float(f.spec.cell_volume * np.sum(density))


def spectral_derivative(f: Field, axis: int) -> np.ndarray:
    """``d psi / d x_axis`` via the discrete Fourier transform along ``axis``."""
    vals = _physical(f)
    w = broadcast_nodes(f.spec, axis, "frequency")
    # the Nyquist node keeps its signed coordinate, as in the propagators
    spec_vals = scipy.fft.fft(vals, axis=axis)
    return scipy.fft.ifft(1j * w * spec_vals, axis=axis)


def gradient(f: Field) -> list:
    return [spectral_derivative(f, j) for j in range(f.spec.dims)]


def l2_error(numeric: Field, exact: Union[Callable, Field], t: Optional[float] = None) -> float:
    """``sqrt(prod h_j sum |f_g - f(t, g)|^2)``.

    ``exact`` is a field or a function of the node coordinates; when ``t`` is
    given the function is called as ``exact(t)`` first to obtain it.
    """
    if isinstance(exact, Field):
        ref = exact.values
    else:
        func = exact(t) if t is not None else exact
        ref = Field.from_function(numeric.spec, func).values
    diff = _physical(numeric) - ref
    return math.sqrt(_quad(numeric, np.abs(diff) ** 2))


def mass(psi: Field) -> float:
    return _quad(psi, np.abs(_physical(psi)) ** 2)


def l2_norm(f: Field) -> float:
    return math.sqrt(mass(f))


def _coords(spec):
    return [broadcast_nodes(spec, j, PHYSICAL) for j in range(spec.dims)]


def energy(psi: Field, model) -> float:
    """``int |grad psi|^2/2 + x^T V x |psi|^2 + F(x,|psi|^2) + Re(psi^* (-i)(Bx).grad psi)``.

    ``F`` is the primitive of the nonlinearity in ``|psi|^2`` (``beta rho^2/2``
    for the cubic term), which makes the functional invariant along the flow.
    The result is multiplied by the model's ``energy_scale``.
    """
    vals = _physical(psi)
    x = _coords(psi.spec)
    rho = np.abs(vals) ** 2
    grads = gradient(psi)
    density = 0.5 * sum(np.abs(g) ** 2 for g in grads)
    v = np.asarray(model.V)
    quad_form = sum(v[a, b] * x[a] * x[b] for a in range(len(x)) for b in range(len(x)) if v[a, b] != 0)
    density = density + quad_form * rho
    b = np.asarray(model.B)
    drift = 0.0
    for j in range(len(x)):
        bx = sum(b[j, k] * x[k] for k in range(len(x)) if b[j, k] != 0)
        if not np.isscalar(bx) or bx != 0:
            drift = drift + bx * grads[j]
    density = density + np.real(-1j * drift * np.conj(vals))
    nl = getattr(model, "nonlinearity", None)
    if nl is not None:
        density = density + nl.primitive(x, rho)
    return getattr(model, "energy_scale", 1.0) * _quad(psi, density)


def angular_momentum(psi: Field, with_residual: bool = False):
    """``int psi^* L psi`` with ``L = -i(x_1 d_2 - x_2 d_1)``.

    Returns the real part; with ``with_residual`` also the imaginary part,
    which is round-off for a consistent discretization.
    """
    if psi.spec.dims != 2:
        raise ValueError("angular momentum is defined for 2D fields")
    vals = _physical(psi)
    x1, x2 = _coords(psi.spec)
    d1, d2 = gradient(psi)
    lz = psi.spec.cell_volume * np.sum(np.conj(vals) * (-1j) * (x1 * d2 - x2 * d1))
    if with_residual:
        return float(lz.real), float(lz.imag)
    return float(lz.real)


def entropy(f: Field) -> float:
    """``int (f - mu)^2 / mu`` over the box, ``mu`` the unit Maxwellian in ``v``."""
    if f.spec.dims != 2:
        raise ValueError("entropy expects an (x, v) field")
    vals = _physical(f)
    mu = maxwellian(broadcast_nodes(f.spec, 1, PHYSICAL))
    return _quad(f, np.abs(vals - mu) ** 2 / mu)


def condensate_widths_and_center(psi: Field) -> tuple:
    """``(S_x1, S_x2, (x_c1, x_c2))`` from second and first moments of ``|psi|^2``."""
    if psi.spec.dims != 2:
        raise ValueError("condensate moments are defined for 2D fields")
    rho = np.abs(_physical(psi)) ** 2
    x1, x2 = _coords(psi.spec)
    s1 = math.sqrt(_quad(psi, x1 ** 2 * rho))
    s2 = math.sqrt(_quad(psi, x2 ** 2 * rho))
    return s1, s2, (_quad(psi, x1 * rho), _quad(psi, x2 * rho))


# ---------------------------------------------------------------- series

COLUMNS = ("mass", "energy", "lz", "l2_error", "entropy",
           "s_x1", "s_x2", "xc_1", "xc_2", "l2_norm")


@dataclass
class DiagnosticSeries:
    """Observables recorded at a sequence of times."""

    names: tuple
    times: list = field(default_factory=list)
    columns: dict = field(default_factory=dict)

    def __post_init__(self):
        self.names = tuple(self.names)
        for n in self.names:
            self.columns.setdefault(n, [])

    def append(self, t: float, values: dict) -> None:
        missing = set(self.names) - set(values)
        if missing:
            raise ValueError(f"missing values for {sorted(missing)}")
        self.times.append(float(t))
        for n in self.names:
            self.columns[n].append(float(values[n]))

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name])

    def __len__(self) -> int:
        return len(self.times)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("time",) + self.names)
        for i, t in enumerate(self.times):
            w.writerow([f"{t:.17g}"] + [f"{self.columns[n][i]:.17g}" for n in self.names])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "DiagnosticSeries":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][0] != "time":
            raise ValueError("diagnostic CSV must start with a 'time' column")
        out = cls(tuple(rows[0][1:]))
        for r in rows[1:]:
            out.append(float(r[0]), {n: float(v) for n, v in zip(out.names, r[1:])})
        return out


def decay_rate(series: DiagnosticSeries, column: str, window: Sequence[float] = (5.0, 15.0)) -> float:
    """Least-squares slope of ``log(column)`` against time over ``window``."""
    t = np.asarray(series.times)
    y = series.column(column)
    lo, hi = window
    sel = (t >= lo - 1e-9) & (t <= hi + 1e-9)
    if np.count_nonzero(sel) < 2:
        raise ValueError("decay window holds fewer than two samples")
    if np.any(y[sel] <= 0):
        raise ValueError(f"column {column!r} is not positive on the fit window")
    slope, _ = np.polyfit(t[sel], np.log(y[sel]), 1)
    return float(slope)


def observe(names: Sequence[str], f: Field, model=None, exact: Optional[Callable] = None,
            t: float = 0.0) -> dict:
    """Evaluate the requested observables on ``f``."""
    out = {}
    need = set(names)
    if need & {"s_x1", "s_x2", "xc_1", "xc_2"}:
        s1, s2, xc = condensate_widths_and_center(f)
        out.update(s_x1=s1, s_x2=s2, xc_1=xc[0], xc_2=xc[1])
    for n in names:
        if n in out:
            continue
        if n == "mass":
            out[n] = mass(f)
        elif n == "l2_norm":
            out[n] = l2_norm(f)
        elif n == "energy":
            out[n] = energy(f, model)
        elif n == "lz":
            out[n] = angular_momentum(f)
        elif n == "entropy":
            out[n] = entropy(f)
        elif n == "l2_error":
            if exact is None:
                raise ValueError("l2_error needs an exact solution")
            out[n] = l2_error(f, exact, t)
        else:
            raise ValueError(f"unknown diagnostic {n!r}")
    return {n: out[n] for n in names}


def nearest_node(spec, point) -> tuple:
    """Storage index of the grid node closest to ``point``."""
    idx = []
    for j, c in enumerate(point):
        nodes = broadcast_nodes(spec, j, PHYSICAL).ravel()
        idx.append(int(np.argmin(np.abs(nodes - c))))
    return tuple(idx)
