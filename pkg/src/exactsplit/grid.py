"""Tensor grids on truncated boxes, complex fields and partial Fourier transforms.

Each axis j carries N_j nodes ``h_j * k`` with ``k`` running over
``-floor((N_j - 1)/2) .. floor(N_j/2)`` and ``h_j = 2 R_j / N_j``.  The dual
axis uses the same integer range scaled by ``eta_j = pi / R_j``.

Storage keeps every axis in FFT order: array index ``i`` holds the node with
signed index ``k = i`` for ``i <= N//2`` and ``k = i - N`` otherwise.  Since the
discrete exponentials only depend on ``k`` modulo ``N`` this makes the forward
transform a plain FFT scaled by ``h_j``; the reordering is absorbed into the
node coordinates.  ``Field.canonical()`` returns the ascending-coordinate view.
"""
from __future__ import annotations

import contextlib
import struct
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
import scipy.fft

PHYSICAL = "physical"
FREQUENCY = "frequency"
_STATES = (PHYSICAL, FREQUENCY)

SNAPSHOT_MAGIC = b"QSPL"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class GridSpec:
    """Box ``[-R_1, R_1] x ... x [-R_n, R_n]`` sampled with ``N_j`` points per axis."""

    half_widths: tuple
    points: tuple

    def __init__(self, half_widths: Sequence[float], points: Sequence[int]):
        hw = tuple(float(r) for r in np.atleast_1d(half_widths))
        pts = tuple(int(p) for p in np.atleast_1d(points))
        if len(hw) != len(pts):
            raise ValueError("half_widths and points must have the same length")
        if not hw:
            raise ValueError("grid needs at least one axis")
        for r in hw:
            if not (np.isfinite(r) and r > 0):
                raise ValueError(f"half width must be positive, got {r}")
        for p in pts:
            if p < 2:
                raise ValueError(f"each axis needs at least 2 points, got {p}")
        object.__setattr__(self, "half_widths", hw)
        object.__setattr__(self, "points", pts)

    @property
    def dims(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple:
        return self.points

    @property
    def steps(self) -> np.ndarray:
        return np.array([2.0 * r / n for r, n in zip(self.half_widths, self.points)])

    @property
    def dual_steps(self) -> np.ndarray:
        return np.array([np.pi / r for r in self.half_widths])

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.steps))

    def _check_axis(self, axis: int) -> int:
        if not 0 <= axis < self.dims:
            raise IndexError(f"axis {axis} out of range for a {self.dims}-D grid")
        return axis


def signed_indices(n: int) -> np.ndarray:
    """Integer node indices in ascending order."""
    return np.arange(-((n - 1) // 2), n // 2 + 1)


def storage_indices(n: int) -> np.ndarray:
    """Signed node index of each storage slot (FFT order)."""
    i = np.arange(n)
    return np.where(i <= n // 2, i, i - n)


def grid_nodes(spec: GridSpec, axis: int, state: str = PHYSICAL) -> np.ndarray:
    """Node coordinates along ``axis`` in ascending index order."""
    spec._check_axis(axis)
    if state not in _STATES:
        raise ValueError(f"unknown axis state {state!r}")
    scale = spec.steps[axis] if state == PHYSICAL else spec.dual_steps[axis]
    return scale * signed_indices(spec.points[axis])


def storage_nodes(spec: GridSpec, axis: int, state: str = PHYSICAL) -> np.ndarray:
    """Node coordinates along ``axis`` in storage order."""
    spec._check_axis(axis)
    if state not in _STATES:
        raise ValueError(f"unknown axis state {state!r}")
    scale = spec.steps[axis] if state == PHYSICAL else spec.dual_steps[axis]
    return scale * storage_indices(spec.points[axis])


def broadcast_nodes(spec: GridSpec, axis: int, state: str = PHYSICAL) -> np.ndarray:
    """Storage-order coordinates reshaped to broadcast along ``axis``."""
    shape = [1] * spec.dims
    shape[axis] = spec.points[axis]
    return storage_nodes(spec, axis, state).reshape(shape)


def _canonical_shift(spec: GridSpec) -> tuple:
    return tuple((n - 1) // 2 for n in spec.points)


class TransformCounter:
    """Counts one-dimensional partial transforms while active."""

    def __init__(self):
        self.forward = 0
        self.inverse = 0

    @property
    def total(self) -> int:
        return self.forward + self.inverse


_counters: list = []


@contextlib.contextmanager
def count_transforms() -> Iterator[TransformCounter]:
    """Context manager recording every partial transform applied inside it."""
    counter = TransformCounter()
    _counters.append(counter)
    try:
        yield counter
    finally:
        _counters.remove(counter)


def _record(direction: str) -> None:
    for c in _counters:
        if direction == "forward":
            c.forward += 1
        else:
            c.inverse += 1


@dataclass
class Field:
    """Complex samples on a grid with a per-axis physical/frequency flag.

    ``values`` is stored in FFT order along every axis.
    """

    spec: GridSpec
    values: np.ndarray
    axis_state: tuple = field(default=None)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.size != int(np.prod(self.spec.points)):
            raise ValueError(
                f"expected {int(np.prod(self.spec.points))} values, got {vals.size}")
        self.values = np.ascontiguousarray(vals.reshape(self.spec.points))
        if self.axis_state is None:
            self.axis_state = (PHYSICAL,) * self.spec.dims
        self.axis_state = tuple(self.axis_state)
        if len(self.axis_state) != self.spec.dims:
            raise ValueError("axis_state length does not match grid dimension")
        for s in self.axis_state:
            if s not in _STATES:
                raise ValueError(f"unknown axis state {s!r}")

    @classmethod
    def from_function(cls, spec: GridSpec, func: Callable, state=None) -> "Field":
        """Sample ``func(x_1, ..., x_n)`` on the (mixed) node grid."""
        state = tuple(state) if state is not None else (PHYSICAL,) * spec.dims
        coords = [broadcast_nodes(spec, j, state[j]) for j in range(spec.dims)]
        vals = np.broadcast_to(func(*coords), spec.points)
        return cls(spec, np.array(vals, dtype=np.complex128), state)

    @classmethod
    def from_canonical(cls, spec: GridSpec, values, state=None) -> "Field":
        """Build a field from an array ordered by ascending coordinates."""
        vals = np.asarray(values, dtype=np.complex128).reshape(spec.points)
        shift = tuple(-s for s in _canonical_shift(spec))
        return cls(spec, np.roll(vals, shift, axis=tuple(range(spec.dims))), state)

    def canonical(self) -> np.ndarray:
        """Values ordered by ascending coordinates along every axis."""
        return np.roll(self.values, _canonical_shift(self.spec),
                       axis=tuple(range(self.spec.dims)))

    def copy(self) -> "Field":
        return Field(self.spec, self.values.copy(), self.axis_state)

    @property
    def is_physical(self) -> bool:
        return all(s == PHYSICAL for s in self.axis_state)


def partial_fourier(f: Field, axis: int, direction: str = "forward") -> Field:
    """Scaled DFT along one axis; flips that axis' state.

    forward: ``h_j * sum_g psi(g) exp(-i g w)``;
    inverse: ``eta_j / (2 pi) * sum_w psi(w) exp(i g w)``.
    """
    f.spec._check_axis(axis)
    state = list(f.axis_state)
    if direction == "forward":
        if state[axis] != PHYSICAL:
            raise ValueError(f"axis {axis} is not in physical state")
        out = scipy.fft.fft(f.values, axis=axis) * f.spec.steps[axis]
        state[axis] = FREQUENCY
    elif direction == "inverse":
        if state[axis] != FREQUENCY:
            raise ValueError(f"axis {axis} is not in frequency state")
        out = scipy.fft.ifft(f.values, axis=axis) / f.spec.steps[axis]
        state[axis] = PHYSICAL
    else:
        raise ValueError(f"unknown direction {direction!r}")
    _record(direction)
    return Field(f.spec, out, tuple(state))


def transform_inplace(values: np.ndarray, spec: GridSpec, axis: int, direction: str) -> np.ndarray:
    """Array-level variant of :func:`partial_fourier` used by the propagators."""
    if direction == "forward":
        out = scipy.fft.fft(values, axis=axis, overwrite_x=True)
        out *= spec.steps[axis]
    else:
        out = scipy.fft.ifft(values, axis=axis, overwrite_x=True)
        out *= 1.0 / spec.steps[axis]
    _record(direction)
    return out


def pointwise_multiply(f: Field, m) -> Field:
    """Scale ``f`` nodewise by ``m`` evaluated on the current mixed coordinates.

    ``m`` is either a callable of the n broadcast coordinate arrays or an array
    already laid out in storage order.
    """
    if callable(m):
        coords = [broadcast_nodes(f.spec, j, f.axis_state[j]) for j in range(f.spec.dims)]
        mult = m(*coords)
    else:
        mult = m
    return Field(f.spec, f.values * mult, f.axis_state)


def l2_norm(f: Field) -> float:
    """Discrete L2 norm with the weight matching the current axis states."""
    w = 1.0
    for j, s in enumerate(f.axis_state):
        w *= f.spec.steps[j] if s == PHYSICAL else f.spec.dual_steps[j] / (2 * np.pi)
    return float(np.sqrt(w * np.sum(np.abs(f.values) ** 2)))


def write_snapshot(path, f: Field, time: float = 0.0) -> None:
    """Write a binary snapshot (little-endian, ascending-coordinate layout)."""
    spec = f.spec
    n = spec.dims
    header = SNAPSHOT_MAGIC + struct.pack("<II", SNAPSHOT_VERSION, n)
    header += struct.pack(f"<{n}I", *spec.points)
    header += struct.pack(f"<{n}d", *spec.half_widths)
    header += struct.pack("<d", float(time))
    header += bytes(1 if s == FREQUENCY else 0 for s in f.axis_state)
    body = np.ascontiguousarray(f.canonical()).astype("<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def read_snapshot(path) -> tuple:
    """Read a snapshot written by :func:`write_snapshot`; returns ``(field, time)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != SNAPSHOT_MAGIC:
        raise ValueError("not a snapshot file (bad magic)")
    version, n = struct.unpack_from("<II", raw, 4)
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    off = 12
    points = struct.unpack_from(f"<{n}I", raw, off)
    off += 4 * n
    half_widths = struct.unpack_from(f"<{n}d", raw, off)
    off += 8 * n
    (time,) = struct.unpack_from("<d", raw, off)
    off += 8
    flags = raw[off:off + n]
    off += n
    spec = GridSpec(half_widths, points)
    count = int(np.prod(points))
    vals = np.frombuffer(raw, dtype="<c16", count=count, offset=off)
    state = tuple(FREQUENCY if b else PHYSICAL for b in flags)
    return Field.from_canonical(spec, vals.astype(np.complex128), state), time
