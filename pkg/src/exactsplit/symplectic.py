"""Quadratic symbols and the small-matrix algebra behind exact splittings.

A symbol ``p(X) = X^T Q X + Y^T X + c`` with ``X = (x, xi)`` generates the
operator ``exp(-t p^w)``.  At the matrix level this operator corresponds to the
Hamiltonian flow ``exp(-2 i t J Q)`` and operator products map to matrix
products taken in the same order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class SplittingRadiusError(RuntimeError):
    """The requested step is too large for the coefficient construction."""


class NotPositiveError(ValueError):
    """The quadratic form is not a positive Hamiltonian."""


def standard_symplectic(n: int) -> np.ndarray:
    """``[[0, I], [-I, 0]]`` of size ``2n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def mat_exp(a) -> np.ndarray:
    """Matrix exponential (scaling and squaring with a degree-13 Pade approximant)."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("mat_exp needs a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("mat_exp needs finite entries")
    return scipy.linalg.expm(a)


# Gauss-Legendre rule on [0, 1] for log(I + E) = int_0^1 E (I + sE)^{-1} ds
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


def _check_branch(p: np.ndarray) -> None:
    lam = np.linalg.eigvals(p)
    scale = max(1.0, float(np.max(np.abs(lam))))
    bad = (lam.real <= 0) & (np.abs(lam.imag) <= 1e-12 * scale)
    if np.any(bad):
        raise SplittingRadiusError("step size too large for splitting construction")


def log_near_identity(e) -> np.ndarray:
    """Principal ``log(I + E)`` computed from ``E`` without forming ``I + E``.

    Working with the small increment avoids the cancellation that makes
    ``logm(P)/t`` lose digits like ``1/t`` when ``P`` is close to the identity.
    """
    e = np.array(e, dtype=np.result_type(e, np.float64))
    n = e.shape[0]
    eye = np.eye(n)
    _check_branch(eye + e)
    halvings = 0
    # inverse scaling and squaring: I + E <- sqrt(I + E), kept as increments
    while np.abs(e).sum(axis=0).max() > 0.1:
        if halvings > 60:
            raise SplittingRadiusError("step size too large for splitting construction")
        root = scipy.linalg.sqrtm(eye + e)
        if not np.iscomplexobj(e):
            root = root.real
        e = np.linalg.solve((eye + root).T, e.T).T
        halvings += 1
    out = np.zeros_like(e)
    for s, w in zip(_GL_NODES, _GL_WEIGHTS):
        out += w * np.linalg.solve(eye + s * e, e)
    return out * 2.0 ** halvings


def mat_log_principal(p) -> np.ndarray:
    """Principal matrix logarithm by inverse scaling and squaring."""
    p = np.asarray(p)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("mat_log_principal needs a square matrix")
    return log_near_identity(p - np.eye(p.shape[0]))


def is_symplectic(m, tol: float = 1e-12) -> bool:
    n = m.shape[0] // 2
    j = standard_symplectic(n)
    return bool(np.max(np.abs(m.T @ j @ m - j)) <= tol)


@dataclass
class QuadraticSymbol:
    """``p(X) = X^T Q X + Y^T X + c`` on phase space ``X = (x_1..x_n, xi_1..xi_n)``."""

    Q: np.ndarray
    Y: np.ndarray = None
    c: complex = 0.0
    label: str = ""

    def __post_init__(self):
        q = np.asarray(self.Q, dtype=np.complex128)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] % 2:
            raise ValueError("Q must be a square matrix of even size")
        self.Q = 0.5 * (q + q.T)
        if self.Y is None:
            self.Y = np.zeros(q.shape[0], dtype=np.complex128)
        self.Y = np.asarray(self.Y, dtype=np.complex128).reshape(q.shape[0])
        self.c = complex(self.c)

    @property
    def n(self) -> int:
        return self.Q.shape[0] // 2

    def __call__(self, x) -> complex:
        x = np.asarray(x)
        return complex(x @ self.Q @ x + self.Y @ x + self.c)


@dataclass
class HamiltonianFlow:
    matrix: np.ndarray
    t: float = field(default=0.0)


def hamiltonian_flow(p: QuadraticSymbol, t: float) -> HamiltonianFlow:
    """Flow matrix ``exp(-2 i t J Q)`` of the linear part of ``p``."""
    j = standard_symplectic(p.n)
    return HamiltonianFlow(mat_exp(-2j * t * (j @ p.Q)), float(t))


def _real_hamiltonian(p: QuadraticSymbol) -> np.ndarray:
    q = p.Q
    scale = max(1.0, float(np.max(np.abs(q))))
    if np.max(np.abs(q.imag)) <= 1e-14 * scale:
        return q.real
    if np.max(np.abs(q.real)) <= 1e-14 * scale:
        # p = i H: the operator exp(-t p^w) is the Schrodinger group of H
        return q.imag
    raise NotPositiveError("not a positive quadratic Hamiltonian")


def frequencies(p: QuadraticSymbol) -> np.ndarray:
    """Positive ``omega_j`` with ``sigma(J H) = {+-i omega_j}``, ascending."""
    h = _real_hamiltonian(p)
    ev = np.linalg.eigvalsh(h)
    if ev.min() <= 1e-12 * np.max(np.abs(ev)):
        raise NotPositiveError("not a positive quadratic Hamiltonian")
    lam = np.linalg.eigvals(standard_symplectic(p.n) @ h)
    om = np.sort(np.abs(lam.imag))
    # eigenvalues come in conjugate pairs; keep one of each
    return om[1::2].copy()


def characteristic_polynomial(p: QuadraticSymbol, scale: float = 1.0) -> np.ndarray:
    """Coefficients (highest degree first) of ``scale^{-2n} det(scale X - J H)``."""
    h = _real_hamiltonian(p)
    lam = np.linalg.eigvals(standard_symplectic(p.n) @ h) / scale
    return np.poly(lam).real


def transport_symbol(m) -> QuadraticSymbol:
    """Symbol ``-i (M x) . xi`` generating ``exp(t M x . grad)``."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    q = np.zeros((2 * n, 2 * n), dtype=complex)
    q[:n, n:] = -0.5j * m.T
    q[n:, :n] = -0.5j * m
    return QuadraticSymbol(q, label="transport")


def kfp_symbol() -> QuadraticSymbol:
    """``v^2 + eta^2 + i v xi`` on ``(x, v, xi, eta)``."""
    q = np.zeros((4, 4), dtype=complex)
    q[1, 1] = 1.0
    q[3, 3] = 1.0
    q[1, 2] = q[2, 1] = 0.5j
    return QuadraticSymbol(q, label="kfp")


def fp_symbol() -> QuadraticSymbol:
    """``i v xi + eta^2 - i v eta - 1/2`` on ``(x, v, xi, eta)``."""
    q = np.zeros((4, 4), dtype=complex)
    q[3, 3] = 1.0
    q[1, 2] = q[2, 1] = 0.5j
    q[1, 3] = q[3, 1] = -0.5j
    return QuadraticSymbol(q, c=-0.5, label="fp")


def qm_symbol(b, v) -> QuadraticSymbol:
    """``i|xi|^2/2 + i (B x) . xi + i x^T V x`` for skew ``B`` and symmetric ``V``."""
    b = np.atleast_2d(np.asarray(b, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    n = b.shape[0]
    if b.shape != (n, n) or v.shape != (n, n):
        raise ValueError("B and V must be n x n")
    if np.max(np.abs(b + b.T)) > 1e-14 * max(1.0, np.max(np.abs(b))):
        raise ValueError("B must be skew-symmetric")
    if np.max(np.abs(v - v.T)) > 1e-14 * max(1.0, np.max(np.abs(v))):
        raise ValueError("V must be a symmetric quadratic form")
    h = np.block([[v, 0.5 * b.T], [0.5 * b, 0.5 * np.eye(n)]])
    return QuadraticSymbol(1j * h, label="qm")


def symbol_of_model(model) -> QuadraticSymbol:
    """Assemble the symbol of a model description.

    ``model`` is a mapping (or object with attributes) whose ``family`` is one of
    ``transport`` (needs ``M``), ``kfp``, ``fp`` or ``qm`` (needs ``B``, ``V``).
    """
    get = model.get if isinstance(model, dict) else (lambda k, d=None: getattr(model, k, d))
    family = get("family")
    if family == "transport":
        return transport_symbol(get("M"))
    if family == "kfp":
        return kfp_symbol()
    if family == "fp":
        return fp_symbol()
    if family == "qm":
        return qm_symbol(get("B"), get("V"))
    raise ValueError(f"unknown model family {family!r}")
