"""Matrix layer: exponentials, logarithms, Hamiltonian flows and spectra."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exactsplit.presets import TRANSPORT_3D_M, get_preset
from exactsplit.symplectic import (
    NotPositiveError,
    QuadraticSymbol,
    SplittingRadiusError,
    frequencies,
    hamiltonian_flow,
    is_symplectic,
    kfp_symbol,
    fp_symbol,
    mat_exp,
    mat_log_principal,
    qm_symbol,
    standard_symplectic,
    transport_symbol,
)


def taylor_exp(a, terms=60):
    out = np.eye(a.shape[0], dtype=np.result_type(a, float))
    term = out.copy()
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


def random_symplectic(n, rng, count=4, scale=0.3):
    """Product of exponentials of random Hamiltonian generators."""
    j = standard_symplectic(n)
    p = np.eye(2 * n)
    for _ in range(count):
        s = rng.standard_normal((2 * n, 2 * n))
        p = p @ mat_exp(scale * j @ (s + s.T))
    return p


class TestStandardSymplectic:
    def test_n1(self):
        np.testing.assert_array_equal(standard_symplectic(1), [[0, 1], [-1, 0]])

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_square_and_transpose(self, n):
        j = standard_symplectic(n)
        np.testing.assert_array_equal(j @ j, -np.eye(2 * n))
        np.testing.assert_array_equal(j.T, -j)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            standard_symplectic(0)


class TestMatExp:
    def test_zero(self):
        np.testing.assert_array_equal(mat_exp(np.zeros((3, 3))), np.eye(3))

    def test_rotation(self):
        th = 0.7
        r = mat_exp(th * np.array([[0.0, 1.0], [-1.0, 0.0]]))
        np.testing.assert_allclose(r, [[math.cos(th), math.sin(th)], [-math.sin(th), math.cos(th)]],
                                   atol=1e-15)

    def test_transport_matrix_against_taylor(self):
        a = 0.3 * TRANSPORT_3D_M
        np.testing.assert_allclose(mat_exp(a), taylor_exp(a), atol=1e-13)

    def test_commuting_sum(self, rng):
        base = rng.standard_normal((4, 4))
        a = 0.4 * base
        b = 0.2 * base @ base
        np.testing.assert_allclose(mat_exp(a + b), mat_exp(a) @ mat_exp(b), rtol=1e-12, atol=1e-12)

    def test_non_square(self):
        with pytest.raises(ValueError):
            mat_exp(np.zeros((2, 3)))


class TestMatLog:
    def test_identity(self):
        np.testing.assert_array_equal(mat_log_principal(np.eye(3)), np.zeros((3, 3)))

    def test_inverts_exp_on_transport_matrix(self):
        a = 0.1 * TRANSPORT_3D_M
        np.testing.assert_allclose(mat_log_principal(mat_exp(a)), a, atol=1e-12)

    def test_branch_cut(self):
        with pytest.raises(SplittingRadiusError, match="step size too large"):
            mat_log_principal(-np.eye(2))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_log_exp_round_trip(self, seed):
        r = np.random.default_rng(seed)
        a = r.standard_normal((4, 4))
        a *= 0.9 / np.linalg.norm(a, 2)
        np.testing.assert_allclose(mat_log_principal(mat_exp(a)), a, atol=1e-12)


class TestHamiltonianFlow:
    def test_zero_time(self):
        p = kfp_symbol()
        np.testing.assert_array_equal(hamiltonian_flow(p, 0.0).matrix, np.eye(4))

    def test_free_schrodinger(self):
        t = 0.8
        q = np.array([[0.0, 0.0], [0.0, 0.5j]])
        flow = hamiltonian_flow(QuadraticSymbol(q), t).matrix
        # -2itJQ = [[0, t], [0, 0]] is nilpotent
        np.testing.assert_allclose(flow, [[1.0, t], [0.0, 1.0]], atol=1e-15)

    def test_real_flows_symplectic(self, rng):
        s = 0.25 * rng.standard_normal((6, 6))
        p = QuadraticSymbol(s + s.T)
        for t in (-1.0, 0.3, 1.0):
            assert is_symplectic(hamiltonian_flow(p, t).matrix, 1e-12)


class TestFrequencies:
    def test_harmonic_oscillator(self):
        np.testing.assert_allclose(frequencies(QuadraticSymbol(np.eye(2))), [1.0])

    def test_periodic_preset(self):
        m = get_preset("qm3d-periodic").model
        om = frequencies(qm_symbol(m.B, m.V))
        np.testing.assert_allclose(om, np.pi / 180 * np.array([20, 75, 132]), atol=1e-10)

    def test_symplectic_invariance(self, rng):
        s = rng.standard_normal((4, 4))
        h = s @ s.T + 4 * np.eye(4)
        p = random_symplectic(2, rng)
        a = frequencies(QuadraticSymbol(h))
        b = frequencies(QuadraticSymbol(p.T @ h @ p))
        np.testing.assert_allclose(a, b, rtol=1e-9)

    def test_indefinite_rejected(self):
        with pytest.raises(NotPositiveError, match="not a positive quadratic Hamiltonian"):
            frequencies(QuadraticSymbol(np.diag([1.0, -1.0])))


class TestSymbols:
    def test_zero_transport(self):
        np.testing.assert_array_equal(transport_symbol(np.zeros((3, 3))).Q, 0)

    def test_kfp_matrix(self):
        q = np.zeros((4, 4), dtype=complex)
        q[1, 1] = q[3, 3] = 1.0
        q[1, 2] = q[2, 1] = 0.5j
        np.testing.assert_array_equal(kfp_symbol().Q, q)

    def test_fp_constant(self):
        assert fp_symbol().c == -0.5

    def test_free_qm(self):
        p = qm_symbol(np.zeros((2, 2)), np.zeros((2, 2)))
        expect = np.zeros((4, 4), dtype=complex)
        expect[2, 2] = expect[3, 3] = 0.5j
        np.testing.assert_array_equal(p.Q, expect)

    def test_bad_b(self):
        with pytest.raises(ValueError, match="skew"):
            qm_symbol(np.eye(2), np.zeros((2, 2)))

    def test_bad_v(self):
        with pytest.raises(ValueError, match="symmetric"):
            qm_symbol(np.zeros((2, 2)), np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_q_is_symmetrized(self):
        p = QuadraticSymbol(np.array([[1.0, 2.0], [0.0, 1.0]]))
        np.testing.assert_array_equal(p.Q, p.Q.T)
