"""Coefficient solvers and matrix-level verification of splitting plans."""
import math

import numpy as np
import pytest

from exactsplit.plans import (
    ElementaryFactor,
    SplittingPlan,
    TriangularSplitting,
    admissible_pivots,
    factor_symbol,
    fp_coefficients,
    fp_plan,
    kfp_matrix,
    kfp_plan,
    rotation_plan,
    shear_factorize,
    strang_kfp_plan,
    strang_transport_plan,
    triangular_iteration,
    triangular_split,
    verify_plan,
)
from exactsplit.presets import TRANSPORT_3D_M, TRANSPORT_4D_M, get_preset
from exactsplit.symplectic import (
    SplittingRadiusError,
    fp_symbol,
    kfp_symbol,
    mat_exp,
    qm_symbol,
    transport_symbol,
)
from exactsplit.tables import SHEAR_3D, SHEAR_4D, TRIANGULAR, compare_shears, compare_triangular

ROT = np.array([[0.0, 1.0], [-1.0, 0.0]])


def qm_model_symbol(name, **params):
    m = get_preset(name, **params).model
    return qm_symbol(m.B, m.V), m.time_scale


class TestElementaryFactor:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ElementaryFactor("twist", 1.0)

    def test_gaussian_needs_psd(self):
        with pytest.raises(ValueError, match="positive semidefinite"):
            ElementaryFactor("gaussian", -np.eye(2))

    def test_shear_cannot_use_own_axis(self):
        with pytest.raises(ValueError):
            ElementaryFactor("shear", [1.0, 0.0], 0)

    @pytest.mark.parametrize("factor", [
        ElementaryFactor("translation", 0.3, 1, 2),
        ElementaryFactor("linear_phase", -0.2, 0, 2),
        ElementaryFactor("shear", [0.0, 0.4], 0),
        ElementaryFactor("fourier_quadratic", [[0.2, 0.1], [0.1, 0.3]]),
        ElementaryFactor("quadratic_phase", [[0.5, 0.0], [0.0, -0.1]]),
        ElementaryFactor("gaussian", np.diag([0.0, 0.7])),
        ElementaryFactor("fourier_gaussian", np.diag([0.2, 0.1])),
        ElementaryFactor("scalar", 0.25),
    ])
    def test_single_factor_matches_own_symbol(self, factor):
        s = factor_symbol(factor, 2)
        rep = verify_plan(SplittingPlan([factor]), s, 1.0)
        assert rep.residual <= 1e-14
        assert rep.scalar_discrepancy <= 1e-15


class TestShearFactorize:
    def test_three_shear_rotation(self):
        th = 0.5
        f = shear_factorize(ROT, th)
        assert f.pivot == 0
        np.testing.assert_allclose(th * f.y_left, [0.0, math.tan(th / 2)], atol=1e-15)
        np.testing.assert_allclose(th * f.y_mid[1], [-math.sin(th), 0.0], atol=1e-15)
        np.testing.assert_allclose(th * f.y_right, [0.0, math.tan(th / 2)], atol=1e-15)

    def test_zero_matrix(self):
        f = shear_factorize(np.zeros((3, 3)), 0.3, pivot=0)
        assert not np.any(f.y_left) and not np.any(f.y_right)
        assert all(not np.any(y) for y in f.y_mid.values())

    def test_transport3d_table(self):
        f = shear_factorize(TRANSPORT_3D_M, SHEAR_3D["dt"], SHEAR_3D["pivot"])
        for c in compare_shears("transport3d", f, SHEAR_3D):
            assert c.relative <= 1e-12, c

    def test_transport4d_table(self):
        f = shear_factorize(TRANSPORT_4D_M, SHEAR_4D["dt"], SHEAR_4D["pivot"])
        for c in compare_shears("transport4d", f, SHEAR_4D):
            assert c.relative <= 1e-12, c

    def test_structural_zeros(self):
        f = shear_factorize(TRANSPORT_3D_M, 0.3, 2)
        assert f.y_left[2] == 0 and f.y_right[2] == 0
        for k, y in f.y_mid.items():
            assert y[k] == 0

    def test_default_pivot_is_smallest(self):
        m = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        assert admissible_pivots(m) == [0, 2]
        assert shear_factorize(m, 0.1).pivot == 0

    def test_no_admissible_pivot(self):
        m = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
        m[0, 2] = 0.0
        with pytest.raises(ValueError, match="pivot"):
            shear_factorize(m, 0.1)

    def test_random_matrices(self, rng):
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(2, 5))
            m = rng.standard_normal((n, n))
            np.fill_diagonal(m, 0.0)
            t = float(rng.uniform(-0.1, 0.1))
            f = shear_factorize(m, t)
            worst = max(worst, float(np.max(np.abs(f.product() - mat_exp(t * m)))))
        assert worst <= 1e-12

    def test_unit_determinants(self):
        f = shear_factorize(TRANSPORT_3D_M, 0.3, 2)
        for s in f.shear_matrices():
            assert np.linalg.det(s) == pytest.approx(1.0, abs=1e-15)
        assert np.linalg.det(mat_exp(0.3 * TRANSPORT_3D_M)) == pytest.approx(1.0, abs=1e-14)

    def test_plan_identity(self):
        f = shear_factorize(TRANSPORT_3D_M, 0.3, 2)
        rep = verify_plan(f.plan(), transport_symbol(TRANSPORT_3D_M), 0.3)
        assert rep.residual <= 1e-13

    def test_strang_is_not_exact(self):
        rep = verify_plan(strang_transport_plan(TRANSPORT_3D_M, 0.3),
                          transport_symbol(TRANSPORT_3D_M), 0.3)
        assert rep.residual > 1e-4

    def test_shear_counts(self):
        assert shear_factorize(TRANSPORT_3D_M, 0.3, 2).plan().shear_count == 4
        assert strang_transport_plan(TRANSPORT_3D_M, 0.3).shear_count == 5
        assert shear_factorize(TRANSPORT_4D_M, 0.05, 1).plan().shear_count == 5
        assert strang_transport_plan(TRANSPORT_4D_M, 0.05).shear_count == 7


class TestKineticPlans:
    def test_kfp_identity(self):
        rep = verify_plan(kfp_plan(1.0), kfp_symbol(), 1.0)
        assert rep.residual <= 1e-12

    def test_kfp_matrix_at_one(self):
        a = kfp_matrix(1.0)
        th, sh = math.tanh(1.0), math.sinh(1.0)
        assert a[0, 0] == pytest.approx(0.25 * (1 - th * (1 - sh ** 2)), rel=1e-15)
        assert a[0, 1] == pytest.approx(0.5 * sh ** 2, rel=1e-15)
        assert a[1, 1] == pytest.approx(0.5 * math.sinh(2.0), rel=1e-15)

    @pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0])
    def test_kfp_matrix_psd(self, t):
        assert np.linalg.eigvalsh(kfp_matrix(t)).min() >= -1e-14

    def test_kfp_small_t(self):
        np.testing.assert_allclose(kfp_matrix(1e-12), 0.0, atol=1e-11)

    def test_kfp_factor_order(self):
        kinds = [f.kind for f in kfp_plan(0.3).factors]
        assert kinds == ["gaussian", "fourier_gaussian", "shear", "gaussian"]

    def test_fp_identity(self):
        rep = verify_plan(fp_plan(0.5), fp_symbol(), 0.5)
        assert rep.residual <= 1e-11
        assert rep.scalar_discrepancy <= 1e-15

    def test_fp_coefficients_at_one(self):
        alpha, beta, a = fp_coefficients(1.0)
        e = math.e
        assert alpha == pytest.approx(0.5 * math.sqrt((1 - 1 / e) / e), rel=1e-15)
        assert beta == pytest.approx(0.5 * math.sqrt(e - 1), rel=1e-15)
        assert a[0, 0] == pytest.approx(0.5 * (e ** 2 + 2 + 3 - 4 * e), rel=1e-14)

    def test_fp_small_t(self):
        alpha, beta, a = fp_coefficients(1e-14)
        assert abs(alpha) < 1e-6 and abs(beta) < 1e-6
        np.testing.assert_allclose(a, 0.0, atol=1e-13)

    def test_fp_factor_order(self):
        kinds = [f.kind for f in fp_plan(0.3).factors]
        assert kinds == ["scalar", "shear", "fourier_gaussian", "fourier_quadratic",
                         "quadratic_phase", "fourier_quadratic", "quadratic_phase"]

    @pytest.mark.parametrize("build", [kfp_plan, fp_plan])
    def test_rejects_nonpositive_t(self, build):
        with pytest.raises(ValueError):
            build(0.0)

    def test_strang_kfp_local_error(self):
        # halving dt should cut the one-step matrix defect by about 8
        d = [verify_plan(strang_kfp_plan(t), kfp_symbol(), t).residual for t in (0.1, 0.05)]
        assert 6.5 < d[0] / d[1] < 9.0

    @pytest.mark.parametrize("build,symbol", [(kfp_plan, kfp_symbol), (fp_plan, fp_symbol)])
    def test_semigroup(self, build, symbol):
        t = 0.4
        rep = verify_plan(build(t / 2) + build(t / 2), symbol(), t)
        assert rep.residual <= 1e-11


class TestTriangularSplit:
    def test_free_flow(self):
        z = np.zeros((2, 2))
        ts = triangular_split(qm_symbol(z, z), 0.3)
        np.testing.assert_allclose(ts.A, 0.5 * np.eye(2), atol=1e-15)
        for m in (ts.L, ts.U, ts.V_left, ts.V_right):
            np.testing.assert_allclose(m, 0.0, atol=1e-15)

    @pytest.mark.parametrize("name", ["qm2d-magnetic", "qm3d-periodic", "qm3d-magnetic"])
    def test_tables(self, name):
        p, scale = qm_model_symbol(name)
        ts = triangular_split(p, scale * TRIANGULAR[name]["dt"])
        for c in compare_triangular(name, ts):
            assert c.relative <= 1e-12, c

    @pytest.mark.parametrize("name,omega", [("gpe2d-rot", -0.5), ("gpe2d-still", 0.0)])
    def test_gpe_tables_shear_blocks(self, name, omega):
        p, _ = qm_model_symbol("gpe2d", omega=omega)
        ts = triangular_split(p, 1e-3)
        for c in compare_triangular(name, ts):
            if c.entry in ("A", "L", "U"):
                assert c.relative <= 1e-12, c

    def test_still_gpe_is_diagonal(self):
        p, _ = qm_model_symbol("gpe2d", omega=0.0)
        ts = triangular_split(p, 1e-3)
        np.testing.assert_array_equal(ts.L, 0.0)
        np.testing.assert_array_equal(ts.U, 0.0)

    def test_shapes(self):
        p, scale = qm_model_symbol("qm3d-periodic")
        ts = triangular_split(p, 0.2)
        np.testing.assert_array_equal(np.triu(ts.L), 0.0)
        np.testing.assert_array_equal(np.tril(ts.U), 0.0)
        np.testing.assert_array_equal(ts.V_left, np.diag(np.diag(ts.V_left)))

    @pytest.mark.parametrize("name", ["qm2d-magnetic", "gpe2d", "gpe2d-aniso", "qm3d-periodic",
                                      "qm3d-magnetic"])
    def test_identity(self, name):
        p, scale = qm_model_symbol(name)
        pre = get_preset(name)
        t = scale * pre.dt
        rep = verify_plan(triangular_split(p, t).plan(), p, t)
        assert rep.residual <= 1e-11

    def test_contraction(self):
        p, scale = qm_model_symbol("qm2d-magnetic")
        ts = triangular_split(p, scale * 0.3)
        h = np.array(ts.history)
        tail = h[(h < 1e-2) & (h > 1e-13)]
        assert len(tail) >= 3
        assert np.all(tail[1:] / tail[:-1] < 1.0)

    def test_output_scaling(self):
        # the correction D enters as -D/2 and +D/2; a t/2 weight breaks the identity
        p, scale = qm_model_symbol("qm2d-magnetic")
        t = scale * 0.3
        ts = triangular_split(p, t)
        b = get_preset("qm2d-magnetic").model.B
        states = list(triangular_iteration(b, get_preset("qm2d-magnetic").model.V, t))
        d = states[-1].D
        alt = TriangularSplitting(2, t, ts.A, ts.L, ts.U, -0.5 * t * d, states[-1].Vm + 0.5 * d)
        assert verify_plan(alt.plan(), p, t).residual > 1e-3
        assert verify_plan(ts.plan(), p, t).residual <= 1e-11

    def test_semigroup(self):
        p, scale = qm_model_symbol("qm3d-periodic")
        half = triangular_split(p, 0.1).plan()
        assert verify_plan(half + half, p, 0.2).residual <= 1e-11

    def test_radius(self):
        p, _ = qm_model_symbol("qm3d-periodic")
        with pytest.raises(SplittingRadiusError, match="reduce step"):
            triangular_split(p, 5.0)

    def test_zero_step(self):
        p, _ = qm_model_symbol("gpe2d")
        ts = triangular_split(p, 0.0)
        assert verify_plan(ts.plan(), p, 0.0).residual == 0.0


class TestRotationPlans:
    def test_esr_rotation_exact(self):
        b = get_preset("gpe2d").model.B
        plan = rotation_plan(b, 0.1, exact=True)
        assert verify_plan(plan, transport_symbol(-b), 0.1).residual <= 1e-14

    def test_strang_rotation_second_order(self):
        b = get_preset("gpe2d").model.B
        d = [verify_plan(rotation_plan(b, t, exact=False), transport_symbol(-b), t).residual
             for t in (0.2, 0.1)]
        assert 6.5 < d[0] / d[1] < 9.0
