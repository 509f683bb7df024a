"""Acceptance criteria C1-C11, each at its stated tolerance and scale."""
import time

import numpy as np

from exactsplit.diagnostics import (
    DiagnosticSeries,
    angular_momentum,
    decay_rate,
    energy,
    entropy,
    l2_error,
    l2_norm,
    mass,
)
from exactsplit.experiment import spectrum_checks, verify, verify_tables
from exactsplit.grid import Field, GridSpec
from exactsplit.plans import fp_plan, kfp_plan, strang_kfp_plan
from exactsplit.presets import TABLE_PRESETS, get_preset, kfp_maxwellian
from exactsplit.propagators import apply_plan, make_stepper, plan_stepper

from conftest import report


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def relative_drift(values) -> float:
    values = np.asarray(values)
    return float(np.max(np.abs(values - values[0])) / abs(values[0]))


class TestAcceptance:
    def test_c1_coefficient_tables(self):
        t0 = time.perf_counter()
        checks = verify_tables()
        elapsed = time.perf_counter() - t0
        failed = [c for c in checks if not c.passed]
        worst = max(checks, key=lambda c: c.value)
        ok = not failed and elapsed < 5.0
        detail = (f"{len(checks) - len(failed)}/{len(checks)} table entries within 1e-12 relative; "
                  f"worst {worst.name} {worst.value:.2e}; {elapsed:.2f} s")
        assert report("C1", ok, detail), "\n".join(c.line() for c in failed)

    def test_c2_matrix_identities(self):
        t0 = time.perf_counter()
        names = ["kfp", "fp"] + [p for p, _ in TABLE_PRESETS.values()]
        residuals = {}
        for preset_name, params in [("kfp", {}), ("fp", {})] + list(TABLE_PRESETS.values()):
            check = verify(preset_name, **params)[0]
            key = preset_name + "".join(f",{k}={v}" for k, v in params.items())
            residuals[key] = check.value
        elapsed = time.perf_counter() - t0
        worst = max(residuals.values())
        ok = worst <= 1e-11 and elapsed < 1.0
        assert len(residuals) == len(names)
        assert report("C2", ok, f"max identity residual {worst:.2e} over {len(residuals)} plans; "
                                f"{elapsed:.2f} s"), residuals

    def test_c3_spectrum(self):
        checks = {c.name: c for c in spectrum_checks(get_preset("qm3d-periodic"))}
        freq = checks["frequencies"]
        poly = checks["scaled characteristic polynomial"]
        ok = freq.value <= 1e-10 and poly.value <= 1e-10
        assert report("C3", ok, f"frequency deviation {freq.value:.2e}; "
                                f"polynomial coefficient deviation {poly.value:.2e}")

    def test_c4_transport_exactness(self):
        t0 = time.perf_counter()
        pre = get_preset("transport3d")
        spec = pre.grid(points=(32,) * 3, half_widths=(1.36,) * 3)
        f0 = pre.initial_field(spec)
        errs = {}
        for scheme in ("esr", "strang"):
            st = make_stepper(pre.model, scheme, spec, 0.3)
            errs[scheme] = l2_error(st.advance(f0, 100), pre.exact, 30.0)
        elapsed = time.perf_counter() - t0
        ok = errs["esr"] <= 1e-9 and errs["strang"] >= 100 * errs["esr"] and elapsed < 30.0
        assert report("C4", ok, f"ESR {errs['esr']:.2e}, Strang {errs['strang']:.2e} "
                                f"(ratio {errs['strang'] / errs['esr']:.1e}); {elapsed:.1f} s")

    def test_c5_strang_local_order(self):
        t0 = time.perf_counter()
        spec = GridSpec((4.0, 15.0), (64, 64))
        f0 = Field.from_function(spec, kfp_maxwellian(4.0))
        dts = [0.2, 0.1, 0.05, 0.025]

        def defects(make):
            out = []
            for dt in dts:
                once = apply_plan(f0, make(dt))
                twice = apply_plan(apply_plan(f0, make(dt / 2)), make(dt / 2))
                out.append(l2_norm(Field(spec, once.values - twice.values)))
            return out

        strang = defects(strang_kfp_plan)
        exact = defects(kfp_plan)
        slope = loglog_slope(dts, strang)
        elapsed = time.perf_counter() - t0
        ok = abs(slope - 3.0) <= 0.15 and max(exact) <= 1e-12 and elapsed < 20.0
        assert report("C5", ok, f"Strang defect slope {slope:.3f}; exact defect max "
                                f"{max(exact):.2e}; {elapsed:.1f} s")

    def test_c6_fp_entropy_decay(self):
        t0 = time.perf_counter()
        pre = get_preset("fp")
        spec = pre.grid(points=(27, 121))
        f = pre.initial_field(spec)
        st = plan_stepper("exact", spec, fp_plan(0.1), 0.1)
        series = DiagnosticSeries(("entropy",))
        series.append(0.0, {"entropy": entropy(f)})
        for k in range(1, 201):
            f = st.advance(f)
            series.append(0.1 * k, {"entropy": entropy(f)})
        rate = decay_rate(series, "entropy", (5.0, 15.0))
        elapsed = time.perf_counter() - t0
        ok = abs(rate + 1.99) <= 0.05 and elapsed < 60.0
        assert report("C6", ok, f"entropy decay rate over [5, 15] {rate:.4f}; {elapsed:.1f} s")

    def test_c7_conservation(self):
        t0 = time.perf_counter()
        pre = get_preset("gpe2d", omega=-0.5, beta=100.0)
        spec = pre.grid(points=(64, 64))
        psi0 = pre.initial_field(spec)
        m0, l0 = mass(psi0), angular_momentum(psi0)

        def lz_error(scheme, dt, samples=10):
            st = make_stepper(pre.model, scheme, spec, dt)
            n = int(round(1.0 / dt))
            psi, masses, lz = psi0, [m0], []
            for _ in range(samples):
                psi = st.advance(psi, n // samples)
                masses.append(mass(psi))
                lz.append(abs(angular_momentum(psi) - l0))
            return max(lz), relative_drift(masses)

        esqm_lz, mass_drift = lz_error("esqm", 1e-3)
        esr_lz, _ = lz_error("esr", 1e-3)
        dts = [4e-3, 2e-3, 1e-3]
        bw = [lz_error("bw", dt)[0] for dt in dts]
        order = loglog_slope(dts, bw)
        elapsed = time.perf_counter() - t0
        ok = (mass_drift <= 1e-12 and esqm_lz <= 1e-10 and esr_lz <= 1e-10
              and abs(order - 2.0) <= 0.1 and elapsed < 120.0)
        assert report("C7", ok, f"mass drift {mass_drift:.1e}; Lz drift ESQM {esqm_lz:.1e}, "
                                f"ESR {esr_lz:.1e}; BW Lz order {order:.3f}; {elapsed:.1f} s")

    def test_c8_energy_hierarchy(self):
        t0 = time.perf_counter()
        pre = get_preset("qm2d-magnetic")
        spec = pre.grid(points=(64, 64))
        psi0 = pre.initial_field(spec)
        e0 = energy(psi0, pre.model)
        errs = {}
        for scheme in ("esqm", "strang", "esr"):
            st = make_stepper(pre.model, scheme, spec, 0.3)
            psi, worst = psi0, 0.0
            for _ in range(10):
                psi = st.advance(psi, 100)
                worst = max(worst, abs(energy(psi, pre.model) - e0) / abs(e0))
            errs[scheme] = worst
        elapsed = time.perf_counter() - t0
        ok = (errs["esqm"] <= 1e-10 and errs["strang"] >= 1e3 * errs["esqm"]
              and errs["esr"] >= 1e3 * errs["esqm"] and elapsed < 60.0)
        assert report("C8", ok, "relative energy error " +
                      ", ".join(f"{k} {v:.2e}" for k, v in errs.items()) + f"; {elapsed:.1f} s")

    def test_c9_periodicity(self):
        pre = get_preset("qm3d-periodic")
        steps = int(round(360.0 / 0.2))
        errs, times = {}, {}
        for n in (32, 64):
            t0 = time.perf_counter()
            spec = pre.grid(points=(n,) * 3)
            psi0 = pre.initial_field(spec)
            st = make_stepper(pre.model, "esqm", spec, 0.2)
            psi = st.advance(psi0, steps)
            errs[n] = abs(psi.values[0, 0, 0] - psi0.values[0, 0, 0])
            times[n] = time.perf_counter() - t0
        ok = errs[64] * 10 <= errs[32]
        assert report("C9", ok, f"probe return error 32^3 {errs[32]:.2e} ({times[32]:.0f} s), "
                                f"64^3 {errs[64]:.2e} ({times[64]:.0f} s)")

    def test_c10_non_quadratic_trend(self):
        t0 = time.perf_counter()
        dts = [0.1, 0.05, 0.025]
        ratios, ordered = {}, True
        for alpha in (0.1, 0.01):
            pre = get_preset("qm3d-magnetic", alpha=alpha)
            spec = pre.grid(points=(32,) * 3)
            psi0 = pre.initial_field(spec)
            e0 = energy(psi0, pre.model)
            for dt in dts:
                err = {}
                for scheme in ("esqm", "esr", "strang"):
                    st = make_stepper(pre.model, scheme, spec, dt)
                    psi = st.advance(psi0, int(round(1.0 / dt)))
                    err[scheme] = abs(energy(psi, pre.model) - e0) / abs(e0)
                ordered &= err["esqm"] < err["strang"] and err["esqm"] < err["esr"]
                ratios[alpha, dt] = err["esqm"] / err["strang"]
        monotone = all(ratios[0.01, dt] < ratios[0.1, dt] for dt in dts)
        elapsed = time.perf_counter() - t0
        ok = ordered and monotone and elapsed < 180.0
        detail = ", ".join(f"dt={dt:g}: {ratios[0.1, dt]:.3f} -> {ratios[0.01, dt]:.3f}" for dt in dts)
        assert report("C10", ok, f"ESQM/Strang ratio alpha 0.1 -> 0.01 ({detail}); "
                                 f"ordering {'holds' if ordered else 'broken'}; {elapsed:.0f} s")

    def test_c11_cost_accounting(self):
        counts = {}
        qm3 = get_preset("qm3d-periodic")
        counts["ESQM 3D transforms"] = (make_stepper(
            qm3.model, "esqm", qm3.grid(points=(8,) * 3), 0.2).transforms_per_step(), 6)
        tr3 = get_preset("transport3d")
        spec3 = tr3.grid(points=(8,) * 3)
        counts["ESR 3D shears"] = (make_stepper(tr3.model, "esr", spec3, 0.3).shears_per_step, 4)
        counts["Strang 3D shears"] = (make_stepper(tr3.model, "strang", spec3, 0.3).shears_per_step, 5)
        tr4 = get_preset("transport4d")
        spec4 = tr4.grid(points=(4,) * 4)
        counts["ESR 4D shears"] = (make_stepper(tr4.model, "esr", spec4, 0.05).shears_per_step, 5)
        counts["Strang 4D shears"] = (make_stepper(tr4.model, "strang", spec4, 0.05).shears_per_step, 7)
        gpe = get_preset("gpe2d")
        counts["BW transforms"] = (make_stepper(
            gpe.model, "bw", gpe.grid(points=(16, 16)), 1e-3).transforms_per_step(), 6)
        ok = all(got == want for got, want in counts.values())
        assert report("C11", ok, "; ".join(f"{k} {got}" for k, (got, _) in counts.items()))
