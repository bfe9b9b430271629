"""Acceptance suite: every exit criterion at its stated scale and tolerance.

Each test prints one PASS/FAIL line (run with ``pytest -s`` to see them all);
tolerances are pinned here, not configurable.  The decay-rate criteria run at
desk scale (128 x 128 x 64 spectral grid) and dominate the runtime.
"""

import time

import numpy as np
import pytest
from scipy.integrate import simpson
from scipy.linalg import expm

from anisob.campaign import run_campaign
from anisob.configfile import DEFAULTS
from anisob.duhamel import DuhamelLedger, mild_residual
from anisob.dyadic import (
    BesovSpec,
    DyadicIndex,
    bernstein_check,
    besov_norm,
    block_weight,
    lp_block,
    remove_degenerate_planes,
    shell_range,
)
from anisob.grid import BoxSpec, forward_transform, l2_norm_spectral, lp_norm, state_from_coeffs
from anisob.initial import InitialData, make_initial_data
from anisob.kernel import envelope_check, hessian_check, rank_floor, support_samples
from anisob.linear import (
    eigenprojection,
    generator_matrix,
    helmholtz3,
    p_tilde_matrix,
    propagate_linear,
    rodrigues_matrix,
)
from anisob.solver import SolverConfig, run


def _report(criterion, description, ok, detail=""):
    tail = f" ({detail})" if detail else ""
    print(f"[criterion {criterion}] {description}: {'PASS' if ok else 'FAIL'}{tail}")
    assert ok, f"criterion {criterion} failed: {description}{tail}"


def _smooth_state(box, seed, amplitude, decay=4.0):
    rng = np.random.default_rng(seed)
    comps = []
    damp = np.exp(-decay * np.sqrt(box.k2 / box.k2.max()) * 4.0)
    mx, my, mz = box.not_nyquist
    for i in range(4):
        f = forward_transform(rng.standard_normal(box.shape), box)
        comps.append(f.apply_symbol(damp * mx * my * mz).coeffs)
    state = helmholtz3(state_from_coeffs(box, *comps))
    scale = max(l2_norm_spectral(f) for f in state.fields)
    return state_from_coeffs(box, *(amplitude / scale * f.coeffs for f in state.fields))


class TestCriterion1Algebra:
    def test_projector_propagator_algebra(self):
        start = time.monotonic()
        rng = np.random.default_rng(2024)
        worst = {"ptilde": 0.0, "proj": 0.0, "sum": 0.0, "cubic": 0.0, "rodrigues": 0.0}
        for _ in range(1000):
            xi = rng.standard_normal(3)
            while np.hypot(xi[0], xi[1]) < 1e-3 or abs(xi[2]) < 1e-3:
                xi = rng.standard_normal(3)
            Pt = p_tilde_matrix(xi)
            worst["ptilde"] = max(worst["ptilde"], np.abs(Pt @ Pt - Pt).max())
            A = generator_matrix(xi)
            om2 = (xi[0] ** 2 + xi[1] ** 2) / (xi @ xi)
            worst["cubic"] = max(worst["cubic"], np.abs(A @ A @ A + om2 * A).max())
            t = rng.uniform(0.0, 10.0)
            worst["rodrigues"] = max(
                worst["rodrigues"], np.abs(expm(-t * A) - rodrigues_matrix(xi, t)).max()
            )
            mats = {s: eigenprojection(xi, s)[0] for s in (0, 1, -1)}
            for s in (0, 1, -1):
                for tau in (0, 1, -1):
                    want = mats[s] if s == tau else 0.0
                    worst["proj"] = max(worst["proj"], np.abs(mats[s] @ mats[tau] - want).max())
            v = rng.standard_normal(3)
            v -= xi * (xi @ v) / (xi @ xi)
            u = np.concatenate([v, rng.standard_normal(1)])
            worst["sum"] = max(worst["sum"], np.abs((sum(mats.values()) - Pt) @ u).max())
        elapsed = time.monotonic() - start
        bad = max(worst.values())
        _report(1, "projector/propagator algebra at 1000 wavevectors <= 1e-9",
                bad <= 1e-9 and elapsed < 10.0, f"max defect {bad:.2e}, {elapsed:.1f}s")


class TestCriterion2LinearExactness:
    def test_propagator_vs_rk4(self):
        start = time.monotonic()
        box = BoxSpec(64, 64, 64, 2 * np.pi, 2 * np.pi, 2 * np.pi)
        state = _smooth_state(box, 11, 1.0)
        exact = propagate_linear(state, 1.0)

        # independent oracle: classical RK4 on the linearized equations,
        # written from the equations themselves (projected buoyancy + skew)
        kx, ky, kz = box.kx, box.ky, box.kz
        hh = -box.kh2
        k2 = np.where(box.nonzero, box.k2, 1.0)
        nz = box.nonzero

        def rhs(u, out):
            coef = np.where(nz, kz * u[3] / k2, 0.0)
            np.multiply(hh, u[0], out=out[0])
            out[0] -= kx * coef
            np.multiply(hh, u[1], out=out[1])
            out[1] -= ky * coef
            np.multiply(hh, u[2], out=out[2])
            out[2] += np.where(nz, u[3], 0.0) - kz * coef
            np.multiply(hh, u[3], out=out[3])
            out[3] -= np.where(nz, u[2], 0.0)

        dt = 1e-3
        u = np.stack([f.coeffs for f in state.fields])
        k1 = np.empty_like(u)
        k2s = np.empty_like(u)
        k3 = np.empty_like(u)
        k4 = np.empty_like(u)
        for _ in range(1000):
            rhs(u, k1)
            rhs(u + (0.5 * dt) * k1, k2s)
            rhs(u + (0.5 * dt) * k2s, k3)
            rhs(u + dt * k3, k4)
            u += (dt / 6.0) * (k1 + 2.0 * k2s + 2.0 * k3 + k4)
        elapsed = time.monotonic() - start
        scale = max(np.abs(f.coeffs).max() for f in exact.fields)
        err = max(np.abs(u[i] - exact.fields[i].coeffs).max() for i in range(4))
        _report(2, "closed-form propagator vs RK4 oracle at t=1 <= 1e-6 relative",
                err <= 1e-6 * scale and elapsed < 120.0,
                f"rel err {err / scale:.2e}, {elapsed:.0f}s")


class TestCriterion3EnergyIdentity:
    @pytest.mark.parametrize("nonlinear", [False, True], ids=["linear", "nonlinear"])
    def test_energy_identity(self, nonlinear):
        start = time.monotonic()
        box = BoxSpec(48, 48, 48, 32.0, 32.0, 32.0)
        state = _smooth_state(box, 21, 0.05, decay=5.0)
        traj = run(state, SolverConfig(dt=0.01, t_end=1.5, nonlinear=nonlinear))
        e0, e1 = traj.energies[0], traj.energies[-1]
        dissipated = simpson(traj.dissipations, x=np.asarray(traj.times))
        defect = abs(2 * e1 + 2 * dissipated - 2 * e0) / (2 * e0)
        elapsed = time.monotonic() - start
        label = "nonlinear" if nonlinear else "linear"
        _report(3, f"{label} run energy identity <= 1e-4 relative",
                defect <= 1e-4 and elapsed < 300.0, f"defect {defect:.2e}, {elapsed:.0f}s")


def _acceptance_cfg(mode):
    cfg = dict(DEFAULTS)
    cfg.update(
        grid=(128, 128, 64),
        box=(64.0, 64.0, 64.0),
        dt=0.08,
        t_end=24.0,
        amplitude=1e-2,
        seed=7,
        mode=mode,
        support_h=2.0,
        support_v=4.0,
        t0=5.0,
        epsilon=0.05,
    )
    return cfg


def _slopes(result):
    return {
        (f.channel.component, f.channel.alpha, f.channel.p): f.slope for f in result.fits
    }


_LINEAR_SLOPES = {}


class TestCriterion4LinearDecay:
    def test_linear_rates_at_desk_scale(self):
        start = time.monotonic()
        cfg = _acceptance_cfg("linear")
        cfg["amplitude"] = 1.0
        result = run_campaign(cfg, p_values=(2.0, np.inf), snapshot_count=32)
        s = _slopes(result)
        _LINEAR_SLOPES.update(s)
        elapsed = time.monotonic() - start
        a0 = (0, 0, 0)
        two_sided = [
            ("Ph_vh", -0.5),
            ("curlfree_vh", -0.5),
            ("theta", -0.5),
            ("v3", -0.75),
        ]
        for comp, target in two_sided:
            got = s[(comp, a0, 2.0)]
            _report(4, f"{comp} L2 slope within {target} +- 0.15",
                    abs(got - target) <= 0.15, f"slope {got:+.3f}")
        one_sided = [
            ("Ph_vh", -1.0 + 0.15),
            ("theta", -1.75 + 0.2),
            ("v3", -(2.0 - 0.05) + 0.25),
        ]
        for comp, bound in one_sided:
            got = s[(comp, a0, np.inf)]
            _report(4, f"{comp} Linf slope <= {bound:+.2f}", got <= bound, f"slope {got:+.3f}")
        _report(4, "linear campaign runtime <= 30 min", elapsed <= 1800.0, f"{elapsed:.0f}s")
        mandatory_pass = all(
            f.verdict == "PASS" for f in result.fits if f.channel.p == 2.0 and f.channel.alpha == a0
        )
        _report(4, "all L2 channels PASS one-sided verdicts", mandatory_pass)


class TestCriterion5NonlinearDecay:
    def test_nonlinear_small_data_rates(self):
        start = time.monotonic()
        result = run_campaign(_acceptance_cfg("nonlinear"), p_values=(2.0, np.inf), snapshot_count=32)
        s = _slopes(result)
        elapsed = time.monotonic() - start
        a0 = (0, 0, 0)
        _report(5, "no blowup before t_end", True, "run completed")
        for comp, target in [("Ph_vh", -0.5), ("curlfree_vh", -0.5), ("theta", -0.5), ("v3", -0.75)]:
            got = s[(comp, a0, 2.0)]
            _report(5, f"{comp} L2 slope within {target} +- 0.15",
                    abs(got - target) <= 0.15, f"slope {got:+.3f}")
        # dispersive gains saturate at min{.., 1/4} for the nonlinear system
        for comp, bound in [
            ("Ph_vh", -1.0 + 0.15),
            ("theta", -1.25 + 0.2),
            ("v3", -1.5 + 0.25),
        ]:
            got = s[(comp, a0, np.inf)]
            _report(5, f"{comp} Linf slope <= {bound:+.2f} (saturated target)",
                    got <= bound, f"slope {got:+.3f}")
        if _LINEAR_SLOPES:
            drift = max(
                abs(s[key] - _LINEAR_SLOPES[key])
                for key in s
                if key in _LINEAR_SLOPES and not np.isnan(s[key])
            )
            _report(5, "small-data slopes within 0.2 of linear slopes", drift <= 0.2,
                    f"max drift {drift:.3f}")
        _report(5, "nonlinear campaign runtime <= 45 min", elapsed <= 2700.0, f"{elapsed:.0f}s")


class TestCriterion6Duhamel:
    def test_mild_residual_and_quadrature_order(self):
        box = BoxSpec(32, 32, 32, 32.0, 32.0, 32.0)
        state = make_initial_data(
            InitialData(amplitude=1e-2, support_h=2.0, support_v=2.0, seed=13), box
        )
        traj = run(state, SolverConfig(dt=0.02, t_end=1.0, record_fluxes=True))
        ledger = DuhamelLedger.from_trajectory(traj)
        res = mild_residual(traj, ledger, 1.0)
        rel = res["total"] / res["state_norm"]
        _report(6, "mild residual at t=1 with dt_quad = dt <= 1e-4 ||u||",
                rel <= 1e-4, f"relative residual {rel:.2e}")
        coarse = mild_residual(traj, ledger, 1.0, stride=4)
        fine = mild_residual(traj, ledger, 1.0, stride=2)
        ratios = [
            coarse[k] / fine[k]
            for k in ("curlfree_vh", "v3", "theta")
            if coarse[k] > 1e-12 * res["state_norm"]
        ]
        ok = bool(ratios) and all(2.5 <= r <= 6.5 for r in ratios)
        _report(6, "second-order reduction under quadrature halving", ok,
                "ratios " + ", ".join(f"{r:.2f}" for r in ratios))


class TestCriterion7LittlewoodPaley:
    def test_dyadic_suite(self):
        start = time.monotonic()
        box = BoxSpec(24, 24, 16, 4 * np.pi, 4 * np.pi, 2 * np.pi)
        rng = np.random.default_rng(5)

        r = np.geomspace(1e-3, 1e4, 6001)
        from anisob.dyadic import dyadic_profile

        total = sum(dyadic_profile(r * 2.0**-j) for j in range(-18, 22))
        _report(7, "partition of unity on (0, inf) <= 1e-12", np.abs(total - 1.0).max() < 1e-12,
                f"max defect {np.abs(total - 1.0).max():.2e}")

        js, ks = shell_range(box)
        lattice = sum(block_weight(box, DyadicIndex(j, k)) for j in js for k in ks)
        interior = box.nonzero_h & (np.abs(box.kz) > 0)
        _report(7, "lattice partition <= 1e-12", np.abs(lattice[interior] - 1.0).max() < 1e-12)

        f = _smooth_state(box, 3, 1.0).theta
        sep = 0.0
        for j in js[:3]:
            for k in ks[:2]:
                if j + 2 in js:
                    sep = max(
                        sep,
                        np.abs(
                            lp_block(lp_block(f, DyadicIndex(j, k)), DyadicIndex(j + 2, k)).coeffs
                        ).max(),
                    )
        _report(7, "block almost-orthogonality exact", sep == 0.0)

        def max_ratio(b):
            worst = 0.0
            jr, kr = shell_range(b)
            for seed in range(8):
                g = _smooth_state(b, 60 + seed, 1.0, decay=1.5).theta
                for j in jr:
                    for k in kr:
                        rep = bernstein_check(g, DyadicIndex(j, k), 1.0, 2.0)
                        if rep.defined:
                            worst = max(worst, rep.ratio)
            return worst

        r1 = max_ratio(BoxSpec(16, 16, 8, 2 * np.pi, 2 * np.pi, 2 * np.pi))
        r2 = max_ratio(BoxSpec(24, 24, 12, 2 * np.pi, 2 * np.pi, 2 * np.pi))
        _report(7, "Bernstein ratios bounded, refinement-stable +-5%",
                0 < r1 < 12 and abs(r2 - r1) <= 0.05 * r1, f"{r1:.4f} vs {r2:.4f}")

        ok_interp = True
        for seed in range(50):
            g = remove_degenerate_planes(_smooth_state(box, 100 + seed, 1.0).v1)
            for theta in (0.25, 0.5, 0.75):
                mid = besov_norm(g, BesovSpec(2.0, 1.0, 2.0 * theta, 1.0 - theta))
                e1 = besov_norm(g, BesovSpec(2.0, 1.0, 2.0, 0.0))
                e2 = besov_norm(g, BesovSpec(2.0, 1.0, 0.0, 1.0))
                ok_interp &= mid <= e1**theta * e2 ** (1 - theta) + 1e-10
        _report(7, "interpolation inequality with 1e-10 slack", ok_interp)

        ok_embed = True
        for p in (2.0, 3.0, np.inf):
            for seed in range(10):
                g = remove_degenerate_planes(_smooth_state(box, 200 + seed, 1.0).v2)
                val = lp_norm(g, p)
                ok_embed &= val <= besov_norm(g, BesovSpec(p, 1.0, 0.0, 0.0)) * (1 + 1e-10)
                ok_embed &= besov_norm(g, BesovSpec(p, np.inf, 0.0, 0.0)) <= 4.0 * val
        elapsed = time.monotonic() - start
        _report(7, "embedding chain inequalities hold", ok_embed)
        _report(7, "runtime < 5 min", elapsed < 300.0, f"{elapsed:.0f}s")


class TestCriterion8Kernel:
    def test_envelopes_and_hessian(self):
        start = time.monotonic()
        windows = {
            2: [16.0, 32.0, 64.0, 90.5, 128.0],
            0: [64.0, 90.5, 128.0, 181.0, 256.0, 362.0, 512.0],
            -2: [16 * s for s in (64.0, 90.5, 128.0, 181.0, 256.0, 362.0, 512.0)],
        }
        for m, t_grid in windows.items():
            rep = envelope_check(m, t_grid)
            _report(8, f"m={m:+d} envelope slope in [-1.7, -1.3]",
                    -1.7 <= rep.slope <= -1.3, f"slope {rep.slope:+.3f}")
        rng = np.random.default_rng(17)
        worst = max(hessian_check(m, support_samples(150, rng)) for m in (-2, 0, 2))
        _report(8, "Hessian determinant formula vs finite differences <= 1e-5",
                worst <= 1e-5, f"max rel dev {worst:.2e}")
        floor = min(rank_floor(m, support_samples(150, rng)) for m in (-2, 0, 2))
        _report(8, "rank-3 normalized singular-value floor > 1e-3",
                floor > 1e-3, f"min {floor:.2e}")
        elapsed = time.monotonic() - start
        _report(8, "runtime <= 20 min", elapsed <= 1200.0, f"{elapsed:.0f}s")


class TestCriterion9Determinism:
    def test_campaign_reports_bit_identical(self):
        cfg = dict(DEFAULTS)
        cfg.update(
            grid=(32, 32, 32),
            box=(32.0, 32.0, 16.0),
            dt=0.05,
            t_end=10.0,
            amplitude=1e-2,
            seed=42,
            mode="linear",
            support_h=2.0,
            support_v=2.0,
            t0=3.0,
        )
        a = run_campaign(cfg, p_values=(2.0, 3.0, np.inf), snapshot_count=12)
        b = run_campaign(cfg, p_values=(2.0, 3.0, np.inf), snapshot_count=12)
        _report(9, "repeated fixed-seed campaigns produce bit-identical reports",
                a.report_csv.encode() == b.report_csv.encode())
