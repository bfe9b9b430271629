"""Self-contained property suites behind the ``verify`` CLI subcommand.

Each suite re-runs the load-bearing invariants of one module family at small
scale, printing one PASS/FAIL line per check and returning overall success.
The pytest suite covers the same ground (and more); these entry points exist
so a deployed installation can be probed without a test harness.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .dyadic import (
    BesovSpec,
    DyadicIndex,
    bernstein_check,
    besov_norm,
    block_sum,
    block_weight,
    dyadic_profile,
    lp_block,
    remove_degenerate_planes,
    shell_range,
)
from .grid import BoxSpec, forward_transform, l2_norm_spectral, lp_norm, state_from_coeffs
from .kernel import (
    KernelSpec,
    eval_kernel,
    hessian_check,
    rank_floor,
    support_samples,
)
from .linear import (
    eigenprojection,
    generator_matrix,
    helmholtz3,
    p_tilde_matrix,
    propagate_linear,
    q_reconstruction,
    rodrigues_matrix,
)
from .solver import SolverConfig, run


def _make_box():
    return BoxSpec(16, 16, 12, 2 * np.pi, 2 * np.pi, 2 * np.pi)


def _random_field(box, seed, decay=2.0):
    rng = np.random.default_rng(seed)
    f = forward_transform(rng.standard_normal(box.shape), box)
    damp = np.exp(-decay * np.sqrt(box.k2 / box.k2.max()) * 4.0)
    mx, my, mz = box.not_nyquist
    return f.apply_symbol(damp * mx * my * mz)


def _random_state(box, seed, amplitude=None):
    state = helmholtz3(
        state_from_coeffs(box, *(_random_field(box, seed + i).coeffs for i in range(4)))
    )
    if amplitude is None:
        return state
    scale = max(l2_norm_spectral(f) for f in state.fields)
    return state_from_coeffs(box, *(amplitude / scale * f.coeffs for f in state.fields))


class _Suite:
    def __init__(self, name):
        self.name = name
        self.failures = 0

    def check(self, label, ok):
        line = f"[{self.name}] {label}: {'PASS' if ok else 'FAIL'}"
        print(line)
        if not ok:
            self.failures += 1

    @property
    def ok(self):
        return self.failures == 0


def verify_lp():
    suite = _Suite("lp")
    box = _make_box()
    r = np.geomspace(1e-2, 1e3, 4001)
    total = sum(dyadic_profile(r * 2.0**-j) for j in range(-16, 18))
    suite.check("dyadic partition of unity (1e-12)", np.abs(total - 1.0).max() < 1e-12)

    js, ks = shell_range(box)
    lattice = sum(
        block_weight(box, DyadicIndex(j, k)) for j in js for k in ks
    )
    interior = box.nonzero_h & (np.abs(box.kz) > 0)
    suite.check(
        "lattice partition on nondegenerate modes (1e-12)",
        np.abs(lattice[interior] - 1.0).max() < 1e-12,
    )

    f = _random_field(box, 0)
    sep = lp_block(lp_block(f, DyadicIndex(js[0], ks[0])), DyadicIndex(js[0] + 2, ks[0]))
    suite.check("block almost-orthogonality (exact)", np.abs(sep.coeffs).max() == 0.0)

    summed = block_sum(f)
    expect = remove_degenerate_planes(f)
    suite.check(
        "block sum reproduces field off degenerate planes",
        np.abs(summed.coeffs - expect.coeffs).max() < 1e-12 * np.abs(f.coeffs).max(),
    )

    worst = 0.0
    for seed in range(10):
        g = _random_field(box, seed)
        for j in js:
            for k in ks:
                rep = bernstein_check(g, DyadicIndex(j, k), 1.0, 2.0)
                if rep.defined:
                    worst = max(worst, rep.ratio)
    suite.check(f"Bernstein ratios bounded (max {worst:.3f})", 0.0 < worst < 12.0)

    ok_interp = True
    for seed in range(10):
        g = remove_degenerate_planes(_random_field(box, 50 + seed))
        for theta in (0.25, 0.5, 0.75):
            mid = besov_norm(g, BesovSpec(2.0, 1.0, theta * 2.0, (1 - theta) * 1.0))
            e1 = besov_norm(g, BesovSpec(2.0, 1.0, 2.0, 0.0))
            e2 = besov_norm(g, BesovSpec(2.0, 1.0, 0.0, 1.0))
            ok_interp &= mid <= e1**theta * e2 ** (1 - theta) + 1e-10
    suite.check("interpolation inequality (1e-10 slack)", ok_interp)

    ok_embed = True
    for p in (2.0, 4.0, np.inf):
        g = remove_degenerate_planes(_random_field(box, 99))
        lp_val = lp_norm(g, p)
        ok_embed &= lp_val <= besov_norm(g, BesovSpec(p, 1.0, 0.0, 0.0)) * (1 + 1e-10)
        ok_embed &= besov_norm(g, BesovSpec(p, np.inf, 0.0, 0.0)) <= 4.0 * lp_val
    suite.check("embedding chain at p in {2,4,inf}", ok_embed)
    return suite.ok


def verify_linear():
    suite = _Suite("linear")
    rng = np.random.default_rng(0)

    def rand_xi():
        while True:
            xi = rng.standard_normal(3)
            if np.hypot(xi[0], xi[1]) > 1e-3 and abs(xi[2]) > 1e-3:
                return xi

    worst_proj = worst_rod = worst_alg = worst_sum = 0.0
    for _ in range(300):
        xi = rand_xi()
        Pt = p_tilde_matrix(xi)
        worst_proj = max(worst_proj, np.abs(Pt @ Pt - Pt).max())
        A = generator_matrix(xi)
        om2 = (xi[0] ** 2 + xi[1] ** 2) / (xi @ xi)
        worst_alg = max(worst_alg, np.abs(A @ A @ A + om2 * A).max())
        t = rng.uniform(0, 10)
        worst_rod = max(worst_rod, np.abs(expm(-t * A) - rodrigues_matrix(xi, t)).max())
        mats = {s: eigenprojection(xi, s)[0] for s in (0, 1, -1)}
        v = rng.standard_normal(3)
        v -= xi * (xi @ v) / (xi @ xi)
        u = np.concatenate([v, rng.standard_normal(1)])
        worst_sum = max(worst_sum, np.abs((mats[0] + mats[1] + mats[-1] - Pt) @ u).max())
    suite.check(f"projector idempotency (max {worst_proj:.2e})", worst_proj < 1e-12)
    suite.check(f"generator cubic identity (max {worst_alg:.2e})", worst_alg < 1e-10)
    suite.check(f"Rodrigues vs matrix exponential (max {worst_rod:.2e})", worst_rod < 1e-9)
    suite.check(f"projection completeness on solenoidal vectors (max {worst_sum:.2e})", worst_sum < 1e-10)

    box = _make_box()
    state = _random_state(box, 7)
    out = propagate_linear(state, 1.0)
    suite.check("propagated state divergence-free (1e-10)", out.max_relative_divergence() < 1e-10)

    (c1, c2), v3, th = q_reconstruction(state)
    keep = box.nonzero_h
    scale = max(np.abs(f.coeffs).max() for f in state.fields)
    err = max(
        np.abs(v3.coeffs - np.where(keep, state.v3.coeffs, 0)).max(),
        np.abs(th.coeffs - np.where(keep, state.theta.coeffs, 0)).max(),
    )
    suite.check(f"multiplier time-zero reconstruction (max {err:.2e})", err < 1e-8 * scale)

    h = 1e-4
    dE = (
        propagate_linear(state, 0.5 + h).l2_energy()
        - propagate_linear(state, 0.5 - h).l2_energy()
    ) / (2 * h)
    mid = propagate_linear(state, 0.5)
    diss = sum(
        l2_norm_spectral(f.deriv((1, 0, 0))) ** 2 + l2_norm_spectral(f.deriv((0, 1, 0))) ** 2
        for f in mid.fields
    )
    suite.check("linear energy identity (1e-6)", abs(dE + diss) < 1e-6 * diss)

    one = propagate_linear(propagate_linear(state, 0.3), 0.7)
    two = propagate_linear(state, 1.0)
    err = max(np.abs(a.coeffs - b.coeffs).max() for a, b in zip(one.fields, two.fields))
    suite.check(f"semigroup property (max {err:.2e})", err < 1e-10 * scale)
    return suite.ok


def verify_nonlinear():
    suite = _Suite("nonlinear")
    box = BoxSpec(24, 24, 16, 4 * np.pi, 4 * np.pi, 2 * np.pi)
    state = _random_state(box, 3, amplitude=0.05)

    cfg = SolverConfig(dt=0.01, t_end=0.3, nonlinear=False)
    traj = run(state, cfg)
    want = propagate_linear(traj.initial, 0.3)
    err = max(
        np.abs(a.coeffs - b.coeffs).max() for a, b in zip(traj.final.fields, want.fields)
    )
    scale = max(np.abs(f.coeffs).max() for f in want.fields)
    suite.check(f"linear-mode agreement with propagator (rel {err / scale:.2e})", err < 1e-6 * scale)

    from scipy.integrate import simpson

    state_s = _random_state(box, 4, amplitude=0.05)
    smooth = state_from_coeffs(
        box,
        *(
            f.coeffs * np.exp(-3.0 * np.sqrt(box.k2 / box.k2.max()))
            for f in state_s.fields
        ),
    )
    traj = run(smooth, SolverConfig(dt=0.01, t_end=0.6))
    drop = traj.energies[0] - traj.energies[-1]
    diss = simpson(traj.dissipations, x=np.asarray(traj.times))
    suite.check(
        f"energy identity (rel {abs(drop - diss) / traj.energies[0]:.2e})",
        abs(drop - diss) < 1e-4 * traj.energies[0],
    )
    suite.check(
        "divergence-free snapshots (1e-10)",
        all(s.max_relative_divergence() < 1e-10 for s in traj.states),
    )
    means0 = [f.coeffs[0, 0, 0] for f in traj.initial.fields]
    means1 = [f.coeffs[0, 0, 0] for f in traj.final.fields]
    suite.check("means conserved exactly", all(a == b for a, b in zip(means0, means1)))
    suite.check(
        "energy non-increasing",
        all(b <= a * (1 + 1e-12) for a, b in zip(traj.energies, traj.energies[1:])),
    )
    return suite.ok


def verify_kernel():
    suite = _Suite("kernel")
    rng = np.random.default_rng(5)
    worst = max(hessian_check(m, support_samples(60, rng)) for m in (-2, 0, 2))
    suite.check(f"Hessian determinant formula vs finite differences (max {worst:.2e})", worst < 1e-5)
    floor = min(rank_floor(m, support_samples(80, rng)) for m in range(-4, 5))
    suite.check(f"normalized rank-3 floor (min {floor:.2e})", floor > 1e-3)

    origin = eval_kernel(KernelSpec(m=0, t=0.0, x=(0.0, 0.0, 0.0), resolution=64))
    fine = eval_kernel(KernelSpec(m=0, t=0.0, x=(0.0, 0.0, 0.0), resolution=128))
    suite.check(
        "zero-time mass refinement-stable (0.1%)",
        abs(origin.value - fine.value) <= 1e-3 * abs(fine.value),
    )
    a = eval_kernel(KernelSpec(m=1, t=2.0, x=(1.0, 0.0, -1.0), resolution=64)).value
    b = eval_kernel(KernelSpec(m=1, t=-2.0, x=(-1.0, 0.0, 1.0), resolution=64)).value
    suite.check("conjugation symmetry", abs(b - np.conj(a)) < 1e-6 * abs(a))
    return suite.ok


SUITES = {
    "lp": verify_lp,
    "linear": verify_linear,
    "nonlinear": verify_nonlinear,
    "kernel": verify_kernel,
}
