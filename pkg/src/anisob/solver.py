"""Pseudo-spectral time integration of the full nonlinear system.

The stiff horizontal dissipation is diagonal on the spectral side and is
applied exactly through an integrating factor; the advection and skew
coupling advance with classical RK4 stages (an ETD-RK4 variant is available
for cross-checks).  Nonlinear fluxes are evaluated in divergence form with
per-axis 2/3-rule dealiasing, the pressure is eliminated by Helmholtz
projection, and the vertical direction carries no dissipation: runs abort on
blowup instead of regularizing, since stability in this regime comes from
small data and a finite horizon.

The zero mode is untouched by every term, so component means are conserved
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, NumericalBlowupError
from .grid import BoussinesqState, state_from_coeffs

_WORKERS = -1


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    dealias: float = 2.0 / 3.0
    scheme: str = "rk4-integrating-factor"
    snapshot_stride: int = 1
    nonlinear: bool = True
    record_fluxes: bool = False

    def __post_init__(self):
        if self.dt <= 0 or self.t_end < 0:
            raise ConfigurationError("dt must be positive and t_end nonnegative")
        if not 0.0 < self.dealias <= 1.0:
            raise ConfigurationError("dealias fraction must lie in (0, 1]")
        if self.scheme not in ("rk4-integrating-factor", "etd-rk4"):
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        if self.snapshot_stride < 1:
            raise ConfigurationError("snapshot_stride must be >= 1")

    def validate_for_box(self, box):
        """Explicit-part stability: the skew phase speed is at most one."""
        if self.dt > 2.5:
            raise ConfigurationError(
                f"dt = {self.dt} exceeds the RK4 stability bound for the skew part"
            )
        if self.dt * float(box.k2.max()) < 0.0:  # defensive; k2 is nonnegative
            raise ConfigurationError("invalid wavenumber lattice")


@dataclass
class Trajectory:
    """Snapshots plus cheap per-step energy diagnostics."""

    config: SolverConfig
    states: list = field(default_factory=list)
    times: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    dissipations: list = field(default_factory=list)
    flux_times: list = field(default_factory=list)
    fluxes: list = field(default_factory=list)

    @property
    def initial(self):
        return self.states[0]

    @property
    def final(self):
        return self.states[-1]

    def state_at(self, t, tol=1e-9):
        for s in self.states:
            if abs(s.time - t) <= tol:
                return s
        raise KeyError(f"no snapshot at t = {t}")


class _Workspace:
    """Precomputed symbols shared by all steps on one box."""

    def __init__(self, box, config):
        self.box = box
        self.nz_half = box.nz // 2 + 1
        self.mask = box.dealias_mask(config.dealias)
        k2 = np.where(box.nonzero, box.k2, 1.0)
        self.bx = np.where(box.nonzero, -box.kx * box.kz / k2, 0.0)
        self.by = np.where(box.nonzero, -box.ky * box.kz / k2, 0.0)
        self.bz = np.where(box.nonzero, box.kh2 / k2, 0.0)
        self.ikx = (1j * box.kx) * self.mask
        self.iky = (1j * box.ky) * self.mask
        self.ikz = (1j * box.kz) * self.mask
        self.k2_safe = k2
        self.nonzero = box.nonzero
        self.cell = box.cell_volume

    def to_physical(self, coeffs):
        half = np.ascontiguousarray(coeffs[:, :, : self.nz_half]) / self.cell
        return sfft.irfftn(half, s=self.box.shape, workers=_WORKERS)

    def to_spectral(self, phys):
        half = sfft.rfftn(phys, workers=_WORKERS) * self.cell
        full = np.empty(self.box.shape, dtype=complex)
        full[:, :, : self.nz_half] = half
        tail = half[:, :, 1 : self.box.nz - self.nz_half + 1]
        tail = np.conj(tail[::-1, ::-1, ::-1])
        full[:, :, self.nz_half :] = np.roll(tail, (1, 1), axis=(0, 1))
        return full

    def project(self, f1, f2, f3):
        """Helmholtz projection of a spectral 3-vector, in place semantics."""
        div = (self.box.kx * f1 + self.box.ky * f2 + self.box.kz * f3) / self.k2_safe
        div = np.where(self.nonzero, div, 0.0)
        return (
            f1 - self.box.kx * div,
            f2 - self.box.ky * div,
            f3 - self.box.kz * div,
        )

    def fluxes(self, u):
        """Dealiased divergence-form fluxes of one spectral state.

        Returns the six pieces: the horizontal-flux pairs
        F1 = div_h(v_h (x) v_h), F2 = d3(v_h v3), the vertical-velocity fluxes
        F3 = div_h(v3 v_h), F4 = d3(v3^2), and the thermal fluxes
        F5 = div_h(v_h theta), F6 = d3(v3 theta).
        """
        v1, v2, v3, th = (self.to_physical(c) for c in u)
        p11 = self.to_spectral(v1 * v1)
        p12 = self.to_spectral(v1 * v2)
        p22 = self.to_spectral(v2 * v2)
        p13 = self.to_spectral(v1 * v3)
        p23 = self.to_spectral(v2 * v3)
        p33 = self.to_spectral(v3 * v3)
        q1 = self.to_spectral(v1 * th)
        q2 = self.to_spectral(v2 * th)
        q3 = self.to_spectral(v3 * th)
        F1 = (self.ikx * p11 + self.iky * p12, self.ikx * p12 + self.iky * p22)
        F2 = (self.ikz * p13, self.ikz * p23)
        F3 = self.ikx * p13 + self.iky * p23
        F4 = self.ikz * p33
        F5 = self.ikx * q1 + self.iky * q2
        F6 = self.ikz * q3
        return F1, F2, F3, F4, F5, F6

    def explicit_rhs(self, u, nonlinear):
        """Skew coupling plus (optionally) projected advection fluxes."""
        v1, v2, v3, th = u
        th_deg = np.where(self.nonzero, th, 0.0)
        g1 = th_deg * self.bx
        g2 = th_deg * self.by
        g3 = th_deg * self.bz
        g4 = -np.where(self.nonzero, v3, 0.0)
        if nonlinear:
            F1, F2, F3, F4, F5, F6 = self.fluxes(u)
            n1, n2, n3 = self.project(F1[0] + F2[0], F1[1] + F2[1], F3 + F4)
            g1 = g1 - n1
            g2 = g2 - n2
            g3 = g3 - n3
            g4 = g4 - (F5 + F6)
        return np.stack([g1, g2, g3, g4])


def _phi_functions(z):
    """phi_1..phi_3 for real z <= 0, series-switched near zero.

    phi_m(z) = sum_k z^k / (k + m)!; the closed forms cancel catastrophically
    as z -> 0, the truncated series converges to machine precision for
    |z| < 1/2.
    """
    import math

    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 0.5
    zs = np.where(small, z, 0.0)
    phi_series = []
    for order in (1, 2, 3):
        term = np.full_like(z, 1.0 / math.factorial(order))
        acc = term.copy()
        for k in range(1, 20):
            term = term * zs / (k + order)
            acc = acc + term
        phi_series.append(acc)
    zb = np.where(small, -1.0, z)
    ez = np.exp(zb)
    p1 = (ez - 1.0) / zb
    p2 = (ez - 1.0 - zb) / zb**2
    p3 = (ez - 1.0 - zb - 0.5 * zb**2) / zb**3
    return (
        np.where(small, phi_series[0], p1),
        np.where(small, phi_series[1], p2),
        np.where(small, phi_series[2], p3),
    )


def _step_ifrk4(u, ws, dt, nonlinear):
    E = np.exp(-0.5 * dt * ws.box.kh2)
    E2 = E * E
    g1 = ws.explicit_rhs(u, nonlinear)
    g2 = ws.explicit_rhs(E * (u + 0.5 * dt * g1), nonlinear)
    g3 = ws.explicit_rhs(E * u + 0.5 * dt * g2, nonlinear)
    g4 = ws.explicit_rhs(E2 * u + dt * E * g3, nonlinear)
    return E2 * u + (dt / 6.0) * (E2 * g1 + 2.0 * E * (g2 + g3) + g4)


def _step_etdrk4(u, ws, dt, nonlinear):
    z = -dt * ws.box.kh2
    E = np.exp(z)
    E2 = np.exp(0.5 * z)
    p1h, _, _ = _phi_functions(0.5 * z)
    p1, p2, p3 = _phi_functions(z)
    Q = 0.5 * dt * p1h
    Nu = ws.explicit_rhs(u, nonlinear)
    a = E2 * u + Q * Nu
    Na = ws.explicit_rhs(a, nonlinear)
    b = E2 * u + Q * Na
    Nb = ws.explicit_rhs(b, nonlinear)
    c = E2 * a + Q * (2.0 * Nb - Nu)
    Nc = ws.explicit_rhs(c, nonlinear)
    w1 = p1 - 3.0 * p2 + 4.0 * p3
    w2 = 2.0 * (p2 - 2.0 * p3)
    w3 = 4.0 * p3 - p2
    return E * u + dt * (w1 * Nu + w2 * (Na + Nb) + w3 * Nc)


def step(state, config, workspace=None):
    """Advance one state by config.dt; raises on non-finite values."""
    ws = workspace or _Workspace(state.box, config)
    config.validate_for_box(state.box)
    u = np.stack([f.coeffs for f in state.fields])
    if not np.all(np.isfinite(u.view(float))):
        raise NumericalBlowupError("non-finite state", time=state.time)
    stepper = _step_ifrk4 if config.scheme == "rk4-integrating-factor" else _step_etdrk4
    out = stepper(u, ws, config.dt, config.nonlinear)
    if not np.all(np.isfinite(out.view(float))):
        raise NumericalBlowupError("solution blew up", time=state.time + config.dt)
    return state_from_coeffs(state.box, *out, time=state.time + config.dt)


def _dissipation(u, box, volume):
    gh2 = box.kh2
    return float(sum(np.sum(gh2 * (c * np.conj(c)).real) for c in u) / volume)


def run(state0, config):
    """Integrate to t_end, emitting snapshots every snapshot_stride steps.

    The initial state is dealias-truncated and re-projected once so that the
    2/3-rule keeps the retained band alias-free for the whole run.  Flux
    snapshots for the Duhamel ledger are recorded at every step when
    ``config.record_fluxes`` is set.
    """
    from .linear import helmholtz3

    box = state0.box
    config.validate_for_box(box)
    ws = _Workspace(box, config)
    masked = state_from_coeffs(
        box, *(f.coeffs * ws.mask for f in state0.fields), time=state0.time
    )
    state = helmholtz3(masked)
    traj = Trajectory(config=config)

    def record(s):
        traj.states.append(s)
        traj.times.append(s.time)
        u = [f.coeffs for f in s.fields]
        traj.energies.append(s.l2_energy())
        traj.dissipations.append(_dissipation(u, box, box.volume))

    def record_flux(s):
        if config.record_fluxes:
            traj.flux_times.append(s.time)
            traj.fluxes.append(ws.fluxes([f.coeffs for f in s.fields]))

    record(state)
    record_flux(state)
    n_steps = int(round(config.t_end / config.dt))
    for i in range(1, n_steps + 1):
        state = step(state, config, ws)
        record_flux(state)
        if i % config.snapshot_stride == 0 or i == n_steps:
            record(state)
    return traj
