"""Mild-solution machinery: tagged Duhamel integrals over stored flux snapshots.

The nonlinear part of the solution splits into twenty tagged integrals: two
plain horizontal-heat terms feeding the rotational channel, and for each of
the three dispersive output channels six phase terms indexed by the flux
piece they consume.  Quadrature in the integration variable is composite
trapezoid over the ledger's stored snapshots, optionally subsampled to study
quadrature convergence.

The xi_h = 0 plane is outside the dispersive decomposition (every output
multiplier vanishes there by convention); its exact mild dynamics are plain
heat acting on the projected fluxes and are verified as the separate
``plane`` entry of :func:`mild_residual`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IncompleteLedgerError
from .grid import SpectralField, l2_norm_spectral
from .linear import helmholtz_h, propagate_linear

_CHANNELS = ("vel_h", "vel_v", "temp")

DUHAMEL_TAGS = ("D1", "D2") + tuple(
    f"{ch}{sign}:{j}" for ch in _CHANNELS for sign in "+-" for j in range(1, 7)
)


@dataclass
class DuhamelLedger:
    """Flux snapshots N(tau) stored at quadrature times."""

    box: object
    times: np.ndarray
    fluxes: list

    @classmethod
    def from_trajectory(cls, traj):
        if not traj.fluxes:
            raise IncompleteLedgerError(
                "trajectory carries no flux snapshots (run with record_fluxes=True)"
            )
        return cls(traj.initial.box, np.asarray(traj.flux_times), traj.fluxes)

    def quadrature_indices(self, t, stride=1, tol=1e-9):
        """Indices of the subsampled snapshots covering [times[0], t]."""
        idx = [i for i in range(0, len(self.times), stride)]
        sel = [i for i in idx if self.times[i] <= t + tol]
        if not sel or abs(self.times[sel[-1]] - t) > tol:
            raise IncompleteLedgerError(
                f"ledger does not cover [0, {t}] at stride {stride}"
            )
        return sel


def _parse_tag(tag):
    if tag in ("D1", "D2"):
        return ("heat", int(tag[1]))
    for ch in _CHANNELS:
        if tag.startswith(ch):
            rest = tag[len(ch) :]
            sign = rest[0]
            j = int(rest.split(":")[1])
            if sign in "+-" and 1 <= j <= 6:
                return (ch, (1 if sign == "+" else -1, j))
    raise ValueError(f"unknown Duhamel tag {tag!r}")


def _symbols(box):
    ok = box.nonzero_h
    kh2 = np.where(ok, box.kh2, 1.0)
    k2 = np.where(box.nonzero, box.k2, 1.0)
    bx = np.where(ok, -box.kx * box.kz / k2, 0.0)
    by = np.where(ok, -box.ky * box.kz / k2, 0.0)
    bz = np.where(ok, box.kh2 / k2, 0.0)
    inv_2om2 = np.where(ok, k2 / (2.0 * kh2), 0.0)
    inv_2om = np.where(ok, np.sqrt(k2) / (2.0 * np.sqrt(kh2)), 0.0)
    omega = np.where(box.nonzero, box.kh / np.sqrt(k2), 0.0)
    return ok, bx, by, bz, inv_2om2, inv_2om, omega


def _apply_channel_symbol(channel, sigma, j, box, S):
    """Map an accumulated flux integral S to the channel output fields.

    S is a pair of arrays for j in {1, 2} (horizontal flux slot) and a single
    array otherwise.
    """
    ok, bx, by, bz, inv_2om2, inv_2om, _ = _symbols(box)
    if j in (1, 2):
        core = (bx * S[0] + by * S[1]) * inv_2om2
        core_i = (bx * S[0] + by * S[1]) * inv_2om
    elif j in (3, 4):
        core = bz * S * inv_2om2
        core_i = bz * S * inv_2om
    else:
        core = core_i = None
    if channel == "vel_h":
        if j in (1, 2, 3, 4):
            return (SpectralField(box, bx * core), SpectralField(box, by * core))
        g = -sigma * 1j * inv_2om * S
        return (SpectralField(box, bx * g), SpectralField(box, by * g))
    if channel == "vel_v":
        if j in (1, 2, 3, 4):
            return SpectralField(box, bz * core)
        return SpectralField(box, -sigma * 1j * bz * inv_2om * S)
    # temp channel
    if j in (1, 2, 3, 4):
        return SpectralField(box, sigma * 1j * core_i)
    return SpectralField(box, np.where(ok, 0.5 * S, 0.0))


def _flux_piece(flux_tuple, j):
    return flux_tuple[j - 1]


def duhamel_term(ledger, tag, t, stride=1):
    """Evaluate one tagged Duhamel integral at time t.

    Returns a pair of fields for the horizontal tags (D1, D2 and the vel_h
    family via their 2-vector output) and a single field otherwise.
    """
    kind, info = _parse_tag(tag)
    box = ledger.box
    sel = ledger.quadrature_indices(t, stride)
    taus = ledger.times[sel]
    if len(sel) == 1:
        # empty integration interval
        if kind == "heat" or kind == "vel_h":
            return (SpectralField.zero(box), SpectralField.zero(box))
        return SpectralField.zero(box)
    weights = np.empty(len(sel))
    weights[1:-1] = 0.5 * (taus[2:] - taus[:-2])
    weights[0] = 0.5 * (taus[1] - taus[0])
    weights[-1] = 0.5 * (taus[-1] - taus[-2])

    if kind == "heat":
        j = info
        acc = [np.zeros(box.shape, dtype=complex) for _ in range(2)]
        for w, i, tau in zip(weights, sel, taus):
            heat = np.exp(-(t - tau) * box.kh2)
            F = _flux_piece(ledger.fluxes[i], j)
            acc[0] += w * heat * F[0]
            acc[1] += w * heat * F[1]
        return helmholtz_h((SpectralField(box, acc[0]), SpectralField(box, acc[1])))

    sigma, j = info
    _, _, _, _, _, _, omega = _symbols(box)
    pair = j in (1, 2)
    acc = [np.zeros(box.shape, dtype=complex) for _ in range(2 if pair else 1)]
    for w, i, tau in zip(weights, sel, taus):
        s = t - tau
        kern = np.exp(-s * box.kh2) * np.exp(1j * sigma * omega * s)
        F = _flux_piece(ledger.fluxes[i], j)
        if pair:
            acc[0] += w * kern * F[0]
            acc[1] += w * kern * F[1]
        else:
            acc[0] += w * kern * F
    S = (acc[0], acc[1]) if pair else acc[0]
    return _apply_channel_symbol(kind, sigma, j, box, S)


def _plane_mask(box):
    return ~box.nonzero_h


def mild_residual(trajectory, ledger, t, stride=1):
    """Channel-wise L^2 residual of the mild-solution identity at time t.

    Keys: the four decomposition channels (evaluated away from the xi_h = 0
    plane, the domain of the dispersive multipliers), the ``plane`` entry
    checking the plain-heat dynamics of that plane, ``total``, and the
    reference ``state_norm``.
    """
    state = trajectory.state_at(t)
    state0 = trajectory.initial
    lin = propagate_linear(state0, t - state0.time)
    box = state.box
    keep = box.nonzero_h.astype(float)

    def l2(arrs):
        return float(
            np.sqrt(sum(np.sum((a * np.conj(a)).real) for a in arrs) / box.volume)
        )

    # rotational channel: P_h projection already annihilates the plane
    d1 = duhamel_term(ledger, "D1", t, stride)
    d2 = duhamel_term(ledger, "D2", t, stride)
    got = helmholtz_h((state.v1, state.v2))
    want = helmholtz_h((lin.v1, lin.v2))
    res_ph = l2(
        [
            got[i].coeffs - (want[i].coeffs - d1[i].coeffs - d2[i].coeffs)
            for i in range(2)
        ]
    )

    sums = {}
    for ch in _CHANNELS:
        total = None
        for sign in "+-":
            for j in range(1, 7):
                term = duhamel_term(ledger, f"{ch}{sign}:{j}", t, stride)
                arrs = [f.coeffs for f in term] if isinstance(term, tuple) else [term.coeffs]
                if total is None:
                    total = arrs
                else:
                    total = [a + b for a, b in zip(total, arrs)]
        sums[ch] = total

    rot_t = got
    rot_lin = want
    curl_t = [state.v1.coeffs - rot_t[0].coeffs, state.v2.coeffs - rot_t[1].coeffs]
    curl_lin = [lin.v1.coeffs - rot_lin[0].coeffs, lin.v2.coeffs - rot_lin[1].coeffs]
    res_curl = l2(
        [keep * (ct - (cl - d)) for ct, cl, d in zip(curl_t, curl_lin, sums["vel_h"])]
    )
    res_v3 = l2([keep * (state.v3.coeffs - (lin.v3.coeffs - sums["vel_v"][0]))])
    res_th = l2([keep * (state.theta.coeffs - (lin.theta.coeffs - sums["temp"][0]))])

    # xi_h = 0 plane: heat factor is unity there; mild form is data minus the
    # time integral of the projected fluxes (vertical flux is annihilated)
    plane = _plane_mask(box).astype(float)
    sel = ledger.quadrature_indices(t, stride)
    taus = ledger.times[sel]
    weights = np.empty(len(sel))
    if len(sel) > 1:
        weights[1:-1] = 0.5 * (taus[2:] - taus[:-2])
        weights[0] = 0.5 * (taus[1] - taus[0])
        weights[-1] = 0.5 * (taus[-1] - taus[-2])
    else:
        weights[:] = 0.0
    accs = [np.zeros(box.shape, dtype=complex) for _ in range(3)]
    for w, i in zip(weights, sel):
        F1, F2, F3, F4, F5, F6 = ledger.fluxes[i]
        accs[0] += w * (F1[0] + F2[0])
        accs[1] += w * (F1[1] + F2[1])
        accs[2] += w * (F5 + F6)
    res_plane = l2(
        [
            plane * (state.v1.coeffs - (state0.v1.coeffs - accs[0])),
            plane * (state.v2.coeffs - (state0.v2.coeffs - accs[1])),
            plane * (state.theta.coeffs - (state0.theta.coeffs - accs[2])),
            plane * (state.v3.coeffs - state0.v3.coeffs),
        ]
    )

    out = {
        "Ph_vh": res_ph,
        "curlfree_vh": res_curl,
        "v3": res_v3,
        "theta": res_th,
        "plane": res_plane,
    }
    out["total"] = float(np.sqrt(sum(v * v for v in out.values())))
    out["state_norm"] = float(
        np.sqrt(sum(l2_norm_spectral(f) ** 2 for f in state.fields))
    )
    return out
