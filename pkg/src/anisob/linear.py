"""Exact Fourier-side linear theory for the stratified system.

The linearized equations couple the velocity and the thermal disturbance
through a skew pair (buoyancy forcing and vertical advection of the
background profile).  After full Helmholtz projection the 4x4 per-mode
generator is real skew-symmetric,

    A(xi) = [[0, -b], [b^T, 0]],   b(xi) = (-xi_h xi3, |xi_h|^2) / |xi|^2,

with |b| = omega(xi) = |xi_h|/|xi|.  Everything here (propagator, spectral
projections, output multipliers) is derived from that generator, which keeps
all sign conventions pinned to the single Fourier convention of
:mod:`anisob.grid` and makes the time-zero reconstruction identities exact.
The propagator uses the Rodrigues closed form

    exp(-t A) = I - (sin(om t)/om) A + ((1 - cos(om t))/om^2) A^2,

whose removable limits (xi_h -> 0) are taken analytically, composed with the
exact horizontal heat factor exp(-t |xi_h|^2).
"""

from __future__ import annotations

import numpy as np

from .grid import BoussinesqState, SpectralField, state_from_coeffs

Q_TAGS = (
    "vel_h+",
    "vel_h-",
    "vel_v+",
    "vel_v-",
    "temp+",
    "temp-",
    "vel_v_tilde+",
    "vel_v_tilde-",
)

CHANNELS = ("Ph_vh", "curlfree_vh", "v3", "theta", "d3_v3")


# ---------------------------------------------------------------------------
# Helmholtz projections
# ---------------------------------------------------------------------------

def helmholtz3(state):
    """Project the velocity onto divergence-free fields; theta untouched."""
    box = state.box
    k2 = np.where(box.nonzero, box.k2, 1.0)
    div = (
        box.kx * state.v1.coeffs + box.ky * state.v2.coeffs + box.kz * state.v3.coeffs
    ) / k2
    div = np.where(box.nonzero, div, 0.0)
    return state_from_coeffs(
        box,
        state.v1.coeffs - box.kx * div,
        state.v2.coeffs - box.ky * div,
        state.v3.coeffs - box.kz * div,
        state.theta.coeffs,
        time=state.time,
    )


def helmholtz_h(vh):
    """Horizontal Helmholtz projection of an (f1, f2) pair; xi_h = 0 plane -> 0."""
    f1, f2 = vh
    box = f1.box
    kh2 = np.where(box.nonzero_h, box.kh2, 1.0)
    divh = (box.kx * f1.coeffs + box.ky * f2.coeffs) / kh2
    keep = box.nonzero_h
    return (
        SpectralField(box, np.where(keep, f1.coeffs - box.kx * divh, 0.0)),
        SpectralField(box, np.where(keep, f2.coeffs - box.ky * divh, 0.0)),
    )


# ---------------------------------------------------------------------------
# Per-mode symbol matrices (validation targets and dense-algebra oracles)
# ---------------------------------------------------------------------------

def coupling_matrix():
    """Constant skew coupling between the vertical velocity and theta."""
    J = np.zeros((4, 4))
    J[2, 3] = -1.0
    J[3, 2] = 1.0
    return J


def p_tilde_matrix(xi):
    """Block matrix: 3D Helmholtz projector on velocity, identity on theta."""
    xi = np.asarray(xi, dtype=float)
    n2 = float(xi @ xi)
    Pt = np.zeros((4, 4))
    Pt[3, 3] = 1.0
    if n2 == 0.0:
        Pt[:3, :3] = np.eye(3)
        return Pt
    Pt[:3, :3] = np.eye(3) - np.outer(xi, xi) / n2
    return Pt


def generator_matrix(xi):
    """A(xi) = P_tilde J P_tilde evaluated densely."""
    Pt = p_tilde_matrix(xi)
    return Pt @ coupling_matrix() @ Pt


def _b_vector(xi):
    xi = np.asarray(xi, dtype=float)
    n2 = float(xi @ xi)
    nh2 = float(xi[0] ** 2 + xi[1] ** 2)
    if n2 == 0.0 or nh2 == 0.0:
        return None, 0.0
    b = np.array([-xi[0] * xi[2], -xi[1] * xi[2], nh2]) / n2
    return b, float(np.sqrt(nh2 / n2))


def eigenprojection(xi, sigma):
    """Spectral projector of A(xi) onto the eigenvalue -sigma*i*omega(xi).

    sigma is one of 0, +1, -1.  Returns ``(matrix, valid)``; degenerate xi
    (zero, or zero horizontal part) yields a zero matrix with ``valid=False``.

    The sigma = +-1 projections are (sigma*i*A/(2 omega) - A^2/(2 omega^2)),
    assembled in closed form from the generator vector b; sigma = 0 is the
    horizontal Helmholtz block acting on the horizontal velocity alone.
    """
    if sigma not in (0, 1, -1):
        raise ValueError(f"sigma must be 0, +1 or -1, got {sigma}")
    b, omega = _b_vector(xi)
    if b is None:
        return np.zeros((4, 4), dtype=complex), False
    P = np.zeros((4, 4), dtype=complex)
    if sigma == 0:
        xi = np.asarray(xi, dtype=float)
        nh2 = xi[0] ** 2 + xi[1] ** 2
        P[:2, :2] = np.eye(2) - np.outer(xi[:2], xi[:2]) / nh2
        return P, True
    P[:3, :3] = np.outer(b, b) / (2.0 * omega**2)
    P[:3, 3] = -sigma * 1j * b / (2.0 * omega)
    P[3, :3] = sigma * 1j * b / (2.0 * omega)
    P[3, 3] = 0.5
    return P, True


def rodrigues_matrix(xi, t):
    """Closed-form exp(-t A(xi)) via the skew generator; exact at omega -> 0."""
    A = generator_matrix(xi)
    _, omega = _b_vector(xi)
    x = omega * t
    s1 = t * np.sinc(x / np.pi)
    s2 = 0.5 * t * t * np.sinc(x / (2.0 * np.pi)) ** 2
    return np.eye(4) - s1 * A + s2 * (A @ A)


# ---------------------------------------------------------------------------
# Whole-lattice propagation
# ---------------------------------------------------------------------------

def _lattice_generator(box):
    """b components, omega and the heat symbol base on the full lattice."""
    k2 = np.where(box.nonzero, box.k2, 1.0)
    bx = np.where(box.nonzero, -box.kx * box.kz / k2, 0.0)
    by = np.where(box.nonzero, -box.ky * box.kz / k2, 0.0)
    bz = np.where(box.nonzero, box.kh2 / k2, 0.0)
    omega = np.where(box.nonzero, box.kh / np.sqrt(k2), 0.0)
    return bx, by, bz, omega


def heat_semigroup(field, t):
    """Horizontal heat flow exp(t Delta_h) for t >= 0."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return field.apply_symbol(np.exp(-t * field.box.kh2))


def propagate_linear(state0, t):
    """Exact solution of the linearized system at time state0.time + t."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    box = state0.box
    bx, by, bz, omega = _lattice_generator(box)
    x = omega * t
    s1 = t * np.sinc(x / np.pi)
    s2 = 0.5 * t * t * np.sinc(x / (2.0 * np.pi)) ** 2
    heat = np.exp(-t * box.kh2)

    v1, v2, v3, th = (f.coeffs for f in state0.fields)
    bv = bx * v1 + by * v2 + bz * v3
    v1_t = heat * (v1 + s1 * th * bx - s2 * bv * bx)
    v2_t = heat * (v2 + s1 * th * by - s2 * bv * by)
    v3_t = heat * (v3 + s1 * th * bz - s2 * bv * bz)
    th_t = heat * ((1.0 - s2 * omega**2) * th - s1 * bv)
    return state_from_coeffs(box, v1_t, v2_t, v3_t, th_t, time=state0.time + t)


def linear_rhs(state):
    """Right-hand side of the linearized system (heat + projected skew terms).

    Used by time-stepping oracles; the production propagator never calls it.
    """
    box = state.box
    bx, by, bz, _ = _lattice_generator(box)
    v1, v2, v3, th = (f.coeffs for f in state.fields)
    bv = bx * v1 + by * v2 + bz * v3
    heat = -box.kh2
    return (
        heat * v1 + th * bx,
        heat * v2 + th * by,
        heat * v3 + th * bz,
        heat * th - bv,
    )


# ---------------------------------------------------------------------------
# Output multipliers (rows of the spectral projections)
# ---------------------------------------------------------------------------

def _q_pieces(state0):
    """Shared building blocks of all Q multipliers on the lattice."""
    box = state0.box
    ok = box.nonzero_h
    kh2 = np.where(ok, box.kh2, 1.0)
    k2 = np.where(box.nonzero, box.k2, 1.0)
    kh = np.sqrt(kh2)
    kmag = np.sqrt(k2)
    v1, v2, v3, th = (f.coeffs for f in state0.fields)
    # b . u_hat split into a well-scaled pair: G = (b.v)/(2 omega^2),
    # H = (b.v)/(2 omega), T = theta/(2 omega)
    bv = (-box.kz * (box.kx * v1 + box.ky * v2) + kh2 * v3) / k2
    G = np.where(ok, bv * k2 / (2.0 * kh2), 0.0)
    H = np.where(ok, bv * kmag / (2.0 * kh), 0.0)
    T = np.where(ok, th * kmag / (2.0 * kh), 0.0)
    bx = np.where(ok, -box.kx * box.kz / k2, 0.0)
    by = np.where(ok, -box.ky * box.kz / k2, 0.0)
    bz = np.where(ok, kh2 / k2, 0.0)
    return box, ok, bx, by, bz, G, H, T, th, kh


def q_multiplier(tag, state0):
    """Evaluate one tagged output multiplier on an initial state.

    Tags ``vel_h{+,-}`` return the two horizontal-velocity fields; the other
    tags return one field.  All symbols are 0-homogeneous and vanish on the
    degenerate planes xi = 0 and xi_h = 0.
    """
    if tag not in Q_TAGS:
        raise ValueError(f"unknown multiplier tag {tag!r}")
    sigma = 1 if tag.endswith("+") else -1
    kind = tag.rstrip("+-")
    box, ok, bx, by, bz, G, H, T, th, kh = _q_pieces(state0)
    if kind == "vel_h":
        c1 = bx * G - sigma * 1j * bx * T
        c2 = by * G - sigma * 1j * by * T
        return (SpectralField(box, c1), SpectralField(box, c2))
    if kind == "vel_v":
        return SpectralField(box, bz * G - sigma * 1j * bz * T)
    if kind == "temp":
        return SpectralField(box, sigma * 1j * H + np.where(ok, 0.5 * th, 0.0))
    # vel_v_tilde: (i xi3 / |xi_h|) times the vel_v row, still 0-homogeneous
    core = bz * G - sigma * 1j * bz * T
    return SpectralField(box, np.where(ok, 1j * box.kz * core / np.where(ok, kh, 1.0), 0.0))


def q_reconstruction(state0):
    """Time-zero reconstruction from the multiplier channels.

    Returns (curl-free v_h pair, v3, theta) obtained by summing the +- output
    multipliers; for divergence-free data this reproduces the corresponding
    components of the initial state exactly.
    """
    box = state0.box
    parts_h = [q_multiplier(f"vel_h{s}", state0) for s in "+-"]
    ch1 = sum(p[0].coeffs for p in parts_h)
    ch2 = sum(p[1].coeffs for p in parts_h)
    v3 = sum(q_multiplier(f"vel_v{s}", state0).coeffs for s in "+-")
    th = sum(q_multiplier(f"temp{s}", state0).coeffs for s in "+-")
    return (
        (SpectralField(box, ch1), SpectralField(box, ch2)),
        SpectralField(box, v3),
        SpectralField(box, th),
    )


# ---------------------------------------------------------------------------
# Theoretical decay-rate table
# ---------------------------------------------------------------------------

def dispersive_gain(p, epsilon):
    """min{(3/4 - epsilon)(1 - 2/p), 1/4}; the large-p saturation floor."""
    return min((0.75 - epsilon) * (1.0 - 2.0 / p), 0.25)


def theoretical_exponent(channel, alpha_h, p, regime, epsilon=0.05):
    """Predicted decay exponent of (1+t) for one norm channel.

    channel: one of CHANNELS; alpha_h: number of horizontal derivatives
    (0 or 1); p: Lebesgue exponent in [2, inf]; regime: 'linear' or
    'nonlinear'.
    """
    if channel not in CHANNELS:
        raise ValueError(f"unknown channel {channel!r}")
    if regime not in ("linear", "nonlinear"):
        raise ValueError(f"regime must be 'linear' or 'nonlinear', got {regime!r}")
    if not 0.0 < epsilon < 0.25:
        raise ValueError(f"epsilon must lie in (0, 1/4), got {epsilon}")
    invp = 0.0 if p == np.inf else 1.0 / p
    base = -(1.0 - invp) - 0.5 * alpha_h
    disp_lin = 0.75 * (1.0 - 2.0 * invp)
    if channel == "Ph_vh":
        return base
    if channel in ("curlfree_vh", "theta"):
        gain = disp_lin if regime == "linear" else dispersive_gain(p, 0.0)
        return base - gain
    if channel == "v3":
        gain = (0.75 - epsilon) * (1.0 - 2.0 * invp) if regime == "linear" else dispersive_gain(p, epsilon)
        return base - 0.25 - gain
    # d3_v3 rides on the curl-free channel with one extra horizontal derivative
    if alpha_h != 0:
        raise ValueError("d3_v3 channel carries no extra derivatives")
    gain = disp_lin if regime == "linear" else dispersive_gain(p, 0.0)
    return base - 0.5 - gain


def decay_rate_table(epsilon, p_values=(2.0, 3.0, 4.0, 6.0, 10.0, np.inf)):
    """Full channel table: (regime, channel, alpha_h, p) -> exponent."""
    if not 0.0 < epsilon < 0.25:
        raise ValueError(f"epsilon must lie in (0, 1/4), got {epsilon}")
    table = {}
    for regime in ("linear", "nonlinear"):
        for channel in CHANNELS:
            orders = (0,) if channel == "d3_v3" else (0, 1)
            for alpha_h in orders:
                for p in p_values:
                    table[(regime, channel, alpha_h, p)] = theoretical_exponent(
                        channel, alpha_h, p, regime, epsilon
                    )
    return table
