"""Norm channels and decay-exponent measurement.

A channel is one component family (rotational or curl-free horizontal
velocity, vertical velocity, temperature, or the vertical derivative of the
vertical velocity), a derivative multi-index with at most one derivative, and
a Lebesgue exponent.  Decay fits are least-squares slopes of log norm against
log(1 + t) inside a window that ends before periodic wrap-around can pollute
the whole-space asymptotics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WindowError
from .grid import lp_norm_multi
from .linear import helmholtz_h, theoretical_exponent

COMPONENTS = ("Ph_vh", "curlfree_vh", "v3", "theta", "d3_v3")
DEFAULT_P_VALUES = (2.0, 3.0, 4.0, 6.0, 10.0, np.inf)
NORM_FLOOR = 1e-13


@dataclass(frozen=True)
class Channel:
    component: str
    alpha: tuple = (0, 0, 0)
    p: float = 2.0

    def __post_init__(self):
        if self.component not in COMPONENTS:
            raise ValueError(f"unknown component {self.component!r}")
        if len(self.alpha) != 3 or sum(self.alpha) > 1 or min(self.alpha) < 0:
            raise ValueError("alpha must be a multi-index with |alpha| <= 1")
        if self.component == "v3" and self.alpha[2] != 0:
            raise ValueError("the v3 channel carries horizontal derivatives only")
        if self.component == "d3_v3" and sum(self.alpha) != 0:
            raise ValueError("the d3_v3 channel carries no extra derivatives")
        if not (self.p == np.inf or self.p >= 1.0):
            raise ValueError(f"p must lie in [1, inf], got {self.p}")

    @property
    def alpha_h(self):
        return self.alpha[0] + self.alpha[1]

    @property
    def label(self):
        a = "".join(str(v) for v in self.alpha)
        p = "inf" if self.p == np.inf else f"{self.p:g}"
        return f"{self.component}[{a}]p{p}"


def channel_fields(state, component):
    """Extract the spectral fields of one component family."""
    if component == "Ph_vh":
        return list(helmholtz_h((state.v1, state.v2)))
    if component == "curlfree_vh":
        rot = helmholtz_h((state.v1, state.v2))
        return [state.v1 - rot[0], state.v2 - rot[1]]
    if component == "v3":
        return [state.v3]
    if component == "theta":
        return [state.theta]
    if component == "d3_v3":
        return [state.v3.deriv((0, 0, 1))]
    raise ValueError(f"unknown component {component!r}")


def channel_norm(state, channel):
    fields = [f.deriv(channel.alpha) for f in channel_fields(state, channel.component)]
    return lp_norm_multi(fields, channel.p)


def channel_norms_bulk(state, channels):
    """Norms of many channels, reusing physical transforms per field family."""
    from .grid import inverse_transform, lp_norm_array

    cell = state.box.cell_volume
    out = {}
    by_family = {}
    for ch in channels:
        by_family.setdefault((ch.component, ch.alpha), []).append(ch)
    for (component, alpha), group in by_family.items():
        mags = np.stack(
            [
                inverse_transform(f.deriv(alpha))
                for f in channel_fields(state, component)
            ]
        )
        mag = np.sqrt(np.sum(mags * mags, axis=0))
        for ch in group:
            out[ch] = lp_norm_array(mag, ch.p, cell)
    return out


def wrap_time(box, c_max=1.0):
    """Time at which periodic images can re-enter: half the smallest side."""
    return min(box.Lx, box.Ly, box.Lz) / (2.0 * c_max)


@dataclass(frozen=True)
class DecayFit:
    channel: Channel
    t0: float
    t1: float
    slope: float
    stderr: float
    residual: float
    theory: float
    verdict: str
    n_samples: int


def fit_loglog(times, values, floor=NORM_FLOOR):
    """Least-squares slope of log(values) vs log(1 + times)."""
    x = np.log1p(np.asarray(times, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, res, _, _ = np.linalg.lstsq(A, y, rcond=None)
    n = len(x)
    resid = float(np.sqrt(res[0] / n)) if res.size else 0.0
    denom = np.sum((x - x.mean()) ** 2)
    stderr = float(np.sqrt(max(res[0], 0.0) / max(n - 2, 1) / denom)) if res.size else 0.0
    return float(coef[0]), stderr, resid


def measure_decay(
    states,
    channel,
    t0=5.0,
    t1=None,
    regime="linear",
    epsilon=0.05,
    pass_slack=0.15,
    min_samples=8,
):
    """Fit one channel's decay exponent over the valid window.

    PASS means the measured slope is at most the theoretical exponent plus
    the slack (decay at least as fast as predicted: the theory gives upper
    bounds).  Norms at the quadrature floor give INCONCLUSIVE.
    """
    states = list(states)
    if not states:
        raise WindowError("no states supplied")
    box = states[0].box
    if t1 is None:
        t1 = wrap_time(box)
    window = [s for s in states if t0 - 1e-9 <= s.time <= t1 + 1e-9]
    if len(window) < min_samples:
        raise WindowError(
            f"window [{t0}, {t1}] holds {len(window)} samples; need {min_samples}"
        )
    times = [s.time for s in window]
    values = [channel_norm(s, channel) for s in window]
    theory = theoretical_exponent(
        channel.component, channel.alpha_h, channel.p, regime, epsilon
    )
    if min(values) <= NORM_FLOOR:
        return DecayFit(channel, t0, t1, float("nan"), 0.0, 0.0, theory, "INCONCLUSIVE", len(window))
    slope, stderr, resid = fit_loglog(times, values)
    verdict = "PASS" if slope <= theory + pass_slack else "FAIL"
    return DecayFit(channel, t0, t1, slope, stderr, resid, theory, verdict, len(window))
