"""Composite norms: the data class X(s1, s2) and the weighted history norm Y(eps).

X combines an isotropic Sobolev part (sum over derivative multi-indices of
L^2 norms) with vertical-regularity L^1 control.  Y weights a family of decay
channels by their predicted (1+t) powers and takes suprema over a stored
trajectory; the supremum over Lebesgue exponents is probed on a finite,
configurable set, which monotone interpolation makes adequate for testing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dyadic import BesovSpec, besov_norm_components
from .errors import IncompleteHistoryError
from .grid import l2_norm_spectral, lp_norm_multi
from .linear import dispersive_gain

DEFAULT_P_PROBES = (2.0, 3.0, 4.0, 6.0, 10.0, np.inf)


@dataclass(frozen=True)
class XNormSpec:
    s1: int
    s2: int

    def __post_init__(self):
        if self.s1 < 0 or self.s2 < 0:
            raise ValueError("Sobolev orders must be nonnegative")


@dataclass(frozen=True)
class YNormSpec:
    epsilon: float
    p_probes: tuple = DEFAULT_P_PROBES

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.25:
            raise ValueError(f"epsilon must lie in (0, 1/4), got {self.epsilon}")


def _multi_indices(order):
    """All 3D derivative multi-indices with |alpha| <= order."""
    out = []
    for total in range(order + 1):
        for a1 in range(total + 1):
            for a2 in range(total - a1 + 1):
                out.append((a1, a2, total - a1 - a2))
    return out


def sobolev_norm(fields, order):
    """Sum over |alpha| <= order of the L^2 norms of d^alpha, spectrally."""
    fields = tuple(fields)
    box = fields[0].box
    power = sum(np.abs(f.coeffs) ** 2 for f in fields) / box.volume
    kx2 = box.kx.astype(float) ** 2
    ky2 = box.ky.astype(float) ** 2
    kz2 = box.kz.astype(float) ** 2
    total = 0.0
    for a1, a2, a3 in _multi_indices(order):
        total += math.sqrt(float(np.sum(kx2**a1 * ky2**a2 * kz2**a3 * power)))
    return total


def x_norm(fields, spec):
    """||.||_{X(s1,s2)} of one field or a tuple of components."""
    fields = (fields,) if not isinstance(fields, (tuple, list)) else tuple(fields)
    total = sobolev_norm(fields, spec.s1)
    for j in range(spec.s2 + 1):
        total += lp_norm_multi([f.deriv((0, 0, j)) for f in fields], 1.0)
    return total


def x_norm_state(state, spec):
    return x_norm(state.fields, spec)


_HORIZONTAL_ALPHAS = ((0, 0, 0), (1, 0, 0), (0, 1, 0))
_ALL_ALPHAS = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))


def _alpha_h(alpha):
    return alpha[0] + alpha[1]


def y_norm(history, spec):
    """Weighted supremum norm of a time-indexed trajectory.

    ``history`` is a sequence of states with increasing ``time``.  Returns the
    sum of all weighted channel suprema; raises if the history is empty.
    """
    history = list(history)
    if not history:
        raise IncompleteHistoryError("empty state history")
    times = [s.time for s in history]
    if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
        raise IncompleteHistoryError("history times must be strictly increasing")

    b_spec = BesovSpec(p=2.0, q=1.0, s1=1.0, s2=0.5)
    sup_h8 = 0.0
    sup_bh = 0.0
    sup_b3 = 0.0
    sup_l2_h = {(k, a): 0.0 for k in range(5) for a in _HORIZONTAL_ALPHAS}
    sup_l2_3 = {(k, a): 0.0 for k in range(5) for a in _HORIZONTAL_ALPHAS}
    sup_lp_vh = {(a, p): 0.0 for a in _ALL_ALPHAS for p in spec.p_probes}
    sup_lp_v3 = {(a, p): 0.0 for a in _HORIZONTAL_ALPHAS for p in spec.p_probes}
    sup_lp_th = {(a, p): 0.0 for a in _ALL_ALPHAS for p in spec.p_probes}

    for state in history:
        t = state.time
        w = 1.0 + t
        vh = (state.v1, state.v2)
        vh_th = (state.v1, state.v2, state.theta)
        sup_h8 = max(sup_h8, sobolev_norm(state.fields, 8))
        sup_bh = max(sup_bh, w * besov_norm_components(vh_th, b_spec))
        sup_b3 = max(sup_b3, w ** 1.25 * besov_norm_components((state.v3,), b_spec))
        for k, a in itertools.product(range(5), _HORIZONTAL_ALPHAS):
            alpha = (a[0], a[1], k)
            wgt = w ** (0.5 + 0.5 * _alpha_h(a))
            val = math.sqrt(sum(l2_norm_spectral(f.deriv(alpha)) ** 2 for f in vh_th))
            sup_l2_h[(k, a)] = max(sup_l2_h[(k, a)], wgt * val)
            wgt3 = w ** (0.75 + 0.5 * _alpha_h(a))
            sup_l2_3[(k, a)] = max(
                sup_l2_3[(k, a)], wgt3 * l2_norm_spectral(state.v3.deriv(alpha))
            )
        for a in _ALL_ALPHAS:
            dvh = [f.deriv(a) for f in vh]
            dth = state.theta.deriv(a)
            for p in spec.p_probes:
                invp = 0.0 if p == np.inf else 1.0 / p
                base = (1.0 - invp) + 0.5 * _alpha_h(a)
                sup_lp_vh[(a, p)] = max(sup_lp_vh[(a, p)], w**base * lp_norm_multi(dvh, p))
                sup_lp_th[(a, p)] = max(
                    sup_lp_th[(a, p)],
                    w ** (base + dispersive_gain(p, 0.0)) * lp_norm_multi([dth], p),
                )
        for a in _HORIZONTAL_ALPHAS:
            dv3 = state.v3.deriv(a)
            for p in spec.p_probes:
                invp = 0.0 if p == np.inf else 1.0 / p
                wgt = (1.0 - invp) + 0.5 * _alpha_h(a) + 0.25 + dispersive_gain(p, spec.epsilon)
                sup_lp_v3[(a, p)] = max(sup_lp_v3[(a, p)], w**wgt * lp_norm_multi([dv3], p))

    total = sup_h8 + sup_bh + sup_b3
    total += sum(sup_l2_h.values()) + sum(sup_l2_3.values())
    for table in (sup_lp_vh, sup_lp_v3, sup_lp_th):
        by_alpha = {}
        for (a, p), val in table.items():
            by_alpha[a] = max(by_alpha.get(a, 0.0), val)
        total += sum(by_alpha.values())
    return total


def composite_norm(data, spec):
    """Dispatch: X specs take a state (or field tuple), Y specs a history."""
    if isinstance(spec, XNormSpec):
        if hasattr(data, "fields"):
            return x_norm_state(data, spec)
        return x_norm(data, spec)
    if isinstance(spec, YNormSpec):
        return y_norm(data, spec)
    raise TypeError(f"unknown composite norm spec {spec!r}")
