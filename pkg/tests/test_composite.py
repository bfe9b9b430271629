"""Composite data norms X(s1,s2) and the weighted trajectory norm Y(eps)."""

import numpy as np
import pytest

from anisob.composite import (
    XNormSpec,
    YNormSpec,
    composite_norm,
    sobolev_norm,
    x_norm,
    y_norm,
)
from anisob.dyadic import BesovSpec, besov_norm_components
from anisob.errors import IncompleteHistoryError
from anisob.grid import l2_norm_spectral, lp_norm, lp_norm_multi, zero_state
from anisob.linear import dispersive_gain

from conftest import random_divfree_state, smooth_random_field


class TestXNorm:
    def test_zero_order_is_l2_plus_l1(self, random_field):
        got = x_norm(random_field, XNormSpec(0, 0))
        want = lp_norm(random_field, 2.0) + lp_norm(random_field, 1.0)
        assert got == pytest.approx(want, rel=1e-12)

    def test_homogeneous_degree_one(self, random_field):
        spec = XNormSpec(2, 1)
        assert x_norm(3.0 * random_field, spec) == pytest.approx(
            3.0 * x_norm(random_field, spec), rel=1e-12
        )

    def test_state_combines_components(self, divfree_state):
        spec = XNormSpec(1, 1)
        assert composite_norm(divfree_state, spec) > 0.0

    def test_sobolev_reference_single_mode(self, small_box):
        # cos(2 x1): derivative terms contribute powers of the wavenumber 2
        x = small_box.grid_coordinates(0)[:, None, None]
        from anisob.grid import forward_transform

        f = forward_transform(np.cos(2 * x) * np.ones(small_box.shape), small_box)
        base = l2_norm_spectral(f)
        # |alpha| <= 1 multi-indices: 1 + |k| weights on the two axes with k = (2, 0, 0)
        want = base * (1.0 + 2.0)
        assert sobolev_norm((f,), 1) == pytest.approx(want, rel=1e-12)

    def test_invalid_orders_rejected(self):
        with pytest.raises(ValueError):
            XNormSpec(-1, 0)


class TestYNorm:
    def test_epsilon_range_enforced(self):
        with pytest.raises(ValueError):
            YNormSpec(0.3)
        with pytest.raises(ValueError):
            YNormSpec(0.0)

    def test_empty_history_raises(self):
        with pytest.raises(IncompleteHistoryError):
            y_norm([], YNormSpec(0.05))

    def test_non_monotone_history_raises(self, small_box):
        s = zero_state(small_box)
        with pytest.raises(IncompleteHistoryError):
            y_norm([s.with_time(1.0), s.with_time(0.5)], YNormSpec(0.05))

    def test_zero_history_is_zero(self, small_box):
        hist = [zero_state(small_box).with_time(t) for t in (0.0, 1.0, 2.0)]
        assert y_norm(hist, YNormSpec(0.05)) == 0.0

    def test_frozen_state_weight_table(self, small_box):
        """A time-independent state: Y equals the hand-built weight sum."""
        state = random_divfree_state(small_box, seed=77)
        spec = YNormSpec(0.05, p_probes=(2.0, np.inf))
        times = (0.0, 3.0, 9.0)
        hist = [state.with_time(t) for t in times]
        got = y_norm(hist, spec)

        w = 1.0 + times[-1]  # all suprema sit at the last snapshot
        b = BesovSpec(2.0, 1.0, 1.0, 0.5)
        vh_th = (state.v1, state.v2, state.theta)
        expected = sobolev_norm(state.fields, 8)
        expected += w * besov_norm_components(vh_th, b)
        expected += w**1.25 * besov_norm_components((state.v3,), b)
        alphas_h = ((0, 0, 0), (1, 0, 0), (0, 1, 0))
        for k in range(5):
            for a in alphas_h:
                alpha = (a[0], a[1], k)
                ah = a[0] + a[1]
                val = np.sqrt(sum(l2_norm_spectral(f.deriv(alpha)) ** 2 for f in vh_th))
                expected += w ** (0.5 + 0.5 * ah) * val
                expected += w ** (0.75 + 0.5 * ah) * l2_norm_spectral(state.v3.deriv(alpha))
        alphas = alphas_h + ((0, 0, 1),)
        for a in alphas:
            ah = a[0] + a[1]
            best_vh = best_th = 0.0
            for p in spec.p_probes:
                invp = 0.0 if p == np.inf else 1.0 / p
                base = (1.0 - invp) + 0.5 * ah
                best_vh = max(
                    best_vh, w**base * lp_norm_multi([state.v1.deriv(a), state.v2.deriv(a)], p)
                )
                best_th = max(
                    best_th,
                    w ** (base + dispersive_gain(p, 0.0)) * lp_norm_multi([state.theta.deriv(a)], p),
                )
            expected += best_vh + best_th
        for a in alphas_h:
            ah = a[0] + a[1]
            best = 0.0
            for p in spec.p_probes:
                invp = 0.0 if p == np.inf else 1.0 / p
                wgt = (1.0 - invp) + 0.5 * ah + 0.25 + dispersive_gain(p, spec.epsilon)
                best = max(best, w**wgt * lp_norm_multi([state.v3.deriv(a)], p))
            expected += best
        assert got == pytest.approx(expected, rel=1e-12)

    def test_frozen_state_grows_with_horizon(self, small_box):
        state = random_divfree_state(small_box, seed=5)
        spec = YNormSpec(0.05, p_probes=(2.0, np.inf))
        y1 = y_norm([state.with_time(t) for t in (0.0, 1.0)], spec)
        y2 = y_norm([state.with_time(t) for t in (0.0, 1.0, 7.0)], spec)
        assert y2 > y1
        # largest channel weight bounds the growth of the ratio
        assert y2 <= (8.0 / 2.0) ** 2.0 * y1
