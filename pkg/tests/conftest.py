"""Shared fixtures: small boxes and smooth random fields/states."""

import numpy as np
import pytest

from anisob.grid import BoxSpec, forward_transform, state_from_coeffs
from anisob.linear import helmholtz3


@pytest.fixture
def small_box():
    return BoxSpec(12, 12, 8, 2 * np.pi, 2 * np.pi, 2 * np.pi)


@pytest.fixture
def cube_box():
    return BoxSpec(16, 16, 16, 2 * np.pi, 2 * np.pi, 2 * np.pi)


def smooth_random_field(box, seed, decay=2.0):
    """Random real field with spectrally decaying, Nyquist-free coefficients."""
    rng = np.random.default_rng(seed)
    phys = rng.standard_normal(box.shape)
    f = forward_transform(phys, box)
    damp = np.exp(-decay * (box.k2 / box.k2.max()) ** 0.5 * 4.0)
    mx, my, mz = box.not_nyquist
    return f.apply_symbol(damp * mx * my * mz)


def random_divfree_state(box, seed, decay=2.0, time=0.0):
    """Smooth random divergence-free state (projected, mean-free velocity)."""
    comps = [smooth_random_field(box, seed + i, decay).coeffs for i in range(4)]
    state = state_from_coeffs(box, *comps, time=time)
    return helmholtz3(state)


@pytest.fixture
def random_field(small_box):
    return smooth_random_field(small_box, seed=7)


@pytest.fixture
def divfree_state(small_box):
    return random_divfree_state(small_box, seed=11)
