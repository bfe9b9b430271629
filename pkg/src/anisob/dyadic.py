"""Anisotropic dyadic frequency blocks and Besov norms.

The profile phi is a smooth bump with values in [0, 1], support exactly
[1/2, 2], and the dyadic partition identity sum_j phi(2^-j r) = 1 on (0, inf).
It is built from the standard exp(-1/x) glue and normalized by the dyadic sum
itself, which makes the partition identity hold to machine rounding rather
than up to construction error.  Blocks weight the coefficients by
phi(2^-j |xi_h|) * phi(2^-k |xi_3|); on a finite lattice only finitely many
(j, k) give a nonzero weight, and the block sum reproduces a field minus its
xi_h = 0 and xi_3 = 0 planes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import SpectralField, lp_norm, l2_norm_spectral


# ---------------------------------------------------------------------------
# The dyadic profile
# ---------------------------------------------------------------------------

def _glue(x):
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def _smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a = _glue(x)
    return a / (a + _glue(1.0 - x))


def _raw_bump(r):
    """Unnormalized bump, positive exactly on (1/2, 2), peak value 1 at r = 1."""
    return _smoothstep(2.0 * (r - 0.5)) * _smoothstep(2.0 - r)


def dyadic_profile(r):
    """phi(r): normalized dyadic bump; phi(1) = 1 and supp phi = [1/2, 2]."""
    r = np.asarray(r, dtype=float)
    g = _raw_bump(r)
    den = _raw_bump(0.5 * r) + g + _raw_bump(2.0 * r)
    out = np.divide(g, den, out=np.zeros_like(g), where=g > 0)
    return out if out.ndim else float(out)


def dyadic_profile_wide(r):
    """phi_tilde(r) = phi(r/2) + phi(r) + phi(2r); equals 1 on [1/2, 2]."""
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = dyadic_profile(0.5 * r) + dyadic_profile(r) + dyadic_profile(2.0 * r)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class DyadicIndex:
    """Horizontal shell j, vertical shell k."""

    j: int
    k: int


@dataclass(frozen=True)
class BesovSpec:
    """Anisotropic Besov norm parameters (p, q, s1, s2)."""

    p: float
    q: float
    s1: float
    s2: float

    def __post_init__(self):
        for e in (self.p, self.q):
            if not (1.0 <= e):
                raise ValueError(f"integrability exponents must lie in [1, inf], got {e}")


# ---------------------------------------------------------------------------
# Block weights on a lattice
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def shell_range(box):
    """(j values, k values) whose blocks are not identically zero on the box."""
    kh = np.sqrt(box.kh2[:, :, 0])
    kz = np.abs(box.wavenumbers(2))
    js, ks = [], []
    for vals, acc in ((kh[kh > 0], js), (kz[kz > 0], ks)):
        lo = int(math.floor(math.log2(vals.min()))) - 1
        hi = int(math.ceil(math.log2(vals.max()))) + 1
        for j in range(lo, hi + 1):
            if np.any(dyadic_profile(vals * 2.0**-j) > 0):
                acc.append(j)
    return tuple(js), tuple(ks)


@lru_cache(maxsize=512)
def _horizontal_weight(box, j):
    w = dyadic_profile(np.sqrt(box.kh2[:, :, 0]) * 2.0**-j)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=512)
def _vertical_weight(box, k):
    w = dyadic_profile(np.abs(box.wavenumbers(2)) * 2.0**-k)
    w.setflags(write=False)
    return w


def block_weight(box, idx):
    """Full 3D multiplier of the (j, k) block."""
    return _horizontal_weight(box, idx.j)[:, :, None] * _vertical_weight(box, idx.k)[None, None, :]


def lp_block(field, idx):
    """Frequency-localize a field to one anisotropic dyadic block."""
    return field.apply_symbol(block_weight(field.box, idx))


def block_sum(field):
    """Sum of all blocks: the field minus its xi_h = 0 and xi_3 = 0 planes."""
    box = field.box
    js, ks = shell_range(box)
    wh = np.zeros_like(_horizontal_weight(box, js[0]))
    for j in js:
        wh = wh + _horizontal_weight(box, j)
    wv = np.zeros_like(_vertical_weight(box, ks[0]))
    for k in ks:
        wv = wv + _vertical_weight(box, k)
    return field.apply_symbol(wh[:, :, None] * wv[None, None, :])


def remove_degenerate_planes(field):
    """Zero the xi_h = 0 and xi_3 = 0 planes (modes no block can see)."""
    box = field.box
    keep = box.nonzero_h & (np.abs(box.kz) > 0)
    return field.apply_symbol(np.where(keep, 1.0, 0.0))


# ---------------------------------------------------------------------------
# Besov norms
# ---------------------------------------------------------------------------

def _block_lp(field, idx, p):
    if p == 2.0:
        return l2_norm_spectral(lp_block(field, idx))
    return lp_norm(lp_block(field, idx), p)


def besov_norm(field, spec):
    """ell^q over (j, k) of 2^(s1 j) 2^(s2 k) ||block||_{L^p}."""
    js, ks = shell_range(field.box)
    terms = []
    for j in js:
        for k in ks:
            val = _block_lp(field, DyadicIndex(j, k), spec.p)
            if val > 0.0:
                terms.append(2.0 ** (spec.s1 * j + spec.s2 * k) * val)
    if not terms:
        return 0.0
    terms = np.asarray(terms)
    if spec.q == np.inf:
        return float(terms.max())
    return float(np.sum(terms**spec.q) ** (1.0 / spec.q))


def besov_norm_components(fields, spec):
    """Besov norm of a vector field: blockwise L^p of the pointwise magnitude.

    Only the p = 2 case is needed by the composite norms, where it reduces to
    the root-sum-square of per-component block norms (Plancherel).
    """
    if spec.p != 2.0:
        raise NotImplementedError("vector Besov norms are implemented for p = 2 only")
    js, ks = shell_range(fields[0].box)
    terms = []
    for j in js:
        for k in ks:
            idx = DyadicIndex(j, k)
            val = math.sqrt(sum(l2_norm_spectral(lp_block(f, idx)) ** 2 for f in fields))
            if val > 0.0:
                terms.append(2.0 ** (spec.s1 * j + spec.s2 * k) * val)
    if not terms:
        return 0.0
    terms = np.asarray(terms)
    if spec.q == np.inf:
        return float(terms.max())
    return float(np.sum(terms**spec.q) ** (1.0 / spec.q))


# ---------------------------------------------------------------------------
# Inequality probes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatioReport:
    """One measured inequality ratio; ``defined`` is False on a 0/0 probe."""

    ratio: float
    numerator: float
    denominator: float
    defined: bool


def bernstein_check(field, idx, p1, p2):
    """||block||_{p2} against the 2^(2j(1/p1-1/p2)) 2^(k(1/p1-1/p2)) scaling."""
    if p1 > p2:
        raise ValueError("requires p1 <= p2")
    block = lp_block(field, idx)
    num = lp_norm(block, p2)
    ip1 = 0.0 if p1 == np.inf else 1.0 / p1
    ip2 = 0.0 if p2 == np.inf else 1.0 / p2
    den = 2.0 ** (2.0 * (ip1 - ip2) * idx.j) * 2.0 ** ((ip1 - ip2) * idx.k) * lp_norm(block, p1)
    if den == 0.0:
        return RatioReport(float("nan"), num, den, False)
    return RatioReport(num / den, num, den, True)


def paraproduct_ratio(f, g, dealias_fraction=2.0 / 3.0):
    """||fg||_B / (||f||_B ||g||_B) in B^{1,1/2}_{2,1}; None when undefined."""
    from .grid import forward_transform, inverse_transform

    spec = BesovSpec(p=2.0, q=1.0, s1=1.0, s2=0.5)
    nf = besov_norm(f, spec)
    ng = besov_norm(g, spec)
    if nf == 0.0 or ng == 0.0:
        return None
    mask = f.box.dealias_mask(dealias_fraction)
    prod = forward_transform(inverse_transform(f) * inverse_transform(g), f.box)
    prod = prod.apply_symbol(np.where(mask, 1.0, 0.0))
    return besov_norm(prod, spec) / (nf * ng)
