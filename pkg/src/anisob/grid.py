"""Periodic-box discretization: spectral fields, transforms, and L^p quadrature.

Conventions, fixed once for the whole package:

* wavenumber on axis ``a`` at index ``i`` is ``2*pi*wrap(i, n)/L`` with
  ``wrap`` mapping to ``[-n/2, n/2)`` (FFT ordering);
* spectral coefficients approximate ``u_hat(xi) = integral u exp(-i x.xi) dx``,
  i.e. the DFT scaled by the cell volume;
* every multiplier with ``|xi|`` or ``|xi_h|`` in a denominator sends the
  degenerate modes (``xi = 0`` resp. ``xi_h = 0``) to zero.

Fields are immutable once constructed (coefficient buffers are marked
read-only); all reductions use numpy's deterministic pairwise summation, so
norms are reproducible bit-for-bit across runs and worker counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import CorruptFieldError, NumericalBlowupError, ShapeMismatchError

_WORKERS = -1  # scipy.fft thread pool; per-line transforms stay deterministic


@dataclass(frozen=True)
class BoxSpec:
    """Periodic box with an even number of grid points per axis."""

    nx: int
    ny: int
    nz: int
    Lx: float
    Ly: float
    Lz: float

    def __post_init__(self):
        for n in (self.nx, self.ny, self.nz):
            if n < 4 or n % 2 != 0:
                raise ValueError(f"grid points per axis must be even and >= 4, got {n}")
        for L in (self.Lx, self.Ly, self.Lz):
            if not L > 0:
                raise ValueError(f"box side lengths must be positive, got {L}")

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)

    @property
    def volume(self):
        return self.Lx * self.Ly * self.Lz

    @property
    def cell_volume(self):
        return self.volume / (self.nx * self.ny * self.nz)

    def wavenumbers(self, axis):
        """1D wavenumber array for one axis, FFT-ordered."""
        n = self.shape[axis]
        L = (self.Lx, self.Ly, self.Lz)[axis]
        return 2.0 * np.pi * sfft.fftfreq(n, d=1.0 / n) / L

    def grid_coordinates(self, axis):
        n = self.shape[axis]
        L = (self.Lx, self.Ly, self.Lz)[axis]
        return np.arange(n) * (L / n)

    @cached_property
    def kx(self):
        return self.wavenumbers(0)[:, None, None]

    @cached_property
    def ky(self):
        return self.wavenumbers(1)[None, :, None]

    @cached_property
    def kz(self):
        return self.wavenumbers(2)[None, None, :]

    @cached_property
    def kh2(self):
        """|xi_h|^2 on the full lattice."""
        return self.kx**2 + self.ky**2

    @cached_property
    def k2(self):
        return self.kh2 + self.kz**2

    @cached_property
    def kh(self):
        return np.sqrt(self.kh2)

    @cached_property
    def kmag(self):
        return np.sqrt(self.k2)

    @cached_property
    def nonzero_h(self):
        """Mask of modes with xi_h != 0."""
        return self.kh2 > 0

    @cached_property
    def nonzero(self):
        return self.k2 > 0

    @cached_property
    def not_nyquist(self):
        """Per-axis masks excluding the self-conjugate k = -n/2 plane."""
        masks = []
        for axis in range(3):
            n = self.shape[axis]
            m = np.ones(n, dtype=bool)
            m[n // 2] = False
            masks.append(m)
        return (
            masks[0][:, None, None],
            masks[1][None, :, None],
            masks[2][None, None, :],
        )

    def dealias_mask(self, fraction=2.0 / 3.0):
        """Boolean keep-mask implementing the per-axis truncation rule."""
        masks = []
        for axis in range(3):
            n = self.shape[axis]
            wrapped = sfft.fftfreq(n, d=1.0 / n)
            masks.append(np.abs(wrapped) <= fraction * (n // 2) + 1e-12)
        return masks[0][:, None, None] & masks[1][None, :, None] & masks[2][None, None, :]


def _freeze(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpectralField:
    """One scalar unknown as complex coefficients on the box's wavenumber lattice."""

    box: BoxSpec
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.box.shape:
            raise ShapeMismatchError(
                f"coefficient shape {self.coeffs.shape} does not match box {self.box.shape}"
            )
        object.__setattr__(self, "coeffs", _freeze(self.coeffs.astype(np.complex128, copy=False)))

    # -- arithmetic (returns new fields; inputs never mutated) --------------
    def __add__(self, other):
        return SpectralField(self.box, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return SpectralField(self.box, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralField(self.box, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.box, -self.coeffs)

    def apply_symbol(self, symbol):
        """Multiply coefficients by a (broadcastable) Fourier symbol."""
        return SpectralField(self.box, self.coeffs * symbol)

    def deriv(self, alpha):
        """Spectral derivative d^alpha with multi-index alpha = (a1, a2, a3).

        Odd orders zero the self-conjugate Nyquist plane of their axis, which
        keeps derivatives of real fields real.
        """
        sym = np.ones(1, dtype=complex)
        for order, k, keep in zip(
            alpha, (self.box.kx, self.box.ky, self.box.kz), self.box.not_nyquist
        ):
            if order:
                sym = sym * (1j * k) ** order
                if order % 2 == 1:
                    sym = sym * keep
        return self.apply_symbol(sym)

    def hermitian_defect(self):
        """max |F(xi) - conj(F(-xi))| relative to max |F|."""
        scale = np.abs(self.coeffs).max()
        if scale == 0.0:
            return 0.0
        neg = _reflect(self.coeffs)
        return float(np.abs(self.coeffs - np.conj(neg)).max() / scale)

    @classmethod
    def zero(cls, box):
        return cls(box, np.zeros(box.shape, dtype=complex))


def _reflect(coeffs):
    """coeffs evaluated at -xi (index map i -> (n - i) mod n per axis)."""
    out = coeffs[::-1, ::-1, ::-1]
    return np.roll(out, (1, 1, 1), axis=(0, 1, 2))


def forward_transform(physical_values, box):
    """Physical samples -> SpectralField under the integral-scaled convention."""
    arr = np.asarray(physical_values)
    if arr.shape != box.shape:
        raise ShapeMismatchError(f"input shape {arr.shape} does not match box {box.shape}")
    coeffs = sfft.fftn(arr.astype(complex, copy=False), workers=_WORKERS) * box.cell_volume
    return SpectralField(box, coeffs)


def inverse_transform(field, symmetry_tol=1e-10):
    """SpectralField -> real physical samples.

    Requires Hermitian symmetry within ``symmetry_tol`` (relative); the
    imaginary residue left by rounding is asserted below tolerance and then
    discarded.
    """
    defect = field.hermitian_defect()
    if defect > symmetry_tol:
        raise CorruptFieldError(f"Hermitian symmetry violated: relative defect {defect:.3e}")
    phys = sfft.ifftn(field.coeffs, workers=_WORKERS) / field.box.cell_volume
    scale = np.abs(phys).max()
    if scale > 0 and np.abs(phys.imag).max() > symmetry_tol * scale:
        raise CorruptFieldError("imaginary residue above tolerance after inverse transform")
    return np.ascontiguousarray(phys.real)


def inverse_transform_complex(field):
    """Inverse transform without the realness assertion (diagnostics only)."""
    return sfft.ifftn(field.coeffs, workers=_WORKERS) / field.box.cell_volume


def lp_norm_array(values, p, cell_volume):
    """Riemann-sum L^p norm of physical samples (deterministic reduction)."""
    mag = np.abs(values)
    if not np.all(np.isfinite(mag)):
        raise NumericalBlowupError("non-finite values in field")
    if p == np.inf:
        return float(mag.max())
    if not 1.0 <= p:
        raise ValueError(f"p must lie in [1, inf], got {p}")
    if p == 2.0:
        acc = float(np.sum(mag * mag))
    else:
        acc = float(np.sum(mag**p))
    return float((cell_volume * acc) ** (1.0 / p))


def lp_norm(field, p):
    """L^p(box) norm of a real-valued spectral field via grid quadrature."""
    return lp_norm_array(inverse_transform(field), p, field.box.cell_volume)


def lp_norm_multi(fields, p):
    """L^p norm of the pointwise Euclidean magnitude of several components."""
    mags = np.stack([inverse_transform(f) for f in fields])
    return lp_norm_array(np.sqrt(np.sum(mags * mags, axis=0)), p, fields[0].box.cell_volume)


def l2_norm_spectral(field):
    """L^2 norm evaluated on the spectral side (Plancherel)."""
    c = field.coeffs
    return float(math.sqrt(np.sum((c * np.conj(c)).real) / field.box.volume))


def anisotropic_mixed_norm(field, p_h, p_v, s_v):
    """Outer L^{p_h} over (x1,x2) of the inner W^{s_v,p_v} norm along x3.

    Vertical derivatives are spectral; the inner Sobolev norm combines the
    derivative orders in ell^{p_v}, matching the usual W^{s,p} definition.
    """
    if not (0 <= s_v <= 4 and float(s_v).is_integer()):
        raise ValueError(f"vertical order s_v must be an integer in [0, 4], got {s_v}")
    box = field.box
    layers = [inverse_transform(field.deriv((0, 0, j))) for j in range(int(s_v) + 1)]
    dz = box.Lz / box.nz
    if p_v == np.inf:
        inner = np.max([np.abs(g).max(axis=2) for g in layers], axis=0)
    else:
        acc = np.zeros((box.nx, box.ny))
        for g in layers:
            acc += np.sum(np.abs(g) ** p_v, axis=2) * dz
        inner = acc ** (1.0 / p_v)
    if not np.all(np.isfinite(inner)):
        raise NumericalBlowupError("non-finite values in field")
    da = (box.Lx / box.nx) * (box.Ly / box.ny)
    if p_h == np.inf:
        return float(inner.max())
    return float((np.sum(inner**p_h) * da) ** (1.0 / p_h))


@dataclass(frozen=True)
class BoussinesqState:
    """Velocity (v1, v2, v3) and thermal disturbance theta at one instant."""

    v1: SpectralField
    v2: SpectralField
    v3: SpectralField
    theta: SpectralField
    time: float = 0.0

    def __post_init__(self):
        boxes = {f.box for f in self.fields}
        if len(boxes) != 1:
            raise ShapeMismatchError("all four components must share one BoxSpec")
        if self.time < 0:
            raise ValueError("time must be nonnegative")

    @property
    def box(self):
        return self.v1.box

    @property
    def fields(self):
        return (self.v1, self.v2, self.v3, self.theta)

    @property
    def velocity(self):
        return (self.v1, self.v2, self.v3)

    def with_time(self, t):
        return BoussinesqState(self.v1, self.v2, self.v3, self.theta, time=t)

    def max_relative_divergence(self):
        """max over modes of |xi . v_hat| / |v_hat| (floored to avoid 0/0)."""
        box = self.box
        div = (
            1j * box.kx * self.v1.coeffs
            + 1j * box.ky * self.v2.coeffs
            + 1j * box.kz * self.v3.coeffs
        )
        vmag = np.sqrt(
            np.abs(self.v1.coeffs) ** 2 + np.abs(self.v2.coeffs) ** 2 + np.abs(self.v3.coeffs) ** 2
        )
        vmax = vmag.max()
        if vmax == 0.0:
            return 0.0
        return float((np.abs(div) / np.maximum(vmag, 1e-14 * vmax)).max())

    def l2_energy(self):
        """(1/2) * sum of component L^2 norms squared, evaluated spectrally."""
        return 0.5 * sum(l2_norm_spectral(f) ** 2 for f in self.fields)


def state_from_coeffs(box, v1, v2, v3, theta, time=0.0):
    return BoussinesqState(
        SpectralField(box, v1),
        SpectralField(box, v2),
        SpectralField(box, v3),
        SpectralField(box, theta),
        time=time,
    )


def zero_state(box, time=0.0):
    z = SpectralField.zero(box)
    return BoussinesqState(z, z, z, z, time=time)
