"""Binary snapshot format for full spectral states.

Layout (little-endian): magic ``ANISOB01``; u32 nx, ny, nz; f64 Lx, Ly, Lz,
time; then the four components v1, v2, v3, theta in order, each written as
nx*ny*nz complex values ((re, im) f64 pairs) with the x1 index varying
fastest.
"""

from __future__ import annotations

import struct

import numpy as np

from .grid import BoxSpec, BoussinesqState, SpectralField

MAGIC = b"ANISOB01"
_HEADER = struct.Struct("<III dddd")


def write_snapshot(path, state):
    box = state.box
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(box.nx, box.ny, box.nz, box.Lx, box.Ly, box.Lz, state.time))
        for comp in state.fields:
            flat = np.asfortranarray(comp.coeffs).reshape(-1, order="F")
            flat.astype("<c16").tofile(fh)


def read_snapshot(path):
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"not a snapshot file (bad magic {magic!r})")
        nx, ny, nz, Lx, Ly, Lz, time = _HEADER.unpack(fh.read(_HEADER.size))
        box = BoxSpec(nx, ny, nz, Lx, Ly, Lz)
        comps = []
        count = nx * ny * nz
        for _ in range(4):
            flat = np.fromfile(fh, dtype="<c16", count=count)
            if flat.size != count:
                raise ValueError("truncated snapshot file")
            comps.append(SpectralField(box, flat.reshape((nx, ny, nz), order="F")))
    return BoussinesqState(*comps, time=time)
