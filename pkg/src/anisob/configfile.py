"""Line-based ``key = value`` run configuration files.

Recognized keys (defaults in parentheses): grid (64 64 32), box (32 32 16),
dt (0.05), t_end (10.0), amplitude (1e-2), seed (0), dealias (2/3),
snapshot_stride (1), mode (nonlinear), scheme, construction, support_h,
support_v, t0, epsilon.  Unknown keys are rejected; '#' starts a comment.
"""

from __future__ import annotations

from .errors import ConfigurationError

_INT_TRIPLES = {"grid"}
_FLOAT_TRIPLES = {"box"}
_FLOATS = {"dt", "t_end", "amplitude", "dealias", "support_h", "support_v", "t0", "epsilon"}
_INTS = {"seed", "snapshot_stride"}
_STRINGS = {"mode", "scheme", "construction"}

DEFAULTS = {
    "grid": (64, 64, 32),
    "box": (32.0, 32.0, 16.0),
    "dt": 0.05,
    "t_end": 10.0,
    "amplitude": 1e-2,
    "seed": 0,
    "dealias": 2.0 / 3.0,
    "snapshot_stride": 1,
    "mode": "nonlinear",
    "scheme": "rk4-integrating-factor",
    "construction": "modulated-bump",
    "support_h": 2.0,
    "support_v": 2.0,
    "t0": 5.0,
    "epsilon": 0.05,
}


def parse_config_text(text):
    out = dict(DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in _INT_TRIPLES:
            parts = value.split()
            if len(parts) != 3:
                raise ConfigurationError(f"line {lineno}: {key} needs three integers")
            out[key] = tuple(int(p) for p in parts)
        elif key in _FLOAT_TRIPLES:
            parts = value.split()
            if len(parts) != 3:
                raise ConfigurationError(f"line {lineno}: {key} needs three numbers")
            out[key] = tuple(float(p) for p in parts)
        elif key in _FLOATS:
            out[key] = float(value)
        elif key in _INTS:
            out[key] = int(value)
        elif key in _STRINGS:
            out[key] = value
        else:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
    if out["mode"] not in ("linear", "nonlinear"):
        raise ConfigurationError(f"mode must be linear or nonlinear, got {out['mode']!r}")
    return out


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
