"""Line-based key=value configuration files.

Format: one `key=value` per line, `#` starts a comment, blank lines ignored.
`center=` may repeat.  Parse errors carry line numbers; missing required keys
are reported by name.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import CRDomain

REPEATABLE = {"center"}


class ConfigError(ValueError):
    pass


def parse_config_text(text, source="<config>"):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in REPEATABLE:
            out.setdefault(key, []).append(value)
        elif key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        else:
            out[key] = value
    return out


def parse_config(path):
    with open(path) as fh:
        return parse_config_text(fh.read(), source=str(path))


def _missing(key):
    return ConfigError(f"missing required config key {key!r}")


def get_float(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise _missing(key)
        return default
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"config key {key!r}: not a number: {cfg[key]!r}") from None


def get_int(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise _missing(key)
        return default
    try:
        return int(cfg[key])
    except ValueError:
        raise ConfigError(f"config key {key!r}: not an integer: {cfg[key]!r}") from None


def get_str(cfg, key, default=None, choices=None):
    if key not in cfg:
        if default is None:
            raise _missing(key)
        value = default
    else:
        value = cfg[key]
    if choices is not None and value not in choices:
        raise ConfigError(f"config key {key!r}: expected one of {sorted(choices)}, got {value!r}")
    return value


def get_float_list(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise _missing(key)
        return list(default)
    try:
        return [float(v) for v in cfg[key].split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"config key {key!r}: not a comma list of numbers: {cfg[key]!r}") from None


def domain_from_config(cfg) -> CRDomain:
    """Build the ball-intersection domain from `R=` and repeated `center=`."""
    radius = get_float(cfg, "R")
    raw_centers = cfg.get("center")
    if not raw_centers:
        raise _missing("center")
    centers = []
    for entry in raw_centers:
        try:
            centers.append([float(v) for v in entry.split(",")])
        except ValueError:
            raise ConfigError(f"config key 'center': bad coordinates {entry!r}") from None
    if len({len(c) for c in centers}) != 1:
        raise ConfigError("config key 'center': inconsistent dimensions")
    return CRDomain(radius, np.array(centers))


def coefficient_from_spec(spec_str):
    """Coefficient a(x) from its config form.

    '1' or 'const:C' give a constant; 'sin:AMP:FREQ' gives
    1 + AMP sin(FREQ pi x_1), bounded in [1-AMP, 1+AMP].
    """
    if spec_str is None:
        return None, (1.0, 1.0)
    parts = str(spec_str).split(":")
    if len(parts) == 1:
        try:
            const = float(parts[0])
        except ValueError:
            raise ConfigError(f"config key 'a': bad coefficient spec {spec_str!r}") from None
        if const <= 0:
            raise ConfigError("config key 'a': constant must be positive")
        return const, (const, const)
    kind = parts[0]
    if kind == "const":
        const = float(parts[1])
        if const <= 0:
            raise ConfigError("config key 'a': constant must be positive")
        return const, (const, const)
    if kind == "sin":
        amp = float(parts[1])
        freq = float(parts[2]) if len(parts) > 2 else 1.0
        if not 0 <= amp < 1:
            raise ConfigError("config key 'a': sin amplitude must be in [0,1)")

        def coeff(pts, _amp=amp, _freq=freq):
            return 1.0 + _amp * np.sin(_freq * math.pi * pts[:, 0])

        return coeff, (1.0 - amp, 1.0 + amp)
    raise ConfigError(f"config key 'a': unknown coefficient spec {spec_str!r}")
