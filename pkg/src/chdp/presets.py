"""Initial-condition presets for the CLI and verification suite.

Grammar:
    zero                     u = 0, rho = 0
    cosmode:M:AMP            u = AMP cos(2 pi M x), rho = 0
    pair:M1:A1:M2:A2         u = A1 cos(2 pi M1 x), rho = A2 cos(2 pi M2 x)
    file:PATH                snapshot CSV with header x,u,rho
"""

from __future__ import annotations

from chdp.connection import VelocityPair
from chdp.csvio import read_snapshot
from chdp.spectral import Grid, cosine_field, zero_field

__all__ = ["initial_condition", "PRESET_HELP"]

PRESET_HELP = "zero | cosmode:M:AMP | pair:M1:A1:M2:A2 | file:PATH"


def initial_condition(spec: str, grid: Grid) -> VelocityPair:
    name, _, rest = spec.partition(":")
    if name == "zero":
        if rest:
            raise ValueError("zero preset takes no parameters")
        return VelocityPair(zero_field(grid), zero_field(grid))
    if name == "cosmode":
        mode, amp = _parse_params(spec, rest, 2)
        return VelocityPair(cosine_field(grid, int(mode), amp), zero_field(grid))
    if name == "pair":
        m1, a1, m2, a2 = _parse_params(spec, rest, 4)
        return VelocityPair(cosine_field(grid, int(m1), a1),
                            cosine_field(grid, int(m2), a2))
    if name == "file":
        if not rest:
            raise ValueError("file preset needs a path: file:PATH")
        state = read_snapshot(rest)
        if state.grid.n != grid.n:
            raise ValueError(
                f"snapshot {rest} has n={state.grid.n}, run requested n={grid.n}")
        return state
    raise ValueError(f"unknown initial-condition preset {name!r} "
                     f"(expected {PRESET_HELP})")


def _parse_params(spec, rest, count):
    parts = rest.split(":") if rest else []
    if len(parts) != count:
        raise ValueError(f"preset {spec!r} needs {count} ':'-separated parameters")
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise ValueError(f"preset {spec!r}: {exc}") from None
    for v in values[::2]:
        if v < 1 or v != int(v):
            raise ValueError(f"preset {spec!r}: modes must be positive integers")
    return values
