"""Sectional curvature of the two-component CH metric.

The unnormalized curvature in the plane of two algebra elements is

    S(u, v) = <Gamma(u, v), Gamma(u, v)> - <Gamma(u, u), Gamma(v, v)>

with the two-component CH Christoffel map and metric.  On directions
built from single cosines in each slot, S has a closed form: the pure
first-component piece

    S1(k, l) = [ (1 + kl/2)^2 (k-l)^2 / (1 + (k-l)^2)
               + (1 - kl/2)^2 (k+l)^2 / (1 + (k+l)^2) ] / 8,   k != l,

plus four integral corrections I1..I4 whose Kronecker deltas are decided
by exact integer mode comparisons.  Wavenumbers are 2*pi*m for positive
integer modes m.  On the cosine family S is strictly positive, and on
directions with vanishing first components the normalized curvature is
bounded below by 1/8 with Gram determinant exactly 1/4.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from chdp.connection import Model, VelocityPair, christoffel, metric
from chdp.spectral import Grid, cosine_field, random_band_limited, zero_field

__all__ = [
    "CosineDirectionPair",
    "DegeneratePlaneError",
    "ScanRow",
    "unnormalized_curvature",
    "gram_determinant",
    "sectional_curvature",
    "ch_cosine_curvature",
    "closed_form_integrals",
    "closed_form_curvature",
    "cosine_pair",
    "scan_grid",
    "positivity_scan",
    "negative_search",
]

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


class DegeneratePlaneError(ValueError):
    """The two directions span no plane (Gram determinant ~ 0)."""


@dataclass(frozen=True)
class CosineDirectionPair:
    """Direction pair u = (cos k1 x, cos k2 x), v = (cos l1 x, cos l2 x).

    Modes are positive integers carrying wavenumber 2*pi*m.  With
    first_components_zero the velocity slots are identically zero and only
    the density modes matter.
    """

    m_k1: int
    m_k2: int
    m_l1: int
    m_l2: int
    first_components_zero: bool = False

    def __post_init__(self):
        for m in (self.m_k1, self.m_k2, self.m_l1, self.m_l2):
            if m < 1:
                raise ValueError("modes must be positive integers")

    @property
    def degenerate(self) -> bool:
        if self.first_components_zero:
            return self.m_k2 == self.m_l2
        return (self.m_k1, self.m_k2) == (self.m_l1, self.m_l2)

    @property
    def max_mode(self) -> int:
        return max(self.m_k1, self.m_k2, self.m_l1, self.m_l2)


def unnormalized_curvature(a: VelocityPair, b: VelocityPair) -> float:
    """S(a, b) from the two-component CH Christoffel map."""
    gamma_ab = christoffel(Model.CH2, a, b)
    gamma_aa = christoffel(Model.CH2, a, a)
    gamma_bb = christoffel(Model.CH2, b, b)
    return metric(gamma_ab, gamma_ab) - metric(gamma_aa, gamma_bb)


def gram_determinant(a: VelocityPair, b: VelocityPair) -> float:
    return metric(a, a) * metric(b, b) - metric(a, b) ** 2


def sectional_curvature(a: VelocityPair, b: VelocityPair) -> float:
    """S(a, b) normalized by the Gram determinant of the plane."""
    gram = gram_determinant(a, b)
    if gram <= 1e-12:
        raise DegeneratePlaneError(f"gram determinant {gram:.3e} too small")
    return unnormalized_curvature(a, b) / gram


def ch_cosine_curvature(m_k: int, m_l: int) -> float:
    """Closed-form single-component curvature on distinct cosine modes."""
    if m_k == m_l:
        raise ValueError("closed form requires distinct modes")
    k = TWO_PI * m_k
    l = TWO_PI * m_l
    return ((1 + 0.5 * k * l) ** 2 / (1 + (k - l) ** 2) * (k - l) ** 2
            + (1 - 0.5 * k * l) ** 2 / (1 + (k + l) ** 2) * (k + l) ** 2) / 8.0


def closed_form_integrals(direction: CosineDirectionPair) -> tuple[float, float, float, float]:
    """The four correction integrals, deltas evaluated on integer modes."""
    d = direction
    a = TWO_PI * d.m_k1
    b = TWO_PI * d.m_l1
    c = TWO_PI * d.m_k2
    e = TWO_PI * d.m_l2

    def delta(i, j):
        return 1.0 if i == j else 0.0

    i1 = ((c - e) ** 2 / (1 + (c - e) ** 2)
          + (c + e) ** 2 / (1 + (c + e) ** 2)) / 32.0
    i2 = -c**2 / (1 + (2 * c) ** 2) / 8.0 * delta(d.m_k2, d.m_l2)
    if d.first_components_zero:
        return i1, i2, 0.0, 0.0

    sum_deltas = (delta(d.m_k1 + d.m_l1, d.m_k2 - d.m_l2)
                  + delta(d.m_k1 + d.m_l1, d.m_l2 - d.m_k2)
                  + delta(d.m_k1 + d.m_l1, d.m_k2 + d.m_l2))
    diff_deltas = (delta(d.m_k1 - d.m_l1, d.m_k2 - d.m_l2)
                   + delta(d.m_k1 - d.m_l1, d.m_l2 - d.m_k2)
                   + delta(d.m_k1 - d.m_l1, d.m_k2 + d.m_l2)
                   + delta(d.m_l1 - d.m_k1, d.m_k2 + d.m_l2))
    i3 = ((1 - 0.5 * a * b) * (a + b) ** 2 / (1 + (a + b) ** 2) / 8.0 * sum_deltas
          + (1 + 0.5 * a * b) * (a - b) ** 2 / (1 + (a - b) ** 2) / 8.0 * diff_deltas
          - a**2 / 4.0 * (1 - 0.5 * a**2) / (1 + (2 * a) ** 2) * delta(d.m_k1, d.m_l2)
          - b**2 / 4.0 * (1 - 0.5 * b**2) / (1 + (2 * b) ** 2) * delta(d.m_k2, d.m_l1))
    i4 = (a**2 / 16.0 * (1 - 0.5 * delta(d.m_k1, d.m_l2))
          + b**2 / 16.0 * (1 - 0.5 * delta(d.m_l1, d.m_k2))
          - a * b / 16.0 * (diff_deltas - sum_deltas))
    return i1, i2, i3, i4


def cosine_pair(grid: Grid, direction: CosineDirectionPair) -> tuple[VelocityPair, VelocityPair]:
    """Sample the direction pair on a grid."""
    d = direction
    if d.first_components_zero:
        u = VelocityPair(zero_field(grid), cosine_field(grid, d.m_k2))
        v = VelocityPair(zero_field(grid), cosine_field(grid, d.m_l2))
    else:
        u = VelocityPair(cosine_field(grid, d.m_k1), cosine_field(grid, d.m_k2))
        v = VelocityPair(cosine_field(grid, d.m_l1), cosine_field(grid, d.m_l2))
    return u, v


def scan_grid(max_mode: int) -> Grid:
    """Grid resolving all quadratic products of modes <= max_mode exactly."""
    n = max(128, 16 * max_mode)
    return Grid(n + n % 2)


def closed_form_curvature(direction: CosineDirectionPair,
                          grid: Grid | None = None) -> float:
    """S on a cosine direction pair from the closed-form pieces.

    The single-component closed form assumes distinct velocity modes; for
    equal velocity modes that contribution is computed numerically (it
    vanishes identically, being S of a direction against itself).
    """
    if direction.degenerate:
        raise ValueError("direction pair is degenerate (u = v)")
    integrals = closed_form_integrals(direction)
    if direction.first_components_zero:
        return sum(integrals)
    if direction.m_k1 != direction.m_l1:
        ch_term = ch_cosine_curvature(direction.m_k1, direction.m_l1)
    else:
        if grid is None:
            grid = scan_grid(direction.max_mode)
        u1 = VelocityPair.single(cosine_field(grid, direction.m_k1))
        v1 = VelocityPair.single(cosine_field(grid, direction.m_l1))
        ch_term = unnormalized_curvature(u1, v1)
    return ch_term + sum(integrals)


@dataclass(frozen=True)
class ScanRow:
    """One scanned direction pair; zero velocity modes mark the
    first-components-zero family."""

    m_k1: int
    m_k2: int
    m_l1: int
    m_l2: int
    s_numeric: float
    s_closed: float
    sec: float
    gram: float


def positivity_scan(max_mode: int, grid: Grid | None = None,
                    enforce: bool = True) -> list[ScanRow]:
    """Enumerate cosine direction pairs with modes <= max_mode.

    Scans the full family (asserting S > 0) and the zero-first-component
    family (asserting Sec >= 1/8 - 1e-12 and Gram = 1/4).  Degenerate
    u = v tuples are skipped and logged.  With enforce, a violated bound
    raises RuntimeError naming the offending tuple.
    """
    if max_mode < 2:
        raise ValueError("max_mode must be at least 2")
    if grid is None:
        grid = scan_grid(max_mode)

    rows: list[ScanRow] = []
    violations: list[str] = []

    slot_pairs = list(itertools.product(range(1, max_mode + 1), repeat=2))
    for i, ku in enumerate(slot_pairs):
        for kv in slot_pairs[i:]:
            if ku == kv:
                log.debug("skipping degenerate direction pair %s", ku)
                continue
            direction = CosineDirectionPair(ku[0], ku[1], kv[0], kv[1])
            u, v = cosine_pair(grid, direction)
            s_num = unnormalized_curvature(u, v)
            s_closed = closed_form_curvature(direction, grid)
            gram = gram_determinant(u, v)
            rows.append(ScanRow(ku[0], ku[1], kv[0], kv[1],
                                s_num, s_closed, s_num / gram, gram))
            if s_num <= 0.0 or s_closed <= 0.0:
                violations.append(f"S <= 0 at modes {ku}+{kv}: "
                                  f"numeric {s_num:.6e}, closed {s_closed:.6e}")

    for mk2, ml2 in itertools.combinations(range(1, max_mode + 1), 2):
        direction = CosineDirectionPair(1, mk2, 1, ml2, first_components_zero=True)
        u, v = cosine_pair(grid, direction)
        s_num = unnormalized_curvature(u, v)
        s_closed = closed_form_curvature(direction, grid)
        gram = gram_determinant(u, v)
        sec = s_num / gram
        rows.append(ScanRow(0, mk2, 0, ml2, s_num, s_closed, sec, gram))
        if sec < 0.125 - 1e-12:
            violations.append(f"Sec < 1/8 at density modes ({mk2}, {ml2}): {sec:.12f}")
        if abs(gram - 0.25) > 1e-12:
            violations.append(f"Gram != 1/4 at density modes ({mk2}, {ml2}): {gram:.15f}")

    if enforce and violations:
        raise RuntimeError("curvature bounds violated:\n" + "\n".join(violations))
    return rows


def negative_search(grid: Grid, rng: np.random.Generator, trials: int,
                    max_mode: int = 6) -> list[tuple[int, float]]:
    """Hunt for negatively curved planes among random trig directions.

    Returns (trial, Sec) sorted most-negative first.  Reported, never
    asserted: the bounds above hold only on the cosine families.
    """
    results = []
    for trial in range(trials):
        a = VelocityPair(random_band_limited(grid, rng, max_mode),
                         random_band_limited(grid, rng, max_mode))
        b = VelocityPair(random_band_limited(grid, rng, max_mode),
                         random_band_limited(grid, rng, max_mode))
        if gram_determinant(a, b) <= 1e-9:
            continue
        results.append((trial, sectional_curvature(a, b)))
    results.sort(key=lambda item: item[1])
    return results
