"""Geometric core: Christoffel maps, algebra bracket, and metric.

Velocity pairs (u, rho) live in the tangent space at the identity of the
semidirect product group.  The four models share one dispatch surface:
the single-component CH/DP maps act on the first slot only, the
two-component maps couple both slots.

All bilinear maps dealias their quadratic products (2/3 rule) before any
inverse-Helmholtz or derivative is applied, so iterated applications stay
spectrally clean.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from chdp.spectral import (
    Grid,
    PeriodicField,
    dealias,
    dealiased_product,
    derivative,
    helmholtz,
    helmholtz_inverse,
    inner_h1,
    inner_l2,
    zero_field,
)

__all__ = [
    "Model",
    "VelocityPair",
    "christoffel_ch",
    "christoffel_dp",
    "christoffel_2ch",
    "christoffel_2dp",
    "christoffel",
    "ad_transpose",
    "bracket",
    "metric",
]


class Model(str, Enum):
    """Selects the Christoffel map and evolution right-hand side."""

    CH = "ch"
    DP = "dp"
    CH2 = "2ch"
    DP2 = "2dp"

    @property
    def two_component(self) -> bool:
        return self in (Model.CH2, Model.DP2)

    @property
    def has_metric(self) -> bool:
        """CH/2CH geodesics come from an invariant metric; DP/2DP do not."""
        return self in (Model.CH, Model.CH2)


@dataclass(frozen=True)
class VelocityPair:
    """Algebra element (u, rho): velocity and density components."""

    u: PeriodicField
    rho: PeriodicField

    def __post_init__(self):
        if self.u.grid.n != self.rho.grid.n:
            raise ValueError("components must share a grid")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @classmethod
    def single(cls, u: PeriodicField) -> "VelocityPair":
        """Embed a one-component velocity with rho = 0."""
        return cls(u, zero_field(u.grid))

    def __add__(self, other: "VelocityPair") -> "VelocityPair":
        return VelocityPair(self.u + other.u, self.rho + other.rho)

    def __sub__(self, other: "VelocityPair") -> "VelocityPair":
        return VelocityPair(self.u - other.u, self.rho - other.rho)

    def __neg__(self) -> "VelocityPair":
        return VelocityPair(-self.u, -self.rho)

    def __mul__(self, scalar: float) -> "VelocityPair":
        return VelocityPair(self.u * scalar, self.rho * scalar)

    __rmul__ = __mul__


def christoffel_ch(u: PeriodicField, v: PeriodicField) -> PeriodicField:
    """CH Christoffel map at the identity: -Ainv d/dx (u v + u_x v_x / 2)."""
    q = u * v + 0.5 * (derivative(u) * derivative(v))
    return -helmholtz_inverse(derivative(dealias(q)))


def christoffel_dp(u: PeriodicField, v: PeriodicField) -> PeriodicField:
    """DP Christoffel map at the identity: -(3/2) Ainv d/dx (u v)."""
    return -1.5 * helmholtz_inverse(derivative(dealiased_product(u, v)))


def christoffel_2ch(a: VelocityPair, b: VelocityPair) -> VelocityPair:
    """Two-component CH Christoffel map.

    First slot: CH map of the velocities minus Ainv d/dx (rho tau) / 2.
    Second slot: -(u_x tau + v_x rho) / 2.
    """
    u, rho = a.u, a.rho
    v, tau = b.u, b.rho
    first = (christoffel_ch(u, v)
             - 0.5 * helmholtz_inverse(derivative(dealiased_product(rho, tau))))
    second = -0.5 * (dealiased_product(derivative(u), tau)
                     + dealiased_product(derivative(v), rho))
    return VelocityPair(first, second)


def christoffel_2dp(a: VelocityPair, b: VelocityPair) -> VelocityPair:
    """Two-component DP Christoffel map.

    First slot: DP map of the velocities minus Ainv(u_x tau + v_x rho)/2
    plus Ainv d/dx (rho tau).  Second slot: -(u_x tau + v_x rho).
    """
    u, rho = a.u, a.rho
    v, tau = b.u, b.rho
    cross = (dealiased_product(derivative(u), tau)
             + dealiased_product(derivative(v), rho))
    first = (christoffel_dp(u, v)
             - 0.5 * helmholtz_inverse(cross)
             + helmholtz_inverse(derivative(dealiased_product(rho, tau))))
    return VelocityPair(first, -cross)


def christoffel(model: Model, a: VelocityPair, b: VelocityPair) -> VelocityPair:
    """Uniform entry point used by the evolution and curvature layers.

    For the single-component models the density slots are ignored and the
    result's density slot is zero.
    """
    if model is Model.CH:
        return VelocityPair.single(christoffel_ch(a.u, b.u))
    if model is Model.DP:
        return VelocityPair.single(christoffel_dp(a.u, b.u))
    if model is Model.CH2:
        return christoffel_2ch(a, b)
    if model is Model.DP2:
        return christoffel_2dp(a, b)
    raise ValueError(f"unknown model {model!r}")


def ad_transpose(a: VelocityPair, b: VelocityPair) -> VelocityPair:
    """Bilinear operator adjoint to the bracket in the 2CH metric.

    Satisfies <ad_transpose(a, b), c> = <a, [b, c]> for the metric and
    bracket below.  Components:

        first  = -Ainv(2 b1_x A a1 + b1 A a1_x + a2 b2_x)
        second = -(a2 b1)_x
    """
    a1, a2 = a.u, a.rho
    b1, b2 = b.u, b.rho
    m_a = helmholtz(a1)
    inner = (2.0 * dealiased_product(derivative(b1), m_a)
             + dealiased_product(b1, derivative(m_a))
             + dealiased_product(a2, derivative(b2)))
    first = -helmholtz_inverse(inner)
    second = -derivative(dealiased_product(a2, b1))
    return VelocityPair(first, second)


def bracket(a: VelocityPair, b: VelocityPair) -> VelocityPair:
    """Algebra bracket of the semidirect product.

    [a, b] = (b1_x a1 - a1_x b1, b2_x a1 - a2_x b1): both slots are
    transported by the first components, matching the derivative of the
    adjoint action.
    """
    a1, a2 = a.u, a.rho
    b1, b2 = b.u, b.rho
    first = dealiased_product(derivative(b1), a1) - dealiased_product(derivative(a1), b1)
    second = dealiased_product(derivative(b2), a1) - dealiased_product(derivative(a2), b1)
    return VelocityPair(first, second)


def metric(a: VelocityPair, b: VelocityPair) -> float:
    """Right-invariant 2CH metric at the identity: H^1 on u, L^2 on rho."""
    return inner_h1(a.u, b.u) + inner_l2(a.rho, b.rho)
