"""Pseudospectral geodesic-flow solvers on the circle.

Simulates the periodic Camassa-Holm (CH) and Degasperis-Procesi (DP)
equations and their two-component extensions (2CH, 2DP) as geodesic flows
on the semidirect product of the circle diffeomorphism group with a
function space, and evaluates the sectional curvature of the 2CH metric
against closed-form values.
"""

from chdp.spectral import (
    Grid,
    PeriodicField,
    Diffeo,
    derivative,
    helmholtz,
    helmholtz_inverse,
    inner_l2,
    inner_h1,
    compose,
    invert_diffeo,
)
from chdp.connection import Model, VelocityPair, christoffel, metric
from chdp.evolution import EvolutionConfig, evolve
from chdp.flowmap import GroupElement, evolve_flowmap
from chdp.curvature import (
    CosineDirectionPair,
    positivity_scan,
    sectional_curvature,
    unnormalized_curvature,
)
from chdp.rigidbody import RigidBodyState, evolve_rigidbody

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "PeriodicField",
    "Diffeo",
    "Model",
    "VelocityPair",
    "GroupElement",
    "CosineDirectionPair",
    "EvolutionConfig",
    "RigidBodyState",
    "derivative",
    "helmholtz",
    "helmholtz_inverse",
    "inner_l2",
    "inner_h1",
    "compose",
    "invert_diffeo",
    "christoffel",
    "metric",
    "evolve",
    "evolve_flowmap",
    "unnormalized_curvature",
    "sectional_curvature",
    "positivity_scan",
    "evolve_rigidbody",
    "__version__",
]
