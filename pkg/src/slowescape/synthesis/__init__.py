"""Orbit construction through certified covering chains."""

from .orbit import (
    CoveringChain,
    OrbitPlan,
    StepReport,
    backward_orbit,
    certify_chain,
    forward_verify,
    unchecked_chain,
)
from .fast import certification_radii, certification_radius, plan_fast_orbit
from .slow import no_pits_family, pits_family, plan_slow_orbit

__all__ = [
    "CoveringChain",
    "OrbitPlan",
    "StepReport",
    "backward_orbit",
    "certification_radii",
    "certification_radius",
    "certify_chain",
    "forward_verify",
    "no_pits_family",
    "pits_family",
    "plan_fast_orbit",
    "plan_slow_orbit",
    "unchecked_chain",
]
