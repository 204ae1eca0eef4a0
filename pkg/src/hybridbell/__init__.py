"""Hybrid atom-photon Bell test laboratory.

Closed-form CHSH values for two-branch atom-field states (:mod:`bellcore`),
their optimisation and threshold curves (:mod:`optimizer`), a number-basis
oracle (:mod:`fockoracle`), the cavity source model (:mod:`cavity`) and the
locality / table pipelines (:mod:`feasibility`).
"""

from .bellcore import HybridState, MeasurementSettings, apply_loss, chsh_expectation, family_state
from .cavity import CavityParams, PulseSpec
from .optimizer import OptimizationProblem, critical_transmission, optimize_chsh

__version__ = "0.1.0"

__all__ = [
    "HybridState",
    "MeasurementSettings",
    "apply_loss",
    "chsh_expectation",
    "family_state",
    "CavityParams",
    "PulseSpec",
    "OptimizationProblem",
    "critical_transmission",
    "optimize_chsh",
]
