"""Conditional symmetry of linear forms on finite Abelian groups and the torus T^d."""

from .endomorphism import Endo, automorphisms
from .groups import GroupSpec, abelian_groups
from .measures import FiniteMeasure, TorusCharFn, convolve
from .torus import CounterexampleConfig, build_counterexample, certify, certify_counterexample

__all__ = [
    "Endo",
    "automorphisms",
    "GroupSpec",
    "abelian_groups",
    "FiniteMeasure",
    "TorusCharFn",
    "convolve",
    "CounterexampleConfig",
    "build_counterexample",
    "certify",
    "certify_counterexample",
]
