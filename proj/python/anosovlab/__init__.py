"""Numerical laboratory for Anosov endomorphisms of the 2-torus."""

from anosovlab._core import (
    AnosovError,
    ToralEndomorphism,
    base_conjugacy,
    certify_cones,
    entropy_report,
    find_periodic,
    solve_livsic,
    specialness_spread,
    spectrum_diagnostics,
)

__all__ = [
    "AnosovError",
    "ToralEndomorphism",
    "base_conjugacy",
    "certify_cones",
    "entropy_report",
    "find_periodic",
    "solve_livsic",
    "specialness_spread",
    "spectrum_diagnostics",
]
