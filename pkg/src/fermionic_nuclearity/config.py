"""Numerical tolerances shared by every module."""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    unitary: float = 1e-12
    structural: float = 1e-10
    derived: float = 1e-9
    rank: float = 1e-10
    membership: float = 1e-8


TOL = Tolerances()

MAX_MODES = 14
