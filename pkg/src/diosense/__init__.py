"""Diophantine sampling schedules, higher-order sparse arrays and co-array analysis."""

from .coarray import ArrayGeometry, LagSet, SpacingHistogram
from .errors import (
    DegenerateModelError,
    DomainError,
    NoZeroSumSolutionError,
    NotCoprimeError,
    ResourceLimitError,
)
from .numtheory import DioSolution3, bezout_coprime_pair, coprime_triples, solve_dio3_zero_sum

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "DegenerateModelError",
    "DioSolution3",
    "DomainError",
    "LagSet",
    "NoZeroSumSolutionError",
    "NotCoprimeError",
    "ResourceLimitError",
    "SpacingHistogram",
    "bezout_coprime_pair",
    "coprime_triples",
    "solve_dio3_zero_sum",
]
