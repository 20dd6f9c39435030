"""Classical (Lasso) and annealed-QUBO feature selection."""

from .lasso import lasso_fit, lasso_select_k, lambda_max, standardize
from .qubo import (AnnealSchedule, QuboProblem, anneal, build_qubo, exhaustive_solve,
                   qubo_energy, qubo_from_correlations, qubo_select_k)
from .types import FeatureSelection

__all__ = [
    "AnnealSchedule", "FeatureSelection", "QuboProblem", "anneal", "build_qubo",
    "exhaustive_solve", "lambda_max", "lasso_fit", "lasso_select_k", "qubo_energy", "qubo_from_correlations",
    "qubo_select_k", "standardize",
]
