"""Channel estimators: LS baselines, Kronecker OMP, MMPSR and the 2D-OLS oracle."""
from .base import (COND_LIMIT, EstimationResult, PathLabel, SingularGramError, SupportEstimate, nmse,
                   nmse_per_k)
from .komp import estimate_komp
from .ls import estimate_1dls, estimate_2dls, ls_operators
from .mmpsr import (DictionaryPair, MatchingContext, RefineConfig, SubspaceSlice, correlation_coefficient,
                    mmpsr, svd_subspace)
from .oracle import estimate_2dols, lower_bound

__all__ = [
    "COND_LIMIT", "EstimationResult", "PathLabel", "SingularGramError", "SupportEstimate", "nmse",
    "nmse_per_k", "estimate_komp", "estimate_1dls", "estimate_2dls", "ls_operators", "DictionaryPair", "MatchingContext",
    "RefineConfig", "SubspaceSlice", "correlation_coefficient", "mmpsr", "svd_subspace", "estimate_2dols",
    "lower_bound",
]
