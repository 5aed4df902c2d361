"""Petersson-formula sums, pure newform sums and one-level densities."""
from .arith import FactoredInteger, as_factored, eta, factor
from .basis import NewformLocalData
from .density import DensityConfig, fejer_pair, one_level_estimate, rmt_integral
from .newform_sums import cardinality_estimate, pure_sum
from .oracles import dim_cusp, newform_dim, ramanujan_tau
from .petersson import (NonConvergenceError, PreconditionError, TruncatedSum,
                        TruncationPolicy, WeightLevel, delta_full)

__all__ = [
    "FactoredInteger", "as_factored", "factor", "eta", "NewformLocalData",
    "DensityConfig", "fejer_pair", "one_level_estimate", "rmt_integral",
    "cardinality_estimate", "pure_sum", "dim_cusp", "newform_dim", "ramanujan_tau",
    "NonConvergenceError", "PreconditionError", "TruncatedSum", "TruncationPolicy",
    "WeightLevel", "delta_full",
]
