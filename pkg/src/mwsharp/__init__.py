"""Exact computations around the quadratic sharpness of weak-type bounds for A1 weights."""

from .a1solver import A1Certificate, a1_bruteforce, a1_exact, interval_ratio, max_adjacent_jump
from .exactnum import Dyadic, Rat, dyadic_to_rat, rat_cmp, rat_to_float
from .operators import (OperatorKind, WeakNormResult, hilbert_chi01, hilbert_weak_lower, levelset_measure,
                        maximal_chi01, weak_norm)
from .weight import (Piece, StepWeight, block_mass, build_weight, essinf, integral, superlevel_vs_identity,
                     value_at)

__version__ = "0.1.0"
