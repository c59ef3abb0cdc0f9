"""Halton sequences with p-adic shifts: worst-case errors, discrepancies and oracles."""

from .discrepancy import (DiscrepancyResult, local_discrepancy, quadrature_l2_sq,
                          rms_l2_experiment, unweighted_l2_sq, weighted_l2_sq)
from .errors import (ErrorReport, rms_wce_monte_carlo, rms_wce_series, rms_wce_sq_exact,
                     theory_bound_korobov, theory_bound_korobov_sharp, theory_bound_sobolev,
                     wce_sq_korobov, wce_sq_sobolev)
from .exceptions import (DomainError, IncompatibleOperandsError, InvalidBaseError,
                         NumericalConsistencyError, QMCError, ResolutionError, ResourceError)
from .functions import FrequencyIndex, IndexBox, beta, char_sum_halton, gram_check
from .halton import HaltonSpec, PointSet, halton_block, halton_point, iter_halton
from .kernels import WeightedSpace, shift_invariant_kernel
from .padic import (PAdicNumber, Shift, UnitPoint, monna_inverse, monna_map, radical_inverse,
                    sample_shift, shift_point, unshift_point)
from .primes import first_primes

__version__ = "0.1.0"
