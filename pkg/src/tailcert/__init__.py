"""Certified tail bounds for Rademacher sums: exact oracle, smoothed-inversion
bounds, a refinable bound table, box search and lemma certificates."""
from .errors import (CertificateError, ChecksumError, ResourceLimitError, TableVersionError, TailcertError,
                     UnsupportedInputError)
from .exact import (Surd, WeightVector, check_structural_constraint, eliminate, erdos_anticoncentration_bound,
                    parse_exact, standardized_tail, tail_probability)
from .prawitz import PrawitzParams, best_prawitz, optimize_prawitz, prawitz_lower_bound, solve_theta
from .dp import DPGrid, build_initial, build_table, load, persist, query, refine
from .search import Box, ConstraintSet, LinearConstraint, SearchResult, feedback_iterate, h_max
from .certs import (large_variance_conclusion, pairing_certificate, small_sum_certificate, structured_interval_probs,
                    sum_squares_bound)
from .cases import CASE_IDS, run_case

__version__ = "0.1.0"
