"""Exact double multiplicative character sums over subgroups and intervals in F_p."""

from .characters import Character, RootSumHistogram, gauss_sum
from .congruences import (
    CountReport,
    additive_energy,
    count_nig,
    count_poly_values_in_interval,
    count_q,
    count_symcong,
    count_w_quantity,
    f_histogram,
    u_histogram,
)
from .errors import CharSumError, OracleMismatch, ValidationError
from .field import FieldCtx, build_field_ctx, dlog, factorize, is_prime
from .primroots import compute_up, scan_primes, up_record
from .sums import (
    Interval,
    Poly,
    Subgroup,
    sum_interval_subgroup,
    sum_poly_interval_subgroup,
    sum_subgroup_pair,
    sum_subgroup_shift,
)

__version__ = "0.1.0"
