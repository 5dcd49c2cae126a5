"""Filtering, random partitioning and checkers for pairs of clustering solutions."""

from .filtering import FilterResult, PairedSolutions, compute_D_and_filter
from .partition import (BalanceError, PartitionSample, balance_groups, balance_parts, band_count,
                        bucket_index, sample_partition)
from .theory import has_stated_constants, log10_cell_bound, log10_part_bound, theory_rho
from .verify import (classify_and_account, cut_slack, estimate_cut_probability, run_trials,
                     verify_lemmas)

__all__ = [
    "BalanceError", "FilterResult", "PairedSolutions", "PartitionSample", "balance_groups",
    "balance_parts", "band_count", "bucket_index", "classify_and_account", "compute_D_and_filter",
    "cut_slack", "estimate_cut_probability", "has_stated_constants", "log10_cell_bound",
    "log10_part_bound", "run_trials", "sample_partition", "theory_rho", "verify_lemmas",
]
