"""Exact permanents and Hadamard-type permanent bounds."""

from .bounds import (
    bound_bregman_minc,
    bound_classic,
    bound_corollary,
    bound_partition,
    bound_report,
    bound_step,
    bound_subsum,
)
from .convolution import conv_coefficients, master_inequality_check, pfaff_saalschutz_check
from .core import ColumnPartition, IndexSubset, PermaboundError, load_matrix
from .linforms import coeff_bound, coeff_via_permanent, expand_product
from .permanent import BACKEND, per_naive, per_ryser, per_sub

__all__ = [
    "BACKEND",
    "ColumnPartition",
    "IndexSubset",
    "PermaboundError",
    "bound_bregman_minc",
    "bound_classic",
    "bound_corollary",
    "bound_partition",
    "bound_report",
    "bound_step",
    "bound_subsum",
    "coeff_bound",
    "coeff_via_permanent",
    "conv_coefficients",
    "expand_product",
    "load_matrix",
    "master_inequality_check",
    "per_naive",
    "per_ryser",
    "per_sub",
    "pfaff_saalschutz_check",
]
