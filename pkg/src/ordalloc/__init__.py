"""Capital allocation across ordinally ranked alternatives.

Risk-neutral closed forms live in :mod:`ordalloc.allocator`, order-statistic
moments in :mod:`ordalloc.orderstats`, the risk-averse solver in
:mod:`ordalloc.riskaverse` and the Monte Carlo oracle in :mod:`ordalloc.mc`.
"""
from ._kernels import BACKEND
from .allocator import (
    dominance_gap,
    ewp_weights,
    expected_output,
    max_output_case1,
    max_output_case2,
    rule_of_thumb_weights,
    swp_weights,
    two_asset_weights,
)
from .model import (
    AllocationReport,
    ConvergenceError,
    DomainError,
    ModelParams,
    MomentMatrix,
    check_weights,
)
from .orderstats import (
    correlation_matrix,
    covariance_matrix,
    joint_moment,
    log_beta,
    moment_of_order_statistic,
    order_statistic_pdf,
    p_vector,
)
from .riskaverse import (
    OptimizationOutcome,
    OptimizerConfig,
    minimum_variance_weights,
    optimize_mean_variance,
    utility,
    variance_of_output,
)

__version__ = "0.1.0"
