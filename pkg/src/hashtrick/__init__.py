"""Feature hashing with seeded tabulation hashing, exact small-instance
oracles, closed-form tradeoff bounds, and a norm-distortion experiment
harness."""

from ._kernels import BACKEND as KERNEL_BACKEND, available_backends
from .bounds import (
    TradeoffQuery,
    TradeoffResult,
    eulerian_count_estimate,
    evaluate_tradeoff,
    moment_bound,
)
from .experiment import (
    DEFAULT_SEED,
    BorderRow,
    GridCellStat,
    GridSpec,
    NuEstimate,
    RatioRecord,
    analyze_results,
    border_analysis,
    compute_nu_hat,
    generate_cell_vectors,
    ratio_analysis,
    read_results,
    run_cell,
    run_grid,
    write_results,
)
from .oracle import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    EulerianCountResult,
    ExactVector,
    count_eulerian_graphs,
    exact_failure_probability,
    exact_moment_bruteforce,
    exact_moment_sequences,
)
from .projection import FeatureHasher, SparseVector, project, projected_norm_sq
from .rng import (
    DoubleTabulation,
    PolyHash,
    PolyHashStream,
    derive_streams,
    mix64,
    splitmix64,
    stream_seed,
)
from .verify import VerificationReport, run_all

__version__ = "0.1.0"

__all__ = [
    "BorderRow",
    "BudgetExceeded",
    "DEFAULT_BUDGET",
    "DEFAULT_SEED",
    "DoubleTabulation",
    "EulerianCountResult",
    "ExactVector",
    "FeatureHasher",
    "GridCellStat",
    "GridSpec",
    "KERNEL_BACKEND",
    "NuEstimate",
    "PolyHash",
    "PolyHashStream",
    "RatioRecord",
    "SparseVector",
    "TradeoffQuery",
    "TradeoffResult",
    "VerificationReport",
    "analyze_results",
    "available_backends",
    "border_analysis",
    "compute_nu_hat",
    "count_eulerian_graphs",
    "derive_streams",
    "eulerian_count_estimate",
    "evaluate_tradeoff",
    "exact_failure_probability",
    "exact_moment_bruteforce",
    "exact_moment_sequences",
    "generate_cell_vectors",
    "mix64",
    "moment_bound",
    "project",
    "projected_norm_sq",
    "ratio_analysis",
    "read_results",
    "run_all",
    "run_cell",
    "run_grid",
    "splitmix64",
    "stream_seed",
    "write_results",
]
