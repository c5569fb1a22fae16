"""Single-node impulsive pinning control of linear consensus networks."""

from .controller import (AdaptiveGap, Certificate, ConstantStrength, FixedGap, PinPlan,
                         RandomStrength, SequenceStrength, adaptive_gap, admissible_strength_range,
                         default_epsilon, min_gap_T, ratio_bound_C, validate_plan)
from .errors import (ConvergenceError, DegenerateGapError, DivergenceError, DomainError,
                     GraphError, MismatchError, NoRootError, NotInRootError, PinningError,
                     SingularSolveError, StepSizeError, ZeroMeanError)
from .generators import gen_grown_tree, gen_ring
from .graph import (Connectivity, Laplacian, SccDecomposition, WeightedDigraph, build_laplacian,
                    load_graph, reorder_block_form, scc_decompose)
from .observables import impulse_jump, lyapunov_V, variation_metric, weighted_mean
from .simulator import Horizon, Trajectory, flow, run
from .spectral import (SpectralData, general_eigenvalues, jacobi_eigh, lambda2, left_null_vector,
                       mmatrix_diagnostics, spectral_data)
from .verify import VerificationReport, verify_trajectory

__version__ = "0.1.0"

__all__ = [
    "AdaptiveGap",
    "Certificate",
    "ConstantStrength",
    "FixedGap",
    "PinPlan",
    "RandomStrength",
    "SequenceStrength",
    "adaptive_gap",
    "admissible_strength_range",
    "default_epsilon",
    "min_gap_T",
    "ratio_bound_C",
    "validate_plan",
    "ConvergenceError",
    "DegenerateGapError",
    "DivergenceError",
    "DomainError",
    "GraphError",
    "MismatchError",
    "NoRootError",
    "NotInRootError",
    "PinningError",
    "SingularSolveError",
    "StepSizeError",
    "ZeroMeanError",
    "gen_grown_tree",
    "gen_ring",
    "Connectivity",
    "Laplacian",
    "SccDecomposition",
    "WeightedDigraph",
    "build_laplacian",
    "load_graph",
    "reorder_block_form",
    "scc_decompose",
    "impulse_jump",
    "lyapunov_V",
    "variation_metric",
    "weighted_mean",
    "Horizon",
    "Trajectory",
    "flow",
    "run",
    "SpectralData",
    "general_eigenvalues",
    "jacobi_eigh",
    "lambda2",
    "left_null_vector",
    "mmatrix_diagnostics",
    "spectral_data",
    "VerificationReport",
    "verify_trajectory",
]
