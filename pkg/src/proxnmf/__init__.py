"""Exact separable NMF by a proximal point solver for a reduced linear program."""
from .datagen import NmfInstance, Regime, classify_regime, generate_instance
from .errors import (DimensionMismatch, EmptyAnchorSet, GenerationFailure,
                     InvalidInput, NegativeEntry, NoRegime, NonFiniteState,
                     ProxNMFError, RegimeMismatch, SingularGram, ZeroColumn)
from .matrix import (GramSolveHandle, dedupe_columns, frobenius_distance,
                     gram_factor, gram_solve, l1_normalize_columns, pos_project)
from .oracle import (Phi2Report, brute_force_extreme_rays, nnls,
                     reconstruction_residual, validate_phi2)
from .solver import (FactorizationResult, SolverConfig, SolverState,
                     ProxIteration, build_augmented, denormalize, extract_anchors,
                     extract_weights, generate_price_vector, prox_step,
                     run_solver)

__version__ = "0.1.0"
