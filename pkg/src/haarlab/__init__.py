"""Finite dyadic models of Haar shifts, paraproducts and matrix-valued product BMO."""
from .grid import (DimensionMismatch, DyadicInterval, DyadicRectangle, GridConfig, HaarIndex2D,
                   LevelOverflow, RootHasNoParent, analyze1d, analyze2d, children,
                   evaluate_basis, haar_sign, inner, l2norm, spectrum_from_json,
                   spectrum_to_json, synthesize1d, synthesize2d)
from .operators import (LinearOperatorHandle, NoConvergence, commutator1p, commutator2p,
                        commutator_operator, multiply, operator_norm, shift1d, shift_x, shift_y)
from .paraproducts import (ParaproductSpec, apply_paraproduct, case_operator,
                           decomposition_check, nine_term_expand, paraproduct_adjoint,
                           product_identity_check)
from .bmo import (BmoReport, TestSetFamily, bmo_norm, carleson_check, default_family, pi1, pi2,
                  square_function, strong_maximal, trace_bound_check)
from .hilbert import (KernelMatrix, ShiftedGrid, commutator2p_hilbert, discrete_hilbert,
                      petermichl_average, shifted_shift_kernel)
from .experiments import (ExperimentConfig, SandwichRecord, generate_symbol,
                          lower_bound_reduction_check, run_suite, sandwich_experiment)

__version__ = "0.1.0"
