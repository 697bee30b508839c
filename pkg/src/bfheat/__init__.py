"""Numerics for the indefinite convection-diffusion operator
``L y = eps*(sin x y')' + y'`` on the circle and its Fourier matrix ``A``.
"""

from .errors import (
    BFHeatError,
    DimensionMismatch,
    EigendecompositionIllConditioned,
    InvalidEpsilon,
    InvalidOrder,
    NoConvergence,
    QuadratureFailure,
    Singular,
    Unsolvable,
)
from .tridiag import Label, TridiagonalMatrix
from .fourier import (
    build_A,
    build_B,
    build_C,
    build_J,
    build_M_matrix,
    check_factorization,
    check_J_selfadjoint,
    sequence_norm,
)
from .eigen import (
    ConvergenceTable,
    SpectrumResult,
    convergence_study,
    eigenvalues,
    hs_norm_inverse,
    smallest_singular_value,
)
from .trigpoly import TrigPoly, random_trigpoly
from .physical import (
    apply_J,
    apply_L,
    apply_L_star,
    apply_M,
    apply_S,
    check_JLJ,
    check_LMS,
    check_M_mean_invariance,
    check_theta_constraints,
    estimate_p1,
    norm_g,
    norm_m,
    p2_constant,
    p3_constant,
)
from .resolvent import QuadratureGrid, ResolventSolution, make_grid, solve_L
from .evolution import (
    EvolutionTrace,
    GalerkinMatrix,
    evolve,
    galerkin_matrix,
    propagate,
    transient_growth,
)

__version__ = "0.1.0"
