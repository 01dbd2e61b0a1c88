"""Moment-matched prior measures on [0, 1]."""
from .hilbert import hilbert_inverse_apply, hilbert_matrix, hilbert_matvec, inverse_diagonal
from .measure import (DensityPiece, MomentMeasure, Term, mixture, moment, moment_exact,
                      point_mass, uniform)
from .polynomial import Polynomial
from .priors import (MeasurePair, build_pair_prop1, build_pair_prop2, identical_pair,
                     factorial_constant)
from .remez import MinimaxFit, RemezError, best_poly_approx
from .sturm import RootIsolationError, isolate_roots, sturm_sequence
from .targets import TargetFunction, entropy, parse_target, power

__all__ = [
    "hilbert_inverse_apply", "hilbert_matrix", "hilbert_matvec", "inverse_diagonal",
    "DensityPiece", "MomentMeasure", "Term", "mixture", "moment", "moment_exact",
    "point_mass", "uniform", "Polynomial", "MeasurePair", "build_pair_prop1",
    "build_pair_prop2", "identical_pair", "factorial_constant", "MinimaxFit", "RemezError",
    "best_poly_approx", "RootIsolationError", "isolate_roots", "sturm_sequence",
    "TargetFunction", "entropy", "parse_target", "power",
]
