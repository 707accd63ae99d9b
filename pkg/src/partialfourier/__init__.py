"""Fourier analysis on T^1 x SU(2) and the evolution operator d/dt + a(t) X."""
from .classify import DecayReport, classify_full, classify_partial_smooth, seminorm_bound_check
from .conjugation import gauge_growth_check, psi, verify_intertwine
from .diophantine import (A0Class, CertificationError, LiouvilleWitness, demo_nonsolvable,
                          divisor_floor, nonsolvable_rhs, witnesses)
from .estimators import (DecayClassifier, EvolutionSolver, GaugeTransformer,
                         PartialFourierTransformer)
from .repr_core import HalfInt, as_halfint
from .solver import (CoefficientA, NoSolutionError, SolveOutcome, apply_L, apply_L_full,
                     compatibility, homogeneous_witness, homogeneous_witness_coeffs, project_to_K,
                     solve, solve_mode_nonresonant, solve_mode_resonant)
from .su2 import SU2Element, haar_quadrature, quadrature_for_bandlimit, wigner
from .transform import (FullCoeff, PartialCoeffField, TimeGrid, analyze_full, analyze_partial,
                        synthesize)

__version__ = "0.1.0"
