"""Pseudospectral solver and epsilon-convergence toolkit for the cubic
fractional nonlinear Schroedinger equation with distributional coefficients."""

__version__ = "0.1.0"

from .diagnostics import (BoundWitness, GNSParams, Hamiltonian, check_gns,
                          check_sobolev, hamiltonian, lemma1_linfty_bound,
                          mass, weighted_norms)
from .dynamics import (BlowupError, RunRecord, RunState, SolverConfig,
                       initial_bump, kinetic_flow, potential_flow, run,
                       smooth_bump, strang_step)
from .experiments import (CasePreset, CaseReport, EpsilonNet, Problem,
                          SweepResult, case_preset, case_report,
                          compatibility_study, run_sweep, uniqueness_study)
from .regularization import (CoefficientSpec, Constant, Delta, DeltaPower,
                             GridCoefficient, Mollifier, ScalingLaw,
                             SmoothProfile, UnderResolutionWarning,
                             default_mollifier, fit_moderateness,
                             fit_negligibility, regularize, scaled_mollifier)
from .spectral import (ComplexField, FractionalOrder, Grid, fractional_laplacian,
                       half_laplacian, hs_norm, inverse_transform, lp_norm,
                       transform)
