"""Elliptic PDE lab: random boundary data, non-vanishing constraints,
quantitative interior approximation, and hybrid imaging on the unit square."""

from .boundary import (BoundaryBasis, BoundaryFunction, CovarianceSummary,
                       RandomBoundaryModel, empirical_covariance, evaluate,
                       sample, sample_coeffs, sigma_norm, surrogate_h12_norm)
from .constraints import (ConstraintField, ConstraintMap, CoverLabeling,
                          extract_cover, holder_seminorm, max_abs,
                          save_cover_csv, witness_check, witness_fields,
                          zeta_eval)
from .errors import ConfigError, DomainError, RandbcError, SolverError
from .experiments import (ConcentrationReport, SuccessCurveResult, TailReport,
                          TrialConfig, TrialOutcome, concentration_check,
                          run_trial, success_curve, tail_check, trial_fields,
                          variance_identity_check, wilson_interval)
from .grid import (Grid2D, SubdomainMask, build_grid, default_window,
                   disk_mask, rect_mask)
from .inverse import (ConductivityData, ConductivityResult, QpatData,
                      QpatMultiResult, QpatResult, conductivity_forward,
                      conductivity_reconstruct, qpat_forward,
                      qpat_reconstruct, qpat_reconstruct_multi)
from .runge import (Dictionary, LocalTarget, RungeResult, approximate,
                    build_dictionary, make_target, tradeoff_curve)
from .solver import (CoefficientField, DiscreteOperator, FieldNorms,
                     ScalarField, SolveInfo, assemble, gradient, laplacian,
                     load_field_csv, norms, save_field_csv, solve_dirichlet,
                     solve_poisson)
from .streams import derive_rng

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
