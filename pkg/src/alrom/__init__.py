"""Structure-preserving model order reduction for Ablowitz-Ladik lattices."""

from .lattice import (LatticeConfig, State, Tangent, FullOrderSystem,
                      fom_rhs, fom_rhs_jacobian, grad_hamiltonian, hamiltonian,
                      initial_soliton_conservative, initial_soliton_damped,
                      momentum, nonlinear_diag)
from .integrators import (NonConvergenceError, SolverOptions, Trajectory,
                          exponential_midpoint_step, implicit_midpoint_step,
                          integrate)
from .reduction import (DeimOperator, PodBasis, SnapshotSet, deim_operator,
                        normalized_singular_values, pod_basis, qdeim_points)
from .rom import (ReducedModel, ReducedState, assemble_kron_constants,
                  build_reduced_model, deim_rhs, lift, pod_rhs,
                  project_initial, reduced_system)
from .metrics import (DiagnosticSeries, RateConstants, balance_aggregate,
                      balance_residuals, conservation_error,
                      relative_solution_error)

__all__ = [name for name in dir() if not name.startswith("_")]
