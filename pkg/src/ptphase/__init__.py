"""Phase-space portraits of hyperbolic Poschl-Teller two-level systems.

Closed-form Wigner functions and their quadrature oracle, Wigner-flow
currents with stagnation-point analysis, one-mode non-Gaussianity
quantifiers, and the bipartite separability stack.
"""

__version__ = "0.1.0"

from .bipartite import (MomentsMatrix, SeparabilityReport, TwoModeCovariance,
                        bipartite_covariance, build_moments_matrix,
                        determinant_criteria, lambda_sweep, separability_report,
                        symplectic_eigenvalues, two_mode_wigner)
from .flow import (FlowField, StagnationPoint, continuity_residual, current,
                   divergence, find_stagnation_points, nonliouvillian_quantifier,
                   sample_flow, sample_liouvillian)
from .infoprofile import (CovarianceData, MomentTable, covariance,
                          entropic_nongaussianity, kurtosis, moments,
                          negativity_volume)
from .ptsystem import (ClassicalRegime, PhasePoint, PTParams, TwoLevelState,
                       classical_ode_step, classical_trajectory, eigenstate,
                       energy, potential, two_level_frequency)
from .specfun import (EigenstateIndex, assoc_legendre_tanh, digamma, log_gamma,
                      trigamma)
from .wigner import (Grid, WignerField, hyperbolic_derivative_operator,
                     kernel_f, kernel_g, kernel_h, sample_field,
                     wigner_component, wigner_oracle, wigner_total)

__all__ = [name for name in dir() if not name.startswith("_")]
