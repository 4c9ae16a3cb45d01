"""spint: structure-preserving integration of stochastic Poisson systems.

The package bundles a weighted truncated-jet algebra, seeded Brownian
increment streams, a catalog of stochastic Poisson systems, Poisson
integrators with a non-geometric baseline, a modified-equation engine, and
conservation/convergence diagnostics, plus a JSON-configured experiment
harness (``spint`` on the command line).
"""

from .algebra import as_matrix, as_vector, cos, exp, log, sin, sqrt, supnorm
from .brownian import (IncrementBatch, SeedSpec, TruncationPolicy,
                       aggregate_increments, clamp_threshold, sample_increments,
                       truncate_increments, wong_zakai_value)
from .diagnostics import (DriftScaling, DriftSeries, OrderEstimate, drift_scaling_exponent,
                          envelope_slope, functional_drift, poisson_map_residual,
                          strong_order_estimate)
from .errors import (ConfigError, ConsistencyError, ConvergenceError, DomainError,
                     EstimationError, StepError, TrackError)
from .integrators import (HeunStepper, ImplicitMidpoint, MaxwellBlochSplitting,
                          SolverConfig, Trajectory, implicit_solve, integrate,
                          make_stepper)
from .jets import Jet, JetSpace, jet_space
from .modified import (CoefficientTable, EffectiveOrder, ModifiedField, PoissonCertificate,
                       RegroupedField, effective_order, flow_coefficients,
                       flow_of_modified_field, method_coefficients,
                       modified_coefficients_direct, modified_coefficients_matching,
                       order_condition_residual, poisson_certificate,
                       regroup_modified_field)
from .multiindex import MultiIndex, enumerate_multiindices, moment_constant
from .systems import (PoissonSystem, ScalarField, StructureReport, canonical_system,
                      lotka_volterra, make_system, maxwell_bloch, oscillator,
                      pendulum_m_noises, poisson_bracket, sample_domain_points,
                      structure_check, two_noise_doublewell)

__version__ = "0.1.0"
