"""Many-loci quadratic stochastic operator: simulation, fiber reduction and limit prediction."""
from .errors import (AllLociZero, BadDimension, DegenerateNormalization, DimensionMismatch,
                     EigensolverFailure, InputError, LociQsoError, NonSimpleEigenvalueOne,
                     NotASimplexPoint, NumericalError, ScenarioParseError, SuiteParseError)
from .fiber import (Fiber, ReducedMatrix, build_bc, embed, fiber_of, iterate_linear,
                    linear_trajectory, reduce_zero_loci, restrict_consistency_check, state_from_fiber)
from .fixed_points import (FixedPointSet, build_hc, fixed_point_residuals, fixed_point_set,
                           is_fixed_point, null_space)
from .scenario import RunConfig, RunReport, Scenario, load_scenario, random_scenario, simulate
from .simplex import (CoefficientMatrix, CubicMatrix, SimplexPoint, apply_w, apply_w_stochastic_form,
                      build_cubic_matrix, linkage_disequilibrium, validate_state)
from .spectral import (LimitPrediction, SpectralSummary, beta_conservation_residual, eigen_all,
                       left_perron_vector, perron_projection, predict_limit, steps_to_tolerance)

__version__ = "0.1.0"
