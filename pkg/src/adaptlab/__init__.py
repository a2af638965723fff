"""adaptlab: continuous-time adaptive estimation laws and discrete-time
online optimizers, side by side, with stability and regret diagnostics."""

from .analysis import (LyapunovSpec, QuadraticCost, RegretRecord,
                       best_static_parameter, continuous_regret,
                       convergence_fit, discrete_regret, jensen_gap,
                       lyapunov_derivative, lyapunov_value, regret_curve)
from .config import ExperimentConfig, load_experiment, validate_experiment
from .continuous_laws import (Deadzone, GradientFlow, HigherOrderTuner,
                              ProjectionLaw, SigmaModification,
                              TimeVaryingGain, deadzone, gradient_flow,
                              higher_order_tuner, proj_operator,
                              sigma_e_modification, time_varying_gain)
from .discrete_laws import (AdaptiveStepState, ConvexFeasibleSet,
                            NesterovState, RegularizerSpec, StepSchedule,
                            adaptive_step, gd_step, nesterov_step, project,
                            projected_gd_step, rftl_step)
from .error_models import (AlgebraicErrorModel, DynamicErrorModel,
                           SPRCertificate, algebraic_output, check_spr,
                           dynamic_derivatives, lyapunov_pair)
from .exceptions import (AdaptlabError, BaselineFailure, ConfigError,
                         DegenerateCurvatureError, DivergedError,
                         InsufficientDataError, NotSPRError, NotStableError)
from .losses import ERMBatch, LossSpec, erm_grad, loss_grad, loss_value
from .scenarios import PRESET_NAMES, load_preset, run_scenario
from .signals import (PEWindowConfig, RegressorSignal, evaluate_regressor,
                      normalizing_signal, pe_level, rbf_features)
from .simulate import AnalysisReport, Trajectory, rk4_step, run_experiment

__version__ = "0.1.0"
