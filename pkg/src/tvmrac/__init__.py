"""Adaptive parameter estimation with a matrix of time-varying learning rates.

The package couples a state-feedback model-reference error model with an
estimator whose learning-rate matrix evolves with the measured excitation,
bounded by continuous projection operators.  A fixed-step simulator, an
excitation analyzer, and a diagnostics layer that checks every stability
bound numerically round out the toolbox.
"""

from .errors import CertificateError, ConfigError, ConvergenceError, IntegrationError
from .numerics import LyapunovCert, expm, solve_lyapunov, sym_eig
from .projection import ConvexBound, ProjFamily, proj_gamma_column, proj_gamma_matrix, proj_pd
from .excitation import (
    ExcitationConfig,
    ExcitationReport,
    InfoMatrixState,
    RegressorTrace,
    detect_fe,
    detect_pe,
    gram_integral,
    omega_step,
    propagation_timeline,
)
from .estimator import (
    EstimatorLaw,
    LearningRateState,
    ParamMatrix,
    estimator_step,
    gamma_rhs,
    gamma_rhs_forgetting,
    theta_rhs,
)
from .error_models import (
    ErrorModelScenario,
    PlantModel,
    ReferenceModel,
    UncertaintyProfile,
    closed_loop_rhs,
    constant_uncertainty,
    make_command,
    make_f16_scenario,
    make_scenario,
    sinusoid_uncertainty,
)
from .simulate import SimConfig, Trajectory, integrate_step, run
from .analysis import (
    BoundReport,
    RateGains,
    build_bound_report,
    envelope_check,
    eta,
    eta0,
    lyapunov_V,
    set_membership,
    upsilon,
    upsilon_max,
    vdot_decomposition,
)

__version__ = "0.1.0"
