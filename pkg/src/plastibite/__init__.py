"""Age x biting-time mosquito population model: spectral analysis and simulation."""

from .errors import (
    BracketError, ConvergenceError, DomainError, NumericalError, SteadyStateError,
    ValidationError,
)
from .heatgrid import (
    AgeGrid, CircleGrid, DiffusionPropagator, EvolutionFamily, Grid, evolve, heat_step,
)
from .model import (
    DOMAIN_LENGTH, BlowupMortality, ConstantFertility, ConstantMortality, ModelParams,
    TabulatedFertility, TabulatedMortality, VitalRates, kernel_eval, kernel_weights,
    survival, validate,
)
from .simulate import (
    LockstepSolver, PopulationField, SimConfig, Trajectory, asymptotic_prediction,
    asymptotic_profile_check, growth_rate, renewal_boundary, run, step,
)
from .spectral import (
    LotkaProblem, SpectralResult, assemble, find_lambda0, fourier_reduction_check,
    gamma_of_lambda, lotka_root, net_reproduction, perron, residue_projection,
)
from .steady import (
    Regime, RegimeKind, SteadyState, build_steady, classify, criticalize, verify_steady,
)

__version__ = "0.1.0"
