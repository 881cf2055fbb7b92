"""
Synchronverter stability toolkit package.
"""

__version__ = "1.0.0"

from .config import config, load_model_config, parse_model_config
from .models import (
    SynchronverterParams,
    GridParams,
    DerivedConstants,
    State4,
    State5,
    PowerPoint,
    Branch,
    CircleBranch,
    StabilityClass,
    CellVerdict,
    IfInterval,
    EquilibriumPoint,
    Equilibria5Result,
    PowerPlaneGeometry,
    StabilityVerdict,
    StabilityMap,
    SweepGrid,
)
from .model_core import (
    derived_constants,
    powers_from_state,
    currents_from_powers,
    electric_torque,
    torque_for_setpoints,
    with_ktilde,
    with_setpoints,
)
from .dynamics import rhs4, rhs5, field_current_rate
from .equilibria import (
    lambda_curve,
    check_assumption1,
    if_interval,
    equilibria4,
    xi_map,
    check_existence5,
    solve_pl_pr,
    equilibria5,
)
from .geometry import build_geometry, s_point, in_sector, sample_circle
from .stability import (
    jacobian4,
    jacobian5,
    eigenvalues,
    classify,
    routh_hurwitz_stable,
    steady_state_map_G,
    steady_state_map_G_prime,
    operating_window,
    thm5_stability_check,
)
from .sweep_manager import SweepManager, create_sweep_manager, stability_sweep
from .sim import SimConfig, Trajectory, integrate, integrate4, perturb, convergence_metric
from .error_handler import (
    SynchronverterError,
    ConfigError,
    InfeasibleModelError,
    DomainError,
    NumericError,
    SimulationDivergedError,
    error_handler,
    handle_error_decorator,
)

__all__ = [
    'config', 'load_model_config', 'parse_model_config',
    'SynchronverterParams', 'GridParams', 'DerivedConstants', 'State4', 'State5', 'PowerPoint',
    'Branch', 'CircleBranch', 'StabilityClass', 'CellVerdict', 'IfInterval',
    'EquilibriumPoint', 'Equilibria5Result', 'PowerPlaneGeometry', 'StabilityVerdict',
    'StabilityMap', 'SweepGrid',
    'derived_constants', 'powers_from_state', 'currents_from_powers', 'electric_torque',
    'torque_for_setpoints', 'with_ktilde', 'with_setpoints',
    'rhs4', 'rhs5', 'field_current_rate',
    'lambda_curve', 'check_assumption1', 'if_interval', 'equilibria4', 'xi_map',
    'check_existence5', 'solve_pl_pr', 'equilibria5',
    'build_geometry', 's_point', 'in_sector', 'sample_circle',
    'jacobian4', 'jacobian5', 'eigenvalues', 'classify', 'routh_hurwitz_stable',
    'steady_state_map_G', 'steady_state_map_G_prime', 'operating_window', 'thm5_stability_check',
    'SweepManager', 'create_sweep_manager', 'stability_sweep',
    'SimConfig', 'Trajectory', 'integrate', 'integrate4', 'perturb', 'convergence_metric',
    'SynchronverterError', 'ConfigError', 'InfeasibleModelError', 'DomainError',
    'NumericError', 'SimulationDivergedError', 'error_handler', 'handle_error_decorator',
]
