"""
Fixed-step time-domain integration of the saturated fifth-order model and of
the fourth-order model.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import PlantCoefficients, rhs4_values, rhs5_values, sat_mode
from .error_handler import ConfigError, DomainError, SimulationDivergedError
from .models import EquilibriumPoint, GridParams, PowerPoint, SatMode, State5, SynchronverterParams
from .stability import operating_window

logger = logging.getLogger(__name__)

DEFAULT_DT = 1e-4
# Floors of the error scale for i_d, i_q, w, delta, i_f.
ERROR_FLOORS = (1.0, 1.0, 1.0, 1.0, 0.1)
# Relative size of the w perturbation compared with the other components.
PERTURB_WEIGHTS = (1.0, 1.0, 0.1, 1.0, 1.0)


@dataclass(frozen=True)
class SimConfig:
    """Step, horizon, initial state and sampling of one run."""
    t_end: float
    initial: State5
    dt: float = DEFAULT_DT
    record_stride: int = 10

    def validate(self) -> None:
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= self.dt:
            raise ConfigError(f"t_end ({self.t_end}) must be at least dt ({self.dt})")
        if self.record_stride < 1:
            raise ConfigError("record_stride must be at least 1")

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class SatEvent:
    """A change of clamp status between two steps."""
    t: float
    before: SatMode
    after: SatMode

    def to_dict(self) -> dict:
        return {'t': self.t, 'from': self.before.value, 'to': self.after.value}


@dataclass
class Trajectory:
    """Sampled states (delta unwrapped) with their powers and clamp events."""
    t: np.ndarray
    states: np.ndarray
    powers: np.ndarray
    events: List[SatEvent] = field(default_factory=list)
    limits: Optional[Tuple[float, float]] = None
    max_projection: float = 0.0
    total_projection: float = 0.0

    def __len__(self) -> int:
        return len(self.t)

    @property
    def final_state(self) -> State5:
        return State5.from_array(self.states[-1])

    @property
    def samples(self) -> List[Tuple[float, State5, PowerPoint]]:
        return [
            (float(t), State5.from_array(z), PowerPoint(float(pq[0]), float(pq[1])))
            for t, z, pq in zip(self.t, self.states, self.powers)
        ]


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    final_error: float
    t_settle: Optional[float]

    def to_dict(self) -> dict:
        return {'converged': self.converged, 'final_error': self.final_error, 't_settle': self.t_settle}


def _powers(states: np.ndarray, V: float) -> np.ndarray:
    i_d, i_q, delta = states[:, 0], states[:, 1], states[:, 3]
    sin_d, cos_d = np.sin(delta), np.cos(delta)
    return np.column_stack((-V * (i_d * sin_d + i_q * cos_d), V * (i_q * sin_d - i_d * cos_d)))


def _rk4_step(f: Callable[[np.ndarray], np.ndarray], z: np.ndarray, h: float) -> np.ndarray:
    K1 = h * f(z)
    K2 = h * f(z + K1 / 2)
    K3 = h * f(z + K2 / 2)
    K4 = h * f(z + K3)
    return z + (K1 + 2 * K2 + 2 * K3 + K4) / 6


def _resolve_limits(params: SynchronverterParams, grid: GridParams,
                    limits: Optional[Tuple[float, float]]) -> Tuple[float, float]:
    if limits is not None:
        return limits
    window = operating_window(params, grid)
    return window.u_min, window.u_max


def integrate(config: SimConfig, params: SynchronverterParams, grid: GridParams,
              limits: Optional[Tuple[float, float]] = None, saturated: bool = True) -> Trajectory:
    """RK4 integration of the fifth-order model.

    With ``saturated`` the clamp is applied at every stage and i_f is projected
    back onto [u_min, u_max] after every step; the projected distance is kept
    as a diagnostic.
    """
    config.validate()
    plant = PlantCoefficients.from_params(params, grid)
    clamp = _resolve_limits(params, grid, limits) if saturated else None
    if clamp is not None and not clamp[0] <= config.initial.i_f <= clamp[1]:
        raise DomainError(
            f"initial i_f = {config.initial.i_f} outside [{clamp[0]}, {clamp[1]}]", value=config.initial.i_f
        )

    def f(z: np.ndarray) -> np.ndarray:
        return rhs5_values(z, plant, clamp)

    steps = config.steps
    z = config.initial.as_array()
    times = [0.0]
    recorded = [z.copy()]
    events: List[SatEvent] = []
    max_projection = total_projection = 0.0
    mode = sat_mode(z[4], *clamp) if clamp else SatMode.INTERIOR

    for k in range(1, steps + 1):
        z = _rk4_step(f, z, config.dt)
        t = k * config.dt
        if not np.all(np.isfinite(z)):
            raise SimulationDivergedError(f"state became non-finite at t = {t:.6g} s", t_blowup=t)

        if clamp is not None:
            projected = min(max(z[4], clamp[0]), clamp[1])
            distance = abs(z[4] - projected)
            max_projection = max(max_projection, distance)
            total_projection += distance
            z[4] = projected
            new_mode = sat_mode(z[4], *clamp)
            if new_mode != mode:
                events.append(SatEvent(t, mode, new_mode))
                logger.debug(f"Clamp status {mode.value} -> {new_mode.value} at t = {t:.6g} s")
                mode = new_mode

        if k % config.record_stride == 0 or k == steps:
            times.append(t)
            recorded.append(z.copy())

    states = np.array(recorded)
    if events:
        logger.warning(f"Field current touched the clamp {len(events)} time(s); max projection {max_projection:.3g} A")
    logger.info(f"Integrated {steps} steps of {config.dt:g} s, {len(times)} samples")
    return Trajectory(
        t=np.array(times),
        states=states,
        powers=_powers(states, grid.V),
        events=events,
        limits=clamp,
        max_projection=max_projection,
        total_projection=total_projection,
    )


def integrate4(config: SimConfig, i_f: float, params: SynchronverterParams, grid: GridParams) -> Trajectory:
    """RK4 integration of the fourth-order model with the field current held at ``i_f``."""
    config.validate()
    plant = PlantCoefficients.from_params(params, grid)

    def f(x: np.ndarray) -> np.ndarray:
        return rhs4_values(x, i_f, plant)

    steps = config.steps
    x = config.initial.as_array()[:4]
    times = [0.0]
    recorded = [x.copy()]
    for k in range(1, steps + 1):
        x = _rk4_step(f, x, config.dt)
        t = k * config.dt
        if not np.all(np.isfinite(x)):
            raise SimulationDivergedError(f"state became non-finite at t = {t:.6g} s", t_blowup=t)
        if k % config.record_stride == 0 or k == steps:
            times.append(t)
            recorded.append(x.copy())

    states = np.column_stack((np.array(recorded), np.full(len(recorded), i_f)))
    return Trajectory(t=np.array(times), states=states, powers=_powers(states, grid.V))


def perturb(z: State5, fraction: float, weights: Sequence[float] = PERTURB_WEIGHTS) -> State5:
    """Scale every component by (1 + fraction·weight)."""
    values = z.as_array()
    return State5.from_array(values * (1.0 + fraction * np.asarray(weights, dtype=float)))


def distance_series(traj: Trajectory, target: EquilibriumPoint) -> np.ndarray:
    """Max-norm relative error to ``target`` at every sample; angle errors are wrapped."""
    reference = target.z.as_array()
    scale = np.maximum(np.abs(reference), ERROR_FLOORS)
    error = traj.states - reference
    error[:, 3] = np.remainder(error[:, 3] + math.pi, 2.0 * math.pi) - math.pi
    return np.max(np.abs(error) / scale, axis=1)


def convergence_metric(traj: Trajectory, target: EquilibriumPoint, threshold: float = 1e-4) -> ConvergenceReport:
    """Final relative error and the time after which the error stays below ``threshold``."""
    if len(traj) == 0:
        raise DomainError("empty trajectory")
    distances = distance_series(traj, target)
    final_error = float(distances[-1])
    above = np.nonzero(distances >= threshold)[0]
    if len(above) == 0:
        t_settle: Optional[float] = float(traj.t[0])
    elif above[-1] == len(distances) - 1:
        t_settle = None
    else:
        t_settle = float(traj.t[above[-1] + 1])
    return ConvergenceReport(converged=final_error < threshold, final_error=final_error, t_settle=t_settle)


def integration_order(finals: Sequence[np.ndarray]) -> float:
    """Observed order from final states at steps h, h/2, h/4."""
    coarse = np.linalg.norm(finals[0] - finals[1])
    fine = np.linalg.norm(finals[1] - finals[2])
    if fine == 0:
        return math.inf
    return math.log2(coarse / fine)
