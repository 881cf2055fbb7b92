"""
Right-hand sides of the fourth-order, fifth-order and saturated fifth-order models.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .error_handler import ConfigError
from .models import SQRT_3_2, GridParams, SatMode, State4, State5, SynchronverterParams
from .model_core import SQRT_2_3


@dataclass(frozen=True)
class PlantCoefficients:
    """Scalars the right-hand sides need, resolved once per parameter set.

    Unlike derived_constants this performs no positivity checks, so degenerate
    plants (e.g. V = 0) can still be evaluated.
    """
    R: float
    L: float
    m: float
    J: float
    D_p: float
    T_m: float
    w_n: float
    V: float
    w_g: float
    K_tilde: float
    Q_tilde: float

    @classmethod
    def from_params(cls, params: SynchronverterParams, grid: GridParams) -> 'PlantCoefficients':
        return cls(
            R=params.n * params.R_s,
            L=params.n * params.L_s,
            m=params.m,
            J=params.J,
            D_p=params.D_p,
            T_m=params.T_m,
            w_n=grid.w_n,
            V=grid.V,
            w_g=grid.w_g,
            K_tilde=params.K * params.m / SQRT_3_2,
            Q_tilde=params.Q_set + params.D_q * (params.v_set - SQRT_2_3 * grid.V),
        )


def rhs4_values(x: np.ndarray, i_f: float, plant: PlantCoefficients) -> np.ndarray:
    i_d, i_q, w, delta = x[0], x[1], x[2], x[3]
    R, L, m, V = plant.R, plant.L, plant.m, plant.V
    return np.array([
        (-R * i_d + w * L * i_q + V * math.sin(delta)) / L,
        (-w * L * i_d - R * i_q - m * i_f * w + V * math.cos(delta)) / L,
        (plant.T_m + m * i_f * i_q - plant.D_p * w + plant.D_p * plant.w_n) / plant.J,
        w - plant.w_g,
    ])


def reactive_power_rate(z: np.ndarray, plant: PlantCoefficients) -> float:
    """(Q̃ − Q)/K̃ with Q measured from the instantaneous state."""
    i_d, i_q, delta = z[0], z[1], z[3]
    Q = plant.V * (i_q * math.sin(delta) - i_d * math.cos(delta))
    return (plant.Q_tilde - Q) / plant.K_tilde


def saturating_integrator(i_f: float, w: float, u_min: float, u_max: float) -> float:
    """Integrator input after the clamp: no outward motion once a bound is reached."""
    if i_f <= u_min:
        return max(w, 0.0)
    if i_f >= u_max:
        return min(w, 0.0)
    return w


def sat_mode(i_f: float, u_min: float, u_max: float) -> SatMode:
    if i_f <= u_min:
        return SatMode.CLAMPED_LOW
    if i_f >= u_max:
        return SatMode.CLAMPED_HIGH
    return SatMode.INTERIOR


def rhs5_values(z: np.ndarray, plant: PlantCoefficients,
                limits: Optional[Tuple[float, float]] = None) -> np.ndarray:
    """Fifth-order right-hand side; ``limits`` enables the saturating integrator."""
    out = np.empty(5)
    out[:4] = rhs4_values(z, z[4], plant)
    rate = reactive_power_rate(z, plant)
    if limits is not None:
        rate = saturating_integrator(z[4], rate, limits[0], limits[1])
    out[4] = rate
    return out


def rhs4(x: State4, i_f: float, params: SynchronverterParams, grid: GridParams) -> np.ndarray:
    """Time derivative of (i_d, i_q, w, delta) at a fixed field current."""
    return rhs4_values(x.as_array(), i_f, PlantCoefficients.from_params(params, grid))


def _resolve_limits(params: SynchronverterParams,
                    limits: Optional[Tuple[float, float]]) -> Tuple[float, float]:
    if limits is not None:
        return limits
    if not params.has_window:
        raise ConfigError("saturated model requires umin and umax")
    return params.u_min, params.u_max


def rhs5(z: State5, params: SynchronverterParams, grid: GridParams, saturated: bool = False,
         limits: Optional[Tuple[float, float]] = None) -> np.ndarray:
    """Time derivative of (i_d, i_q, w, delta, i_f).

    With ``saturated`` the field-current rate passes through the clamp on
    ``limits`` (default: the configured umin/umax).
    """
    plant = PlantCoefficients.from_params(params, grid)
    clamp = _resolve_limits(params, limits) if saturated else None
    return rhs5_values(z.as_array(), plant, clamp)


def field_current_rate(z: State5, params: SynchronverterParams, grid: GridParams,
                       form: str = 'reactive_power') -> float:
    """Non-saturated di_f/dt, either as (Q̃−Q)/K̃ or through the gain k = √(3/2)·V/K."""
    plant = PlantCoefficients.from_params(params, grid)
    if form == 'reactive_power':
        return reactive_power_rate(z.as_array(), plant)
    if form == 'currents':
        k = SQRT_3_2 * grid.V / params.K
        delta = z.x.delta
        return (k / params.m) * (z.x.i_d * math.cos(delta) - z.x.i_q * math.sin(delta)) \
            + k * plant.Q_tilde / (params.m * grid.V)
    raise ValueError(f"unknown form {form!r}")
