"""
Derived constants and the algebraic identities linking states, powers and torque.
"""

import math
from dataclasses import replace
from typing import Tuple, Union

from .error_handler import ConfigError, DomainError
from .models import (
    SQRT_3_2,
    DerivedConstants,
    GridParams,
    PowerPoint,
    State4,
    State5,
    SynchronverterParams,
)

SQRT_2_3 = math.sqrt(2.0 / 3.0)


def derived_constants(params: SynchronverterParams, grid: GridParams) -> DerivedConstants:
    """Compute R, L, K̃, k, p, φ, T̃_m, Q̃ and a few helpers."""
    for name, value in (('R_s', params.R_s), ('L_s', params.L_s), ('V', grid.V), ('w_g', grid.w_g)):
        if not value > 0:
            raise ConfigError(f"{name} must be positive, got {value}")

    R = params.n * params.R_s
    L = params.n * params.L_s
    M_f = params.m / SQRT_3_2
    p = R / L
    return DerivedConstants(
        R=R,
        L=L,
        K_tilde=params.K * M_f,
        k=SQRT_3_2 * grid.V / params.K,
        p=p,
        phi=math.atan2(grid.w_g * L, R),
        T_tilde=params.T_m + params.D_p * (grid.w_n - grid.w_g),
        Q_tilde=params.Q_set + params.D_q * (params.v_set - SQRT_2_3 * grid.V),
        M_f=M_f,
        s=math.hypot(p, grid.w_g),
        Z_norm=math.hypot(R, grid.w_g * L),
    )


def powers_from_state(x: Union[State4, State5], V: float) -> PowerPoint:
    """Active and reactive power delivered to the grid."""
    if isinstance(x, State5):
        x = x.x
    sin_d = math.sin(x.delta)
    cos_d = math.cos(x.delta)
    return PowerPoint(
        P=-V * (x.i_d * sin_d + x.i_q * cos_d),
        Q=V * (x.i_q * sin_d - x.i_d * cos_d),
    )


def currents_from_powers(pq: PowerPoint, delta: float, V: float) -> Tuple[float, float]:
    """Invert powers_from_state at a fixed angle; returns (i_d, i_q)."""
    if V == 0:
        raise DomainError("currents cannot be recovered from powers when V = 0", value=V)
    sin_d = math.sin(delta)
    cos_d = math.cos(delta)
    i_d = -(sin_d * pq.P + cos_d * pq.Q) / V
    i_q = -(cos_d * pq.P - sin_d * pq.Q) / V
    return i_d, i_q


def electric_torque(i_q: float, i_f: float, m: float) -> float:
    return -m * i_f * i_q


def park_voltage_dq(delta: float, V: float) -> Tuple[float, float]:
    """Grid voltage in the rotating frame: (v_d, v_q)."""
    return -V * math.sin(delta), -V * math.cos(delta)


def torque_for_setpoints(P_set: float, Q_set: float, R: float, V: float, w_n: float) -> float:
    """Prime-mover torque that places the stable equilibrium at (P_set, Q_set)."""
    if V <= 0 or w_n <= 0:
        raise DomainError(f"V and w_n must be positive, got V={V}, w_n={w_n}")
    return (P_set + R * (P_set ** 2 + Q_set ** 2) / V ** 2) / w_n


def normalize_angle(angle: float) -> float:
    """Fold an angle into (−π, π]."""
    folded = math.remainder(angle, 2.0 * math.pi)
    if folded <= -math.pi:
        folded += 2.0 * math.pi
    return folded


def with_ktilde(params: SynchronverterParams, K_tilde: float) -> SynchronverterParams:
    """Same machine with the reactive loop gain set through K̃ = K·M_f."""
    if not K_tilde > 0:
        raise ConfigError(f"K_tilde must be positive, got {K_tilde}")
    return replace(params, K=K_tilde / params.M_f)


def with_setpoints(params: SynchronverterParams, grid: GridParams,
                   P_set: float, Q_set: float) -> SynchronverterParams:
    """Same machine retuned for the setpoint pair (T_m from the torque-power identity)."""
    R = params.n * params.R_s
    T_m = torque_for_setpoints(P_set, Q_set, R, grid.V, grid.w_n)
    return replace(params, T_m=T_m, Q_set=Q_set)
