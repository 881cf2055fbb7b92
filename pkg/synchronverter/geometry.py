"""
Power-plane constructions: the equilibrium circle, the points Z, M, O, C,
the line through M and C, the S₁/S₂ parametrization and the stability sector.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from .equilibria import check_assumption1, equilibria4, exceptional_pq, if_interval, lambda_curve
from .error_handler import DomainError, InfeasibleModelError
from .models import (
    CircleBranch,
    CirclePoint,
    DerivedConstants,
    GridParams,
    IfInterval,
    Orientation,
    PowerPlaneGeometry,
    PowerPoint,
    StabilitySector,
    SynchronverterParams,
)
from .model_core import derived_constants

logger = logging.getLogger(__name__)


def _unit(vector: np.ndarray) -> Tuple[float, float]:
    norm = float(np.hypot(vector[0], vector[1]))
    return float(vector[0] / norm), float(vector[1] / norm)


def circle_centre(grid: GridParams, consts: DerivedConstants) -> PowerPoint:
    return PowerPoint(-grid.V ** 2 / (2.0 * consts.R), 0.0)


def circle_radius(grid: GridParams, consts: DerivedConstants) -> float:
    V2 = grid.V ** 2
    r_squared = (V2 ** 2 + 4.0 * V2 * consts.R * consts.T_tilde * grid.w_g) / (4.0 * consts.R ** 2)
    return math.sqrt(max(r_squared, 0.0))


def orientation_of(grid: GridParams, consts: DerivedConstants) -> Orientation:
    if grid.w_g * consts.L > consts.R:
        return Orientation.M_RIGHT_OF_C
    return Orientation.M_LEFT_OR_BELOW_C


def stability_sector(params: SynchronverterParams, grid: GridParams) -> StabilitySector:
    """Region swept by S₁(i_f), i_f ∈ I_f⁺, over all torques.

    C and M do not depend on T̃_m, so neither does the sector.
    """
    consts = derived_constants(params, grid)
    C = circle_centre(grid, consts)
    M = exceptional_pq(grid, consts)
    if orientation_of(grid, consts) == Orientation.M_RIGHT_OF_C:
        ray_start, ray_end = _unit(M - C), (0.0, 1.0)
    else:
        ray_start, ray_end = (0.0, -1.0), _unit(C - M)
    return StabilitySector(apex=C, M=M, ray_start=ray_start, ray_end=ray_end)


def build_geometry(params: SynchronverterParams, grid: GridParams) -> PowerPlaneGeometry:
    """All power-plane objects for the current torque."""
    if not check_assumption1(params, grid).strict:
        raise InfeasibleModelError(
            "equilibrium circle is degenerate: 4·R·ω_g·T̃_m > −V² is violated",
            condition="4 R w_g Ttilde > -V^2",
        )
    consts = derived_constants(params, grid)
    C = circle_centre(grid, consts)
    r = circle_radius(grid, consts)
    M = exceptional_pq(grid, consts)
    interval = if_interval(params, grid)
    orientation = orientation_of(grid, consts)

    top = PowerPoint(C.P, r if orientation == Orientation.M_RIGHT_OF_C else -r)
    distance = float(np.hypot(*(top - M)))
    if_zero = distance * consts.Z_norm / (grid.V * params.m * grid.w_g)
    if orientation == Orientation.M_RIGHT_OF_C:
        if_plus_interval = (interval.lower, if_zero)
    else:
        if_plus_interval = (if_zero, interval.upper)

    geometry = PowerPlaneGeometry(
        C=C,
        r=r,
        Z=(consts.R, grid.w_g * consts.L),
        M=M,
        phi=consts.phi,
        line_direction=_unit(C - M),
        if_minus=interval.lower,
        if_plus=interval.upper,
        if_zero=if_zero,
        if_interval=interval,
        if_plus_interval=if_plus_interval,
        orientation=orientation,
        sector=stability_sector(params, grid),
    )
    logger.debug(
        f"Geometry: C={C.P:.6g} W, r={r:.6g} W, I_f=[{interval.lower:.4g}, {interval.upper:.4g}] A, "
        f"i_f0={if_zero:.4g} A"
    )
    return geometry


def s_point(i_f: float, branch: CircleBranch, params: SynchronverterParams, grid: GridParams) -> CirclePoint:
    """S_j(i_f) = M + (V/‖Z‖)·m·i_f·ω_g·(cos(φ−δ_j), sin(φ−δ_j))."""
    interval = if_interval(params, grid)
    if not interval.contains(i_f):
        lam = lambda_curve(params, grid).value(i_f) if i_f != 0 else None
        raise DomainError(f"i_f = {i_f} lies outside I_f", value=i_f, lambda_value=lam)

    consts = derived_constants(params, grid)
    first, second = equilibria4(i_f, params, grid)
    delta = (first if branch == CircleBranch.S1 else second).x.delta
    M = exceptional_pq(grid, consts)
    radius = grid.V / consts.Z_norm * params.m * i_f * grid.w_g
    angle = consts.phi - delta
    pq = PowerPoint(M.P + radius * math.cos(angle), M.Q + radius * math.sin(angle))
    return CirclePoint(i_f=i_f, branch=branch, pq=pq, delta=delta)


def level_circle(i_f: float, params: SynchronverterParams, grid: GridParams) -> Tuple[PowerPoint, float]:
    """Centre and radius of the locus of equilibria with a fixed field current."""
    consts = derived_constants(params, grid)
    radius = grid.V / consts.Z_norm * params.m * abs(i_f) * grid.w_g
    return exceptional_pq(grid, consts), radius


def exceptional_point(params: SynchronverterParams, grid: GridParams) -> Tuple[PowerPoint, bool]:
    """M, and whether (P, Q̃) = M is an equilibrium for the current settings."""
    consts = derived_constants(params, grid)
    M = exceptional_pq(grid, consts)
    hit = consts.T_tilde == 0 and abs(consts.Q_tilde - M.Q) <= 1e-9 * math.hypot(M.P, M.Q)
    return M, hit


def secant_pair(level: float, params: SynchronverterParams, grid: GridParams) -> Tuple[float, float]:
    """The two field currents with Λ(i_f) = level when T̃_m < 0.

    S₁ at both currents and M are collinear.
    """
    curve = lambda_curve(params, grid)
    if curve.T_tilde >= 0:
        raise DomainError("secant pairs exist only for T̃_m < 0", value=curve.T_tilde)
    _, lam_min = curve.minimum()
    if not (lam_min * (1.0 - 1e-12) <= level <= 1.0 + 1e-12):
        raise DomainError(
            f"Λ = {level} outside the attained range [{lam_min:.6g}, 1]", lambda_value=level
        )
    if abs(level - lam_min) <= 1e-12 * lam_min:
        location, _ = curve.minimum()
        return location, location
    return curve.roots(level)


def in_sector(pq: PowerPoint, geometry: PowerPlaneGeometry) -> bool:
    return geometry.sector.contains(pq)


def sample_circle(params: SynchronverterParams, grid: GridParams, count: int = 512,
                  interval: Optional[IfInterval] = None) -> List[CirclePoint]:
    """S₁ and S₂ at ``count`` equispaced field currents of I_f."""
    interval = interval or if_interval(params, grid)
    if interval.is_empty:
        return []
    samples: List[CirclePoint] = []
    for i_f in interval.linspace(count):
        samples.append(s_point(float(i_f), CircleBranch.S1, params, grid))
        samples.append(s_point(float(i_f), CircleBranch.S2, params, grid))
    return samples
