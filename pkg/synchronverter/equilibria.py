"""
Closed-form equilibria of the fourth-order model (two per admissible field
current) and of the fifth-order model (four per parameter set).
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .error_handler import DomainError, InfeasibleModelError
from .models import (
    Branch,
    ConditionCheck,
    DerivedConstants,
    EquilibriumKind,
    EquilibriumPoint,
    Equilibria5Result,
    GridParams,
    IfInterval,
    IfIntervalKind,
    PowerPoint,
    State4,
    State5,
    SynchronverterParams,
)
from .model_core import currents_from_powers, derived_constants, normalize_angle, powers_from_state

logger = logging.getLogger(__name__)

LAMBDA_EDGE_TOL = 1e-12
BOUNDARY_REL_TOL = 1e-12


@dataclass(frozen=True)
class LambdaCurve:
    """Λ(i_f) = −a/i_f + b·i_f with a = T̃_m·L·s/(m·V) and b = m·ω_g·p/(V·s)."""
    T_tilde: float
    m: float
    L: float
    V: float
    p: float
    w_g: float

    @property
    def s(self) -> float:
        return math.hypot(self.p, self.w_g)

    @property
    def a(self) -> float:
        return self.T_tilde * self.L * self.s / (self.m * self.V)

    @property
    def b(self) -> float:
        return self.m * self.w_g * self.p / (self.V * self.s)

    def value(self, i_f: float) -> float:
        if i_f == 0:
            raise DomainError("Λ is undefined at i_f = 0", value=i_f)
        return -self.a / i_f + self.b * i_f

    def derivative(self, i_f: float) -> float:
        return self.a / i_f ** 2 + self.b

    def roots(self, level: float) -> Tuple[float, float]:
        """Both solutions of Λ(i_f) = level, minus root first."""
        disc = level ** 2 + 4.0 * self.a * self.b
        if disc < 0:
            if disc > -BOUNDARY_REL_TOL * max(level ** 2, 1.0):
                disc = 0.0
            else:
                raise DomainError(f"Λ = {level} is not attained", lambda_value=level)
        root = math.sqrt(disc)
        return (level - root) / (2.0 * self.b), (level + root) / (2.0 * self.b)

    def minimum(self) -> Tuple[float, float]:
        """Location and value of the minimum of Λ over i_f > 0 (only when T̃_m < 0)."""
        if self.T_tilde >= 0:
            raise DomainError("Λ has no interior minimum unless T̃_m < 0", value=self.T_tilde)
        location = math.sqrt(-self.a / self.b)
        return location, 2.0 * math.sqrt(-self.a * self.b)


def lambda_curve(params: SynchronverterParams, grid: GridParams,
                 consts: Optional[DerivedConstants] = None) -> LambdaCurve:
    consts = consts or derived_constants(params, grid)
    return LambdaCurve(T_tilde=consts.T_tilde, m=params.m, L=consts.L, V=grid.V, p=consts.p, w_g=grid.w_g)


def check_assumption1(params: SynchronverterParams, grid: GridParams,
                      consts: Optional[DerivedConstants] = None) -> ConditionCheck:
    """4·R·ω_g·T̃_m ≥ −V²."""
    consts = consts or derived_constants(params, grid)
    margin = grid.V ** 2 + 4.0 * consts.R * grid.w_g * consts.T_tilde
    tol = BOUNDARY_REL_TOL * grid.V ** 2
    return ConditionCheck(holds=margin >= -tol, strict=margin > tol, margin=margin)


def if_interval(params: SynchronverterParams, grid: GridParams,
                consts: Optional[DerivedConstants] = None) -> IfInterval:
    """Positive field currents with |Λ(i_f)| ≤ 1."""
    consts = consts or derived_constants(params, grid)
    if not check_assumption1(params, grid, consts).holds:
        logger.debug("Assumption 4·R·ω_g·T̃_m ≥ −V² fails: I_f is empty")
        return IfInterval(0.0, 0.0, IfIntervalKind.EMPTY)

    curve = lambda_curve(params, grid, consts)
    if curve.T_tilde > 0:
        return IfInterval(curve.roots(-1.0)[1], curve.roots(1.0)[1], IfIntervalKind.CLOSED)
    if curve.T_tilde < 0:
        lower, upper = curve.roots(1.0)
        return IfInterval(lower, upper, IfIntervalKind.CLOSED)
    return IfInterval(0.0, 1.0 / curve.b, IfIntervalKind.HALF_OPEN_AT_ZERO)


def _fourth_order_point(i_f: float, delta: float, branch: Branch, grid: GridParams,
                        consts: DerivedConstants, m: float) -> EquilibriumPoint:
    i_q = -consts.T_tilde / (m * i_f)
    i_d = -consts.T_tilde * grid.w_g / (m * i_f * consts.p) + grid.V * math.sin(delta) / consts.R
    x = State4(i_d, i_q, grid.w_g, normalize_angle(delta))
    return EquilibriumPoint(state=x, i_f=i_f, branch=branch, pq=powers_from_state(x, grid.V))


def equilibria4(i_f: float, params: SynchronverterParams, grid: GridParams,
                consts: Optional[DerivedConstants] = None) -> Tuple[EquilibriumPoint, EquilibriumPoint]:
    """The two rest points (x₁ᵉ, x₂ᵉ) of the fourth-order model at a fixed field current."""
    consts = consts or derived_constants(params, grid)
    curve = lambda_curve(params, grid, consts)
    lam = curve.value(i_f)
    if abs(lam) > 1.0 + LAMBDA_EDGE_TOL:
        raise DomainError(
            f"i_f = {i_f} lies outside ±I_f (Λ = {lam:.6g})", value=i_f, lambda_value=lam
        )
    arc = math.acos(max(-1.0, min(1.0, lam)))
    if abs(abs(lam) - 1.0) <= LAMBDA_EDGE_TOL:
        arc = 0.0 if lam > 0 else math.pi

    first = _fourth_order_point(i_f, arc - consts.phi, Branch.DELTA1, grid, consts, params.m)
    second = _fourth_order_point(i_f, -arc - consts.phi, Branch.DELTA2, grid, consts, params.m)
    return first, second


def xi_map(i_f: float, params: SynchronverterParams, grid: GridParams,
           consts: Optional[DerivedConstants] = None) -> State4:
    """Ξ(i_f): the δ₁ branch of the fourth-order equilibria."""
    return equilibria4(i_f, params, grid, consts)[0].x


def check_existence5(params: SynchronverterParams, grid: GridParams,
                     consts: Optional[DerivedConstants] = None) -> ConditionCheck:
    """4R²Q̃² ≤ V⁴ + 4RV²T̃_mω_g, equivalently |Q̃| ≤ r."""
    consts = consts or derived_constants(params, grid)
    V2 = grid.V ** 2
    lhs = 4.0 * consts.R ** 2 * consts.Q_tilde ** 2
    rhs = V2 ** 2 + 4.0 * consts.R * V2 * consts.T_tilde * grid.w_g
    tol = BOUNDARY_REL_TOL * (V2 ** 2 + abs(rhs - V2 ** 2) + lhs)
    margin = rhs - lhs
    return ConditionCheck(holds=margin >= -tol, strict=margin > tol, margin=margin)


def positive_power_condition(params: SynchronverterParams, grid: GridParams) -> bool:
    """R·Q̃² ≤ V²·T̃_m·ω_g, i.e. the right power root is non-negative."""
    consts = derived_constants(params, grid)
    return consts.R * consts.Q_tilde ** 2 <= grid.V ** 2 * consts.T_tilde * grid.w_g


def solve_pl_pr(params: SynchronverterParams, grid: GridParams,
                consts: Optional[DerivedConstants] = None) -> Tuple[float, float]:
    """Roots P_l ≤ P_r of T̃_m·ω_g = P + R(P² + Q̃²)/V²."""
    consts = consts or derived_constants(params, grid)
    check = check_existence5(params, grid, consts)
    if not check.holds:
        raise InfeasibleModelError(
            "no equilibrium: 4R²Q̃² ≤ V⁴ + 4RV²T̃_mω_g is violated",
            condition="4R^2 Qtilde^2 <= V^4 + 4 R V^2 Ttilde w_g",
        )
    centre = -grid.V ** 2 / (2.0 * consts.R)
    half_width = math.sqrt(max(check.margin, 0.0)) / (2.0 * consts.R) if check.strict else 0.0
    return centre - half_width, centre + half_width


def exceptional_pq(grid: GridParams, consts: DerivedConstants) -> PowerPoint:
    """M = −(V²/‖Z‖²)·Z with Z = (R, ω_g·L)."""
    scale = -grid.V ** 2 / consts.Z_norm ** 2
    return PowerPoint(scale * consts.R, scale * grid.w_g * consts.L)


def _is_exceptional(P: float, grid: GridParams, consts: DerivedConstants) -> bool:
    if consts.T_tilde != 0:
        return False
    M = exceptional_pq(grid, consts)
    return math.hypot(P - M.P, consts.Q_tilde - M.Q) <= 1e-9 * math.hypot(M.P, M.Q)


def _fifth_order_pair(P: float, branch: Branch, sym_branch: Branch, params: SynchronverterParams,
                      grid: GridParams, consts: DerivedConstants) -> Tuple[EquilibriumPoint, EquilibriumPoint]:
    V, w_g, R, L = grid.V, grid.w_g, consts.R, consts.L
    Q = consts.Q_tilde
    delta = math.atan2(w_g * L * P - R * Q, R * P + w_g * L * Q + V ** 2)
    pq = PowerPoint(P, Q)
    i_d, i_q = currents_from_powers(pq, delta, V)
    if consts.T_tilde != 0:
        i_f = -consts.T_tilde / (params.m * i_q)
    else:
        i_f = (-w_g * L * i_d - R * i_q + V * math.cos(delta)) / (params.m * w_g)

    principal = EquilibriumPoint(
        state=State5.of(i_d, i_q, w_g, normalize_angle(delta), i_f), i_f=i_f, branch=branch, pq=pq
    )
    return principal, symmetric_partner(principal, sym_branch)


def symmetric_partner(point: EquilibriumPoint, branch: Optional[Branch] = None) -> EquilibriumPoint:
    """Image under (i_d, i_q, ω, δ, i_f) ↦ (−i_d, −i_q, ω, δ+π, −i_f)."""
    x = point.x
    mirrored = State4(-x.i_d, -x.i_q, x.w, normalize_angle(x.delta + math.pi))
    partner_branch = branch or {
        Branch.RIGHT: Branch.SYM_RIGHT,
        Branch.LEFT: Branch.SYM_LEFT,
        Branch.SYM_RIGHT: Branch.RIGHT,
        Branch.SYM_LEFT: Branch.LEFT,
    }.get(point.branch, point.branch)
    state = State5(mirrored, -point.i_f) if isinstance(point.state, State5) else mirrored
    return EquilibriumPoint(state=state, i_f=-point.i_f, branch=partner_branch, pq=point.pq)


def equilibria5(params: SynchronverterParams, grid: GridParams,
                consts: Optional[DerivedConstants] = None) -> Equilibria5Result:
    """All equilibria of the fifth-order model: z_r, z_l and their symmetric partners."""
    consts = consts or derived_constants(params, grid)
    P_l, P_r = solve_pl_pr(params, grid, consts)

    roots = [(P_r, Branch.RIGHT, Branch.SYM_RIGHT)]
    if P_l != P_r:
        roots.append((P_l, Branch.LEFT, Branch.SYM_LEFT))

    principals: List[EquilibriumPoint] = []
    partners: List[EquilibriumPoint] = []
    exceptional: Optional[PowerPoint] = None
    for P, branch, sym_branch in roots:
        if _is_exceptional(P, grid, consts):
            exceptional = exceptional_pq(grid, consts)
            logger.info(f"Power root P = {P:.6g} W coincides with M: i_f = 0, free angle")
            continue
        principal, partner = _fifth_order_pair(P, branch, sym_branch, params, grid, consts)
        principals.append(principal)
        partners.append(partner)

    kind = EquilibriumKind.EXCEPTIONAL if exceptional is not None else EquilibriumKind.REGULAR
    logger.debug(f"Fifth-order equilibria: P_l={P_l:.6g} W, P_r={P_r:.6g} W, kind={kind.value}")
    return Equilibria5Result(
        kind=kind, points=tuple(principals + partners), P_l=P_l, P_r=P_r, exceptional_pq=exceptional
    )


def necessary_stability_angle(delta: float, phi: float) -> bool:
    """sin(δᵉ + φ) > 0, necessary for a stable fourth-order equilibrium."""
    return math.sin(delta + phi) > 0.0
