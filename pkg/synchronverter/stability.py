"""
Linearizations, eigenvalue classification, the steady-state map G and the
large-gain stability check of the closed loop.
"""

import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from .dynamics import PlantCoefficients
from .equilibria import check_assumption1, equilibria4, equilibria5, if_interval, xi_map
from .error_handler import DomainError, InfeasibleModelError, NumericError
from .geometry import build_geometry
from .models import (
    DerivedConstants,
    GridParams,
    IfInterval,
    Linearization,
    OperatingWindow,
    StabilityClass,
    StabilityVerdict,
    State4,
    State5,
    SynchronverterParams,
    Thm5Report,
)
from .model_core import derived_constants, powers_from_state, with_ktilde, with_setpoints

logger = logging.getLogger(__name__)

DEFAULT_TOL_MARGIN = 1e-6
RESIDUAL_TOL = 1e-8
MAX_EIG_SIZE = 8
WINDOW_SAMPLES = 64


def _jacobian4_values(x: np.ndarray, i_f: float, plant: PlantCoefficients) -> np.ndarray:
    i_d, i_q, w, delta = x[0], x[1], x[2], x[3]
    R, L, m, V, J = plant.R, plant.L, plant.m, plant.V, plant.J
    return np.array([
        [-R / L, w, i_q, V / L * math.cos(delta)],
        [-w, -R / L, -(i_d + m * i_f / L), -V / L * math.sin(delta)],
        [0.0, m * i_f / J, -plant.D_p / J, 0.0],
        [0.0, 0.0, 1.0, 0.0],
    ])


def jacobian4(x: State4, i_f: float, params: SynchronverterParams, grid: GridParams) -> Linearization:
    """Analytic Jacobian of the fourth-order right-hand side with respect to x."""
    plant = PlantCoefficients.from_params(params, grid)
    return Linearization(matrix=_jacobian4_values(x.as_array(), i_f, plant), about=x, i_f=i_f)


def jacobian5(z: State5, params: SynchronverterParams, grid: GridParams,
              limits: Optional[Tuple[float, float]] = None) -> Linearization:
    """Analytic Jacobian of the non-saturated fifth-order right-hand side.

    When ``limits`` is given the field current must lie strictly inside them;
    on the clamp planes the saturated model has no linearization.
    """
    if limits is not None and not limits[0] < z.i_f < limits[1]:
        raise DomainError(
            f"i_f = {z.i_f} is clamped to [{limits[0]}, {limits[1]}]: linearization undefined",
            value=z.i_f,
        )
    plant = PlantCoefficients.from_params(params, grid)
    values = z.as_array()
    i_d, i_q, w, delta = values[:4]
    gain = plant.V / plant.K_tilde

    matrix = np.zeros((5, 5))
    matrix[:4, :4] = _jacobian4_values(values, z.i_f, plant)
    matrix[1, 4] = -plant.m * w / plant.L
    matrix[2, 4] = plant.m * i_q / plant.J
    matrix[4, :] = [
        gain * math.cos(delta),
        -gain * math.sin(delta),
        0.0,
        -gain * (i_d * math.sin(delta) + i_q * math.cos(delta)),
        0.0,
    ]
    return Linearization(matrix=matrix, about=z, i_f=z.i_f)


def eigenvalues(matrix: Union[np.ndarray, Linearization]) -> Tuple[complex, ...]:
    """Eigenvalues of a small dense real matrix, computed on the balanced matrix.

    Every returned pair satisfies ‖Av − λv‖ ≤ 1e−8·‖A‖.
    """
    if isinstance(matrix, Linearization):
        matrix = matrix.matrix
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"eigenvalues need a square matrix, got shape {A.shape}")
    if A.shape[0] > MAX_EIG_SIZE:
        raise DomainError(f"matrix of size {A.shape[0]} exceeds {MAX_EIG_SIZE}")
    if not np.all(np.isfinite(A)):
        raise NumericError("matrix has non-finite entries")

    balanced, transform = scipy.linalg.matrix_balance(A)
    try:
        values, vectors = scipy.linalg.eig(balanced)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericError(f"eigenvalue iteration did not converge: {e}")

    vectors = transform @ vectors
    norm_a = np.linalg.norm(A)
    v_norms = np.linalg.norm(vectors, axis=0)
    if np.any(v_norms == 0) or not np.all(np.isfinite(values)):
        raise NumericError("eigen decomposition returned a degenerate pair")
    residuals = np.linalg.norm(A @ vectors - vectors * values, axis=0) / v_norms
    worst = float(np.max(residuals))
    if worst > RESIDUAL_TOL * norm_a + np.finfo(float).tiny:
        raise NumericError(f"eigenpair residual {worst:.3g} exceeds tolerance")

    ordered = sorted(values, key=lambda c: (-c.real, c.imag))
    return tuple(complex(c) for c in ordered)


def classify(values: Sequence[complex], tol_margin: float = DEFAULT_TOL_MARGIN) -> StabilityVerdict:
    """Stable iff max Re λ < −tol; Marginal iff |max Re λ| ≤ tol."""
    max_real = max(c.real for c in values)
    if max_real < -tol_margin:
        stability = StabilityClass.STABLE
    elif abs(max_real) <= tol_margin:
        stability = StabilityClass.MARGINAL
    else:
        stability = StabilityClass.UNSTABLE
    return StabilityVerdict(eigenvalues=tuple(values), max_real=max_real, stability=stability)


def characteristic_polynomial(matrix: Union[np.ndarray, Linearization]) -> np.ndarray:
    if isinstance(matrix, Linearization):
        matrix = matrix.matrix
    return np.poly(np.asarray(matrix, dtype=float)).real


def _routh_array(coefficients: Sequence[float]) -> Tuple[np.ndarray, bool]:
    coeffs = np.trim_zeros(np.asarray(coefficients, dtype=float), 'f')
    degree = len(coeffs) - 1
    if degree < 1:
        raise DomainError("Routh array needs a polynomial of degree at least 1")
    width = degree // 2 + 1
    table = np.zeros((degree + 1, width))
    first, second = coeffs[0::2], coeffs[1::2]
    table[0, :len(first)] = first
    table[1, :len(second)] = second
    epsilon = 1e-12 * np.max(np.abs(coeffs))
    substituted = False

    for j in range(2, degree + 1):
        if table[j - 1, 0] == 0.0:
            table[j - 1, 0] = epsilon
            substituted = True
        for i in range(width - 1):
            table[j, i] = (table[j - 1, 0] * table[j - 2, i + 1]
                           - table[j - 2, 0] * table[j - 1, i + 1]) / table[j - 1, 0]
    if table[degree, 0] == 0.0:
        substituted = True
    return table, substituted


def routh_table(coefficients: Sequence[float]) -> np.ndarray:
    """Numeric Routh array; a vanishing first-column entry is replaced by a tiny epsilon."""
    return _routh_array(coefficients)[0]


def routh_hurwitz_stable(coefficients: Sequence[float]) -> bool:
    """All roots in the open left half-plane iff the first Routh column keeps its sign."""
    coeffs = np.trim_zeros(np.asarray(coefficients, dtype=float), 'f')
    if coeffs[0] < 0:
        coeffs = -coeffs
    if np.any(coeffs <= 0):
        return False
    table, substituted = _routh_array(coeffs)
    return bool(not substituted and np.all(table[:, 0] > 0))


def classify_fourth_order(x: State4, i_f: float, params: SynchronverterParams, grid: GridParams,
                          tol_margin: float = DEFAULT_TOL_MARGIN) -> StabilityVerdict:
    return classify(eigenvalues(jacobian4(x, i_f, params, grid)), tol_margin)


def classify_fifth_order(z: State5, params: SynchronverterParams, grid: GridParams,
                         tol_margin: float = DEFAULT_TOL_MARGIN) -> StabilityVerdict:
    return classify(eigenvalues(jacobian5(z, params, grid)), tol_margin)


def steady_state_map_G(i_f: float, params: SynchronverterParams, grid: GridParams,
                       consts: Optional[DerivedConstants] = None,
                       interval: Optional[IfInterval] = None) -> float:
    """G(i_f): reactive power at Ξ(i_f)."""
    consts = consts or derived_constants(params, grid)
    interval = interval or if_interval(params, grid, consts)
    if not interval.contains(i_f):
        raise DomainError(f"G is defined on I_f only, got i_f = {i_f}", value=i_f)
    return powers_from_state(xi_map(i_f, params, grid, consts), grid.V).Q


def steady_state_map_G_prime(i_f: float, params: SynchronverterParams, grid: GridParams,
                             rel_step: float = 1e-6,
                             consts: Optional[DerivedConstants] = None) -> float:
    """Centred-difference G′, one-sided where the stencil would leave I_f."""
    consts = consts or derived_constants(params, grid)
    interval = if_interval(params, grid, consts)
    if not interval.contains(i_f):
        raise DomainError(f"G′ is defined on I_f only, got i_f = {i_f}", value=i_f)
    h = rel_step * max(interval.length, abs(i_f))
    lower = i_f - h
    if interval.lower > 0:
        lower = max(lower, interval.lower)
    upper = min(i_f + h, interval.upper)
    if upper <= lower:
        raise NumericError(f"cannot difference G at i_f = {i_f}")
    g_upper = steady_state_map_G(upper, params, grid, consts, interval)
    g_lower = steady_state_map_G(lower, params, grid, consts, interval)
    return (g_upper - g_lower) / (upper - lower)


def operating_window(params: SynchronverterParams, grid: GridParams) -> OperatingWindow:
    """[u_min, u_max] and ε: the configured values, or the middle 80 % of I_f⁺ with ε = 5 %."""
    if params.has_window:
        eps = params.eps
        if eps is None:
            try:
                low, high = build_geometry(params, grid).if_plus_interval
                eps = 0.05 * (high - low)
            except InfeasibleModelError:
                eps = 0.0
        return OperatingWindow(u_min=params.u_min, u_max=params.u_max, eps=eps, from_config=True)

    low, high = build_geometry(params, grid).if_plus_interval
    length = high - low
    if length <= 0:
        raise InfeasibleModelError("I_f⁺ is empty: no default operating window")
    return OperatingWindow(
        u_min=low + 0.1 * length,
        u_max=high - 0.1 * length,
        eps=params.eps if params.eps is not None else 0.05 * length,
        from_config=False,
    )


def _fourth_order_stable_on(window: OperatingWindow, params: SynchronverterParams, grid: GridParams,
                            tol_margin: float) -> bool:
    for i_f in np.linspace(window.u_min - window.eps, window.u_max + window.eps, WINDOW_SAMPLES + 2):
        try:
            first, _ = equilibria4(float(i_f), params, grid)
        except DomainError:
            return False
        if not classify_fourth_order(first.x, first.i_f, params, grid, tol_margin).is_stable:
            logger.debug(f"x₁ᵉ not stable at i_f = {i_f:.6g} A")
            return False
    return True


def thm5_stability_check(P_set: float, Q_set: float, params: SynchronverterParams, grid: GridParams,
                         K_tilde: float, tol_margin: float = DEFAULT_TOL_MARGIN) -> Thm5Report:
    """Large-gain sufficient conditions for stability of z_r, reported beside the direct verdict.

    The conditions are sufficient only: a Stable direct verdict with unmet
    conditions is a legitimate outcome.
    """
    tuned = with_setpoints(with_ktilde(params, K_tilde), grid, P_set, Q_set)
    result = equilibria5(tuned, grid)
    z_r = result.right
    if z_r is None:
        raise InfeasibleModelError("the right power root is the exceptional point M: z_r is not isolated")

    direct = classify_fifth_order(z_r.z, tuned, grid, tol_margin)
    assumption_strict = check_assumption1(tuned, grid).strict
    window = operating_window(tuned, grid)

    in_if_plus = fourth_order_ok = q_in_range = False
    if assumption_strict:
        low, high = build_geometry(tuned, grid).if_plus_interval
        window_fits = low < window.u_min - window.eps and window.u_max + window.eps < high
        in_if_plus = window_fits and low + window.eps <= z_r.i_f <= high - window.eps
        if window_fits:
            fourth_order_ok = _fourth_order_stable_on(window, tuned, grid, tol_margin)
            g_low = steady_state_map_G(window.u_min, tuned, grid)
            g_high = steady_state_map_G(window.u_max, tuned, grid)
            q_in_range = g_low <= z_r.pq.Q <= g_high

    sufficient = assumption_strict and in_if_plus and fourth_order_ok and q_in_range
    logger.info(
        f"Large-gain check at ({P_set:.6g} W, {Q_set:.6g} VAr), K̃={K_tilde:.6g}: "
        f"sufficient={sufficient}, direct={direct.stability.value}"
    )
    return Thm5Report(
        sufficient_conditions_met=sufficient,
        direct_verdict=direct,
        assumption_strict=assumption_strict,
        in_if_plus=in_if_plus,
        fourth_order_stable_on_window=fourth_order_ok,
        qtilde_in_range=q_in_range,
        equilibrium=z_r,
        window=window,
    )
