"""
Data models for the synchronverter toolkit.

All records are immutable. Units are SI: A, V, W, VAr, rad, rad/s, N·m.
"""

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .error_handler import ConfigError


SQRT_3_2 = math.sqrt(1.5)


@dataclass(frozen=True)
class SynchronverterParams:
    """Machine and controller constants of one synchronverter.

    ``u_min``/``u_max``/``eps`` describe the field-current operating window;
    ``None`` selects the default window derived from the equilibrium geometry.
    """
    R_s: float
    L_s: float
    n: float
    J: float
    D_p: float
    D_q: float
    m: float
    K: float
    T_m: float
    Q_set: float
    v_set: float
    u_min: Optional[float] = None
    u_max: Optional[float] = None
    eps: Optional[float] = None

    def validate(self) -> None:
        """Validate the parameter invariants."""
        for name in ('R_s', 'L_s', 'J', 'D_p', 'm', 'K', 'v_set'):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if not math.isfinite(self.D_q) or self.D_q < 0:
            raise ConfigError(f"D_q must be non-negative, got {self.D_q}")
        if not math.isfinite(self.n) or self.n < 1:
            raise ConfigError(f"n must be at least 1, got {self.n}")
        for name in ('T_m', 'Q_set'):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if (self.u_min is None) != (self.u_max is None):
            raise ConfigError("umin and umax must both be set or both be null")
        if self.u_min is not None and self.u_min >= self.u_max:
            raise ConfigError(f"umin ({self.u_min}) must be below umax ({self.u_max})")
        if self.eps is not None and self.eps < 0:
            raise ConfigError(f"eps must be non-negative, got {self.eps}")

    @property
    def M_f(self) -> float:
        return self.m / SQRT_3_2

    @property
    def has_window(self) -> bool:
        return self.u_min is not None and self.u_max is not None


@dataclass(frozen=True)
class GridParams:
    """Infinite-bus voltage and frequencies."""
    V: float
    w_g: float
    w_n: float

    def validate(self) -> None:
        for name in ('V', 'w_g', 'w_n'):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class DerivedConstants:
    """Scalars derived from the machine and grid parameters."""
    R: float
    L: float
    K_tilde: float
    k: float
    p: float
    phi: float
    T_tilde: float
    Q_tilde: float
    M_f: float
    s: float
    Z_norm: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class State4:
    """State x = (i_d, i_q, w, delta) of the fourth-order model."""
    i_d: float
    i_q: float
    w: float
    delta: float

    def as_array(self) -> np.ndarray:
        return np.array([self.i_d, self.i_q, self.w, self.delta], dtype=float)

    @classmethod
    def from_array(cls, values) -> 'State4':
        return cls(float(values[0]), float(values[1]), float(values[2]), float(values[3]))


@dataclass(frozen=True)
class State5:
    """State z = (x, i_f) of the fifth-order model."""
    x: State4
    i_f: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x.i_d, self.x.i_q, self.x.w, self.x.delta, self.i_f], dtype=float)

    @classmethod
    def from_array(cls, values) -> 'State5':
        return cls(State4.from_array(values[:4]), float(values[4]))

    @classmethod
    def of(cls, i_d: float, i_q: float, w: float, delta: float, i_f: float) -> 'State5':
        return cls(State4(i_d, i_q, w, delta), i_f)


@dataclass(frozen=True)
class PowerPoint:
    """A point (P, Q) of the power plane."""
    P: float
    Q: float

    def as_array(self) -> np.ndarray:
        return np.array([self.P, self.Q], dtype=float)

    def __sub__(self, other: 'PowerPoint') -> np.ndarray:
        return np.array([self.P - other.P, self.Q - other.Q], dtype=float)


class SatMode(Enum):
    """Clamp status of the field-current integrator."""
    INTERIOR = "interior"
    CLAMPED_LOW = "clamped_low"
    CLAMPED_HIGH = "clamped_high"


class Branch(Enum):
    """Labels of equilibrium points."""
    DELTA1 = "delta1"
    DELTA2 = "delta2"
    RIGHT = "z_r"
    LEFT = "z_l"
    SYM_RIGHT = "z_r_sym"
    SYM_LEFT = "z_l_sym"


class CircleBranch(Enum):
    S1 = "S1"
    S2 = "S2"


class StabilityClass(Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"
    NOT_COMPUTED = "not_computed"


class CellVerdict(Enum):
    """Verdict of one cell of a stability map."""
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"
    NO_EQUILIBRIUM = "no-equilibrium"


class IfIntervalKind(Enum):
    CLOSED = "closed"
    HALF_OPEN_AT_ZERO = "half_open_at_zero"
    EMPTY = "empty"


class Orientation(Enum):
    """Position of M relative to the circle centre C."""
    M_RIGHT_OF_C = "M_right_of_C"
    M_LEFT_OR_BELOW_C = "M_left_or_below_C"


class EquilibriumKind(Enum):
    REGULAR = "regular"
    EXCEPTIONAL = "exceptional"


@dataclass(frozen=True)
class ConditionCheck:
    """Outcome of an inequality test: whether it holds and whether strictly."""
    holds: bool
    strict: bool
    margin: float = 0.0

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class IfInterval:
    """The set I_f of positive field currents admitting fourth-order equilibria."""
    lower: float
    upper: float
    kind: IfIntervalKind

    @property
    def is_empty(self) -> bool:
        return self.kind == IfIntervalKind.EMPTY

    @property
    def length(self) -> float:
        return 0.0 if self.is_empty else self.upper - self.lower

    def contains(self, i_f: float, rel_tol: float = 1e-12) -> bool:
        if self.is_empty:
            return False
        slack = rel_tol * max(abs(self.upper), 1.0)
        if self.kind == IfIntervalKind.HALF_OPEN_AT_ZERO:
            return 0.0 < i_f <= self.upper + slack
        return self.lower - slack <= i_f <= self.upper + slack

    def linspace(self, count: int, inset: float = 0.0) -> np.ndarray:
        """Equispaced samples, optionally pulled inwards by ``inset`` of the length."""
        margin = inset * self.length
        lower = self.lower + margin
        if self.kind == IfIntervalKind.HALF_OPEN_AT_ZERO and margin == 0.0:
            lower = self.upper / count
        return np.linspace(lower, self.upper - margin, count)

    def to_list(self) -> List[float]:
        return [self.lower, self.upper]


@dataclass(frozen=True)
class EquilibriumPoint:
    """An equilibrium of the fourth- or fifth-order model."""
    state: Union[State4, State5]
    i_f: float
    branch: Branch
    pq: PowerPoint
    stability: StabilityClass = StabilityClass.NOT_COMPUTED
    max_real: Optional[float] = None

    @property
    def x(self) -> State4:
        return self.state.x if isinstance(self.state, State5) else self.state

    @property
    def z(self) -> State5:
        return self.state if isinstance(self.state, State5) else State5(self.state, self.i_f)

    def with_stability(self, stability: StabilityClass, max_real: Optional[float] = None) -> 'EquilibriumPoint':
        return replace(self, stability=stability, max_real=max_real)


@dataclass(frozen=True)
class Equilibria5Result:
    """All equilibria of the fifth-order model for one parameter set.

    ``kind`` is EXCEPTIONAL when one power root coincides with the point M;
    that root then has i_f = 0 and a free angle and is reported through
    ``exceptional_pq`` instead of ``points``.
    """
    kind: EquilibriumKind
    points: Tuple[EquilibriumPoint, ...]
    P_l: float
    P_r: float
    exceptional_pq: Optional[PowerPoint] = None

    def get(self, branch: Branch) -> Optional[EquilibriumPoint]:
        for point in self.points:
            if point.branch == branch:
                return point
        return None

    @property
    def right(self) -> Optional[EquilibriumPoint]:
        return self.get(Branch.RIGHT)

    @property
    def left(self) -> Optional[EquilibriumPoint]:
        return self.get(Branch.LEFT)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class CirclePoint:
    """S_j(i_f) on the equilibrium circle of the power plane."""
    i_f: float
    branch: CircleBranch
    pq: PowerPoint
    delta: float


@dataclass(frozen=True)
class StabilitySector:
    """Wedge with apex C bounded by the line through M and C and the vertical through C."""
    apex: PowerPoint
    M: PowerPoint
    ray_start: Tuple[float, float]
    ray_end: Tuple[float, float]

    def contains(self, pq: PowerPoint) -> bool:
        cm = self.apex - self.M
        sm = pq - self.M
        cross = cm[0] * sm[1] - cm[1] * sm[0]
        return bool(cross < 0.0 and pq.P > self.apex.P)

    def to_dict(self) -> Dict[str, List[float]]:
        return {
            'apex': [self.apex.P, self.apex.Q],
            'ray_start': list(self.ray_start),
            'ray_end': list(self.ray_end),
        }


@dataclass(frozen=True)
class PowerPlaneGeometry:
    """Circle, reference points and field-current intervals in the power plane."""
    C: PowerPoint
    r: float
    Z: Tuple[float, float]
    M: PowerPoint
    phi: float
    line_direction: Tuple[float, float]
    if_minus: float
    if_plus: float
    if_zero: float
    if_interval: IfInterval
    if_plus_interval: Tuple[float, float]
    orientation: Orientation
    sector: StabilitySector

    def to_dict(self) -> Dict[str, object]:
        return {
            'C': [self.C.P, self.C.Q],
            'r': self.r,
            'Z': list(self.Z),
            'M': [self.M.P, self.M.Q],
            'phi_deg': math.degrees(self.phi),
            'line_L': {'point': [self.M.P, self.M.Q], 'direction': list(self.line_direction)},
            'if_minus': self.if_minus,
            'if_plus': self.if_plus,
            'if_zero': self.if_zero,
            'If_interval': self.if_interval.to_list(),
            'If_plus_interval': list(self.if_plus_interval),
            'orientation': self.orientation.value,
            'sector': self.sector.to_dict(),
        }


@dataclass(frozen=True)
class StabilityVerdict:
    """Eigenvalues of a linearization and their classification."""
    eigenvalues: Tuple[complex, ...]
    max_real: float
    stability: StabilityClass

    @property
    def is_stable(self) -> bool:
        return self.stability == StabilityClass.STABLE


@dataclass(frozen=True)
class Linearization:
    """Jacobian matrix of a model about a state."""
    matrix: np.ndarray
    about: Union[State4, State5]
    i_f: float


@dataclass(frozen=True)
class OperatingWindow:
    """Field-current limits and the margin used for the stability test."""
    u_min: float
    u_max: float
    eps: float
    from_config: bool


@dataclass(frozen=True)
class Thm5Report:
    """Sufficient large-gain stability conditions next to the direct eigenvalue verdict."""
    sufficient_conditions_met: bool
    direct_verdict: StabilityVerdict
    assumption_strict: bool
    in_if_plus: bool
    fourth_order_stable_on_window: bool
    qtilde_in_range: bool
    equilibrium: EquilibriumPoint
    window: OperatingWindow

    def to_dict(self) -> Dict[str, object]:
        return {
            'sufficient_conditions_met': self.sufficient_conditions_met,
            'direct_verdict': self.direct_verdict.stability.value,
            'max_real': self.direct_verdict.max_real,
            'assumption_strict': self.assumption_strict,
            'in_if_plus': self.in_if_plus,
            'fourth_order_stable_on_window': self.fourth_order_stable_on_window,
            'qtilde_in_range': self.qtilde_in_range,
            'i_f_e': self.equilibrium.i_f,
            'window': [self.window.u_min, self.window.u_max, self.window.eps],
        }


@dataclass(frozen=True)
class SweepGrid:
    """Rectangular (P_set, Q_set) grid."""
    P_min: float
    P_max: float
    Q_min: float
    Q_max: float
    n_P: int
    n_Q: int

    def validate(self) -> None:
        if self.n_P < 1 or self.n_Q < 1:
            raise ConfigError(f"grid resolution must be positive, got {self.n_P}x{self.n_Q}")
        if not (self.P_max > self.P_min and self.Q_max > self.Q_min):
            raise ConfigError("grid ranges must be non-degenerate")

    def p_values(self) -> np.ndarray:
        return np.linspace(self.P_min, self.P_max, self.n_P)

    def q_values(self) -> np.ndarray:
        return np.linspace(self.Q_min, self.Q_max, self.n_Q)

    @property
    def cell_area(self) -> float:
        dp = (self.P_max - self.P_min) / max(self.n_P - 1, 1)
        dq = (self.Q_max - self.Q_min) / max(self.n_Q - 1, 1)
        return dp * dq


@dataclass(frozen=True)
class StabilityCell:
    """Verdict and diagnostics of one (P_set, Q_set) cell."""
    P_set: float
    Q_set: float
    verdict: CellVerdict
    max_real: float = math.nan
    i_f_e: float = math.nan
    delta_e: float = math.nan
    in_sector: bool = False
    g_prime_sign: int = 0


@dataclass
class StabilityMap:
    """Verdict grid for one K̃ (or for the fourth-order model when ``K_tilde`` is None)."""
    grid: SweepGrid
    order: int
    K_tilde: Optional[float]
    cells: List[StabilityCell] = field(default_factory=list)

    def cell_at(self, P_set: float, Q_set: float) -> StabilityCell:
        """Cell nearest to the given setpoint."""
        i = int(np.argmin(np.abs(self.grid.p_values() - P_set)))
        j = int(np.argmin(np.abs(self.grid.q_values() - Q_set)))
        return self.cells[i * self.grid.n_Q + j]

    def count(self, verdict: CellVerdict) -> int:
        return sum(1 for cell in self.cells if cell.verdict == verdict)

    def stable_area(self) -> float:
        """Area (W·VAr) covered by stable cells."""
        return self.count(CellVerdict.STABLE) * self.grid.cell_area
