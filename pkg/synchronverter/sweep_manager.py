"""
Concurrent (P_set, Q_set) stability sweeps.

Rows of the grid are independent and are farmed out to a process pool; the
results are gathered back in row order, so the maps do not depend on the
number of workers.
"""

import asyncio
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .equilibria import equilibria5, xi_map
from .error_handler import DomainError, InfeasibleModelError, NumericError, error_handler
from .geometry import circle_centre, circle_radius, stability_sector
from .models import (
    CellVerdict,
    DerivedConstants,
    EquilibriumPoint,
    GridParams,
    PowerPoint,
    StabilityCell,
    StabilityClass,
    StabilityMap,
    StabilitySector,
    StabilityVerdict,
    State4,
    SweepGrid,
    SynchronverterParams,
)
from .model_core import derived_constants, with_ktilde, with_setpoints
from .stability import (
    DEFAULT_TOL_MARGIN,
    classify_fifth_order,
    classify_fourth_order,
    steady_state_map_G_prime,
)

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 201
EXTENT_FACTOR = 1.2

_VERDICTS = {
    StabilityClass.STABLE: CellVerdict.STABLE,
    StabilityClass.UNSTABLE: CellVerdict.UNSTABLE,
    StabilityClass.MARGINAL: CellVerdict.MARGINAL,
}


@dataclass(frozen=True)
class SweepTask:
    """Everything a worker needs to evaluate rows of a sweep."""
    params: SynchronverterParams
    grid: GridParams
    sweep_grid: SweepGrid
    k_tildes: Tuple[float, ...]
    order: int
    tol_margin: float = DEFAULT_TOL_MARGIN

    @property
    def map_count(self) -> int:
        return len(self.k_tildes) if self.order == 5 else 1


@dataclass
class SweepMetrics:
    """Counters of one sweep run."""
    cells_total: int = 0
    rows_done: int = 0
    no_equilibrium: int = 0
    numeric_failures: int = 0
    workers: int = 1
    elapsed_seconds: float = 0.0
    failures: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        """Convert metrics to dictionary."""
        return {
            'cells_total': self.cells_total,
            'rows_done': self.rows_done,
            'no_equilibrium': self.no_equilibrium,
            'numeric_failures': self.numeric_failures,
            'workers': self.workers,
            'elapsed_seconds': self.elapsed_seconds,
        }


def _g_prime_sign(i_f: float, params: SynchronverterParams, grid: GridParams,
                  consts: DerivedConstants) -> int:
    try:
        value = steady_state_map_G_prime(i_f, params, grid, consts=consts)
    except (DomainError, NumericError):
        return 0
    return (value > 0) - (value < 0)


def _first_branch(z_r: EquilibriumPoint, params: SynchronverterParams, grid: GridParams,
                  consts: DerivedConstants) -> State4:
    """x₁ᵉ at z_r's field current; at the ends of I_f both branches are z_r itself."""
    try:
        return xi_map(z_r.i_f, params, grid, consts)
    except DomainError:
        return z_r.x


def _cell(P_set: float, Q_set: float, verdict: StabilityVerdict, **diagnostics) -> StabilityCell:
    return StabilityCell(
        P_set=P_set, Q_set=Q_set, verdict=_VERDICTS[verdict.stability], max_real=verdict.max_real, **diagnostics
    )


def evaluate_cell(P_set: float, Q_set: float, task: SweepTask,
                  sector: StabilitySector) -> List[StabilityCell]:
    """Cells of every requested map at one setpoint.

    The fifth-order maps linearize at z_r. The fourth-order map linearizes at
    x₁ᵉ with the field current frozen at z_r's value.
    """
    empty = [StabilityCell(P_set, Q_set, CellVerdict.NO_EQUILIBRIUM)] * task.map_count
    tuned = with_setpoints(task.params, task.grid, P_set, Q_set)
    consts = derived_constants(tuned, task.grid)
    try:
        result = equilibria5(tuned, task.grid, consts)
    except InfeasibleModelError:
        return empty
    z_r = result.right
    if z_r is None:
        return empty

    diagnostics = dict(
        i_f_e=z_r.i_f,
        in_sector=sector.contains(PowerPoint(result.P_r, z_r.pq.Q)),
        g_prime_sign=_g_prime_sign(z_r.i_f, tuned, task.grid, consts),
    )
    if task.order == 4:
        x_1 = _first_branch(z_r, tuned, task.grid, consts)
        verdict = classify_fourth_order(x_1, z_r.i_f, tuned, task.grid, task.tol_margin)
        return [_cell(P_set, Q_set, verdict, delta_e=x_1.delta, **diagnostics)]

    cells = []
    for K_tilde in task.k_tildes:
        verdict = classify_fifth_order(z_r.z, with_ktilde(tuned, K_tilde), task.grid, task.tol_margin)
        cells.append(_cell(P_set, Q_set, verdict, delta_e=z_r.x.delta, **diagnostics))
    return cells


def evaluate_row(task: SweepTask, row: int) -> Tuple[List[List[StabilityCell]], List[str]]:
    """All cells of one P row, grouped per map, plus messages of numeric failures."""
    sector = stability_sector(task.params, task.grid)
    P_set = float(task.sweep_grid.p_values()[row])
    per_map: List[List[StabilityCell]] = [[] for _ in range(task.map_count)]
    failures: List[str] = []

    for Q_set in task.sweep_grid.q_values():
        try:
            cells = evaluate_cell(P_set, float(Q_set), task, sector)
        except (NumericError, DomainError) as e:
            failures.append(f"cell ({P_set:.9g}, {Q_set:.9g}): {e}")
            cells = [StabilityCell(P_set, float(Q_set), CellVerdict.NO_EQUILIBRIUM)] * task.map_count
        for index, cell in enumerate(cells):
            per_map[index].append(cell)
    return per_map, failures


def default_sweep_grid(params: SynchronverterParams, grid: GridParams,
                       n_P: int = DEFAULT_RESOLUTION, n_Q: int = DEFAULT_RESOLUTION) -> SweepGrid:
    """P ∈ ±1.2(‖C‖ + r) with r at the configured torque, Q ∈ ±1.2·r_max.

    Every cell carries its own torque, so its circle passes through the cell
    with centre C. r_max = ‖C‖ + P_max is the radius of the largest circle
    through a point of the P axis inside the grid.
    """
    consts = derived_constants(params, grid)
    centre = abs(circle_centre(grid, consts).P)
    radius = circle_radius(grid, consts) or centre
    p_half = EXTENT_FACTOR * (centre + radius)
    q_half = EXTENT_FACTOR * (centre + p_half)
    return SweepGrid(-p_half, p_half, -q_half, q_half, n_P, n_Q)


class SweepManager:
    """Runs sweeps row by row on a process pool."""

    def __init__(self, workers: int = 1):
        if workers < 1:
            raise ValueError("workers must be positive")
        self.workers = workers
        self.metrics = SweepMetrics(workers=workers)

    async def run(self, task: SweepTask) -> List[StabilityMap]:
        """Evaluate every row and assemble one map per K̃ (a single map for order 4)."""
        task.sweep_grid.validate()
        if task.order not in (4, 5):
            raise ValueError(f"order must be 4 or 5, got {task.order}")
        if task.order == 5 and not task.k_tildes:
            raise ValueError("a fifth-order sweep needs at least one K̃")

        self.metrics = SweepMetrics(
            workers=self.workers, cells_total=task.sweep_grid.n_P * task.sweep_grid.n_Q
        )
        logger.info(
            f"Starting order-{task.order} sweep: {task.sweep_grid.n_P}x{task.sweep_grid.n_Q} cells, "
            f"{task.map_count} map(s), {self.workers} worker(s)"
        )
        started = time.perf_counter()

        rows = range(task.sweep_grid.n_P)
        if self.workers == 1:
            results = []
            for row in rows:
                results.append(evaluate_row(task, row))
                self._row_finished(row)
                await asyncio.sleep(0)
        else:
            loop = asyncio.get_running_loop()
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                futures = [loop.run_in_executor(pool, evaluate_row, task, row) for row in rows]
                results = await asyncio.gather(*futures)
            self.metrics.rows_done = len(results)

        maps = self._assemble(task, results)
        self.metrics.elapsed_seconds = time.perf_counter() - started
        self.metrics.no_equilibrium = maps[0].count(CellVerdict.NO_EQUILIBRIUM)
        logger.info(f"Sweep finished in {self.metrics.elapsed_seconds:.2f}s: {self.metrics.to_dict()}")
        return maps

    def _row_finished(self, row: int) -> None:
        self.metrics.rows_done += 1
        logger.debug(f"Row {row} done ({self.metrics.rows_done} rows)")

    def _assemble(self, task: SweepTask, results: Sequence[Tuple[List[List[StabilityCell]], List[str]]]
                  ) -> List[StabilityMap]:
        k_labels: Sequence[Optional[float]] = task.k_tildes if task.order == 5 else (None,)
        maps = [StabilityMap(grid=task.sweep_grid, order=task.order, K_tilde=k) for k in k_labels]
        for per_map, failures in results:
            for stability_map, cells in zip(maps, per_map):
                stability_map.cells.extend(cells)
            for message in failures:
                self.metrics.numeric_failures += 1
                self.metrics.failures.append(message)
                error_handler.record_warning(NumericError(message), 'stability_sweep')
        return maps


def create_sweep_manager(workers: int = 1) -> SweepManager:
    """Factory function to create a sweep manager."""
    return SweepManager(workers=workers)


def stability_sweep(sweep_grid: Optional[SweepGrid], params: SynchronverterParams, grid: GridParams,
                    k_tildes: Sequence[float] = (), order: int = 5, workers: int = 1,
                    tol_margin: float = DEFAULT_TOL_MARGIN) -> List[StabilityMap]:
    """Blocking front end of SweepManager.run."""
    task = SweepTask(
        params=params,
        grid=grid,
        sweep_grid=sweep_grid or default_sweep_grid(params, grid),
        k_tildes=tuple(float(k) for k in k_tildes),
        order=order,
        tol_margin=tol_margin,
    )
    return asyncio.run(create_sweep_manager(workers).run(task))
