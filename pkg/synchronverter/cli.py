"""
Command-line front end: equilibria, geometry, stability-map and simulate.
"""

import argparse
import json
import logging
import math
import re
import sys
from dataclasses import replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import __version__
from .config import config, load_model_config
from .equilibria import check_assumption1, check_existence5, equilibria5, if_interval
from .error_handler import ConfigError, EXIT_BAD_CONFIG, error_handler, handle_error_decorator
from .geometry import build_geometry, sample_circle
from .models import Branch, CellVerdict, EquilibriumPoint, GridParams, StabilityMap, SweepGrid, SynchronverterParams
from .model_core import derived_constants, with_ktilde
from .report_writer import ReportWriter, RunManifest, format_number, parameter_hash, round_floats
from .sim import SimConfig, convergence_metric, integrate, perturb
from .stability import classify_fifth_order, classify_fourth_order, operating_window
from .sweep_manager import DEFAULT_RESOLUTION, default_sweep_grid, stability_sweep

logger = logging.getLogger(__name__)

SAMPLE_COUNT = 512

_QUANTITY = re.compile(
    r'^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([kM]?)\s*(W|VAr|var|VA|Nm|N·m|AH|A·H|A)?\s*$'
)
_PREFIXES = {'': 1.0, 'k': 1e3, 'M': 1e6}


def parse_quantity(text: str) -> float:
    """'9k', '9 kW', '15kVAr', '1.83 kNm', '14.3k' -> SI float."""
    match = _QUANTITY.match(text)
    if not match:
        raise ConfigError(f"cannot parse quantity {text!r}")
    return float(match.group(1)) * _PREFIXES[match.group(2)]


def parse_quantity_list(text: str) -> List[float]:
    values = [parse_quantity(item) for item in text.split(',') if item.strip()]
    if not values:
        raise ConfigError(f"empty list {text!r}")
    return values


def parse_grid(text: str) -> Tuple[int, int]:
    match = re.fullmatch(r'\s*(\d+)\s*[xX]\s*(\d+)\s*', text)
    if not match:
        raise ConfigError(f"grid must look like <nP>x<nQ>, got {text!r}")
    n_P, n_Q = int(match.group(1)), int(match.group(2))
    if n_P < 1 or n_Q < 1:
        raise ConfigError("grid resolution must be positive")
    return n_P, n_Q


def parse_range(text: str) -> Tuple[float, float]:
    parts = text.split(':')
    if len(parts) != 2:
        raise ConfigError(f"range must look like <min>:<max>, got {text!r}")
    low, high = parse_quantity(parts[0]), parse_quantity(parts[1])
    if not high > low:
        raise ConfigError(f"range {text!r} is empty")
    return low, high


class CliArgumentParser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit code 4)."""

    def error(self, message: str) -> None:
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = CliArgumentParser(prog='synchronverter', description='Synchronverter stability toolkit')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', parser_class=CliArgumentParser)
    subparsers.required = True

    def common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument('--config', required=True, help='JSON parameter file')
        sub.add_argument('--out', default=None, help='output directory')
        sub.add_argument('--ktilde', type=parse_quantity_list, default=None,
                         help='comma-separated K̃ values in A·H (k/M suffixes allowed)')

    sub = subparsers.add_parser('equilibria', help='list all equilibria with verdicts')
    common(sub)
    sub.set_defaults(func=cmd_equilibria)

    sub = subparsers.add_parser('geometry', help='power-plane circle data')
    common(sub)
    sub.add_argument('--torques', type=parse_quantity_list, default=None,
                     help='comma-separated T_m values in N·m, one circle each')
    sub.set_defaults(func=cmd_geometry)

    sub = subparsers.add_parser('stability-map', help='(P_set, Q_set) stability sweep')
    common(sub)
    sub.add_argument('--order', type=int, choices=(4, 5), default=5)
    sub.add_argument('--grid', type=parse_grid, default=(DEFAULT_RESOLUTION, DEFAULT_RESOLUTION))
    sub.add_argument('--threads', type=int, default=None)
    sub.add_argument('--p-range', type=parse_range, default=None, help='P_set range, e.g. --p-range=-100k:100k')
    sub.add_argument('--q-range', type=parse_range, default=None, help='Q_set range, e.g. --q-range=-60k:60k')
    sub.set_defaults(func=cmd_stability_map)

    sub = subparsers.add_parser('simulate', help='integrate the saturated fifth-order model')
    common(sub)
    sub.add_argument('--start', choices=('zr', 'zl'), default='zr')
    sub.add_argument('--perturb', type=float, default=0.01, help='relative perturbation of the start')
    sub.add_argument('--t-end', type=float, default=20.0)
    sub.add_argument('--dt', type=float, default=1e-4)
    sub.add_argument('--stride', type=int, default=10)
    sub.add_argument('--clamp', type=parse_range, default=None, help='field-current limits, e.g. 0.45:2.5')
    sub.set_defaults(func=cmd_simulate)
    return parser


def _writer(args: argparse.Namespace, params: SynchronverterParams, grid: GridParams,
            options: Dict[str, Any]) -> ReportWriter:
    manifest = RunManifest(
        config_path=str(args.config),
        subcommand=args.command,
        parameter_hash=parameter_hash(params, grid, args.command, options),
        tool_version=__version__,
    )
    return ReportWriter(args.out or config.output_dir, manifest)


def _first_ktilde(args: argparse.Namespace, params: SynchronverterParams) -> SynchronverterParams:
    return with_ktilde(params, args.ktilde[0]) if args.ktilde else params


def _point_row(point: EquilibriumPoint) -> Dict[str, Any]:
    x = point.x
    return {
        'branch': point.branch.value,
        'i_d': x.i_d,
        'i_q': x.i_q,
        'w': x.w,
        'delta_deg': math.degrees(x.delta),
        'i_f': point.i_f,
        'P': point.pq.P,
        'Q': point.pq.Q,
        'stability': point.stability.value,
        'max_real': point.max_real,
    }


@handle_error_decorator('equilibria')
def cmd_equilibria(args: argparse.Namespace) -> int:
    params, grid = load_model_config(args.config)
    params = _first_ktilde(args, params)
    consts = derived_constants(params, grid)
    existence = check_existence5(params, grid)
    result = equilibria5(params, grid)

    rows = []
    for point in result:
        verdict = classify_fifth_order(point.z, params, grid, config.tol_margin)
        fourth = classify_fourth_order(point.x, point.i_f, params, grid, config.tol_margin)
        row = _point_row(point.with_stability(verdict.stability, verdict.max_real))
        row['stability_4th_order'] = fourth.stability.value
        rows.append(row)

    assumption = check_assumption1(params, grid)
    interval = if_interval(params, grid)
    derived = consts.to_dict()
    derived['phi_deg'] = math.degrees(consts.phi)
    document = {
        'derived': derived,
        'assumption1': {'holds': assumption.holds, 'strict': assumption.strict},
        'existence': {'holds': existence.holds, 'strict': existence.strict},
        'If_interval': interval.to_list(),
        'P_l': result.P_l,
        'P_r': result.P_r,
        'kind': result.kind.value,
        'exceptional_point': [result.exceptional_pq.P, result.exceptional_pq.Q] if result.exceptional_pq else None,
        'equilibria': rows,
    }
    writer = _writer(args, params, grid, {'ktilde': args.ktilde})
    writer.write_json('equilibria.json', document)
    writer.write_manifest()
    print(json.dumps(round_floats(document), sort_keys=True, indent=2))
    return 0


@handle_error_decorator('geometry')
def cmd_geometry(args: argparse.Namespace) -> int:
    params, grid = load_model_config(args.config)
    params = _first_ktilde(args, params)
    torques = args.torques or [params.T_m]

    circles = []
    sample_rows = []
    for index, torque in enumerate(torques):
        variant = replace(params, T_m=torque)
        geometry = build_geometry(variant, grid)
        entry = geometry.to_dict()
        entry['T_m'] = torque
        entry['T_tilde'] = derived_constants(variant, grid).T_tilde
        circles.append(entry)
        for sample in sample_circle(variant, grid, SAMPLE_COUNT, geometry.if_interval):
            sample_rows.append((index, torque, sample.i_f, sample.branch.value,
                                sample.pq.P, sample.pq.Q, math.degrees(sample.delta)))

    document = dict(circles[0])
    document['circles'] = circles
    writer = _writer(args, params, grid, {'torques': torques})
    writer.write_json('geometry.json', document)
    writer.write_csv('geometry_samples.csv', ('circle', 'T_m', 'i_f', 'branch', 'P', 'Q', 'delta_deg'), sample_rows)
    writer.write_manifest()
    for entry in circles:
        print(f"T_m={format_number(entry['T_m'])} N·m: I_f=[{entry['if_minus']:.4f}, {entry['if_plus']:.4f}] A, "
              f"i_f0={entry['if_zero']:.4f} A")
    return 0


def _map_rows(stability_map: StabilityMap):
    for cell in stability_map.cells:
        yield (cell.P_set, cell.Q_set, cell.verdict.value, cell.max_real, cell.i_f_e,
               math.degrees(cell.delta_e), cell.in_sector, cell.g_prime_sign)


@handle_error_decorator('stability-map')
def cmd_stability_map(args: argparse.Namespace) -> int:
    params, grid = load_model_config(args.config)
    k_tildes = args.ktilde or [derived_constants(params, grid).K_tilde]
    n_P, n_Q = args.grid
    sweep_grid = default_sweep_grid(params, grid, n_P, n_Q)
    if args.p_range or args.q_range:
        p_range = args.p_range or (sweep_grid.P_min, sweep_grid.P_max)
        q_range = args.q_range or (sweep_grid.Q_min, sweep_grid.Q_max)
        sweep_grid = SweepGrid(p_range[0], p_range[1], q_range[0], q_range[1], n_P, n_Q)
    threads = args.threads or config.threads
    if threads < 1:
        raise ConfigError("--threads must be positive")

    maps = stability_sweep(sweep_grid, params, grid, k_tildes, args.order, threads, config.tol_margin)

    options = {'ktilde': k_tildes, 'order': args.order, 'grid': [n_P, n_Q],
               'extent': [sweep_grid.P_min, sweep_grid.P_max, sweep_grid.Q_min, sweep_grid.Q_max]}
    writer = _writer(args, params, grid, options)
    header = ('P_set', 'Q_set', 'verdict', 'max_real', 'i_f_e', 'delta_e_deg', 'in_sector', 'g_prime_sign')
    summary = []
    for stability_map in maps:
        if stability_map.K_tilde is None:
            name = 'stability_map_order4.csv'
        else:
            name = f'stability_map_K{format_number(stability_map.K_tilde)}.csv'
        writer.write_csv(name, header, _map_rows(stability_map))
        summary.append({
            'file': name,
            'K_tilde': stability_map.K_tilde,
            'cells': {verdict.value: stability_map.count(verdict) for verdict in CellVerdict},
            'stable_area': stability_map.stable_area(),
        })
        print(f"{name}: stable area {stability_map.stable_area():.6g} W·VAr")
    writer.write_json('stability_summary.json', {'order': args.order, 'maps': summary, **options})
    writer.write_manifest()
    return 0


@handle_error_decorator('simulate')
def cmd_simulate(args: argparse.Namespace) -> int:
    params, grid = load_model_config(args.config)
    params = _first_ktilde(args, params)
    result = equilibria5(params, grid)
    target = result.get(Branch.RIGHT if args.start == 'zr' else Branch.LEFT)
    if target is None:
        raise ConfigError(f"no {args.start} equilibrium for this configuration")

    if args.clamp is not None:
        limits = args.clamp
    else:
        window = operating_window(params, grid)
        limits = (window.u_min, window.u_max)
    sim_config = SimConfig(t_end=args.t_end, initial=perturb(target.z, args.perturb),
                           dt=args.dt, record_stride=args.stride)
    trajectory = integrate(sim_config, params, grid, limits=limits)
    report = convergence_metric(trajectory, target)

    options = {'start': args.start, 'perturb': args.perturb, 't_end': args.t_end, 'dt': args.dt,
               'stride': args.stride, 'clamp': list(limits), 'ktilde': args.ktilde}
    writer = _writer(args, params, grid, options)
    rows = (
        (t, *state, *pq) for t, state, pq in zip(trajectory.t, trajectory.states, trajectory.powers)
    )
    writer.write_csv('trajectory.csv', ('t', 'i_d', 'i_q', 'w', 'delta', 'i_f', 'P', 'Q'), rows)
    writer.write_json('events.json', {
        'events': [event.to_dict() for event in trajectory.events],
        'limits': list(limits),
        'max_projection': trajectory.max_projection,
        'total_projection': trajectory.total_projection,
        'target': _point_row(target),
        'convergence': report.to_dict(),
    })
    writer.write_manifest()
    print(f"final error {report.final_error:.3g}, converged={report.converged}, t_settle={report.t_settle}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments and run one subcommand; returns the exit code."""
    try:
        config.validate()
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    if config.error_log:
        error_handler.setup_error_logging(config.error_log)

    exit_code = args.func(args)
    error_handler.log_error_summary()
    return exit_code
