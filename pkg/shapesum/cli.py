"""
Command-line surface.

    shapesum eval g2 --tau 0+1i
    shapesum eval residual --shape disk --tau 0+1i --method closed
    shapesum eval wp --z 0.3 --tau 0+1i --method lattice --shape rect:c=2
    shapesum sweep --shape diamond --re-min -0.5 --re-max 0.5 --re-steps 11 \\
                   --im-min 0.5 --im-max 2 --im-steps 7 --out sweep.csv
    shapesum verify [--quick] [--json]
    shapesum shapes [--shape file:profile.json]

Eval results are JSON objects on stdout. Exit codes: 0 ok, 1 verification
failure, 2 usage error, 3 domain error, 4 resource exhausted.
"""

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from .audit_logger import ActionType, AuditLogger
from .config import RuntimeSettings, parse_threads
from .eisenstein import g2_abs_series, g2_q_expansion, g2_ref, g2_shape
from .errors import EXIT_OK, EXIT_USAGE, ErrorHandler, ShapeError
from .lattice_sum import DEFAULT_SCHEDULE, SumConfig
from .residual import QuadratureConfig, residual
from .shapes import area, diamond, disk, parse as parse_shape, rectangle, support, transpose, validate
from .sweep import SweepGrid, run_sweep, write_sweep
from .verification import VerificationSuite
from .weierstrass import wp_abs_direct, wp_ref, wp_shape

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class Subcommand(Enum):
    EVAL_G2 = 'g2'
    EVAL_RESIDUAL = 'residual'
    EVAL_WP = 'wp'
    SWEEP = 'sweep'
    VERIFY = 'verify'
    SHAPES = 'shapes'


G2_METHODS = ('auto', 'reference', 'abs_series', 'q_expansion', 'lattice')
RESIDUAL_METHODS = ('auto', 'closed', 'integral', 'lattice')
WP_METHODS = ('auto', 'reference', 'direct', 'lattice')


def parse_complex(text: str) -> complex:
    """Parse 'a+bi', 'a-bi', 'bi' or 'a' (no spaces)."""
    s = text.strip()
    if s[-1:] in ('i', 'j'):
        body = s[:-1]
        if body == '' or body[-1] in '+-':
            body += '1'
        s = body + 'j'
    try:
        value = complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r} (use a+bi)")
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise argparse.ArgumentTypeError(f"complex number must be finite: {text!r}")
    return value


COMPLEX_OPTIONS = ('--tau', '--z')


def join_complex_values(argv: Sequence[str]) -> List[str]:
    """Rewrite '--tau -0.5+0.8i' as '--tau=-0.5+0.8i'; argparse would read the value as an option."""
    joined: List[str] = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in COMPLEX_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith('-'):
            try:
                parse_complex(argv[i + 1])
            except argparse.ArgumentTypeError:
                pass
            else:
                joined.append(f"{token}={argv[i + 1]}")
                i += 2
                continue
        joined.append(token)
        i += 1
    return joined


def parse_schedule(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f"schedule must be comma-separated integers, got {text!r}")


def _complex_json(value: Optional[complex]) -> Optional[Dict[str, float]]:
    return None if value is None else {'re': value.real, 'im': value.imag}


def _complex_from_json(data: Optional[Dict[str, float]]) -> Optional[complex]:
    return None if data is None else complex(data['re'], data['im'])


@dataclass
class CliRequest:
    """One parsed invocation."""
    subcommand: Subcommand
    shape: Optional[str] = None
    tau: Optional[complex] = None
    z: Optional[complex] = None
    method: str = 'auto'
    schedule: Tuple[int, ...] = DEFAULT_SCHEDULE
    extrapolate: bool = True
    tol: float = 1e-14
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    radius: int = 400
    output: str = 'json'
    out_path: Optional[str] = None
    grid: Optional[SweepGrid] = None
    quick: bool = False
    threads: int = 1

    def validate(self) -> None:
        needs_shape = (
            self.subcommand in (Subcommand.EVAL_RESIDUAL, Subcommand.SWEEP)
            or (self.subcommand in (Subcommand.EVAL_G2, Subcommand.EVAL_WP) and self.method == 'lattice')
        )
        if needs_shape and not self.shape:
            raise ShapeError(f"{self.subcommand.value} with method {self.method} requires --shape")
        if self.subcommand in (Subcommand.EVAL_G2, Subcommand.EVAL_RESIDUAL, Subcommand.EVAL_WP) and self.tau is None:
            raise ValueError("--tau is required")
        if self.subcommand is Subcommand.EVAL_WP and self.z is None:
            raise ValueError("--z is required")
        if self.subcommand is Subcommand.SWEEP and self.grid is None:
            raise ValueError("sweep requires a grid")

    def sum_config(self) -> SumConfig:
        return SumConfig(lambda_schedule=self.schedule, extrapolate=self.extrapolate, workers=self.threads)

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(rel_tol=self.rel_tol, abs_tol=self.abs_tol, max_subdivisions=self.max_subdivisions)

    def inputs(self) -> Dict[str, Any]:
        """Echoed inputs; `from_inputs` rebuilds an equivalent request."""
        return {
            'subcommand': self.subcommand.value,
            'shape': self.shape,
            'tau': _complex_json(self.tau),
            'z': _complex_json(self.z),
            'method': self.method,
            'schedule': list(self.schedule),
            'extrapolate': self.extrapolate,
            'tol': self.tol,
            'rel_tol': self.rel_tol,
            'abs_tol': self.abs_tol,
            'max_subdivisions': self.max_subdivisions,
            'radius': self.radius,
        }

    @classmethod
    def from_inputs(cls, inputs: Dict[str, Any]) -> 'CliRequest':
        return cls(
            subcommand=Subcommand(inputs['subcommand']),
            shape=inputs.get('shape'),
            tau=_complex_from_json(inputs.get('tau')),
            z=_complex_from_json(inputs.get('z')),
            method=inputs.get('method', 'auto'),
            schedule=tuple(inputs.get('schedule', DEFAULT_SCHEDULE)),
            extrapolate=inputs.get('extrapolate', True),
            tol=inputs.get('tol', 1e-14),
            rel_tol=inputs.get('rel_tol', 1e-10),
            abs_tol=inputs.get('abs_tol', 1e-12),
            max_subdivisions=inputs.get('max_subdivisions', 2000),
            radius=inputs.get('radius', 400),
        )


def _evaluate_g2(request: CliRequest) -> Tuple[complex, str, float, Optional[float]]:
    method = 'reference' if request.method == 'auto' else request.method
    if method == 'reference':
        result = g2_ref(request.tau, request.tol)
    elif method == 'abs_series':
        result = g2_abs_series(request.tau, max(request.tol, 1e-10))
    elif method == 'q_expansion':
        result = g2_q_expansion(request.tau)
    else:
        result = g2_shape(parse_shape(request.shape), request.tau, request.sum_config())
        return result.value, method, result.error_estimate, result.detail.observed_order
    return result.value, method, result.error_estimate, None


def _evaluate_residual(request: CliRequest) -> Tuple[complex, str, float, Optional[float]]:
    result = residual(parse_shape(request.shape), request.tau, request.method,
                      request.quadrature(), request.sum_config())
    return result.value, result.method.value, result.error_estimate, result.observed_order


def _evaluate_wp(request: CliRequest) -> Tuple[complex, str, float, Optional[float]]:
    method = 'reference' if request.method == 'auto' else request.method
    if method == 'reference':
        return wp_ref(request.z, request.tau, request.tol), method, request.tol, None
    if method == 'direct':
        value = wp_abs_direct(request.z, request.tau, request.radius)
        return value, method, 1.0 / request.radius, None
    config = replace(request.sum_config(), zero_origin=False)
    result = wp_shape(parse_shape(request.shape), request.z, request.tau, config)
    return result.value, method, result.error_estimate, result.observed_order


EVALUATORS = {
    Subcommand.EVAL_G2: _evaluate_g2,
    Subcommand.EVAL_RESIDUAL: _evaluate_residual,
    Subcommand.EVAL_WP: _evaluate_wp,
}


def evaluate(request: CliRequest) -> Dict[str, Any]:
    """Run an eval request and build its JSON payload."""
    request.validate()
    started = time.perf_counter()
    value, method, error, order = EVALUATORS[request.subcommand](request)
    wall_time_ms = (time.perf_counter() - started) * 1000.0
    return {
        'quantity': request.subcommand.value,
        'value': _complex_json(value),
        'method': method,
        'error_estimate': error,
        'observed_order': order,
        'inputs': request.inputs(),
        'wall_time_ms': round(wall_time_ms, 3),
    }


def _emit(text: str, out_path: Optional[str]) -> None:
    if out_path:
        with open(out_path, 'w', encoding='utf-8') as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def run_eval(request: CliRequest, settings: RuntimeSettings) -> int:
    payload = evaluate(request)
    _emit(json.dumps(payload) + '\n', request.out_path)
    if settings.audit_log_path:
        value = _complex_from_json(payload['value'])
        AuditLogger(settings.audit_log_path).log_evaluation(
            payload['quantity'], payload['inputs'], value, payload['method'], payload['wall_time_ms'])
    return EXIT_OK


def run_sweep_command(request: CliRequest, settings: RuntimeSettings) -> int:
    request.validate()
    frame = run_sweep(parse_shape(request.shape), request.grid, request.quadrature(), request.threads)
    if request.out_path:
        with open(request.out_path, 'w', encoding='utf-8', newline='') as f:
            write_sweep(frame, f, request.output)
    else:
        write_sweep(frame, sys.stdout, request.output)
    if settings.audit_log_path:
        AuditLogger(settings.audit_log_path).log_action(
            ActionType.SWEEP, "cli", "success",
            {'shape': request.shape, 'grid': request.grid.to_dict(), 'rows': len(frame)})
    return EXIT_OK


def run_verify(request: CliRequest, settings: RuntimeSettings, as_json: bool) -> int:
    suite = VerificationSuite(workers=request.threads, q=request.quadrature(), config=request.sum_config())
    report = suite.run(quick=request.quick)

    if as_json:
        _emit(json.dumps(report, default=str) + '\n', request.out_path)
    else:
        print("=" * 60)
        print(f"shapesum verification ({report['mode']})")
        print("=" * 60)
        print(suite.table().to_string(index=False))
        print("=" * 60)
        print(f"Result: {'PASS' if report['passed'] else 'FAIL'} "
              f"({sum(c['passed'] for c in report['checks'])}/{len(report['checks'])} checks, "
              f"{report['resources']['elapsed_s']}s)")

    if settings.audit_log_path:
        AuditLogger(settings.audit_log_path).log_action(
            ActionType.VERIFICATION, "cli", "success" if report['passed'] else "failure",
            {'mode': report['mode'], 'failed': [c['name'] for c in report['checks'] if not c['passed']]})
    suite.raise_for_failures()
    return EXIT_OK


def run_shapes(request: CliRequest, settings: RuntimeSettings) -> int:
    if request.shape:
        try:
            shape = parse_shape(request.shape)
        except ShapeError as e:
            if not e.violations:
                raise
            violations = e.violations
        else:
            violations = validate(shape)
        if settings.audit_log_path:
            AuditLogger(settings.audit_log_path).log_action(
                ActionType.SHAPE_CHECK, "cli", "failure" if violations else "success",
                {'shape': request.shape, 'violations': [str(v) for v in violations]})
        if violations:
            print(f"Invalid shape {request.shape}:")
            for v in violations:
                print(f"  - {v}")
            return EXIT_USAGE
        rows = [shape]
    else:
        rows = [rectangle(1.0), rectangle(2.0), disk(), diamond()]

    frame = pd.DataFrame([
        {'shape': s.label(), 'support': support(s), 'area': area(s), 'transpose': transpose(s).label()}
        for s in rows
    ])
    print("=" * 60)
    print(frame.to_string(index=False))
    print("=" * 60)
    return EXIT_OK


def _add_numeric_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--schedule', type=parse_schedule, default=DEFAULT_SCHEDULE,
                        help='comma-separated lambda schedule (default 250,500,1000,2000)')
    parser.add_argument('--no-extrapolate', action='store_true', help='disable Richardson extrapolation')
    parser.add_argument('--tol', type=float, default=1e-14, help='series truncation tolerance')
    parser.add_argument('--rel-tol', type=float, default=1e-10, help='quadrature relative tolerance')
    parser.add_argument('--abs-tol', type=float, default=1e-12, help='quadrature absolute tolerance')
    parser.add_argument('--max-subdivisions', type=int, default=2000, help='quadrature subdivision limit')
    parser.add_argument('--out', dest='out_path', help='write output to this file instead of stdout')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='shapesum', description='Shape summation of G2 and the Weierstrass p-function')
    parser.add_argument('--threads', help='worker threads (overrides SHAPESUM_THREADS)')
    parser.add_argument('--config', help='JSON settings file')
    parser.add_argument('--log-level', help='logging level (overrides SHAPESUM_LOG_LEVEL)')
    commands = parser.add_subparsers(dest='command', required=True)

    eval_parser = commands.add_parser('eval', help='evaluate one quantity')
    quantities = eval_parser.add_subparsers(dest='quantity', required=True)
    for name, methods, help_text in (
        ('g2', G2_METHODS, 'Eisenstein series G2(tau)'),
        ('residual', RESIDUAL_METHODS, 'residual function E(K, tau)'),
        ('wp', WP_METHODS, 'Weierstrass p(z; tau)'),
    ):
        sub = quantities.add_parser(name, help=help_text)
        sub.add_argument('--tau', type=parse_complex, required=True, help='modular parameter, e.g. 0.3+1.2i')
        sub.add_argument('--shape', help='rect:c=<c>, disk, diamond or file:<path>')
        sub.add_argument('--method', choices=methods, default='auto')
        if name == 'wp':
            sub.add_argument('--z', type=parse_complex, required=True, help='argument z')
            sub.add_argument('--radius', type=int, default=400, help='square radius for --method direct')
        _add_numeric_options(sub)

    sweep = commands.add_parser('sweep', help='tabulate E(K, tau) over a tau grid')
    sweep.add_argument('--shape', required=True)
    for axis in ('re', 'im'):
        sweep.add_argument(f'--{axis}-min', type=float, required=True)
        sweep.add_argument(f'--{axis}-max', type=float, required=True)
        sweep.add_argument(f'--{axis}-steps', type=int, required=True)
    sweep.add_argument('--output', choices=('csv', 'json'), default='csv')
    _add_numeric_options(sweep)

    verify = commands.add_parser('verify', help='run the verification suite')
    verify.add_argument('--quick', action='store_true', help='skip lattice summations')
    verify.add_argument('--json', action='store_true', help='emit the report as JSON')
    _add_numeric_options(verify)

    shapes = commands.add_parser('shapes', help='list builtin shapes or validate one')
    shapes.add_argument('--shape')
    return parser


def request_from_args(args: argparse.Namespace, threads: int) -> CliRequest:
    if args.command == 'eval':
        subcommand = Subcommand(args.quantity)
    else:
        subcommand = Subcommand(args.command)

    request = CliRequest(subcommand=subcommand, shape=getattr(args, 'shape', None), threads=threads)
    if subcommand is Subcommand.SHAPES:
        return request

    request.schedule = args.schedule
    request.extrapolate = not args.no_extrapolate
    request.tol = args.tol
    request.rel_tol = args.rel_tol
    request.abs_tol = args.abs_tol
    request.max_subdivisions = args.max_subdivisions
    request.out_path = args.out_path
    if args.command == 'eval':
        request.tau = args.tau
        request.method = args.method
        request.z = getattr(args, 'z', None)
        request.radius = getattr(args, 'radius', 400)
    elif subcommand is Subcommand.SWEEP:
        request.output = args.output
        request.grid = SweepGrid(args.re_min, args.re_max, args.re_steps, args.im_min, args.im_max, args.im_steps)
    elif subcommand is Subcommand.VERIFY:
        request.quick = args.quick
    return request


def configure_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level.upper(), logging.WARNING), format=LOG_FORMAT, stream=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(join_complex_values(sys.argv[1:] if argv is None else argv))
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

    handler = ErrorHandler(context=args.command)
    settings = None
    try:
        settings = RuntimeSettings.resolve(args.config)
        if args.log_level:
            settings = RuntimeSettings(settings.threads, args.log_level.upper(), settings.audit_log_path)
        configure_logging(settings.log_level)
        threads = parse_threads(args.threads) if args.threads else settings.threads

        request = request_from_args(args, threads)
        if request.subcommand in EVALUATORS:
            return run_eval(request, settings)
        if request.subcommand is Subcommand.SWEEP:
            return run_sweep_command(request, settings)
        if request.subcommand is Subcommand.VERIFY:
            return run_verify(request, settings, args.json)
        return run_shapes(request, settings)
    except Exception as e:
        code = handler.handle(e)
        payload = handler.describe(e)
        sys.stderr.write(json.dumps(payload) + "\n")
        if settings is not None and settings.audit_log_path:
            AuditLogger(settings.audit_log_path).log_failure(args.command, payload)
        return code
