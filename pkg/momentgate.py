"""
Main module that drives the momentgate analyses from the command line.
Loads moment, Hankel, quadrature and sampled-function files, runs one analysis per
subcommand and emits a JSON report.
"""
import argparse
import dataclasses
import sys
from contextlib import redirect_stdout

from approx import (
    DEFAULT_NODE_BUDGET, compact_exhaustion, default_exhaustion, dini_index, lattice_sup_error,
    permanence_check, show_lattice, show_strict_result, strict_cauchy_check,
    strict_convergence_check, sw_lattice_approx,
)
from config import DEFAULT_TOLERANCES, RunConfig
from determinacy import determinacy_report, show_determinacy
from errors import InputValidationError, MomentgateError
from fixtures import MOMENT_FIXTURES, moment_fixture
from functionals import IdealSpec, coincidence_demo, show_coincidence
from gns import build_gns_model, gauss_quadrature, psd_rank, show_gns_model, show_psd
from loaders import (
    load_functional, load_generators, load_hankel, load_moments, load_sampled_function, load_sampled_sequence,
    show_moment_summary, show_sequence_summary,
)
from poly import Polynomial
from precision import FLOAT64, parse_precision
from report import dumps_document, report_emit, write_text
from sqrt_approx import show_sqrt_table, sqrt_certificate, uniform_error

EXIT_OK = 0
EXIT_USAGE = 64


class UsageError(Exception):
    """Raised by the parser instead of exiting."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser():
    parser = _Parser(prog='momentgate', description=__doc__)
    parser.add_argument('--precision', help="float64, extended[:bits] or rational")
    parser.add_argument('--output', '-o', help="Write the report here instead of stdout")
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--quiet', '-q', action='store_true', help="Suppress progress output")
    parser.add_argument('--no-auto-extend', action='store_true',
                        help="Keep float64 for moments with a wide dynamic range")
    for name, default in DEFAULT_TOLERANCES.items():
        parser.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float, default=default)

    subparsers = parser.add_subparsers(dest='command', parser_class=_Parser)

    hankel_parser = subparsers.add_parser('hankel', help="Hankel matrix, PSD screen and rank")
    hankel_parser.add_argument('moments')

    gns_parser = subparsers.add_parser('gns', help="Orthonormal basis and Jacobi data")
    gns_parser.add_argument('moments')

    quad_parser = subparsers.add_parser('quadrature', help="Gauss rule from the Jacobi block")
    quad_parser.add_argument('moments')
    quad_parser.add_argument('--points', '-m', type=int, required=True)

    det_parser = subparsers.add_parser('determinacy', help="Determinacy evidence report")
    det_parser.add_argument('moments')

    approx_parser = subparsers.add_parser('approx', help="Lattice and square-root approximation")
    approx_sub = approx_parser.add_subparsers(dest='method', parser_class=_Parser)
    sw_parser = approx_sub.add_parser('sw', help="Stone-Weierstrass lattice approximant")
    sw_parser.add_argument('target')
    sw_parser.add_argument('generators')
    sw_parser.add_argument('--eps', type=float, required=True)
    sw_parser.add_argument('--interval', type=float, nargs=2, metavar=('A', 'B'), required=True)
    sw_parser.add_argument('--node-budget', type=int, default=DEFAULT_NODE_BUDGET)
    sqrt_parser = approx_sub.add_parser('sqrt', help="Square-root recursion certificate on [0, 1]")
    sqrt_parser.add_argument('--steps', '-N', type=int, required=True)
    sqrt_parser.add_argument('--gridsize', type=int, default=1001)

    dini_parser = subparsers.add_parser('dini', help="Dini index of a decreasing sequence")
    dini_parser.add_argument('sequence')
    dini_parser.add_argument('--eps', type=float, required=True)
    dini_parser.add_argument('--interval', type=float, nargs=2, metavar=('A', 'B'), required=True)

    strict_parser = subparsers.add_parser('strict', help="Strict convergence in an ideal")
    strict_parser.add_argument('sequence')
    strict_parser.add_argument('limit')
    strict_parser.add_argument('--ideal', default='all', help="all, bounded or poly:D")
    strict_parser.add_argument('--boxes', type=int, help="Number of exhaustion boxes")
    strict_parser.add_argument('--base', type=float, help="Radius step of the exhaustion")
    strict_parser.add_argument('--cauchy', action='store_true', help="Add the strict Cauchy check")
    strict_parser.add_argument('--permanence', action='store_true',
                               help="Check scaled, shifted, absolute and squared sequences")

    coin_parser = subparsers.add_parser('coincidence', help="Compare two functionals on a generated algebra")
    coin_parser.add_argument('phi', help="Moment or quadrature file")
    coin_parser.add_argument('psi', help="Moment or quadrature file")
    coin_parser.add_argument('--testdeg', type=int, required=True)
    coin_parser.add_argument('--generator', '-g', type=float, nargs='+', action='append',
                             help="Generator coefficients in increasing degree (default x)")
    coin_parser.add_argument('--eps', type=float, default=0.05, help="Lattice accuracy for the test battery")

    fixture_parser = subparsers.add_parser('fixture', help="Write a reference moment file")
    fixture_parser.add_argument('name', choices=sorted(MOMENT_FIXTURES))
    fixture_parser.add_argument('--degree', '-d', type=int, required=True)
    return parser


def build_config(args, environ=None):
    """RunConfig from parsed flags; --precision wins over MOMENTGATE_PRECISION."""
    tolerances = {name: getattr(args, name) for name in DEFAULT_TOLERANCES}
    try:
        config = RunConfig.from_env(
            environ,
            tolerances=tolerances,
            output_path=args.output,
            seed=args.seed,
            auto_extend=not args.no_auto_extend,
        )
        if args.precision:
            config = config.with_overrides(precision=parse_precision(args.precision))
    except ValueError as exc:
        raise InputValidationError(str(exc)) from exc
    return config


def _step(args, message):
    if not args.quiet:
        print(message, file=sys.stderr)


def _show(args, show, *params):
    if not args.quiet:
        with redirect_stdout(sys.stderr):
            show(*params)


def _load(args, config):
    _step(args, f"Step 1: Loading moments from {args.moments}...")
    ms = load_moments(args.moments, config.precision, config.auto_extend)
    _step(args, f"✓ {len(ms)} moments loaded (precision {ms.mode.tag})\n")
    _show(args, show_moment_summary, ms)
    return ms, config.with_overrides(precision=ms.mode)


def run_hankel(args, config):
    _step(args, f"Step 1: Loading moments or Hankel matrix from {args.moments}...")
    H, ms = load_hankel(args.moments, config.precision, config.auto_extend)
    _step(args, f"✓ {H.size} x {H.size} Hankel matrix loaded (precision {H.mode.tag})\n")
    if ms is not None:
        _show(args, show_moment_summary, ms)
    config = config.with_overrides(precision=H.mode)
    _step(args, "Step 2: Running the PSD screen...")
    screen = psd_rank(H, config.tol('psd_tol'))
    _show(args, show_psd, screen)
    result = dict(screen.to_dict(), size=H.size, hankel=[list(row) for row in H.entries])
    return result, config


def run_gns(args, config):
    ms, config = _load(args, config)
    _step(args, "Step 2: Orthonormalizing monomials and reading Jacobi data...")
    model = build_gns_model(ms, config.tol('psd_tol'))
    _show(args, show_gns_model, model)
    return model, config


def run_quadrature(args, config):
    ms, config = _load(args, config)
    _step(args, "Step 2: Building GNS model...")
    model = build_gns_model(ms, config.tol('psd_tol'))
    alpha, beta = model.recurrence()
    _step(args, f"Step 3: Computing {args.points}-point Gauss rule...")
    rule = gauss_quadrature(alpha, beta, args.points, s0=ms[0], mode=model.mode)
    _step(args, "✓ Gauss rule computed\n")
    return dict(rule.to_dict(), points=args.points, reproduced_moments=rule.moments(2 * args.points)), config


def run_determinacy(args, config):
    ms, config = _load(args, config)
    _step(args, "Step 2: Collecting Carleman, |p_n(i)|^2 and range-defect evidence...")
    report = determinacy_report(ms, config)
    _show(args, show_determinacy, report)
    return report, config


def run_sqrt(args, config):
    mode = config.precision
    _step(args, f"Step 1: Running {args.steps} square-root steps on {args.gridsize} grid points...")
    certificate = sqrt_certificate(args.steps, args.gridsize, mode=mode)
    _show(args, show_sqrt_table, args.steps, args.gridsize)
    _step(args, f"✓ Certificate {'passed' if certificate.passed else 'failed'}\n")
    return dict(
        dataclasses.asdict(certificate),
        passed=certificate.passed,
        uniform_error=uniform_error(args.steps, args.gridsize, mode),
    ), config


def run_approx(args, config):
    if args.method == 'sqrt':
        return run_sqrt(args, config)
    if args.method != 'sw':
        raise UsageError("approx needs a method: sw or sqrt")
    _step(args, f"Step 1: Loading target {args.target} and generators {args.generators}...")
    target = load_sampled_function(args.target)
    gens = load_generators(args.generators)
    K = tuple(args.interval)
    _step(args, f"Step 2: Building lattice approximant with eps={args.eps}...")
    expr = sw_lattice_approx(target, gens, K, args.eps, args.node_budget)
    _show(args, show_lattice, expr, target, gens, K)
    return {
        'expression': expr.to_json(),
        'node_count': expr.node_count,
        'sup_error': lattice_sup_error(expr, target, gens, K),
        'eps': args.eps,
        'interval': list(K),
        'audit': expr.audit(len(gens)),
    }, config


def run_dini(args, config):
    _step(args, f"Step 1: Loading sequence {args.sequence}...")
    fks = load_sampled_sequence(args.sequence)
    _show(args, show_sequence_summary, fks)
    K = tuple(args.interval)
    _step(args, f"Step 2: Searching Dini index for eps={args.eps}...")
    k = dini_index(fks, K, args.eps, config.tol('grid_tol'))
    mask = fks.members[0].mask(K)
    _step(args, f"✓ f_{k} <= {args.eps} on [{K[0]:g}, {K[1]:g}]\n")
    return {
        'k': k,
        'eps': args.eps,
        'interval': list(K),
        'sup_f_k': float(fks.matrix[k - 1, mask].max()),
    }, config


def run_strict(args, config):
    _step(args, f"Step 1: Loading sequence {args.sequence} and limit {args.limit}...")
    seq = load_sampled_sequence(args.sequence)
    ghat = load_sampled_function(args.limit)
    _show(args, show_sequence_summary, seq)
    ideal = IdealSpec.parse(args.ideal)

    if args.boxes is None and args.base is None:
        exhaustion = default_exhaustion(seq.grid)
    else:
        exhaustion = compact_exhaustion(args.boxes or 9, base=args.base or 1.0)

    grid_tol = config.tol('grid_tol')
    _step(args, f"Step 2: Checking strict convergence in the ideal {ideal}...")
    result = strict_convergence_check(seq, ghat, ideal, exhaustion, grid_tol)
    _show(args, show_strict_result, result, exhaustion)
    body = dict(result.to_dict(), exhaustion=exhaustion.to_dict())

    if args.cauchy:
        _step(args, "Step 3: Checking the strict Cauchy property...")
        cauchy = strict_cauchy_check(seq, ideal, exhaustion, grid_tol=grid_tol)
        body['cauchy'] = {
            'verdict': cauchy.verdict,
            'via_definition': cauchy.via_definition,
            'via_characterization': cauchy.via_characterization,
            'tail_start': cauchy.tail_start,
        }
    if args.permanence:
        _step(args, "Step 4: Checking permanence under lattice operations...")
        body['permanence'] = permanence_check(seq, ghat, ideal, exhaustion, grid_tol=grid_tol)
    return body, config


def run_coincidence(args, config):
    _step(args, f"Step 1: Loading functionals {args.phi} and {args.psi}...")
    phi = load_functional(args.phi, config.precision, config.auto_extend)
    psi = load_functional(args.psi, config.precision, config.auto_extend)
    gens = [Polynomial(tuple(coeffs)) for coeffs in (args.generator or [[0.0, 1.0]])]
    _step(args, f"Step 2: Comparing on the algebra of {len(gens)} generator(s) up to degree {args.testdeg}...")
    report = coincidence_demo(phi, psi, gens, args.testdeg, eps=args.eps)
    _show(args, show_coincidence, report)
    return report, config


def run_fixture(args, config):
    _step(args, f"Step 1: Generating {args.name} moments of degree {args.degree}...")
    mode = None if config.precision.kind == FLOAT64 else config.precision
    ms = moment_fixture(args.name, args.degree, mode)
    write_text(dumps_document(ms.to_dict(), ms.mode), config.output_path)
    _step(args, f"✓ {len(ms)} moments written (precision {ms.mode.tag})\n")


COMMANDS = {
    'hankel': run_hankel,
    'gns': run_gns,
    'quadrature': run_quadrature,
    'determinacy': run_determinacy,
    'approx': run_approx,
    'dini': run_dini,
    'strict': run_strict,
    'coincidence': run_coincidence,
    'fixture': run_fixture,
}


def cmd_dispatch(argv=None, environ=None):
    """
    Run one subcommand and return its exit code.

    Exit codes: 0 on success (negative verdicts included), 2 for invalid
    input, 3 for numerical or output failures, 64 for usage errors.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().rstrip() + "\nmomentgate: error: a subcommand is required")
        config = build_config(args, environ)
        outcome = COMMANDS[args.command](args, config)
        if outcome is not None:
            result, config = outcome
            report_emit(result, config, args.command)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return exc.code or EXIT_OK
    except MomentgateError as exc:
        print(f"momentgate: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"momentgate: cannot write output: {exc}", file=sys.stderr)
        return 3
    return EXIT_OK


def main():
    """
    Main function to execute a momentgate analysis.
    """
    sys.exit(cmd_dispatch())


if __name__ == "__main__":
    main()
