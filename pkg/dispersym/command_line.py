# Copyright 2024-2025 dispersym developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# libraries
import argparse
from fractions import Fraction
import json
import logging
import sys

import numpy as np
import umsg

import dispersym
from dispersym import common



logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# failed checks, as opposed to bad input
_FAILURES = (common.IdentityFailure, common.StructuralViolation, common.BlowupDetected)

_FIELDS = {
    'conditions': ['stage', 'label', 'integrand', 'exponent', 'convention'],
    'recursion': ['m', 'l', 'j', 'poly'],
    'structure': ['m', 'l', 'j', 'property', 'pass'],
    'verify': ['k', 'stage', 'residual_order', 'pass', 'elapsed_ms'],
    'check': ['stage', 'label', 'exponent', 'sup_ratio', 'argmax'],
    'single': ['time', 'norm'],
    'sweep': ['xi', 'growth'],
    'probe': ['xi', 'ratio', 'power', 'residual_norm', 'packet_norm'],
    'symbols': ['part', 'order', 'factor', 'coefficient']
}



def _emit(kind, rows, args):
    print(common.format(args.format, rows, _FIELDS[kind]))


def _check_k(args, config):
    limit = config.get('max_k', dispersym.MAX_K)

    if args.k > limit:
        raise common.UnsupportedOrder(f"k={args.k} exceeds the configured bound {limit}")


def cmd_conditions(args, config):
    _check_k(args, config)

    if args.gauged:
        out = dispersym.corollary_conditions(args.k)
    elif args.letters:
        out = dispersym.lettered_conditions(args.k)
    else:
        out = dispersym.necessary_conditions(args.k)

    _emit('conditions', out.rows(), args)
    return EXIT_OK


def cmd_recursion(args, config):
    _check_k(args, config)

    if args.structure:
        _emit('structure', dispersym.verify_structure(args.k), args)
        return EXIT_OK

    rows = []

    for state in dispersym.iterate(args.k, args.level, floor=None if args.full else 0):
        rows.extend({'m': state.m, **r} for r in state.rows())

    _emit('recursion', rows, args)
    return EXIT_OK


def cmd_verify(args, config):
    rows = []

    if args.k is None and not args.appendix_a:
        raise common.UnsupportedOrder('verify needs --k unless --appendix-a is given')

    if args.appendix_a:
        for k in ((args.k,) if args.k else (5, 6)):
            rows.append(dispersym.verify_selfadjoint_reduction(k))
    elif args.all:
        rows.extend(dispersym.verify_all(args.k, args.zeroth))
    elif args.stage:
        rows.append(dispersym.verify_identity(dispersym.build_stage(args.k, args.stage,
                                                                     args.zeroth)))
    else:
        raise common.UnsupportedOrder('verify needs --stage, --all or --appendix-a')

    _emit('verify', rows, args)
    return EXIT_OK


def _load_json(filename):
    try:
        with open(filename) as fp:
            return json.load(fp)
    except json.decoder.JSONDecodeError as e:
        raise common.ParseError(f"{filename}: input must be valid JSON ({e.msg})", e.pos) from None


def _sampled_coeffs(data):
    grid = data.get('grid', {})
    start, stop, n = grid.get('start', 0.0), grid.get('stop'), grid.get('n', 4096)

    if stop is None:
        raise common.DegenerateGrid("coefficient file needs grid.stop")

    x = np.linspace(start, stop, n)
    out = {}

    for name, value in data.get('coeffs', {}).items():
        if isinstance(value, str):
            samples = dispersym.parse_coeff_expr(value).evaluate(x)
        elif isinstance(value, dict):
            samples = np.asarray(value.get('re', 0.0)) + 1j * np.asarray(value.get('im', 0.0))
        else:
            samples = np.asarray(value)

        out[name] = dispersym.SampledFunction(start, x[1] - x[0],
                                              np.broadcast_to(samples, x.shape).copy())

    return out


def cmd_check(args, config):
    _check_k(args, config)
    coeffs = _sampled_coeffs(_load_json(args.coeffs))
    conditions = dispersym.condition_set(args.k, args.gauged, args.letters)

    if args.theta_override:
        thetas = [Fraction(t) for t in args.theta_override.split(',')]

        if len(thetas) != len(conditions):
            raise common.UnsupportedOrder(f"{len(conditions)} exponents needed, got {len(thetas)}")

        conditions = dispersym.ConditionSet(args.k, [e._replace(exponent=t)
                                                     for e, t in zip(conditions, thetas)])

    report = dispersym.check_conditions(args.k, coeffs, conditions=conditions)
    umsg.log('window-restricted constants: necessary evidence, not a proof',
             level='info', logger=logger)
    _emit('check', report.rows(), args)

    return EXIT_OK


def _sim_config(run):
    coeffs = {name: dispersym.parse_coeff_expr(v) if isinstance(v, str) else v
              for name, v in run.get('coeffs', {}).items()}

    return dispersym.SimConfig.from_dict(run, coeffs)


def cmd_simulate(args, config):
    if 'k' not in config:
        raise common.UnsupportedOrder('simulate needs a run description with k (-c FILE)')

    sim = _sim_config(config)
    experiment = config.get('experiment', {'type': 'single', 'params': {}})
    kind = experiment.get('type', 'single')
    params = experiment.get('params', {})

    if kind == 'single':
        spec = dispersym.WavepacketSpec(params.get('xi', 8.0), params.get('center', 0.0),
                                        params.get('m', 1))
        result = dispersym.evolve(sim, dispersym.wavepacket(spec, sim.grid, normalize=True))

        if args.csv:
            result.to_csv(args.csv)

        rows = [{'time': t, 'norm': n} for t, n in zip(result.times, result.norms)]
    elif kind == 'sweep':
        rows = dispersym.frequency_sweep(sim, params.get('xis', [8, 16, 24, 32]),
                                         params.get('m', 1), params.get('center', 0.0))
    elif kind == 'probe':
        rows = [dispersym.duality_probe(sim.k, params.get('m', 1), sim.coeffs, xi,
                                        R=sim.R, N=sim.N, center=params.get('center', 0.0),
                                        use_phase=params.get('use_phase', True)).to_dict()
                for xi in params.get('xis', [8, 16, 32])]
    else:
        raise common.UnsupportedOrder(f"unknown experiment type '{kind}'")

    _emit(kind, rows, args)
    return EXIT_OK


def cmd_dump_symbols(args, config):
    spec = dispersym.build_stage(args.k, args.stage, args.zeroth)

    if args.format == common.Formats.TEXT.value:
        print(f"# {spec.label}")
        print(f"source: {spec.source!r}")
        print(f"target: {spec.target!r}")
        print(f"phi:\n{spec.phi.dump()}")
        return EXIT_OK

    rows = [{'part': 'phi', **r} for r in spec.phi.rows()]
    rows += [{'part': 'source', **r} for r in spec.source.rows()]
    rows += [{'part': 'target', **r} for r in spec.target.rows()]
    _emit('symbols', rows, args)

    return EXIT_OK


_COMMANDS = {
    'conditions': cmd_conditions,
    'recursion': cmd_recursion,
    'verify': cmd_verify,
    'check': cmd_check,
    'simulate': cmd_simulate,
    'dump-symbols': cmd_dump_symbols
}



def build_parser():
    common_args = argparse.ArgumentParser(add_help=False)
    common_args.add_argument('--format', default=common.Formats.JSON.value,
                             choices=[x.value for x in common.Formats],
                             help='Output format')
    common_args.add_argument('-v', '--verbose', action='count', default=0,
                             help='Increase log verbosity, repeatable')
    common_args.add_argument('-c', '--config', default=None,
                             help='JSON configuration or run description')

    parser = argparse.ArgumentParser(prog='dispersym', parents=[common_args])
    parser.add_argument('--version', action='version',
                        version=f"%(prog)s {dispersym.__version__}")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('conditions', parents=[common_args], help='Necessary conditions')
    p.add_argument('--k', type=int, required=True)
    p.add_argument('--gauged', action='store_true', help='Gauged corollary form')
    p.add_argument('--letters', action='store_true', help='Lettered coefficient names')

    p = sub.add_parser('recursion', parents=[common_args], help='Recursion tables')
    p.add_argument('--k', type=int, required=True)
    p.add_argument('--level', type=int, default=None)
    p.add_argument('--full', action='store_true', help='Keep cells below l = 0')
    p.add_argument('--structure', action='store_true', help='Structural checks only')

    p = sub.add_parser('verify', parents=[common_args], help='Composition identities')
    p.add_argument('--k', type=int, choices=(4, 5, 6), default=None,
                   help='Required except with --appendix-a')
    p.add_argument('--stage', type=int, default=None)
    p.add_argument('--all', action='store_true')
    p.add_argument('--appendix-a', action='store_true',
                   help='Self-adjoint Sobolev reductions')
    p.add_argument('--zeroth', action='store_true', help='Carry a zeroth order coefficient')

    p = sub.add_parser('check', parents=[common_args], help='Sampled coefficient check')
    p.add_argument('--k', type=int, required=True)
    p.add_argument('--coeffs', required=True, help='Coefficient JSON file')
    p.add_argument('--gauged', action='store_true')
    p.add_argument('--letters', action='store_true')
    p.add_argument('--theta-override', default=None, help='Comma separated exponents')

    p = sub.add_parser('simulate', parents=[common_args], help='Spectral simulation')
    p.add_argument('--csv', default=None, help='Write the norm series as CSV')

    p = sub.add_parser('dump-symbols', parents=[common_args], help='Stage symbols')
    p.add_argument('--k', type=int, required=True)
    p.add_argument('--stage', type=int, required=True)
    p.add_argument('--zeroth', action='store_true')

    return parser


def _setup_logging(args, config):
    mode = config.get('logging', {}).get('mode')

    if args.verbose:
        level = logging.INFO if args.verbose == 1 else logging.DEBUG
    else:
        level = getattr(logging, str(mode).upper(), logging.WARNING) if mode else logging.WARNING

    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s',
                        stream=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)

    try:
        config = _load_json(args.config) if args.config else {}
        _setup_logging(args, config)
        return _COMMANDS[args.command](args, config)
    except _FAILURES as e:
        print(f"check failed: {e}", file=sys.stderr)
        return EXIT_FAILED
    except (common.DispersymError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE



if __name__ == '__main__':
    sys.exit(main())
