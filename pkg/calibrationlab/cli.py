"""
command line front end: every subcommand prints one JSON document on stdout
and exits with 0 on success, 1 when a certification fails, 2 on bad input and
3 when a hypothesis of the construction is violated
"""
import sys
import argparse
import logging

from calibrationlab.core import Config, ToleranceConfig, ExpRunner, CalibrationLabError, InvalidInput, NotMinimal
from calibrationlab.core.exact import QSqrt3
from calibrationlab.core.utils import dumps
from calibrationlab.core import plotting
from calibrationlab.zoo.networks.data import load_network, parse_point
from calibrationlab.zoo.networks.exp import check_minimal, length
from calibrationlab.zoo.currents.exp import induce_current, boundary, mass, verify_identity_calibration
from calibrationlab.zoo.currents.data import dump_current, dump_boundary
from calibrationlab.zoo.comparison.exp import (compare_same_topology, compare_embedded_copy, identity_embedding,
                                               compare_quotient_richer, compare_quotient_poorer, steiner_oracle)
from calibrationlab.zoo.comparison.data import load_quotient, load_embedding
from calibrationlab.zoo.partitions.exp import calibrate_partition, counterexample
from calibrationlab.zoo.partitions.data import load_polygon, dump_partition
from calibrationlab.zoo.networks.data import dump_network, read_json
from calibrationlab.zoo.networks import exp as networks_exp
from calibrationlab.zoo.currents import exp as currents_exp
from calibrationlab.zoo.comparison import exp as comparison_exp
from calibrationlab.zoo.partitions import exp as partitions_exp


logger = logging.getLogger('calibrationlab')

EXPERIMENTS = {
    'networks': networks_exp,
    'currents': currents_exp,
    'comparison': comparison_exp,
    'partitions': partitions_exp,
}

# result keys that decide whether a batch run passed
BATCH_VERDICTS = {
    'networks': 'minimal',
    'currents': 'calibrated',
    'comparison': 'all_verdicts',
    'partitions': 'calibrated',
}


class RunConfig(Config):
    """
    the parsed command line as a Config: command, inputs, tolerance.*, exact, svg, seed
    """
    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        params = {k: v for k, v in vars(args).items() if k not in ('eps_len', 'eps_angle', 'eps_field', 'verbose')}
        params.update({'tolerance.eps_len': args.eps_len, 'tolerance.eps_angle': args.eps_angle,
                       'tolerance.eps_field': args.eps_field})
        return cls(**params)

    @property
    def tol(self) -> ToleranceConfig:
        return ToleranceConfig.from_config(self.tolerance)


def _read(path: str) -> str:
    if path == '-':
        return sys.stdin.read()
    try:
        with open(path) as f:
            return f.read()
    except OSError as e:
        raise InvalidInput(f"cannot read {path}: {e.strerror}")


def _number(text: str, exact: bool):
    try:
        value = QSqrt3.parse(text)
    except InvalidInput:
        # scientific notation such as 1e-3
        try:
            value = QSqrt3(float(text))
        except ValueError:
            raise InvalidInput(f"cannot parse the number {text!r}")
    return value if exact else float(value)


def _emit(data, exact: bool):
    sys.stdout.write(dumps(data, exact) + '\n')


def _save(fig, config: RunConfig):
    if config.svg and fig is not None:
        plotting.save_svg(fig, config.svg)
        logger.info(f"figure written to {config.svg}")


def cmd_check_minimal(config: RunConfig) -> int:
    net = load_network(_read(config.network), config.exact)
    cert = check_minimal(net, config.tol)
    _emit(cert, config.exact)
    _save(plotting.plot_network(net) if config.svg else None, config)
    return 0 if cert.is_minimal else 1


def _require_minimal(net, config: RunConfig):
    cert = check_minimal(net, config.tol)
    if not cert.is_minimal:
        raise NotMinimal(f"network is not minimal: {', '.join(cert.kinds())}")


def cmd_calibrate_current(config: RunConfig) -> int:
    net = load_network(_read(config.network), config.exact)
    _require_minimal(net, config)
    tol = config.tol
    T = induce_current(net, tol)
    B = boundary(T, tol.eps_len)
    report = verify_identity_calibration(T, config.samples, tol, strict=False)
    m, L = mass(T), length(net)
    equal = m == L if net.is_exact() else abs(float(m) - float(L)) <= tol.eps_len
    _emit({'mass': m, 'length': L, 'boundary': dump_boundary(B, config.exact), 'current': dump_current(T, config.exact),
           'calibration': report}, config.exact)
    return 0 if report.passed and equal else 1


def cmd_compare(config: RunConfig) -> int:
    ref = load_network(_read(config.reference), config.exact)
    comp = load_network(_read(config.competitor), config.exact)
    tol = config.tol
    if config.mode == 'same':
        cert = compare_same_topology(ref, comp, tol)
    elif config.mode == 'embed':
        embedding = load_embedding(_read(config.embedding)) if config.embedding else identity_embedding(ref, comp)
        cert = compare_embedded_copy(ref, comp, embedding, tol)
    else:
        if not config.quotient:
            raise InvalidInput(f"mode {config.mode} needs --quotient")
        quotient = load_quotient(_read(config.quotient), comp if config.mode == 'richer' else ref)
        compare = compare_quotient_richer if config.mode == 'richer' else compare_quotient_poorer
        cert = compare(ref, comp, quotient, tol)
    _emit(cert, config.exact)
    return 0 if cert.verdict else 1


def cmd_calibrate_partition(config: RunConfig) -> int:
    net = load_network(_read(config.network), config.exact)
    D = load_polygon(read_json(_read(config.domain), config.exact), config.exact) if config.domain else None
    delta, delta_prime = _number(config.delta, config.exact), _number(config.delta_prime, config.exact)
    domain, coloring, spec, fields, report = calibrate_partition(net, delta, delta_prime, D, config.tol)
    _emit({'report': report, 'perimeter': sum(itf.length for itf in spec.interfaces),
           'colors': list(coloring.colors), 'partition': dump_partition(spec, config.exact)}, config.exact)
    _save(plotting.plot_partition(spec, fields) if config.svg else None, config)
    return 0 if report.passed else 1


def cmd_counterexample(config: RunConfig) -> int:
    d, h = _number(config.d, config.exact), _number(config.h, config.exact)
    outer_len, delta = _number(config.outer_len, config.exact), _number(config.delta, config.exact)
    result = counterexample(d, outer_len, h, delta, config.tol)
    _emit(result.to_dict(config.exact), config.exact)
    _save(plotting.plot_side_by_side(result.spec_E, result.spec_F) if config.svg else None, config)
    return 0


def cmd_oracle(config: RunConfig) -> int:
    terminals = []
    for text in config.terminals:
        parts = text.split(',')
        if len(parts) != 2:
            raise InvalidInput(f"terminal {text!r} is not of the form x,y")
        terminals.append(parse_point([_number(p, False) for p in parts], False))
    best, net = steiner_oracle(terminals, tol=config.tol)
    _emit({'length': best, 'network': dump_network(net)}, False)
    _save(plotting.plot_network(net) if config.svg else None, config)
    return 0


def cmd_batch(config: RunConfig) -> int:
    module = EXPERIMENTS[config.experiment]
    params = dict(module.sample_params)
    params.update({f"tolerance.{k}": v for k, v in config.tol.to_dict().items()})
    seeds = list(range(config.seed, config.seed + config.runs))
    runner = ExpRunner(module.exp, {'config': Config(**params)}, repeat_num=config.runs, seeds=seeds,
                       verbose=config.progress)
    results = runner.run_mp(config.workers) if config.workers > 1 else runner.run()
    _emit(results, config.exact)
    key = BATCH_VERDICTS[config.experiment]
    return 0 if all(r.get(key, True) for r in results) else 1


COMMANDS = {
    'check-minimal': cmd_check_minimal,
    'calibrate-current': cmd_calibrate_current,
    'compare': cmd_compare,
    'calibrate-partition': cmd_calibrate_partition,
    'counterexample': cmd_counterexample,
    'oracle': cmd_oracle,
    'batch': cmd_batch,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--exact', action='store_true', help='read coordinates into Q[sqrt3] and compute exactly')
    common.add_argument('--eps-len', type=float, default=1e-9)
    common.add_argument('--eps-angle', type=float, default=1e-9)
    common.add_argument('--eps-field', type=float, default=1e-12)
    common.add_argument('--svg', default=None, help='write a figure to this path')
    common.add_argument('--seed', type=int, default=0)
    common.add_argument('-v', '--verbose', action='store_true')

    parser = argparse.ArgumentParser(prog='calibrationlab', description='certificates for planar minimal networks')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('check-minimal', parents=[common], help='check the minimality conditions of a network')
    p.add_argument('network', help="network JSON, '-' for stdin")

    p = sub.add_parser('calibrate-current', parents=[common], help='lattice current calibration of a network')
    p.add_argument('network')
    p.add_argument('--samples', type=int, default=360, help='comass sampling angles')

    p = sub.add_parser('compare', parents=[common], help='compare a minimal network with a competitor')
    p.add_argument('reference')
    p.add_argument('competitor')
    p.add_argument('--mode', choices=('same', 'embed', 'richer', 'poorer'), default='same')
    p.add_argument('--quotient', default=None, help='quotient JSON for richer/poorer')
    p.add_argument('--embedding', default=None, help='embedding JSON for embed, identity when missing')

    p = sub.add_parser('calibrate-partition', parents=[common], help='paired calibration of the induced partition')
    p.add_argument('network')
    p.add_argument('--delta', required=True)
    p.add_argument('--delta-prime', required=True)
    p.add_argument('--domain', default=None, help='polygon JSON intersected with the tube')

    p = sub.add_parser('counterexample', parents=[common], help='double tripod against the corner-cutting competitor')
    p.add_argument('--d', required=True)
    p.add_argument('--h', required=True)
    p.add_argument('--outer-len', default='2')
    p.add_argument('--delta', required=True)

    p = sub.add_parser('oracle', parents=[common], help='shortest tree on at most five terminals')
    p.add_argument('terminals', nargs='+', help='points as x,y')

    p = sub.add_parser('batch', parents=[common], help='repeat a reproduction over consecutive seeds')
    p.add_argument('experiment', choices=sorted(EXPERIMENTS))
    p.add_argument('--runs', type=int, default=10)
    p.add_argument('--workers', type=int, default=1)
    p.add_argument('--progress', action='store_true', help='print the config banner and a progress bar')
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        config = RunConfig.from_args(args)
        return COMMANDS[config.command](config)
    except CalibrationLabError as e:
        payload = {'error': type(e).__name__, 'message': str(e)}
        if getattr(e, 'hypothesis', None):
            payload['hypothesis'] = e.hypothesis
        if getattr(e, 'report', None) is not None:
            payload['report'] = e.report
        logger.error(f"{type(e).__name__}: {e}")
        _emit(payload, False)
        return e.exit_code
