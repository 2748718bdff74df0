import argparse
import logging

from ..exceptions import DmftError
from .commands import cmd_compare, cmd_simulate, cmd_solve, cmd_split

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def _common(parser, config_required=True):
    parser.add_argument('--config', required=config_required,
                        help='YAML config, or a run manifest to replay')
    parser.add_argument('--seed', type=int, default=None, help='override every seed')
    parser.add_argument('--out', default=None, help='output directory')


def _solver_flags(parser):
    parser.add_argument('--paths', type=int, default=None, help='override solver.n_paths')
    parser.add_argument('--tol', type=float, default=None, help='override solver.tol')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='sgd-dmft',
        description='DMFT for SGD on the Gaussian teacher-student perceptron')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    solve = sub.add_parser('solve', help='solve the DMFT fixed point, write theory curves')
    _common(solve)
    _solver_flags(solve)
    solve.set_defaults(func=cmd_solve)

    simulate = sub.add_parser('simulate', help='finite-d simulation over seeds')
    _common(simulate)
    simulate.set_defaults(func=cmd_simulate)

    compare = sub.add_parser('compare', help='compare theory and simulation tables')
    compare.add_argument('theory', nargs='?', help='theory CSV')
    compare.add_argument('sim', nargs='?', help='simulation CSV')
    compare.add_argument('--tolerance', type=float, default=None)
    compare.add_argument('--columns', default=None,
                         help='comma-separated reference columns to check')
    _common(compare, config_required=False)
    _solver_flags(compare)
    compare.set_defaults(func=cmd_compare)

    split = sub.add_parser('split', help='sample-splitting GD against its scalar theory')
    _common(split)
    split.set_defaults(func=cmd_split)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format=LOG_FORMAT)
    try:
        return args.func(args)
    except DmftError as e:
        logger.error('%s failed: %s', args.command, e)
        return e.code
