"""The densfield command line: dataset generation, both training stages and evaluation

Exit codes: 0 success, 1 a densfield error (message on stderr), 2 usage error.
"""
import argparse
import logging
import os
import sys
import typing
from pathlib import Path

import numba

from densfield.core.config import Settings, resolve_settings, write_snapshot
from densfield.core.constants import STAGE_KD, STAGE_MV
from densfield.core.exceptions import DensFieldContractViolation, DensFieldException
from densfield.eval import run_depth_evaluation, run_occupancy_evaluation, run_profiles
from densfield.synthetic import generate_split, write_dataset
from densfield.train import load_checkpoint, run_training

logger = logging.getLogger(__name__)

SNAPSHOT_FILE = 'resolved.cfg'
THREADS_VARIABLE = 'DENSFIELD_THREADS'
DEFAULT_EVAL_MODES = ('sv', 'mv-1view', 'mv-nview')
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')


def _gen_data(args: argparse.Namespace, settings: Settings) -> None:
    out = Path(args.out)
    for split, count in (('train', settings['n_scenes']), ('test', settings['n_test_scenes'])):
        write_dataset(out / split, generate_split(settings['seed'], split, count, settings))


def _train_mv(args: argparse.Namespace, settings: Settings) -> None:
    run_training(args.dataset, settings, STAGE_MV, args.out)


def _distill(args: argparse.Namespace, settings: Settings) -> None:
    run_training(args.dataset, settings, STAGE_KD, args.out, init_checkpoint=args.checkpoint)


def _eval_modes(args: argparse.Namespace) -> typing.List[str]:
    if args.mode:
        return list(args.mode)
    modes = list(DEFAULT_EVAL_MODES)
    if args.checkpoint is not None and load_checkpoint(args.checkpoint).stage == STAGE_KD:
        modes.append('kd')
    return modes


def _eval_occ(args: argparse.Namespace, settings: Settings) -> None:
    run_occupancy_evaluation(args.checkpoint, args.dataset, _eval_modes(args), settings, args.out, args.depth)


def _eval_depth(args: argparse.Namespace, settings: Settings) -> None:
    run_depth_evaluation(args.checkpoint, args.dataset, _eval_modes(args), settings, args.out)


def _render_profile(args: argparse.Namespace, settings: Settings) -> None:
    modes = _eval_modes(args)
    scenes = None if args.scene is None else [args.scene]
    for mode in modes:
        run_profiles(args.checkpoint, args.dataset, mode, settings, args.out, scenes)


# maps a subcommand to (handler, help)
COMMANDS = {
    'gen-data': (_gen_data, 'generate the train and test datasets'),
    'train-mv': (_train_mv, 'train the backbone and the multi view head'),
    'distill': (_distill, 'distill the multi view head in to the single view head'),
    'eval-occ': (_eval_occ, 'occupancy report of a checkpoint'),
    'eval-depth': (_eval_depth, 'depth report of a checkpoint'),
    'render-profile': (_render_profile, 'top-down density profiles'),
}  # type: typing.Dict[str, typing.Tuple[typing.Callable[[argparse.Namespace, Settings], None], str]]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help="key = value settings file")
    common.add_argument('--seed', type=int, help="replaces the seed setting")
    common.add_argument('--set', action='append', default=[], metavar='KEY=VALUE', dest='overrides',
                        help="override one setting, repeatable")
    common.add_argument('--out', required=True, help="output directory")
    common.add_argument('--log-level', default='INFO', choices=LOG_LEVELS)

    parser = argparse.ArgumentParser(prog='densfield', description=__doc__.splitlines()[0])
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True
    for name, (_, help_text) in COMMANDS.items():
        sub = subparsers.add_parser(name, parents=[common], help=help_text)
        if name != 'gen-data':
            sub.add_argument('--dataset', required=True, help="dataset directory written by gen-data")
        if name in ('distill', 'eval-occ', 'eval-depth', 'render-profile'):
            sub.add_argument('--checkpoint', required=name == 'distill', help="DFLD1 checkpoint")
        if name in ('eval-occ', 'eval-depth', 'render-profile'):
            sub.add_argument('--mode', action='append', help="sv, mv-1view, mv-nview, mv-<n>view, kd or gt, "
                                                             "repeatable")
        if name == 'eval-occ':
            sub.add_argument('--depth', action='store_true', help="also fill in the depth columns")
        if name == 'render-profile':
            sub.add_argument('--scene', type=int, help="only this scene index")
    return parser


def configure_threads(environ: typing.Mapping[str, str] = os.environ) -> None:
    """Cap the numba worker threads when DENSFIELD_THREADS is set"""
    value = environ.get(THREADS_VARIABLE)
    if not value:
        return
    try:
        threads = int(value)
    except ValueError as err:
        raise DensFieldContractViolation("{} must be an integer, got '{}'".format(THREADS_VARIABLE, value)) from err
    if not 1 <= threads <= numba.config.NUMBA_NUM_THREADS:
        raise DensFieldContractViolation("{} must lie in [1, {}], got {}".format(
            THREADS_VARIABLE, numba.config.NUMBA_NUM_THREADS, threads))
    numba.set_num_threads(threads)


def run(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    """Parse argv, run the subcommand and return the exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 0 if err.code in (0, None) else 2
    logging.basicConfig(level=args.log_level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    handler, _ = COMMANDS[args.command]
    try:
        configure_threads()
        settings = resolve_settings(args.config, args.overrides, args.seed)
        write_snapshot(Path(args.out) / SNAPSHOT_FILE, settings)
        handler(args, settings)
    except DensFieldException as err:
        print("densfield {}: {}".format(args.command, err), file=sys.stderr)
        return 1
    logger.info("%s finished, outputs in %s", args.command, args.out)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == '__main__':
    main()
