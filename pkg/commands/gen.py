"""
gen: draw one problem instance and write its directory
"""

import logging

from dependencies import add_common_flags, cli_config, emit, require_seed
from ensemble import generate_instance, save_instance
from exceptions import ConfigError, SolverError
from schemas import DesignKind, EnsembleConfig, build

logger = logging.getLogger("lire.cli")


def register(subparsers) -> None:
    parser = subparsers.add_parser("gen", help="generate a seeded sparse-recovery instance")
    parser.add_argument("--d", type=int, required=True, help="number of features")
    parser.add_argument("--n", type=int, required=True, help="number of measurements")
    parser.add_argument("--m", type=int, required=True, help="sparsity of the planted signal")
    parser.add_argument("--sigma2", type=float, default=0.0, help="measurement noise variance")
    parser.add_argument("--normalize", action="store_true", help="scale every column to unit norm")
    parser.add_argument("--design", choices=[k.value for k in DesignKind], default=DesignKind.GAUSSIAN.value)
    parser.add_argument("--dir", dest="directory", default=None, help="instance directory (default: --output)")
    add_common_flags(parser)
    parser.set_defaults(handler=cmd_gen)


def cmd_gen(args) -> int:
    config = cli_config(args)
    cfg = build(
        EnsembleConfig,
        d=args.d,
        n=args.n,
        m=args.m,
        sigma2=args.sigma2,
        normalize_columns=args.normalize,
        seed=require_seed(args, "instance generation"),
        design=args.design,
    )
    directory = args.directory or config.output
    if not directory:
        raise ConfigError("an instance directory is required (--dir or --output)")

    instance = generate_instance(cfg)
    try:
        save_instance(instance, directory)
    except OSError as exc:
        raise SolverError(f"cannot write instance directory {directory}: {exc}") from exc
    logger.info(f"✅ Instance d={cfg.d} n={cfg.n} m={cfg.m} written to {directory}")
    # the summary goes to stdout even when --output names the directory
    emit(instance.meta(), config.model_copy(update={"output": None}))
    return 0
