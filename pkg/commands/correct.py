"""
correct: run LiRE passes on an initial support estimate
The initial support comes from a file of 1-based labels, a baseline
recoverer, or a seeded uniformly random draw.
"""

import logging

from baselines import recover
from bench import exact_recovery
from dependencies import (
    add_common_flags,
    add_solver_flags,
    cli_config,
    emit,
    instance_from,
    one_based,
    read_support_file,
    require_seed,
    solver_params,
)
from ensemble import random_support
from lire import count_errors, lire_correct, resolve_list_size
from schemas import FillPolicy, LireConfig, LireTrace, build

logger = logging.getLogger("lire.cli")


def register(subparsers) -> None:
    parser = subparsers.add_parser("correct", help="correct an initial support with LiRE")
    parser.add_argument("--instance", required=True, help="instance directory written by gen")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--init", default=None, help="file with the initial support (1-based labels)")
    source.add_argument("--algo", default=None, help="baseline whose support starts the correction")
    source.add_argument("--random", action="store_true", help="start from a uniformly random support (needs --seed)")
    parser.add_argument("--m", type=int, default=None, help="target support size (default: the instance's m)")
    parser.add_argument("--passes", type=int, default=1, help="maximum number of LiRE passes")
    parser.add_argument("--ell", type=int, default=None, help="list size (default: m/2 or n-m, clamped to [1, m])")
    parser.add_argument("--fill", choices=[p.value for p in FillPolicy], default=FillPolicy.CORRELATION.value,
                        help="how a short initial support is padded to m")
    parser.add_argument("--trace", action="store_true", help="include the per-slot trace of every pass")
    add_solver_flags(parser)
    add_common_flags(parser)
    parser.set_defaults(handler=cmd_correct)


def _labelled(trace: LireTrace) -> dict:
    """Trace with 1-based feature labels"""
    steps = [
        step.model_copy(
            update={
                "removed": step.removed + 1,
                "candidates": [c + 1 for c in step.candidates],
                "chosen": step.chosen + 1,
            }
        )
        for step in trace.steps
    ]
    return trace.model_copy(update={"steps": steps}).model_dump(mode="json")


def cmd_correct(args) -> int:
    config = cli_config(args)
    instance = instance_from(args)
    m = args.m if args.m is not None else instance.m
    cfg = build(LireConfig, m=m, list_size=args.ell, passes=args.passes, fill_policy=args.fill)

    if args.init:
        s_in = read_support_file(args.init, instance.d)
        origin = f"file {args.init}"
    elif args.random:
        s_in = random_support(instance.d, m, require_seed(args, "a random initial support"))
        origin = f"random (seed {args.seed})"
    else:
        s_in = recover(args.algo, instance.phi, instance.y, m, solver_params(args), folds=args.folds).support
        origin = args.algo

    support, traces = lire_correct(instance.phi, instance.y, s_in, cfg)
    success = exact_recovery(support, instance.s_star)
    errors_in = count_errors(s_in, instance.s_star)
    errors_out = count_errors(support, instance.s_star)
    logger.info(f"{'✅' if success else '❌'} LiRE from {origin}: {errors_in} -> {errors_out} missed features")

    report = {
        "initial_support": one_based(s_in),
        "support": one_based(support),
        "list_size": resolve_list_size(cfg, instance.n),
        "passes_run": len(traces),
        "errors_in": errors_in,
        "errors_out": errors_out,
        "success": success,
    }
    if args.trace:
        report["traces"] = [_labelled(t) for t in traces]
    emit(report, config)
    return 0
