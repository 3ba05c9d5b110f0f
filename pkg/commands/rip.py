"""
rip: restricted isometry constant of one order, exact or sampled
"""

import logging

from dependencies import add_common_flags, cli_config, emit, matrix_from, one_based, require_seed
from theory import mutual_coherence, rip_constant, rip_monte_carlo

logger = logging.getLogger("lire.cli")


def register(subparsers) -> None:
    parser = subparsers.add_parser("rip", help="order-t restricted isometry constant of a matrix")
    parser.add_argument("--matrix", default=None, help="matrix CSV (one row per line)")
    parser.add_argument("--instance", default=None, help="instance directory; its phi.csv is used")
    parser.add_argument("--t", type=int, required=True, help="RIP order")
    method = parser.add_mutually_exclusive_group()
    method.add_argument("--exact", action="store_true", help="enumerate every size-t support (default)")
    method.add_argument("--mc", type=int, default=None, metavar="SAMPLES", help="Monte-Carlo lower bound from SAMPLES supports")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for the exact scan")
    add_common_flags(parser)
    parser.set_defaults(handler=cmd_rip)


def cmd_rip(args) -> int:
    config = cli_config(args)
    phi = matrix_from(args)
    if args.mc is not None:
        report = rip_monte_carlo(phi, args.t, args.mc, require_seed(args, "Monte-Carlo RIP estimates"))
    else:
        report = rip_constant(phi, args.t, jobs=args.jobs)
    if report.flagged:
        logger.warning(f"⚠️ delta_{args.t} = {report.delta:.4g} >= 1: some {args.t} columns are linearly dependent")
    logger.info(f"🧮 delta_{args.t} = {report.delta:.6g} ({report.method.value}, {report.subsets_examined} supports)")

    payload = report.model_dump(mode="json")
    payload["extremal_support"] = one_based(report.extremal_support)
    payload["mutual_coherence"] = mutual_coherence(phi)
    emit(payload, config)
    return 0
