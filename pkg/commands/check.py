"""
check: evaluate a recovery guarantee from supplied or computed RIP constants
"""

import logging

import theory
from dependencies import add_common_flags, cli_config, emit, matrix_from, require_seed
from exceptions import ConfigError

logger = logging.getLogger("lire.cli")


class RecordingProvider:
    """Delta provider wrapper that remembers every order it was asked for"""

    def __init__(self, provider):
        self.provider = provider
        self.optimistic = getattr(provider, "optimistic", False)
        self.queried: dict[int, float] = {}

    def __call__(self, order: int) -> float:
        value = float(self.provider(order))
        self.queried[order] = value
        return value


def register(subparsers) -> None:
    parser = subparsers.add_parser("check", help="evaluate LiRE and OMP recovery conditions")
    which = parser.add_mutually_exclusive_group(required=True)
    which.add_argument("--theorem1", action="store_true", help="one LiRE pass recovers every missed feature")
    which.add_argument("--cor1", action="store_true", help="list size max{e,1} corrects exactly e errors")
    which.add_argument("--cor2", action="store_true", help="list size 1 corrects up to e errors")
    which.add_argument("--cor2-max", action="store_true", help="largest e admitted by --cor2")
    which.add_argument("--omp", action="store_true", help="OMP recovers every m-sparse signal")
    parser.add_argument("--m", type=int, required=True, help="sparsity")
    parser.add_argument("--e", type=int, default=0, help="number of errors in the initial support")
    parser.add_argument("--ell", type=int, default=1, help="LiRE list size (--theorem1)")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--delta", type=float, default=None, help="use this RIP constant at every order")
    source.add_argument("--matrix", default=None, help="compute RIP constants of this matrix CSV")
    source.add_argument("--instance", default=None, help="compute RIP constants of an instance's phi")
    parser.add_argument("--mc", type=int, default=None, metavar="SAMPLES", help="Monte-Carlo constants (optimistic)")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for exact constants")
    add_common_flags(parser)
    parser.set_defaults(handler=cmd_check)


def delta_provider(args):
    if args.delta is not None:
        return theory.FixedDelta(args.delta)
    phi = matrix_from(args)
    if args.mc is not None:
        return theory.MonteCarloDeltas(phi, args.mc, require_seed(args, "Monte-Carlo RIP estimates"))
    return theory.ExactDeltas(phi, jobs=args.jobs)


def cmd_check(args) -> int:
    config = cli_config(args)
    provider = RecordingProvider(delta_provider(args))
    if provider.optimistic:
        logger.warning("⚠️ Monte-Carlo constants are lower bounds; a satisfied condition is optimistic")

    if args.theorem1:
        result = theory.theorem1_check(args.m, args.e, args.ell, provider)
        payload = result.model_dump(mode="json")
        satisfied = result.satisfied
    elif args.cor2_max:
        best = theory.max_correctable_errors(args.m, provider)
        payload = {"check": "cor2_max", "m": args.m, "max_correctable_errors": best}
        satisfied = best is not None
    else:
        if args.cor1:
            name, satisfied = "cor1", theory.corollary1_check(args.m, args.e, provider)
        elif args.cor2:
            name, satisfied = "cor2", theory.corollary2_check(args.m, args.e, provider)
        elif args.omp:
            name, satisfied = "omp", theory.omp_recovery_condition(args.m, provider)
        else:
            raise ConfigError("no condition selected")
        payload = {"check": name, "m": args.m, "e": args.e, "satisfied": satisfied}

    payload["deltas"] = {str(k): v for k, v in sorted(provider.queried.items())}
    payload["optimistic"] = provider.optimistic
    logger.info(f"{'✅' if satisfied else '❌'} condition {'holds' if satisfied else 'fails'} for m={args.m}")
    emit(payload, config)
    return 0
