"""
recover: run one baseline recoverer on an instance directory
"""

import logging

from baselines import recover
from bench import exact_recovery
from dependencies import add_common_flags, add_solver_flags, cli_config, emit, instance_from, one_based, solver_params
from schemas import RecoveryReport

logger = logging.getLogger("lire.cli")


def register(subparsers) -> None:
    parser = subparsers.add_parser("recover", help="estimate the support with omp, cosamp, bp or lasso")
    parser.add_argument("--instance", required=True, help="instance directory written by gen")
    parser.add_argument("--algo", required=True, help="omp, cosamp, bp or lasso")
    parser.add_argument("--m", type=int, default=None, help="target sparsity (default: the instance's m)")
    add_solver_flags(parser)
    add_common_flags(parser, seed=False)
    parser.set_defaults(handler=cmd_recover)


def cmd_recover(args) -> int:
    config = cli_config(args)
    params = solver_params(args)
    instance = instance_from(args)
    m = args.m if args.m is not None else instance.m

    result = recover(args.algo, instance.phi, instance.y, m, params, folds=args.folds)
    success = result.converged and exact_recovery(result.support, instance.s_star)
    if not result.converged:
        logger.warning(f"⚠️ {result.algorithm} did not converge after {result.iterations} iterations")
    logger.info(f"{'✅' if success else '❌'} {result.algorithm}: support {one_based(result.support)}")
    emit(
        RecoveryReport(
            algorithm=result.algorithm,
            support=one_based(result.support),
            coefficients=result.coefficients.tolist(),
            iterations=result.iterations,
            final_residual_norm=result.final_residual_norm,
            converged=result.converged,
            success=success,
            metadata=result.metadata,
        ),
        config,
    )
    return 0
