"""
phase: run a phase-diagram grid and write the cell CSV plus a run manifest
"""

import logging
from pathlib import Path

import bench
from dependencies import add_common_flags, cli_config, emit_frame, emit_json, parse_int_list, session_factory_for
from exceptions import ConfigError
from schemas import DesignKind, GridSpec, build

logger = logging.getLogger("lire.cli")


def register(subparsers) -> None:
    parser = subparsers.add_parser("phase", help="success-rate grid over (m, n) cells")
    parser.add_argument("--preset", choices=sorted(bench.PRESETS), default=None, help="named desk-scale experiment")
    parser.add_argument("--d", type=int, default=bench.DESK_D, help="number of features")
    parser.add_argument("--m-values", default=None, help="sparsities, '8,12,16' or 'start:stop:step'")
    parser.add_argument("--n-values", default=None, help="measurement counts, '8,12,16' or 'start:stop:step'")
    parser.add_argument("--trials", type=int, default=50, help="instances per cell")
    parser.add_argument("--algos", default=None, help="comma-separated descriptors, e.g. omp,lire5+omp")
    parser.add_argument("--sigma2", type=float, default=None, help="measurement noise variance")
    parser.add_argument("--normalize", action="store_true", help="scale every column to unit norm")
    parser.add_argument("--design", choices=[k.value for k in DesignKind], default=DesignKind.GAUSSIAN.value)
    parser.add_argument("--ell", type=int, default=None, help="LiRE list size (default rule when omitted)")
    parser.add_argument("--folds", type=int, default=10, help="LASSO cross-validation folds")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes; results do not depend on it")
    parser.add_argument("--db", default=None, help="trial store URL (default: LIRE_DATABASE_URL)")
    parser.add_argument("--manifest", default=None, help="manifest path (default: <output>.manifest.json)")
    add_common_flags(parser)
    parser.set_defaults(handler=cmd_phase)


def grid_spec(args) -> GridSpec:
    """GridSpec from a preset, with explicit flags taking precedence"""
    if args.seed is None:
        raise ConfigError("--seed is required for phase runs")
    if args.preset:
        spec = bench.preset(args.preset, d=args.d, trials=args.trials, seed=args.seed, sigma2=args.sigma2)
        fields = spec.model_dump()
    else:
        if not (args.m_values and args.n_values and args.algos):
            raise ConfigError("--m-values, --n-values and --algos are required without --preset")
        fields = {"d": args.d, "trials": args.trials, "seed": args.seed, "sigma2": args.sigma2 or 0.0}
    if args.m_values:
        fields["m_values"] = parse_int_list(args.m_values)
    if args.n_values:
        fields["n_values"] = parse_int_list(args.n_values)
    if args.algos:
        fields["algorithms"] = [a for a in args.algos.split(",") if a.strip()]
    fields.update(
        normalize_columns=args.normalize,
        design=args.design,
        list_size=args.ell,
        lasso_folds=args.folds,
    )
    return build(GridSpec, **fields)


def cmd_phase(args) -> int:
    config = cli_config(args)
    spec = grid_spec(args)
    grid = bench.run_grid(spec, jobs=args.jobs, session_factory=session_factory_for(args.db))

    if config.format == "json":
        emit_json([c.model_dump(mode="json") for c in grid.cells.values()], config.output)
    elif config.output:
        bench.write_grid_csv(grid, config.output)
    else:
        emit_frame(grid.to_frame())

    manifest_path = args.manifest or (f"{config.output}.manifest.json" if config.output else None)
    if manifest_path:
        bench.write_manifest(grid, Path(manifest_path))
    return 0
