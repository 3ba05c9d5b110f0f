"""
Shared command helpers
Common flags, input loading and output writing used by every subcommand
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from pydantic import BaseModel

import linalg
from database import DATABASE_URL_ENV, make_session_factory
from ensemble import SparseInstance, load_instance
from exceptions import ConfigError, InputError
from linalg import DesignMatrix, Support
from schemas import CliConfig, SolverParams, build

logger = logging.getLogger("lire.cli")

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


# Flag groups
def add_common_flags(parser: argparse.ArgumentParser, *, seed: bool = True) -> None:
    """--output, --format and --log-level on every subcommand, --seed where randomness is involved"""
    if seed:
        parser.add_argument("--seed", type=int, default=None, help="base seed (required whenever randomness is used)")
    parser.add_argument("--output", default=None, help="write the result here instead of stdout")
    parser.add_argument("--format", choices=["json", "csv"], default=None, help="force the output format")
    parser.add_argument("--log-level", choices=LOG_LEVELS, default=None, help="override LIRE_LOG_LEVEL")


def add_solver_flags(parser: argparse.ArgumentParser) -> None:
    defaults = SolverParams()
    parser.add_argument("--max-iter", type=int, default=defaults.max_iterations, help="ADMM iterations / LASSO sweeps")
    parser.add_argument("--tol", type=float, default=defaults.tolerance, help="ADMM / coordinate-descent tolerance")
    parser.add_argument("--rho", type=float, default=defaults.admm_rho, help="ADMM penalty parameter")
    parser.add_argument("--lambda", dest="lasso_lambda", type=float, default=None, help="fixed LASSO lambda (default: cross-validated)")
    parser.add_argument("--folds", type=int, default=10, help="LASSO cross-validation folds")


def cli_config(args: argparse.Namespace) -> CliConfig:
    return build(
        CliConfig,
        subcommand=args.command,
        seed=getattr(args, "seed", None),
        output=args.output,
        format=args.format,
    )


def solver_params(args: argparse.Namespace) -> SolverParams:
    return build(
        SolverParams,
        max_iterations=args.max_iter,
        tolerance=args.tol,
        admm_rho=args.rho,
        lasso_lambda=args.lasso_lambda,
    )


def require_seed(args: argparse.Namespace, purpose: str) -> int:
    if args.seed is None:
        raise ConfigError(f"--seed is required for {purpose}")
    return args.seed


# Index conversion: 1-based on the command line and in files
def one_based(support: ArrayLike) -> list[int]:
    return [int(i) + 1 for i in np.asarray(support).ravel()]


def zero_based(labels: ArrayLike, d: int) -> Support:
    values = np.asarray(labels, dtype=np.intp).ravel()
    if values.size and values.min() < 1:
        raise InputError(f"feature labels are 1-based, got {values.tolist()}")
    return linalg.support_from(values - 1, d)


def read_support_file(path: str, d: int) -> Support:
    """1-based feature labels separated by commas or whitespace"""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read support file {path}: {exc}") from exc
    try:
        labels = [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise InputError(f"support file {path} must contain integer labels") from exc
    return zero_based(labels, d)


def parse_int_list(text: str) -> list[int]:
    """'8,12,16' or a range 'start:stop:step' with inclusive stop"""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            if step < 1:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except (ValueError, IndexError):
        raise ConfigError(f"cannot parse integer list: {text}") from None


# Inputs
def instance_from(args: argparse.Namespace) -> SparseInstance:
    if not args.instance:
        raise ConfigError("--instance is required")
    return load_instance(args.instance)


def matrix_from(args: argparse.Namespace) -> DesignMatrix:
    if getattr(args, "matrix", None):
        return linalg.read_matrix_csv(args.matrix)
    if getattr(args, "instance", None):
        return load_instance(args.instance).phi
    raise ConfigError("one of --matrix or --instance is required")


def session_factory_for(url: Optional[str]):
    return make_session_factory(url or os.getenv(DATABASE_URL_ENV))


# Outputs
def _jsonable(payload: Any) -> Any:
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json")
    return payload


def emit_json(payload: Any, output: Optional[str] = None) -> None:
    text = json.dumps(_jsonable(payload), indent=2) + "\n"
    if output:
        Path(output).write_text(text)
        logger.info(f"💾 Result written to {output}")
    else:
        sys.stdout.write(text)


def emit_frame(frame: pd.DataFrame, output: Optional[str] = None) -> None:
    if output:
        frame.to_csv(output, index=False)
        logger.info(f"💾 Result written to {output}")
    else:
        sys.stdout.write(frame.to_csv(index=False))


def emit(payload: Any, config: CliConfig) -> None:
    """JSON by default; --format csv flattens a record (or list of records) to rows"""
    if config.format == "csv":
        data = _jsonable(payload)
        rows = data if isinstance(data, list) else [data]
        emit_frame(pd.json_normalize(rows), config.output)
    else:
        emit_json(payload, config.output)
