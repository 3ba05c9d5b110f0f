"""
Phase-diagram benchmark runner
Every (m, n) cell draws `trials` seeded instances and runs every algorithm
descriptor on the same instance, so cell-to-cell comparisons between
algorithms are paired. Trial outcomes are reduced in key order, which makes
the grid independent of the number of worker processes.
"""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Union

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike

import baselines
import models
from ensemble import SparseInstance, generate_instance, mix_seed, random_support
from exceptions import ConfigError, InputError
from linalg import Support
from lire import lire_correct
from schemas import (
    AlgorithmSpec,
    BaseAlgorithm,
    CellStats,
    EnsembleConfig,
    FillPolicy,
    GridSpec,
    LireConfig,
    SolverParams,
    build,
)

logger = logging.getLogger("lire.bench")

TOOLKIT_VERSION = "1.0.0"
DESK_D = 128
DEFAULT_PASSES = 5
NOISE_LEVELS = (0.0005, 0.001, 0.002)
GRID_COLUMNS = [
    "d", "m", "n", "algorithm", "sigma2", "trials",
    "successes", "success_rate", "mean_runtime_ms", "seed",
]

_RANDOM_INIT_KEY = 1  # sub-seed of a trial seed that draws the random initial support

CellKey = tuple[int, int, str]


@dataclass(frozen=True)
class TrialOutcome:
    m: int
    n: int
    algorithm: str
    trial: int
    success: bool
    runtime_ms: float
    converged: bool = True


@dataclass
class PhaseGrid:
    """Aggregated success statistics keyed by (m, n, algorithm name)"""

    spec: GridSpec
    cells: dict[CellKey, CellStats] = field(default_factory=dict)
    wall_time_ms: float = 0.0

    @property
    def algorithms(self) -> list[str]:
        return [a.name for a in self.spec.algorithms]

    def cell(self, m: int, n: int, algorithm: str) -> CellStats:
        try:
            return self.cells[(m, n, str(algorithm))]
        except KeyError:
            raise ConfigError(f"no cell (m={m}, n={n}, algorithm={algorithm}) in the grid") from None

    def success_rate(self, m: int, n: int, algorithm: str) -> float:
        return self.cell(m, n, algorithm).success_rate

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "d": self.spec.d,
                "m": c.m,
                "n": c.n,
                "algorithm": c.algorithm,
                "sigma2": self.spec.sigma2,
                "trials": c.trials,
                "successes": c.successes,
                "success_rate": c.success_rate,
                "mean_runtime_ms": c.mean_runtime_ms,
                "seed": self.spec.seed,
            }
            for c in self.cells.values()
        ]
        return pd.DataFrame(rows, columns=GRID_COLUMNS)


# --- Single trials ---
def exact_recovery(s_out: ArrayLike, s_star: ArrayLike) -> bool:
    """True iff every true feature is in s_out"""
    return set(np.asarray(s_star).tolist()) <= set(np.asarray(s_out).tolist())


def trial_seed(base: int, m: int, n: int, k: int) -> int:
    return mix_seed(base, m, n, k)


def trial_instance(spec: GridSpec, m: int, n: int, k: int) -> SparseInstance:
    """The instance every algorithm of cell (m, n) sees in trial k"""
    cfg = build(
        EnsembleConfig,
        d=spec.d,
        n=n,
        m=m,
        sigma2=spec.sigma2,
        normalize_columns=spec.normalize_columns,
        seed=trial_seed(spec.seed, m, n, k),
        design=spec.design,
    )
    return generate_instance(cfg)


def _lire_config(spec: GridSpec, m: int, passes: int) -> LireConfig:
    ell = None if spec.list_size is None else min(spec.list_size, m)
    return LireConfig(m=m, list_size=ell, passes=passes, fill_policy=FillPolicy.CORRELATION)


def run_algorithm(
    algorithm: AlgorithmSpec,
    instance: SparseInstance,
    spec: GridSpec,
    params: Optional[SolverParams] = None,
) -> tuple[Support, bool, float]:
    """
    Run one descriptor on one instance and return (support, converged, runtime_ms).

    The runtime of a composed descriptor covers its base run as well.
    """
    m = instance.m
    start = time.perf_counter()
    if algorithm.base == BaseAlgorithm.RANDOM:
        base_support = random_support(instance.d, m, mix_seed(instance.seed, _RANDOM_INIT_KEY))
        converged = True
    else:
        result = baselines.recover(algorithm.base, instance.phi, instance.y, m, params, folds=spec.lasso_folds)
        base_support, converged = result.support, result.converged

    support = base_support
    if algorithm.lire_passes > 0:
        support, _ = lire_correct(instance.phi, instance.y, base_support, _lire_config(spec, m, algorithm.lire_passes))
    return support, converged, (time.perf_counter() - start) * 1e3


def run_trial(spec: GridSpec, m: int, n: int, k: int, params: Optional[SolverParams] = None) -> list[TrialOutcome]:
    """All descriptors of the grid on trial k of cell (m, n)"""
    instance = trial_instance(spec, m, n, k)
    outcomes = []
    for algorithm in spec.algorithms:
        support, converged, runtime_ms = run_algorithm(algorithm, instance, spec, params)
        outcomes.append(
            TrialOutcome(
                m=m,
                n=n,
                algorithm=algorithm.name,
                trial=k,
                success=converged and exact_recovery(support, instance.s_star),
                runtime_ms=runtime_ms,
                converged=converged,
            )
        )
    return outcomes


def _run_unit(args) -> list[TrialOutcome]:
    return run_trial(*args)


# --- Trial store ---
def _open_run(session_factory: Callable, spec: GridSpec) -> tuple[int, dict]:
    """Find or create the stored run for spec; returns its id and finished outcomes"""
    db = session_factory()
    try:
        digest = spec.spec_hash()
        run = db.query(models.GridRun).filter(models.GridRun.spec_hash == digest).first()
        if run is None:
            run = models.GridRun(spec_hash=digest, d=spec.d, sigma2=spec.sigma2, seed=str(spec.seed))
            db.add(run)
            db.commit()
            db.refresh(run)
            logger.info(f"💾 New trial store run {run.id} for spec {digest[:12]}")
        done = {}
        for rec in db.query(models.TrialRecord).filter(models.TrialRecord.run_id == run.id):
            done[(rec.m, rec.n, rec.trial, rec.algorithm)] = TrialOutcome(
                m=rec.m,
                n=rec.n,
                algorithm=rec.algorithm,
                trial=rec.trial,
                success=rec.success,
                runtime_ms=rec.runtime_ms,
                converged=rec.converged,
            )
        return run.id, done
    finally:
        db.close()


def _store_outcomes(session_factory: Callable, run_id: int, outcomes: Iterable[TrialOutcome]) -> None:
    db = session_factory()
    try:
        for o in outcomes:
            db.add(
                models.TrialRecord(
                    run_id=run_id,
                    m=o.m,
                    n=o.n,
                    algorithm=o.algorithm,
                    trial=o.trial,
                    success=o.success,
                    runtime_ms=o.runtime_ms,
                    converged=o.converged,
                )
            )
        db.commit()
    finally:
        db.close()


# --- Grids ---
def _reduce(spec: GridSpec, outcomes: dict[tuple, TrialOutcome]) -> dict[CellKey, CellStats]:
    cells: dict[CellKey, CellStats] = {}
    for m, n in spec.cells():
        for algorithm in spec.algorithms:
            name = algorithm.name
            rows = [outcomes[(m, n, k, name)] for k in range(spec.trials)]
            cells[(m, n, name)] = CellStats(
                m=m,
                n=n,
                algorithm=name,
                trials=spec.trials,
                successes=sum(o.success for o in rows),
                mean_runtime_ms=math.fsum(o.runtime_ms for o in rows) / spec.trials,
                nonconverged=sum(not o.converged for o in rows),
            )
    return cells


def run_grid(
    spec: GridSpec,
    jobs: int = 1,
    session_factory: Optional[Callable] = None,
    params: Optional[SolverParams] = None,
) -> PhaseGrid:
    """Run every (m, n, trial) unit of spec and aggregate per cell and algorithm"""
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")
    start = time.perf_counter()

    outcomes: dict[tuple, TrialOutcome] = {}
    run_id = None
    if session_factory is not None:
        run_id, outcomes = _open_run(session_factory, spec)

    names = [a.name for a in spec.algorithms]
    pending = [
        (spec, m, n, k, params)
        for m, n in spec.cells()
        for k in range(spec.trials)
        if any((m, n, k, name) not in outcomes for name in names)
    ]
    total = len(spec.cells()) * spec.trials
    logger.info(f"📊 Grid d={spec.d}: {len(spec.cells())} cells x {spec.trials} trials x {len(names)} algorithms")
    if len(pending) < total:
        logger.info(f"💾 Resuming: {total - len(pending)} of {total} trials already stored")

    def collect(results: Iterable[list[TrialOutcome]]) -> None:
        for done, unit in enumerate(results, start=1):
            if run_id is not None:
                fresh = [o for o in unit if (o.m, o.n, o.trial, o.algorithm) not in outcomes]
                _store_outcomes(session_factory, run_id, fresh)
            for o in unit:
                outcomes.setdefault((o.m, o.n, o.trial, o.algorithm), o)
            if done % max(1, len(pending) // 10) == 0:
                logger.debug(f"📊 {done}/{len(pending)} trials finished")

    if jobs == 1 or len(pending) <= 1:
        collect(_run_unit(args) for args in pending)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            collect(ex.map(_run_unit, pending, chunksize=max(1, len(pending) // (4 * jobs))))

    grid = PhaseGrid(spec=spec, cells=_reduce(spec, outcomes), wall_time_ms=(time.perf_counter() - start) * 1e3)
    logger.info(f"✅ Grid finished in {grid.wall_time_ms / 1e3:.1f} s")
    return grid


def improvement_grid(grid: PhaseGrid, algo1: str, algo2: str) -> dict[tuple[int, int], float]:
    """Cellwise success_rate(algo1) - success_rate(algo2)"""
    algo1, algo2 = str(algo1), str(algo2)
    for name in (algo1, algo2):
        if name not in grid.algorithms:
            raise ConfigError(f"algorithm {name} is not part of the grid")
    diff = {}
    for m, n in grid.spec.cells():
        a, b = grid.cell(m, n, algo1), grid.cell(m, n, algo2)
        if a.trials != b.trials:
            raise ConfigError(f"cell (m={m}, n={n}) has unequal trial counts")
        diff[(m, n)] = (a.successes - b.successes) / a.trials
    return diff


def measurements_to_perfect(grid: PhaseGrid, algo: str, m: int) -> Optional[int]:
    """Smallest n with 100% exact recovery for (m, algo), None if never reached"""
    for n in grid.spec.n_values:
        key = (m, n, str(algo))
        if key in grid.cells and grid.cells[key].successes == grid.cells[key].trials:
            return n
    return None


def sample_reduction(grid: PhaseGrid, base: str, improved: str, m: int) -> Optional[float]:
    """1 - n_perfect(improved) / n_perfect(base); None when either never reaches 100%"""
    n_base = measurements_to_perfect(grid, base, m)
    n_improved = measurements_to_perfect(grid, improved, m)
    if n_base is None or n_improved is None:
        return None
    return 1.0 - n_improved / n_base


# --- Result files ---
def write_grid_csv(grid: PhaseGrid, path: Union[str, Path]) -> Path:
    out = Path(path)
    grid.to_frame().to_csv(out, index=False)
    logger.info(f"💾 Grid CSV written to {out}")
    return out


def read_grid_csv(path: Union[str, Path]) -> pd.DataFrame:
    try:
        df = pd.read_csv(path)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read grid CSV {path}: {exc}") from exc
    if list(df.columns) != GRID_COLUMNS:
        raise InputError(f"{path} does not have the grid CSV header {','.join(GRID_COLUMNS)}")
    return df


def manifest(grid: PhaseGrid, params: Optional[SolverParams] = None) -> dict:
    """Run manifest: the full GridSpec plus the solver decisions behind every cell"""
    params = params or SolverParams()
    spec = grid.spec
    return {
        "toolkit_version": TOOLKIT_VERSION,
        "spec_hash": spec.spec_hash(),
        "grid": spec.model_dump(mode="json"),
        "algorithms": grid.algorithms,
        "cells": len(spec.cells()),
        "wall_time_ms": grid.wall_time_ms,
        "decisions": {
            "fill_policy": FillPolicy.CORRELATION.value,
            "list_size": spec.list_size if spec.list_size is not None else "default (m/2 or n-m, clamped to [1, m])",
            "success": "s_star contained in the output support; non-converged runs count as failures",
            "admm": {"rho": params.admm_rho, "tolerance": params.tolerance, "max_iterations": params.max_iterations},
            "lasso": {
                "objective": baselines.LASSO_OBJECTIVE,
                "folds": spec.lasso_folds,
                "lambda_grid_size": params.cv_grid_size,
                "lambda_grid_decades": params.cv_grid_decades,
                "max_sweeps": params.max_iterations,
            },
            "cosamp_iterations": baselines.cosamp_iterations(spec.d),
            "residual_zero_tol": params.residual_tol,
        },
    }


def write_manifest(grid: PhaseGrid, path: Union[str, Path], params: Optional[SolverParams] = None) -> Path:
    out = Path(path)
    out.write_text(json.dumps(manifest(grid, params), indent=2) + "\n")
    logger.info(f"💾 Manifest written to {out}")
    return out


# --- Presets ---
PRESETS: dict[str, list[str]] = {
    "improve-omp": ["omp", f"lire{DEFAULT_PASSES}+omp"],
    "improve-cosamp": ["cosamp", f"lire{DEFAULT_PASSES}+cosamp"],
    "improve-bp": ["bp", f"lire{DEFAULT_PASSES}+bp"],
    "omp-vs-bp": ["bp", "lire1+omp", "lire3+omp", f"lire{DEFAULT_PASSES}+omp"],
    "noise": ["lasso", "lire1+omp"],
    "standalone": ["bp", "omp", "lire1"],
}


def grid_steps(d: int) -> tuple[int, int]:
    """(m step, n step) at about 1.5% and 3% of d"""
    return max(1, math.ceil(0.015 * d)), max(1, math.ceil(0.03 * d))


def preset(
    name: str,
    d: int = DESK_D,
    trials: int = 50,
    seed: int = 0,
    sigma2: Optional[float] = None,
) -> GridSpec:
    """Desk-scale GridSpec for a named experiment"""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name}; choose from {', '.join(PRESETS)}")
    m_step, n_step = grid_steps(d)
    m_values = list(range(2 * m_step, d // 8 + 1, m_step)) or [m_step]
    n_values = list(range(3 * n_step, (3 * d) // 4 + 1, n_step)) or [min(d, n_step)]
    if sigma2 is None:
        sigma2 = NOISE_LEVELS[1] if name == "noise" else 0.0
    return build(
        GridSpec,
        d=d,
        m_values=m_values,
        n_values=n_values,
        trials=trials,
        algorithms=PRESETS[name],
        sigma2=sigma2,
        seed=seed,
    )
