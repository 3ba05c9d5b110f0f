"""
Problem-instance generation
Gaussian ensembles, planted sparse signals, noisy measurements and the
instance directory format (phi.csv, y.csv, xstar.csv, meta.json).

Randomness contract: numpy's PCG64 generator seeded through a SeedSequence.
The seed is split into four independent child streams (matrix, support,
signal, noise), so changing sigma2 never perturbs the matrix or the signal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from numpy.typing import NDArray

import linalg
from exceptions import ConfigError, InputError
from linalg import DesignMatrix, Support
from schemas import DesignKind, EnsembleConfig, InstanceMeta, build

logger = logging.getLogger("lire.ensemble")

SeedLike = Union[int, np.random.Generator]

# child stream order of the SeedSequence spawn
_MATRIX, _SUPPORT, _SIGNAL, _NOISE = range(4)


@dataclass(frozen=True, eq=False)
class SparseInstance:
    """Planted m-sparse signal, its design matrix and the measurements"""

    phi: DesignMatrix
    x_star: NDArray[np.float64]
    s_star: Support
    y: NDArray[np.float64]
    sigma2: float
    seed: int
    normalize_columns: bool = False
    design: DesignKind = DesignKind.GAUSSIAN

    @property
    def d(self) -> int:
        return self.phi.cols

    @property
    def n(self) -> int:
        return self.phi.rows

    @property
    def m(self) -> int:
        return int(self.s_star.size)

    def meta(self) -> InstanceMeta:
        return InstanceMeta(
            d=self.d,
            n=self.n,
            m=self.m,
            sigma2=self.sigma2,
            seed=self.seed,
            normalize_columns=self.normalize_columns,
            s_star=[int(i) + 1 for i in self.s_star],
            design=self.design,
        )


def mix_seed(base: int, *keys: int) -> int:
    """Derive a 64-bit seed from a base seed and integer keys (trial index, cell, ...)"""
    seq = np.random.SeedSequence([int(base), *(int(k) for k in keys)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _streams(seed: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(int(seed)).spawn(4)
    return [np.random.default_rng(child) for child in children]


def _rng(seed: SeedLike) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(int(seed))


def random_support(d: int, m: int, seed: SeedLike) -> Support:
    """Uniformly random size-m subset of the d features, ascending"""
    if m < 0 or m > d:
        raise ConfigError(f"cannot draw {m} distinct features out of {d}")
    return np.sort(_rng(seed).choice(d, size=m, replace=False)).astype(np.intp)


def gaussian_design(n: int, d: int, rng: np.random.Generator) -> NDArray[np.float64]:
    return rng.normal(0.0, 1.0 / np.sqrt(n), size=(n, d))


def orthonormal_design(n: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Haar-random orthogonal n x n matrix (QR of a Gaussian with sign fix)"""
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    return Q * np.sign(np.diag(R))


def generate_instance(cfg: EnsembleConfig) -> SparseInstance:
    """Draw (phi, x*, y) for one trial; deterministic given cfg.seed"""
    if not isinstance(cfg, EnsembleConfig):
        cfg = build(EnsembleConfig, **dict(cfg))
    matrix_rng, support_rng, signal_rng, noise_rng = _streams(cfg.seed)

    if cfg.design == DesignKind.ORTHONORMAL:
        entries = orthonormal_design(cfg.n, matrix_rng)
    else:
        entries = gaussian_design(cfg.n, cfg.d, matrix_rng)
    phi = DesignMatrix(entries)
    if cfg.normalize_columns:
        phi = phi.normalized()

    s_star = random_support(cfg.d, cfg.m, support_rng)
    values = signal_rng.standard_normal(cfg.m)
    while not np.all(values):  # a planted coefficient must be nonzero
        zero = values == 0
        values[zero] = signal_rng.standard_normal(int(zero.sum()))
    x_star = np.zeros(cfg.d)
    x_star[s_star] = values

    y = phi.entries @ x_star
    if cfg.sigma2 > 0:
        y = y + noise_rng.normal(0.0, np.sqrt(cfg.sigma2), size=cfg.n)

    logger.debug(f"🎲 instance d={cfg.d} n={cfg.n} m={cfg.m} sigma2={cfg.sigma2} seed={cfg.seed}")
    return SparseInstance(
        phi=phi,
        x_star=x_star,
        s_star=s_star,
        y=y,
        sigma2=cfg.sigma2,
        seed=cfg.seed,
        normalize_columns=cfg.normalize_columns,
        design=cfg.design,
    )


# --- Instance directories ---
def save_instance(instance: SparseInstance, directory: Union[str, Path]) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    linalg.write_matrix_csv(out / "phi.csv", instance.phi)
    linalg.write_vector(out / "y.csv", instance.y)
    linalg.write_vector(out / "xstar.csv", instance.x_star)
    (out / "meta.json").write_text(instance.meta().model_dump_json(indent=2) + "\n")
    logger.info(f"💾 Instance written to {out}")
    return out


def load_instance(directory: Union[str, Path]) -> SparseInstance:
    src = Path(directory)
    meta_path = src / "meta.json"
    if not meta_path.is_file():
        raise InputError(f"no meta.json in instance directory {src}")
    try:
        meta = InstanceMeta.model_validate_json(meta_path.read_text())
    except ValueError as exc:
        raise InputError(f"malformed {meta_path}: {exc}") from exc

    phi = linalg.read_matrix_csv(src / "phi.csv")
    if phi.rows != meta.n or phi.cols != meta.d:
        raise InputError(f"phi.csv is {phi.rows}x{phi.cols}, meta.json says {meta.n}x{meta.d}")
    y = linalg.as_measurements(linalg.read_vector(src / "y.csv"), meta.n)
    x_path = src / "xstar.csv"
    x_star = linalg.read_vector(x_path) if x_path.is_file() else np.zeros(meta.d)
    s_star = linalg.support_from([i - 1 for i in meta.s_star], meta.d)
    return SparseInstance(
        phi=phi,
        x_star=x_star,
        s_star=s_star,
        y=y,
        sigma2=meta.sigma2,
        seed=meta.seed,
        normalize_columns=meta.normalize_columns,
        design=meta.design,
    )
