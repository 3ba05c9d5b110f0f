"""
Toolkit schemas
Pydantic models for every configuration record and every serialised report
"""

import hashlib
from enum import Enum
from typing import Any, Literal, Optional, TypeVar

from pydantic import (
    BaseModel,
    Field,
    ValidationError,
    computed_field,
    field_validator,
    model_validator,
)

from exceptions import ConfigError

SEED_MAX = 2**64 - 1  # seeds are unsigned 64-bit integers

ModelT = TypeVar("ModelT", bound=BaseModel)


def build(model_cls: type[ModelT], **fields: Any) -> ModelT:
    """Validate fields into model_cls, reporting failures as ConfigError"""
    try:
        return model_cls(**fields)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or model_cls.__name__}: {err['msg']}"
            for err in exc.errors()
        )
        raise ConfigError(f"Invalid {model_cls.__name__}: {problems}") from exc


# --- Enum schemas ---
class DesignKind(str, Enum):
    """Measurement-matrix ensembles"""
    GAUSSIAN = "gaussian"        # i.i.d. N(0, 1/n) entries
    ORTHONORMAL = "orthonormal"  # random orthogonal matrix, square only


class FillPolicy(str, Enum):
    """How an initial support shorter than m is padded"""
    CORRELATION = "correlation"    # repeatedly add the feature most correlated with the residual
    LOWEST_INDEX = "lowest_index"  # add the smallest unused indices


class RipMethod(str, Enum):
    EXACT_BRUTEFORCE = "exact_bruteforce"
    MONTE_CARLO = "monte_carlo"


class BaseAlgorithm(str, Enum):
    """Support estimators a LiRE pass can be composed with"""
    OMP = "omp"
    COSAMP = "cosamp"
    BP = "bp"
    LASSO = "lasso"
    RANDOM = "random"  # uniform random support, i.e. standalone LiRE


# --- Instance schemas ---
class EnsembleConfig(BaseModel):
    """Problem-instance generator settings"""
    d: int = Field(ge=1)  # number of features
    n: int = Field(ge=1)  # number of measurements
    m: int = Field(ge=1)  # sparsity of the planted signal
    sigma2: float = Field(default=0.0, ge=0.0)  # noise variance
    normalize_columns: bool = False
    seed: int = Field(default=0, ge=0, le=SEED_MAX)
    design: DesignKind = DesignKind.GAUSSIAN

    @model_validator(mode="after")
    def check_dimensions(self):
        if not self.m <= self.n <= self.d:
            raise ValueError(f"need 1 <= m <= n <= d, got m={self.m}, n={self.n}, d={self.d}")
        if self.design == DesignKind.ORTHONORMAL and self.n != self.d:
            raise ValueError("orthonormal design requires n == d")
        return self


class InstanceMeta(BaseModel):
    """meta.json of an instance directory; s_star is 1-based"""
    d: int
    n: int
    m: int
    sigma2: float
    seed: int
    normalize_columns: bool
    s_star: list[int]
    design: DesignKind = DesignKind.GAUSSIAN


# --- LiRE schemas ---
class LireConfig(BaseModel):
    """Inputs of one LiRE run besides the data"""
    m: int = Field(ge=1)  # target support size
    list_size: Optional[int] = Field(default=None, ge=1)  # None selects the default rule
    passes: int = Field(default=1, ge=1)
    fill_policy: FillPolicy = FillPolicy.CORRELATION
    residual_zero_tol: float = Field(default=1e-9, gt=0.0)

    @model_validator(mode="after")
    def check_list_size(self):
        if self.list_size is not None and self.list_size > self.m:
            raise ValueError(f"list size {self.list_size} exceeds m={self.m}")
        return self


class LireStep(BaseModel):
    """One slot visit of a LiRE pass (0-based feature indices)"""
    step: int               # slot position, 1..m
    removed: int            # feature occupying the slot before the visit
    candidates: list[int]   # the correlation list
    chosen: int             # feature written back into the slot
    residual_norm: float    # norm of the leave-one-out residual


class LireTrace(BaseModel):
    steps: list[LireStep] = Field(default_factory=list)
    exited_early: bool = False


# --- Baseline schemas ---
class SolverParams(BaseModel):
    """Iterative solver knobs shared by the baselines"""
    max_iterations: int = Field(default=5000, ge=1)  # ADMM iterations / coordinate-descent sweeps
    tolerance: float = Field(default=1e-6, gt=0.0)   # ADMM residuals / coordinate change
    admm_rho: float = Field(default=1.0, gt=0.0)
    lasso_lambda: Optional[float] = Field(default=None, ge=0.0)  # None selects lambda by cross-validation
    residual_tol: float = Field(default=1e-9, gt=0.0)  # relative residual treated as zero by greedy solvers
    cv_grid_size: int = Field(default=50, ge=2)
    cv_grid_decades: float = Field(default=3.0, gt=0.0)


class RecoveryReport(BaseModel):
    """Serialised recovery result; support is 1-based"""
    algorithm: str
    support: list[int]
    coefficients: list[float]
    iterations: int
    final_residual_norm: float
    converged: bool = True
    success: Optional[bool] = None
    metadata: dict[str, Any] = Field(default_factory=dict)


# --- Theory schemas ---
class RipReport(BaseModel):
    """Restricted isometry constant of one order (0-based extremal support)"""
    order: int
    delta: float = Field(ge=0.0)
    extremal_support: list[int]
    method: RipMethod
    subsets_examined: int = 0

    @computed_field
    @property
    def flagged(self) -> bool:
        # delta >= 1 means some t columns are linearly dependent
        return self.delta >= 1.0


class TheoremConditions(BaseModel):
    list_size_rule: bool    # ell <= max{e, 1}
    error_bound: bool       # sqrt(e + 1) below the delta_t bound
    list_lower_bound: bool  # sqrt(ell) above the eta_t bound
    list_upper_bound: bool  # delta_{ell + m - 1} < 0.5


class TheoremCheck(BaseModel):
    """Evaluation of the four sufficient conditions for one pass of LiRE"""
    m: int
    e: int
    ell: int
    t: int
    delta_t: float
    eta_t: Optional[float]
    delta_lm1: float
    error_bound_rhs: Optional[float] = None
    list_lower_bound_rhs: Optional[float] = None
    conditions: TheoremConditions
    satisfied: bool


# --- Benchmark schemas ---
class AlgorithmSpec(BaseModel):
    """A base estimator, optionally followed by LiRE passes"""
    base: BaseAlgorithm
    lire_passes: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def check_random(self):
        if self.base == BaseAlgorithm.RANDOM and self.lire_passes == 0:
            raise ValueError("a random support is only meaningful with LiRE passes")
        return self

    @property
    def name(self) -> str:
        if self.lire_passes == 0:
            return self.base.value
        return f"lire{self.lire_passes}+{self.base.value}"

    @classmethod
    def parse(cls, text: str) -> "AlgorithmSpec":
        """Parse 'omp', 'lire5+omp', 'lire' (= lire1+random) or 'lire3' (= lire3+random)"""
        label = text.strip().lower()
        head, plus, tail = label.partition("+")
        if not plus:
            if head.startswith("lire"):
                passes = head[4:] or "1"
                if not passes.isdigit():
                    raise ValueError(f"unknown algorithm: {text}")
                return cls(base=BaseAlgorithm.RANDOM, lire_passes=int(passes))
            return cls(base=BaseAlgorithm(head))
        passes = head[4:] if head.startswith("lire") else ""
        if not passes.isdigit():
            raise ValueError(f"unknown algorithm: {text}")
        return cls(base=BaseAlgorithm(tail), lire_passes=int(passes))

    def __str__(self) -> str:
        return self.name


class GridSpec(BaseModel):
    """Phase-diagram experiment over (m, n) cells"""
    d: int = Field(ge=1)
    m_values: list[int]
    n_values: list[int]
    trials: int = Field(default=50, ge=1)
    algorithms: list[AlgorithmSpec]
    sigma2: float = Field(default=0.0, ge=0.0)
    seed: int = Field(default=0, ge=0, le=SEED_MAX)
    normalize_columns: bool = False
    design: DesignKind = DesignKind.GAUSSIAN
    list_size: Optional[int] = Field(default=None, ge=1)
    lasso_folds: int = Field(default=10, ge=2)

    @field_validator("algorithms", mode="before")
    @classmethod
    def parse_algorithms(cls, v):
        return [AlgorithmSpec.parse(a) if isinstance(a, str) else a for a in v]

    @field_validator("m_values", "n_values")
    @classmethod
    def sort_values(cls, v):
        if not v:
            raise ValueError("at least one value required")
        if min(v) < 1:
            raise ValueError("values must be >= 1")
        return sorted(set(v))

    @model_validator(mode="after")
    def check_grid(self):
        if not self.algorithms:
            raise ValueError("at least one algorithm required")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate algorithms: {names}")
        if max(self.n_values) > self.d:
            raise ValueError(f"n values must not exceed d={self.d}")
        if not self.cells():
            raise ValueError("no (m, n) pair with m <= n")
        if self.design == DesignKind.ORTHONORMAL and any(n != self.d for n in self.n_values):
            raise ValueError("orthonormal design requires every n == d")
        if any(a.base == BaseAlgorithm.LASSO for a in self.algorithms) and min(self.n_values) < self.lasso_folds:
            raise ValueError(f"lasso cross-validation needs n >= {self.lasso_folds} in every cell")
        return self

    def cells(self) -> list[tuple[int, int]]:
        """(m, n) pairs that form the grid; pairs with m > n are not run"""
        return [(m, n) for m in self.m_values for n in self.n_values if m <= n]

    def spec_hash(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()


class CellStats(BaseModel):
    """Aggregated outcome of one (m, n, algorithm) cell"""
    m: int
    n: int
    algorithm: str
    trials: int = Field(ge=1)
    successes: int = Field(ge=0)
    mean_runtime_ms: float = 0.0
    nonconverged: int = 0  # trials whose solver did not converge (counted as failures)

    @model_validator(mode="after")
    def check_counts(self):
        if self.successes > self.trials:
            raise ValueError("successes exceed trials")
        return self

    @computed_field
    @property
    def success_rate(self) -> float:
        return self.successes / self.trials


# --- CLI schemas ---
class CliConfig(BaseModel):
    """Shared flags of one command-line invocation"""
    subcommand: Literal["gen", "recover", "correct", "phase", "rip", "check"]
    seed: Optional[int] = Field(default=None, ge=0, le=SEED_MAX)
    output: Optional[str] = None
    format: Optional[Literal["json", "csv"]] = None
