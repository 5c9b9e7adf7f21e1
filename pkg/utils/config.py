import json
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from utils.errors import ConfigError

load_dotenv()

AGENTS_DIR = Path(__file__).resolve().parent.parent / "agents"


class Config:
    LOG_LEVEL = os.getenv("CONTRACTS_LOG_LEVEL", "INFO")
    THREADS = int(os.getenv("CONTRACTS_THREADS", "1"))
    SEED = int(os.getenv("CONTRACTS_SEED", "0"))
    OUTPUT_DIR = os.getenv("CONTRACTS_OUTPUT_DIR", "results")

    # Agent packages carrying a config.json with numeric defaults
    INFORMATION_AGENT = "information_agent"
    PRINCIPAL_AGENT = "principal_agent"
    ORACLE_AGENT = "oracle_agent"


def load_agent_config(name: str, overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Read agents/<name>/config.json and apply non-None overrides on top."""
    path = AGENTS_DIR / name / "config.json"
    try:
        with open(path, "r") as f:
            settings = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"Missing agent config: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Malformed agent config {path}: {str(e)}")
    for key, value in (overrides or {}).items():
        if value is not None:
            settings[key] = value
    return settings


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _check_file(path: Optional[str]) -> Optional[str]:
    if path is not None and not Path(path).is_file():
        raise ValueError(f"file not found: {path}")
    return path


class DensitySpec(_Section):
    family: Literal["gaussian", "laplace", "logistic", "uniform", "triangular",
                    "cauchy", "truncated_exp_inverse", "tabulated"] = "gaussian"
    params: Dict[str, float] = Field(default_factory=dict)
    dimension: int = Field(1, ge=1)
    path: Optional[str] = None
    points: Optional[List[List[float]]] = None

    @field_validator("path")
    @classmethod
    def _path_exists(cls, value):
        return _check_file(value)

    @model_validator(mode="after")
    def _tabulated_source(self):
        if self.family == "tabulated" and self.path is None and self.points is None:
            raise ValueError("tabulated density needs 'path' or 'points'")
        return self


class CostSpec(_Section):
    kind: Literal["power", "affine_power", "tabulated"] = "power"
    a: float = Field(0.125, ge=0)
    p: float = Field(2.0, gt=0)
    c0: float = Field(0.0, ge=0)
    path: Optional[str] = None
    points: Optional[List[List[float]]] = None

    @field_validator("path")
    @classmethod
    def _path_exists(cls, value):
        return _check_file(value)

    @model_validator(mode="after")
    def _tabulated_source(self):
        if self.kind == "tabulated" and self.path is None and self.points is None:
            raise ValueError("tabulated cost needs 'path' or 'points'")
        return self


class OutputModelSpec(_Section):
    family: Literal["exponential_mean_e", "lognormal_scale_e", "tabulated"] = "exponential_mean_e"
    sigma: float = Field(1.0, gt=0)
    e_max: float = Field(5.0, gt=0)
    y_grid: Optional[List[float]] = None
    e_grid: Optional[List[float]] = None
    table: Optional[List[List[float]]] = None


class VariantSpec(_Section):
    kind: Literal["base", "gaussian_prior", "unobserved", "classic_pa"] = "base"
    lambda0: Optional[float] = Field(None, gt=0)
    lambda_p: Optional[float] = Field(None, gt=0)
    prior: Optional[Literal["uniform", "gaussian"]] = None
    output_model: Optional[OutputModelSpec] = None

    @model_validator(mode="after")
    def _one_variant(self):
        if self.kind == "gaussian_prior" and self.lambda0 is None:
            raise ValueError("gaussian_prior variant requires lambda0")
        if self.kind == "unobserved":
            if self.lambda_p is None or self.prior is None:
                raise ValueError("unobserved variant requires prior and lambda_p")
            if (self.prior == "gaussian") != (self.lambda0 is not None):
                raise ValueError("lambda0 is required iff prior is gaussian")
        if self.kind == "classic_pa" and self.output_model is None:
            self.output_model = OutputModelSpec()
        return self


class NumericSettings(_Section):
    """Numeric overrides; None falls back to the agent's config.json."""
    lambda_min: Optional[float] = Field(None, gt=0)
    lambda_max: Optional[float] = Field(None, gt=0)
    lambda_grid_points: Optional[int] = Field(None, ge=16)
    payoff_tol: Optional[float] = Field(None, gt=0)
    d_max: Optional[float] = Field(None, gt=0)
    d_scan_points: Optional[int] = Field(None, ge=8)
    boundary_tol: Optional[float] = Field(None, gt=0)
    show_progress: bool = False


class OutputSettings(_Section):
    dir: str = Config.OUTPUT_DIR
    sweep_csv: bool = True


class VerifySettings(_Section):
    grid_cells: int = Field(8, ge=1)
    value_levels: int = Field(2, ge=2)
    x_max: Optional[float] = Field(None, gt=0)
    random_transfers: int = Field(0, ge=0)
    random_cells: int = Field(64, ge=1)


class RefuteSettings(_Section):
    lambda_ref: float = Field(1.0, gt=0)
    d_ref: float = Field(0.5, gt=0)
    kappa: float = Field(0.05, gt=0)
    x1: Optional[float] = Field(None, gt=0)
    x2: Optional[float] = Field(None, gt=0)
    grid_cells: int = Field(8, ge=1)
    value_levels: int = Field(2, ge=2)


class SweepSettings(_Section):
    lambda_range: List[float] = Field(default_factory=lambda: [0.05, 5.0])
    d_range: List[float] = Field(default_factory=lambda: [0.0, 3.0])
    lambda_points: int = Field(60, ge=2)
    d_points: int = Field(60, ge=2)

    @model_validator(mode="after")
    def _ranges(self):
        if len(self.lambda_range) != 2 or not 0 < self.lambda_range[0] < self.lambda_range[1]:
            raise ValueError("lambda_range must be [lo, hi] with 0 < lo < hi")
        if len(self.d_range) != 2 or not 0 <= self.d_range[0] < self.d_range[1]:
            raise ValueError("d_range must be [lo, hi] with 0 <= lo < hi")
        return self


class CompareSettings(_Section):
    mode: Literal["cost_scaling", "noise_scaling", "pair"] = "cost_scaling"
    factors: List[float] = Field(default_factory=lambda: [1.5, 2.0, 4.0])
    cost2: Optional[CostSpec] = None


class RunConfig(_Section):
    density: DensitySpec = Field(default_factory=DensitySpec)
    cost: CostSpec = Field(default_factory=CostSpec)
    variant: VariantSpec = Field(default_factory=VariantSpec)
    numerics: NumericSettings = Field(default_factory=NumericSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)
    seed: int = Config.SEED
    threads: int = Field(Config.THREADS, ge=1)
    verify: VerifySettings = Field(default_factory=VerifySettings)
    refute: RefuteSettings = Field(default_factory=RefuteSettings)
    sweep: SweepSettings = Field(default_factory=SweepSettings)
    compare: CompareSettings = Field(default_factory=CompareSettings)

    @model_validator(mode="after")
    def _window(self):
        lo, hi = self.numerics.lambda_min, self.numerics.lambda_max
        if lo is not None and hi is not None and lo >= hi:
            raise ValueError("lambda_min must be below lambda_max")
        return self


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Build a RunConfig from an optional JSON file plus top-level section overrides."""
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"Config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {str(e)}")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(str(e))
