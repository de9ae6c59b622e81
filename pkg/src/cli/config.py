"""
Run documents accepted by the command line.

A run document is a TOML or JSON key-value file (or the equivalent flags),
validated by a pydantic model before anything is computed. Validation
failures become ``ConfigurationError`` with the offending field names in
the message and in ``details["fields"]``.
"""

import json
import logging
import tomllib
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.core.exceptions import ConfigurationError, raise_config_error
from src.harness.verdicts import SamplerBudget
from src.harness.verify import Source
from src.meanfield.exact import Centering, FluctuationScale, Lattice
from src.phase.solver import RS_ALPHA_FLOOR, ModelParams
from src.sampler.chain import ChainConfig, ChainInit

logger = logging.getLogger(__name__)

Document = TypeVar("Document", bound=BaseModel)


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class MeanFieldTable(str, Enum):
    DISTRIBUTION = "distribution"
    MGF = "mgf"
    RATE = "rate"
    LAPLACE = "laplace"


class Suite(str, Enum):
    SLLN = "slln"
    CLT = "clt"
    CRITICAL = "critical"
    MIXTURE = "mixture"
    RATE = "rate"
    FREE_ENERGY = "free_energy"
    LDP = "ldp"
    ERDOS_RENYI = "erdos_renyi"
    ORACLE = "oracle"
    ALL = "all"


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    output: Optional[str] = None
    format: Optional[OutputFormat] = None


class PhaseScanDocument(_Document):
    alpha_min: float
    alpha_max: float
    alpha_steps: int = Field(default=11, ge=1)
    h_min: float
    h_max: float
    h_steps: int = Field(default=11, ge=1)
    tol: Optional[float] = Field(default=None, gt=0.0)
    curve_points: int = Field(default=20, ge=0)


class MeanFieldDocument(_Document):
    n: int = Field(ge=2)
    alpha: float = Field(gt=RS_ALPHA_FLOOR)
    h: float
    what: MeanFieldTable = MeanFieldTable.DISTRIBUTION
    lattice: Optional[Lattice] = None
    t_min: float = -2.0
    t_max: float = 2.0
    t_steps: int = Field(default=41, ge=1)
    scale: Optional[FluctuationScale] = None
    center: Centering = Centering.EXACT_MEAN
    delta: Optional[float] = Field(default=None, gt=0.0, lt=1.0)

    @property
    def params(self) -> ModelParams:
        return ModelParams(alpha=self.alpha, h=self.h)


class SampleDocument(_Document):
    n: int = Field(ge=2)
    alpha: float = Field(gt=RS_ALPHA_FLOOR)
    h: float
    seed: int = Field(ge=0, lt=2**64)
    stream: int = Field(default=0, ge=0)
    init: ChainInit = Field(default_factory=ChainInit)
    burn_in_sweeps: Optional[int] = Field(default=None, ge=0)
    sweeps: Optional[int] = Field(default=None, ge=1)
    thinning: Optional[int] = Field(default=None, ge=1)
    track_edge_marginals: bool = False

    def chain_config(self) -> ChainConfig:
        """Resolved chain configuration; unset lengths take the settings defaults."""
        overrides = {
            k: v for k, v in (
                ("burn_in_sweeps", self.burn_in_sweeps),
                ("sweeps", self.sweeps),
                ("thinning", self.thinning),
            ) if v is not None
        }
        return validate_document(ChainConfig, {
            "n": self.n,
            "params": {"alpha": self.alpha, "h": self.h},
            "seed": self.seed,
            "stream": self.stream,
            "init": self.init.model_dump(),
            "track_edge_marginals": self.track_edge_marginals,
            **overrides,
        })


class VerifyDocument(_Document):
    suite: Optional[Suite] = None
    alpha: Optional[float] = Field(default=None, gt=RS_ALPHA_FLOOR)
    h: Optional[float] = None
    n: Optional[int] = Field(default=None, ge=2)
    n_list: Optional[List[int]] = None
    sampler_n_list: Optional[List[int]] = None
    source: Source = Source.MEAN_FIELD_EXACT
    lattice: Optional[Lattice] = None
    epsilon: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    h_list: Optional[List[float]] = None
    oracle_n: int = Field(default=5, ge=2)
    budget: Optional[SamplerBudget] = None


class EnumerateDocument(_Document):
    n: int = Field(ge=2)
    alpha: float = Field(gt=RS_ALPHA_FLOOR)
    h: float
    zeros: bool = False

    @property
    def params(self) -> ModelParams:
        return ModelParams(alpha=self.alpha, h=self.h)


def _field_names(error: ValidationError) -> List[str]:
    return sorted({".".join(str(part) for part in e["loc"]) or "<root>" for e in error.errors()})


def validate_document(model: Type[Document], data: Dict[str, Any]) -> Document:
    """model.model_validate(data) with ValidationError mapped to ConfigurationError."""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        fields = _field_names(e)
        messages = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        logger.warning(f"rejected {model.__name__}: {'; '.join(messages)}")
        raise ConfigurationError(
            f"invalid configuration ({', '.join(fields)}): {'; '.join(messages)}",
            component="Configuration",
            details={"fields": fields, "document": model.__name__},
        ) from e


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Key-value document from a .toml or .json file."""
    source = Path(path)
    if not source.is_file():
        raise_config_error(f"config file not found: {source}", field="config")
    try:
        if source.suffix.lower() == ".json":
            with open(source, encoding="utf-8") as handle:
                data = json.load(handle)
        else:
            with open(source, "rb") as handle:
                data = tomllib.load(handle)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError, UnicodeDecodeError) as e:
        raise ConfigurationError(f"cannot parse {source}: {e}", component="Configuration",
                                 details={"field": "config", "path": str(source)}) from e
    if not isinstance(data, dict):
        raise_config_error(f"{source} must hold a key-value document", field="config")
    return data
