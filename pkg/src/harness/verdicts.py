"""
Verdict records produced by the verification suites.

A verdict carries what was predicted, what was estimated, the tolerance
policy that decided the pass flag, and every input needed to re-run it.
Verdicts flagged ``evidence_only`` report numerical evidence for a claim
that is not proven for the model at hand; they never fail a run.
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.settings import get_settings
from src.phase.solver import ModelParams
from src.sampler.chain import ChainConfig, ChainInit, replicate


class SamplerBudget(BaseModel):
    """Chain lengths, seed and replication used by the sampler-backed checks."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(ge=0, lt=2**64)
    burn_in_sweeps: int = Field(default_factory=lambda: get_settings().burn_in_sweeps, ge=0)
    sweeps: int = Field(default_factory=lambda: get_settings().recorded_samples, ge=1)
    thinning: int = Field(default_factory=lambda: get_settings().thinning, ge=1)
    chains: int = Field(default=1, ge=1, description="Independent chains per size and start")
    max_workers: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _records_a_sample(self):
        if self.sweeps < self.thinning:
            raise ValueError(f"sweeps ({self.sweeps}) must be at least thinning ({self.thinning})")
        return self

    def chain_configs(
        self,
        n: int,
        params: ModelParams,
        init: ChainInit,
        first_stream: int = 0,
        track_edge_marginals: bool = False,
    ) -> List[ChainConfig]:
        base = ChainConfig(
            n=n,
            params=params,
            seed=self.seed,
            stream=first_stream,
            init=init,
            burn_in_sweeps=self.burn_in_sweeps,
            sweeps=self.sweeps,
            thinning=self.thinning,
            track_edge_marginals=track_edge_marginals,
        )
        return replicate(base, self.chains)


class TheoremVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    claim_id: str = Field(description="Stable slug, e.g. 'edge-density-clt'")
    theorem: str = Field(description="Reference id of the statement checked, e.g. 'Thm3.7'")
    title: str
    evidence_only: bool = False
    predicted: Dict[str, Any] = Field(default_factory=dict)
    estimated: Dict[str, Any] = Field(default_factory=dict)
    uncertainty: Dict[str, Any] = Field(default_factory=dict)
    tolerance_policy: str
    passed: bool
    rows: List[Dict[str, Any]] = Field(default_factory=list, description="Per-size table")
    metadata: Dict[str, Any] = Field(default_factory=dict)
    schema_version: str = Field(default_factory=lambda: get_settings().schema_version)

    @property
    def is_hard_failure(self) -> bool:
        return not self.passed and not self.evidence_only

    @property
    def status(self) -> str:
        if self.evidence_only:
            return "evidence" if self.passed else "evidence (inconsistent)"
        return "pass" if self.passed else "FAIL"

    def summary_line(self) -> str:
        estimated = ", ".join(f"{k}={_fmt(v)}" for k, v in self.estimated.items())
        predicted = ", ".join(f"{k}={_fmt(v)}" for k, v in self.predicted.items())
        return f"{self.claim_id:<32} {self.theorem:<10} {self.status:<24} predicted[{predicted}] estimated[{estimated}]"


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def any_hard_failure(verdicts: List[TheoremVerdict]) -> bool:
    return any(v.is_hard_failure for v in verdicts)


def verdict_table(verdicts: List[TheoremVerdict]) -> str:
    """Human-readable report, one line per verdict."""
    header = f"{'claim':<32} {'theorem':<10} {'status':<24} values"
    return "\n".join([header, "-" * len(header)] + [v.summary_line() for v in verdicts])
