"""
Random-scan Glauber chains for the edge-triangle Gibbs measure.

One sweep is N = n(n-1)/2 single-edge heat-bath updates at uniformly chosen
edges. Each chain owns one Philox stream derived from (seed, stream) through
numpy's SeedSequence, so chains launched from one seed never overlap and a
given configuration always reproduces the same trace.
"""

import hashlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.exceptions import raise_domain_error
from src.core.settings import get_settings
from src.phase.solver import ModelParams
from src.sampler.graph import GraphState, HeatBathKernel

logger = logging.getLogger(__name__)


class InitKind(str, Enum):
    EMPTY = "empty"
    COMPLETE = "complete"
    ERDOS_RENYI = "erdos_renyi"
    FROM_DENSITY = "from_density"


class ChainInit(BaseModel):
    """Initial graph: empty, complete, G(n, p) or a random graph of edge density ~u."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: InitKind = InitKind.EMPTY
    value: Optional[float] = Field(default=None, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _value_matches_kind(self):
        needs_value = self.kind in (InitKind.ERDOS_RENYI, InitKind.FROM_DENSITY)
        if needs_value and self.value is None:
            raise ValueError(f"init kind '{self.kind.value}' needs a value in [0, 1]")
        return self

    @classmethod
    def from_density(cls, u: float) -> "ChainInit":
        return cls(kind=InitKind.FROM_DENSITY, value=u)

    def edge_probability(self, n: int) -> float:
        if self.kind == InitKind.FROM_DENSITY:
            # 2E/n^2 ~ p (n-1)/n, so scale p up to land near u
            return min(1.0, self.value * n / (n - 1))
        return self.value


class ChainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(ge=2)
    params: ModelParams
    seed: int = Field(ge=0, lt=2**64)
    stream: int = Field(default=0, ge=0, description="Spawn key for parallel chains from one seed")
    init: ChainInit = Field(default_factory=ChainInit)
    burn_in_sweeps: int = Field(default_factory=lambda: get_settings().burn_in_sweeps, ge=0)
    sweeps: int = Field(default_factory=lambda: get_settings().recorded_samples, ge=1)
    thinning: int = Field(default_factory=lambda: get_settings().thinning, ge=1)
    track_edge_marginals: bool = False

    @model_validator(mode="after")
    def _records_a_sample(self):
        if self.sweeps < self.thinning:
            raise ValueError(f"sweeps ({self.sweeps}) must be at least thinning ({self.thinning})")
        return self

    def config_hash(self) -> str:
        canonical = self.model_dump_json()
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    @property
    def recorded_samples(self) -> int:
        return self.sweeps // self.thinning


@dataclass
class ChainTrace:
    config: ChainConfig
    sweep: np.ndarray = field(repr=False)
    edge_density: np.ndarray = field(repr=False)
    triangle_density: np.ndarray = field(repr=False)
    proposals: int = 0
    flips: int = 0
    edge_marginals: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def flip_rate(self) -> float:
        return self.flips / self.proposals if self.proposals else 0.0

    @property
    def edge_count(self) -> np.ndarray:
        n = self.config.n
        return np.rint(self.edge_density * n * n / 2.0).astype(np.int64)

    def __len__(self) -> int:
        return len(self.edge_density)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "sweep": self.sweep,
            "edge_density": self.edge_density,
            "triangle_density": self.triangle_density,
        })


def make_generator(seed: int, stream: int = 0) -> np.random.Generator:
    sequence = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(sequence))


def initial_state(config: ChainConfig, rng: np.random.Generator) -> GraphState:
    init = config.init
    if init.kind == InitKind.EMPTY:
        return GraphState.empty(config.n)
    if init.kind == InitKind.COMPLETE:
        return GraphState.complete(config.n)
    return GraphState.erdos_renyi(config.n, init.edge_probability(config.n), rng)


def run_sweeps(state: GraphState, kernel: HeatBathKernel, rng: np.random.Generator,
               sweeps: int, edge_u: List[int], edge_v: List[int]) -> int:
    """Apply sweeps * N heat-bath updates in place; returns the number of flips."""
    n_edges = len(edge_u)
    rows = state.rows
    acceptance = kernel.acceptance
    flips = 0
    edges = 0
    triangles = 0
    for _ in range(sweeps):
        picks = rng.integers(0, n_edges, size=n_edges).tolist()
        draws = rng.random(n_edges).tolist()
        for e, draw in zip(picks, draws):
            u = edge_u[e]
            v = edge_v[e]
            common = (rows[u] & rows[v]).bit_count()
            present = rows[u] >> v & 1
            if draw < acceptance[common]:
                if not present:
                    rows[u] |= 1 << v
                    rows[v] |= 1 << u
                    edges += 1
                    triangles += common
                    flips += 1
            elif present:
                rows[u] &= ~(1 << v)
                rows[v] &= ~(1 << u)
                edges -= 1
                triangles -= common
                flips += 1
    state.edge_count += edges
    state.triangle_count += triangles
    return flips


def run_chain(config: ChainConfig) -> ChainTrace:
    """
    Burn in, then record densities every `thinning` sweeps. All `sweeps` run
    even when thinning does not divide them; the remainder follows the last sample.
    """
    n = config.n
    rng = make_generator(config.seed, config.stream)
    state = initial_state(config, rng)
    kernel = HeatBathKernel(n, config.params)
    iu, iv = np.triu_indices(n, k=1)
    edge_u, edge_v = iu.tolist(), iv.tolist()
    n_edges = len(edge_u)

    started = time.perf_counter()
    flips = run_sweeps(state, kernel, rng, config.burn_in_sweeps, edge_u, edge_v)

    samples = config.recorded_samples
    sweep = np.empty(samples, dtype=np.int64)
    edge_density = np.empty(samples)
    triangle_density = np.empty(samples)
    occupancy = np.zeros(n_edges) if config.track_edge_marginals else None

    for i in range(samples):
        flips += run_sweeps(state, kernel, rng, config.thinning, edge_u, edge_v)
        sweep[i] = config.burn_in_sweeps + (i + 1) * config.thinning
        edge_density[i] = state.edge_density
        triangle_density[i] = state.triangle_density
        if occupancy is not None:
            occupancy += state.to_matrix()[iu, iv]

    # sweeps past the last recorded sample still run
    tail = config.sweeps - samples * config.thinning
    if tail:
        flips += run_sweeps(state, kernel, rng, tail, edge_u, edge_v)

    proposals = (config.burn_in_sweeps + config.sweeps) * n_edges
    elapsed = time.perf_counter() - started
    logger.info(
        f"chain n={n} {config.params} seed={config.seed}/{config.stream}: "
        f"{samples} samples, flip rate {flips / max(proposals, 1):.4f}, {elapsed:.2f}s"
    )
    return ChainTrace(
        config=config,
        sweep=sweep,
        edge_density=edge_density,
        triangle_density=triangle_density,
        proposals=proposals,
        flips=flips,
        edge_marginals=None if occupancy is None else occupancy / samples,
    )


def run_chains(configs: Sequence[ChainConfig], max_workers: Optional[int] = None) -> List[ChainTrace]:
    """Run independent chains, in parallel when max_workers > 1; results keep input order."""
    max_workers = get_settings().max_workers if max_workers is None else max_workers
    if max_workers < 1:
        raise_domain_error("max_workers must be at least 1", parameter="max_workers", value=max_workers)
    if max_workers == 1 or len(configs) <= 1:
        return [run_chain(config) for config in configs]
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(run_chain, configs))


def replicate(config: ChainConfig, count: int) -> List[ChainConfig]:
    """`count` copies of config on consecutive streams of the same seed."""
    return [config.model_copy(update={"stream": config.stream + i}) for i in range(count)]
