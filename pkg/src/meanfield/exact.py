"""
Exact finite-n sums for the mean-field edge-triangle model.

The mean-field model replaces the triangle count by a cubic function of the
edge count, so its law lives on the edge count k = 0..N, N = n(n-1)/2, with

    log_weight(k) = ln C(N, k) + 2L (alpha/6 x_k^3 + h/2 x_k),   x_k = k / L.

The site scale L fixes the lattice (see ``Lattice``). Everything is kept in
natural-log space and aggregated with log-sum-exp, since 2L f overflows
double precision for n above roughly 60.
"""

import logging
import math
import numbers
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict
from scipy.special import expit, gammaln, logsumexp

from src.core.exceptions import (
    EmptyWindowError,
    SizeError,
    raise_domain_error,
    raise_regime_error,
)
from src.core.settings import get_settings
from src.phase.solver import (
    ModelParams,
    PhasePortrait,
    Regime,
    classify_phase,
    objective,
    rate_function,
)

logger = logging.getLogger(__name__)

CRITICAL_DELTA_LIMIT = 3.0 / 8.0
MIN_LAPLACE_N = 50


class Lattice(str, Enum):
    """
    GAMMA: x_k = 2k/n^2 with energy scale n^2 (the lattice of attainable
    edge densities 2E/n^2). EDGE: x_k = k/N with energy scale n(n-1), so
    energy and entropy share the same number of sites.
    """

    GAMMA = "gamma"
    EDGE = "edge"


class FluctuationScale(str, Enum):
    CLT = "clt"
    CRITICAL = "critical"


class Centering(str, Enum):
    EXACT_MEAN = "exact_mean"
    MAXIMIZER = "maximizer"


def edge_pairs(n: int) -> int:
    return n * (n - 1) // 2


def site_scale(n: int, lattice: Lattice) -> float:
    """L such that x_k = k/L and the energy is 2L times the cubic."""
    return n * n / 2.0 if lattice == Lattice.GAMMA else float(edge_pairs(n))


def _require_size(n: int) -> None:
    if not isinstance(n, numbers.Integral) or n < 2:
        raise_domain_error("graph size must be an integer >= 2", parameter="n", value=n)
    ceiling = get_settings().exact_n_ceiling
    if n > ceiling:
        raise SizeError(
            f"exact mean-field sums are capped at n={ceiling}",
            component="MeanField",
            details={"n": n, "ceiling": ceiling},
        )


@dataclass(frozen=True)
class EdgeDensityGrid:
    n: int
    lattice: Lattice
    values: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, n: int, lattice: Lattice = Lattice.GAMMA) -> "EdgeDensityGrid":
        _require_size(n)
        counts = np.arange(edge_pairs(n) + 1, dtype=float)
        return cls(n=n, lattice=lattice, values=counts / site_scale(n, lattice))

    @property
    def edge_pairs(self) -> int:
        return edge_pairs(self.n)

    @property
    def site_scale(self) -> float:
        return site_scale(self.n, self.lattice)

    @property
    def counts(self) -> np.ndarray:
        return np.arange(self.edge_pairs + 1)

    def __len__(self) -> int:
        return len(self.values)


def log_binomial(N: int, k: int) -> float:
    """ln C(N, k) via log-gamma."""
    if not (isinstance(N, numbers.Integral) and isinstance(k, numbers.Integral)) or not 0 <= k <= N:
        raise_domain_error("log_binomial needs integers 0 <= k <= N", parameter="k", value=(N, k))
    return float(gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1))


def _log_binomial_row(N: int) -> np.ndarray:
    k = np.arange(N + 1, dtype=float)
    return gammaln(N + 1.0) - gammaln(k + 1.0) - gammaln(N - k + 1.0)


@dataclass(frozen=True)
class ExactDistribution:
    grid: EdgeDensityGrid
    params: ModelParams
    log_weights: np.ndarray = field(repr=False)
    log_partition: float
    probabilities: np.ndarray = field(repr=False)

    def expectation(self, values: np.ndarray) -> float:
        return float(np.dot(self.probabilities, values))

    def mean(self) -> float:
        return self.expectation(self.grid.values)

    def variance(self) -> float:
        centred = self.grid.values - self.mean()
        return self.expectation(centred * centred)

    def log_expectation_exp(self, exponents: np.ndarray) -> float:
        """ln E exp(exponents), computed with log-sum-exp."""
        support = np.isfinite(self.log_weights)
        log_p = self.log_weights[support] - self.log_partition
        return float(logsumexp(log_p + exponents[support]))

    def mass(self, mask: np.ndarray) -> float:
        return float(self.probabilities[mask].sum())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "k": self.grid.counts,
            "m": self.grid.values,
            "log_weight": self.log_weights,
            "probability": self.probabilities,
        })


def exact_distribution(
    n: int, params: ModelParams, lattice: Lattice = Lattice.GAMMA
) -> ExactDistribution:
    """Law of the edge density under the mean-field model at size n."""
    grid = EdgeDensityGrid.build(n, lattice)
    x = grid.values
    energy = 2.0 * grid.site_scale * (params.alpha / 6.0 * x**3 + params.h / 2.0 * x)
    log_weights = _log_binomial_row(grid.edge_pairs) + energy
    log_partition = float(logsumexp(log_weights))
    probabilities = np.exp(log_weights - log_partition)
    if n >= 1000:
        logger.info(f"exact mean-field law: n={n}, {lattice.value} lattice, {params}, "
                    f"log Z = {log_partition:.6f}")
    return ExactDistribution(
        grid=grid,
        params=params,
        log_weights=log_weights,
        log_partition=log_partition,
        probabilities=probabilities,
    )


def mean_edge_density(n: int, params: ModelParams, lattice: Lattice = Lattice.GAMMA) -> float:
    return exact_distribution(n, params, lattice).mean()


def finite_size_free_energy(n: int, params: ModelParams, lattice: Lattice = Lattice.GAMMA) -> float:
    """ln Z / n^2, which converges to the free energy."""
    return exact_distribution(n, params, lattice).log_partition / (n * n)


# ---------------------------------------------------------------------------
# Conditioning windows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionalWindow:
    """Grid points with |x - center| <= radius; radius = n^-delta when delta is set."""

    n: int
    lattice: Lattice
    center: float
    radius: float
    indices: np.ndarray = field(repr=False)
    delta: Optional[float] = None

    @classmethod
    def around(
        cls,
        grid: EdgeDensityGrid,
        center: float,
        delta: Optional[float] = None,
        critical: bool = False,
    ) -> "ConditionalWindow":
        delta = get_settings().window_delta if delta is None else delta
        if not 0.0 < delta < 1.0:
            raise_domain_error("window exponent must lie in (0, 1)", parameter="delta", value=delta)
        if critical and not delta < CRITICAL_DELTA_LIMIT:
            raise_domain_error("window exponent must lie in (0, 3/8) at the critical point",
                               parameter="delta", value=delta)
        radius = grid.n ** (-delta)
        window = cls.with_radius(grid, center, radius)
        return cls(n=window.n, lattice=window.lattice, center=center, radius=radius,
                   indices=window.indices, delta=delta)

    @classmethod
    def with_radius(cls, grid: EdgeDensityGrid, center: float, radius: float) -> "ConditionalWindow":
        if radius <= 0:
            raise_domain_error("window radius must be positive", parameter="radius", value=radius)
        indices = np.flatnonzero(np.abs(grid.values - center) <= radius)
        return cls(n=grid.n, lattice=grid.lattice, center=center, radius=radius, indices=indices)

    @classmethod
    def full(cls, grid: EdgeDensityGrid) -> "ConditionalWindow":
        return cls(n=grid.n, lattice=grid.lattice, center=float(grid.values.mean()),
                   radius=math.inf, indices=np.arange(len(grid)))

    def mask(self, size: int) -> np.ndarray:
        selected = np.zeros(size, dtype=bool)
        selected[self.indices] = True
        return selected


def _check_window(dist: ExactDistribution, window: ConditionalWindow) -> None:
    if window.n != dist.grid.n or window.lattice != dist.grid.lattice:
        raise_domain_error(
            f"window built for n={window.n} ({window.lattice.value}) applied to "
            f"n={dist.grid.n} ({dist.grid.lattice.value})",
            parameter="window",
        )


def conditional_distribution(dist: ExactDistribution, window: ConditionalWindow) -> ExactDistribution:
    """The law restricted to the window and renormalised; zero outside."""
    _check_window(dist, window)
    inside = window.mask(len(dist.grid))
    log_partition = float(logsumexp(dist.log_weights[inside])) if np.any(inside) else -math.inf
    if not np.isfinite(log_partition):
        raise EmptyWindowError(
            f"window around {window.center:.6f} (radius {window.radius:.3e}) carries no mass",
            component="MeanField",
            details={"center": window.center, "radius": window.radius, "n": window.n},
        )
    log_weights = np.where(inside, dist.log_weights, -np.inf)
    probabilities = np.where(inside, np.exp(log_weights - log_partition), 0.0)
    return ExactDistribution(
        grid=dist.grid,
        params=dist.params,
        log_weights=log_weights,
        log_partition=log_partition,
        probabilities=probabilities,
    )


# ---------------------------------------------------------------------------
# Scaled fluctuations
# ---------------------------------------------------------------------------

def fluctuation_factor(grid: EdgeDensityGrid, exponent: FluctuationScale) -> float:
    """sqrt(L) for the CLT scaling, (2L)^(1/4) for the critical one."""
    if exponent == FluctuationScale.CLT:
        return math.sqrt(grid.site_scale)
    return (2.0 * grid.site_scale) ** 0.25


def deviation_factor(grid: EdgeDensityGrid, critical: bool) -> float:
    """Scale of |x - u*|: sqrt(2L) off criticality, (2L)^(1/4) at the critical point."""
    scale = 2.0 * grid.site_scale
    return scale**0.25 if critical else math.sqrt(scale)


def _center_value(dist: ExactDistribution, center: Centering, which: int) -> float:
    if center == Centering.EXACT_MEAN:
        return dist.mean()
    return classify_phase(dist.params).maximizer(which).u


def scaled_fluctuation_mgf(
    n: int,
    params: ModelParams,
    t: float,
    exponent: FluctuationScale = FluctuationScale.CLT,
    center: Centering = Centering.EXACT_MEAN,
    lattice: Lattice = Lattice.EDGE,
    which: int = 0,
) -> float:
    """E exp(t * factor * (x - center)) under the exact law."""
    if t == 0:
        return 1.0
    dist = exact_distribution(n, params, lattice)
    scaled = fluctuation_factor(dist.grid, exponent) * (dist.grid.values - _center_value(dist, center, which))
    return math.exp(dist.log_expectation_exp(t * scaled))


def scaled_fluctuation_mgf_curve(
    n: int,
    params: ModelParams,
    t_values,
    exponent: FluctuationScale = FluctuationScale.CLT,
    center: Centering = Centering.EXACT_MEAN,
    lattice: Lattice = Lattice.EDGE,
    which: int = 0,
) -> np.ndarray:
    """The MGF over a grid of t, sharing one exact distribution."""
    dist = exact_distribution(n, params, lattice)
    scaled = fluctuation_factor(dist.grid, exponent) * (dist.grid.values - _center_value(dist, center, which))
    return np.array([
        1.0 if t == 0 else math.exp(dist.log_expectation_exp(t * scaled)) for t in t_values
    ])


def abs_deviation_scaled(
    n: int,
    params: ModelParams,
    window: Optional[ConditionalWindow] = None,
    lattice: Lattice = Lattice.EDGE,
) -> float:
    """
    sqrt(2L) E|x - u*| (or (2L)^(1/4) E|x - u*| at the critical point).
    With a window the expectation is conditional and centred at the window
    center; that form is only meaningful on the critical curve.
    """
    portrait = classify_phase(params)
    dist = exact_distribution(n, params, lattice)
    if window is None:
        if portrait.regime not in (Regime.UNIQUENESS, Regime.CRITICAL_POINT):
            raise_regime_error(
                "unconditional deviation needs a unique maximizer; pass a window on the curve",
                regime=portrait.regime.value,
                operation="abs_deviation_scaled",
            )
        critical = portrait.regime == Regime.CRITICAL_POINT
        center = portrait.maximizers[0].u
    else:
        if portrait.regime != Regime.ON_CRITICAL_CURVE:
            raise_regime_error(
                "conditional deviation is defined for on-curve parameters",
                regime=portrait.regime.value,
                operation="abs_deviation_scaled",
            )
        dist = conditional_distribution(dist, window)
        critical = False
        center = window.center
    factor = deviation_factor(dist.grid, critical)
    return factor * dist.expectation(np.abs(dist.grid.values - center))


# ---------------------------------------------------------------------------
# Laplace approximation of the partition sum
# ---------------------------------------------------------------------------

class LaplaceCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    lattice: Lattice
    delta: float
    log_partition_exact: float
    log_partition_laplace: float
    discrepancy: float
    window_sums: List[float]
    riemann_window_sums: List[float]
    limiting_window_sums: List[float]


def _window_sum(grid: EdgeDensityGrid, portrait: PhasePortrait, which: int, delta: float):
    """Lattice sum of exp(2L (g(x) - g(u*))) / sqrt(x (1 - x)) over |x - u*| <= n^-delta."""
    constants = portrait.laplace_constants[which]
    u = constants.u
    scale = 2.0 * grid.site_scale
    x = grid.values
    inside = (np.abs(x - u) <= grid.n ** (-delta)) & (x > 0.0) & (x < 1.0)
    window = x[inside]
    exponent = scale * (objective(window, portrait.params) - objective(u, portrait.params))
    if portrait.regime == Regime.CRITICAL_POINT:
        root = scale**0.25
        limit = math.gamma(0.25) / (2.0 * constants.quartic**0.25) / math.sqrt(u * (1.0 - u))
    else:
        root = math.sqrt(scale)
        limit = 2.0 * math.sqrt(math.pi / constants.stiffness)
    raw = float(np.sum(np.exp(np.minimum(exponent, 0.0)) / np.sqrt(window * (1.0 - window))))
    step = root / grid.site_scale
    return raw, raw * step, limit


def laplace_check(
    n: int,
    params: ModelParams,
    delta: Optional[float] = None,
    lattice: Lattice = Lattice.EDGE,
) -> LaplaceCheck:
    """
    Compare the exact ln Z with 2L f + ln D - ln sqrt(2 pi L), where D sums
    the Laplace integrand exp(2L (g(x) - f)) over the lattice points within n^-delta
    of each maximizer.
    """
    if n < MIN_LAPLACE_N:
        raise_domain_error(f"laplace_check needs n >= {MIN_LAPLACE_N}", parameter="n", value=n)
    delta = get_settings().window_delta if delta is None else delta
    portrait = classify_phase(params)
    if portrait.regime == Regime.OUTSIDE_REPLICA_SYMMETRIC:
        raise_regime_error("no Laplace expansion outside the replica symmetric regime",
                           regime=portrait.regime.value, operation="laplace_check")
    if portrait.regime == Regime.CRITICAL_POINT and not delta < CRITICAL_DELTA_LIMIT:
        raise_domain_error("window exponent must lie in (0, 3/8) at the critical point",
                           parameter="delta", value=delta)

    dist = exact_distribution(n, params, lattice)
    grid = dist.grid
    sums = [_window_sum(grid, portrait, i, delta) for i in range(len(portrait.maximizers))]
    raw_total = sum(raw for raw, _, _ in sums)
    scale = 2.0 * grid.site_scale
    log_laplace = scale * portrait.free_energy + math.log(raw_total) - 0.5 * math.log(math.pi * scale)

    return LaplaceCheck(
        n=n,
        lattice=lattice,
        delta=delta,
        log_partition_exact=dist.log_partition,
        log_partition_laplace=log_laplace,
        discrepancy=dist.log_partition - log_laplace,
        window_sums=[raw for raw, _, _ in sums],
        riemann_window_sums=[riemann for _, riemann, _ in sums],
        limiting_window_sums=[limit for _, _, limit in sums],
    )


# ---------------------------------------------------------------------------
# On-curve masses, conditional moments, tails
# ---------------------------------------------------------------------------

class MixtureMasses(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    epsilon: float
    centers: List[float]
    lower: float
    upper: float
    complement: float
    log_complement: float
    ratio: float


def mixture_masses(dist: ExactDistribution, portrait: PhasePortrait, epsilon: Optional[float] = None) -> MixtureMasses:
    """Masses of the epsilon-windows around both maximizers and of their complement."""
    if portrait.regime != Regime.ON_CRITICAL_CURVE:
        raise_regime_error("mixture masses need two maximizers",
                           regime=portrait.regime.value, operation="mixture_masses")
    epsilon = get_settings().mixture_epsilon if epsilon is None else epsilon
    u_low, u_high = (p.u for p in portrait.maximizers)
    if not 2.0 * epsilon < u_high - u_low:
        raise_domain_error("windows overlap: need 2 epsilon < u2 - u1",
                           parameter="epsilon", value=epsilon)

    x = dist.grid.values
    near_low = np.abs(x - u_low) <= epsilon
    near_high = np.abs(x - u_high) <= epsilon
    outside = ~(near_low | near_high)
    if not (np.any(near_low) or np.any(near_high)):
        raise EmptyWindowError(
            f"no lattice point within {epsilon:.3e} of either maximizer",
            component="MeanField",
            details={"centers": [u_low, u_high], "epsilon": epsilon, "n": dist.grid.n},
        )
    lower = dist.mass(near_low)
    upper = dist.mass(near_high)
    # log space: both window masses may underflow while their ratio is finite
    log_lower = float(logsumexp(dist.log_weights[near_low])) if np.any(near_low) else -math.inf
    log_upper = float(logsumexp(dist.log_weights[near_high])) if np.any(near_high) else -math.inf
    if np.any(outside):
        log_complement = float(logsumexp(dist.log_weights[outside]) - dist.log_partition)
    else:
        log_complement = -math.inf
    return MixtureMasses(
        n=dist.grid.n,
        epsilon=epsilon,
        centers=[u_low, u_high],
        lower=lower,
        upper=upper,
        complement=math.exp(log_complement),
        log_complement=log_complement,
        ratio=float(expit(log_lower - log_upper)),
    )


class ConditionalMoments(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    center: float
    mass: float
    mean: float
    scaled_variance: float


def conditional_clt_variance(
    n: int,
    params: ModelParams,
    which: int = 0,
    delta: Optional[float] = None,
    lattice: Lattice = Lattice.EDGE,
) -> ConditionalMoments:
    """Conditional mean near maximizer `which` and variance of sqrt(L)(x - mean)."""
    portrait = classify_phase(params)
    center = portrait.maximizer(which).u
    dist = exact_distribution(n, params, lattice)
    window = ConditionalWindow.around(dist.grid, center, delta,
                                      critical=portrait.regime == Regime.CRITICAL_POINT)
    mass = dist.mass(window.mask(len(dist.grid)))
    conditional = conditional_distribution(dist, window)
    return ConditionalMoments(
        n=n,
        center=center,
        mass=mass,
        mean=conditional.mean(),
        scaled_variance=dist.grid.site_scale * conditional.variance(),
    )


def stirling_log_count(n: int, k: int, lattice: Lattice = Lattice.EDGE) -> float:
    """-L I(x) - ln sqrt(2 pi L x (1 - x)) at x = k/L, the Stirling form of ln C(N, k)."""
    L = site_scale(n, lattice)
    x = k / L
    if not 0.0 < x < 1.0:
        raise_domain_error("Stirling form needs an interior lattice point", parameter="k", value=k)
    entropy = x * math.log(x) + (1.0 - x) * math.log1p(-x)
    return -L * entropy - 0.5 * math.log(2.0 * math.pi * L * x * (1.0 - x))


class LargeDeviationPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    epsilon: float
    log_probability: float
    exact_exponent: float
    rate_infimum: float


def large_deviation_profile(
    n: int,
    params: ModelParams,
    epsilon: float,
    lattice: Lattice = Lattice.EDGE,
    rate_grid_points: int = 20_001,
) -> LargeDeviationPoint:
    """
    -(1/2L) ln P(|x - u*| >= epsilon) next to the infimum of the rate
    function over the same set.
    """
    portrait = classify_phase(params)
    if portrait.regime not in (Regime.UNIQUENESS, Regime.CRITICAL_POINT):
        raise_regime_error("tail exponent is taken around a unique maximizer",
                           regime=portrait.regime.value, operation="large_deviation_profile")
    u = portrait.maximizers[0].u
    if u - epsilon <= 0.0 and u + epsilon >= 1.0:
        raise_domain_error("epsilon-window covers [0, 1]", parameter="epsilon", value=epsilon)

    dist = exact_distribution(n, params, lattice)
    outside = np.abs(dist.grid.values - u) >= epsilon
    log_probability = float(logsumexp(dist.log_weights[outside]) - dist.log_partition)

    grid = np.linspace(0.0, 1.0, rate_grid_points)
    candidates = np.concatenate([
        grid[np.abs(grid - u) >= epsilon],
        [x for x in (u - epsilon, u + epsilon) if 0.0 <= x <= 1.0],
    ])
    rate_infimum = float(np.min(rate_function(candidates, params)))

    return LargeDeviationPoint(
        n=n,
        epsilon=epsilon,
        log_probability=log_probability,
        exact_exponent=-log_probability / (2.0 * dist.grid.site_scale),
        rate_infimum=rate_infimum,
    )

