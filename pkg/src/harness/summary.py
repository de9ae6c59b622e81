"""
Summary statistics for chain traces.

Moments are two-pass over the stored samples. The integrated
autocorrelation time follows the initial positive and initial monotone
sequence estimators on an FFT autocovariance, reported with the
convention tau_int = 1/2 for independent draws, so that

    ESS = count / (2 tau_int),    SE = sqrt(variance * 2 tau_int / count).

tau_int is never reported below 1/2, which keeps ESS <= count for
antithetic traces.
"""

import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import fft, stats

from src.core.exceptions import InsufficientDataError, raise_domain_error
from src.sampler.chain import ChainTrace

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100
INDEPENDENT_TAU = 0.5


class SummaryStats(BaseModel):
    """Moments of one scalar trace. `kurtosis` is raw (3 for a normal law)."""

    model_config = ConfigDict(frozen=True)

    count: int
    mean: float
    variance: float
    skewness: Optional[float] = None
    kurtosis: Optional[float] = None
    tau_int: float
    ess: float
    standard_error: float


def _as_samples(samples: Union[ChainTrace, Sequence[float], np.ndarray]) -> np.ndarray:
    if isinstance(samples, ChainTrace):
        return np.asarray(samples.edge_density, dtype=float)
    values = np.asarray(samples, dtype=float)
    if values.ndim != 1:
        raise_domain_error("expected a one-dimensional trace", parameter="samples", value=values.shape)
    return values


def _require_length(values: np.ndarray) -> None:
    if len(values) < MIN_SAMPLES:
        raise InsufficientDataError(
            f"need at least {MIN_SAMPLES} samples, got {len(values)}",
            component="Harness",
            details={"count": len(values), "minimum": MIN_SAMPLES},
        )


def autocovariance(values: np.ndarray) -> np.ndarray:
    """Biased autocovariance at lags 0..n-1 via zero-padded FFT."""
    n = len(values)
    centred = values - values.mean()
    size = fft.next_fast_len(2 * n)
    spectrum = fft.rfft(centred, size)
    return fft.irfft(spectrum * np.conjugate(spectrum), size)[:n] / n


def integrated_autocorrelation_time(samples) -> float:
    """tau_int from Geyer's initial positive sequence with the monotone adjustment."""
    values = _as_samples(samples)
    _require_length(values)
    n = len(values)
    acov = autocovariance(values)
    if acov[0] <= 0.0:
        return INDEPENDENT_TAU

    mean_var = acov[0] * n / (n - 1.0)
    var_plus = mean_var * (n - 1.0) / n

    rho_hat_t = np.zeros(n)
    rho_hat_even = 1.0
    rho_hat_t[0] = rho_hat_even
    rho_hat_odd = 1.0 - (mean_var - acov[1]) / var_plus
    rho_hat_t[1] = rho_hat_odd

    # initial positive sequence
    t = 1
    while t < n - 2 and rho_hat_even + rho_hat_odd >= 0.0:
        rho_hat_even = 1.0 - (mean_var - acov[t + 1]) / var_plus
        rho_hat_odd = 1.0 - (mean_var - acov[t + 2]) / var_plus
        rho_hat_t[t + 1] = rho_hat_even
        if rho_hat_even + rho_hat_odd >= 0.0:
            rho_hat_t[t + 2] = rho_hat_odd
        t += 2
    max_t = t

    # initial monotone sequence
    t = 1
    while t <= max_t - 2:
        if rho_hat_t[t + 1] + rho_hat_t[t + 2] > rho_hat_t[t - 1] + rho_hat_t[t]:
            rho_hat_t[t + 1] = (rho_hat_t[t - 1] + rho_hat_t[t]) / 2.0
            rho_hat_t[t + 2] = rho_hat_t[t + 1]
        t += 2

    tau_hat = -1.0 + 2.0 * np.sum(rho_hat_t[:max_t]) + np.sum(rho_hat_t[max_t + 1 : max_t + 2])
    return max(float(tau_hat) / 2.0, INDEPENDENT_TAU)


def effective_sample_size(samples) -> float:
    values = _as_samples(samples)
    return len(values) / (2.0 * integrated_autocorrelation_time(values))


def summarize(samples) -> SummaryStats:
    """
    Summary of a trace (a ChainTrace summarizes its edge density).

    Raises:
        InsufficientDataError: fewer than 100 samples.
    """
    values = _as_samples(samples)
    _require_length(values)
    count = len(values)
    mean = float(values.mean())
    variance = float(np.var(values, ddof=1))
    tau = integrated_autocorrelation_time(values)

    skewness = kurtosis = None
    if variance > 0.0:
        skewness = float(stats.skew(values))
        kurtosis = float(stats.kurtosis(values, fisher=False))

    return SummaryStats(
        count=count,
        mean=mean,
        variance=variance,
        skewness=skewness,
        kurtosis=kurtosis,
        tau_int=tau,
        ess=count / (2.0 * tau),
        standard_error=math.sqrt(variance * 2.0 * tau / count),
    )


def pooled_mean(summaries: Sequence[SummaryStats]) -> Tuple[float, float]:
    """Average of independent chain means and its standard error."""
    if not summaries:
        raise_domain_error("nothing to pool", parameter="summaries")
    k = len(summaries)
    mean = sum(s.mean for s in summaries) / k
    error = math.sqrt(sum(s.standard_error**2 for s in summaries)) / k
    return mean, error


def total_variation(p, q) -> float:
    """(1/2) sum |p - q| for two probability vectors on the same support."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise_domain_error("distributions must share a support", parameter="shape", value=(p.shape, q.shape))
    if np.any(p < 0.0) or np.any(q < 0.0):
        raise_domain_error("probabilities must be non-negative", parameter="p")
    return 0.5 * float(np.abs(p - q).sum())


def empirical_law(counts, support_size: int) -> np.ndarray:
    """Relative frequencies of integer observations 0..support_size-1."""
    observed = np.asarray(counts, dtype=np.int64)
    if observed.size == 0:
        raise_domain_error("no observations", parameter="counts")
    if observed.min() < 0 or observed.max() >= support_size:
        raise_domain_error("observation outside the support", parameter="counts")
    return np.bincount(observed, minlength=support_size) / observed.size
