"""
Brute-force enumeration of the edge-triangle Gibbs measure for small n.

All 2^N labelled graphs on n vertices (N = n(n-1)/2) are visited in
Gray-code order, so consecutive graphs differ by one edge and the triangle
count changes by the common-neighbour count of that edge. The joint table
N(E, T) of edge and triangle counts is computed once per n and every exact
quantity (partition function, edge-count law, moments, the partition
polynomial in z = e^h and its zeros) is a log-sum-exp over that table.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from src.core.exceptions import ConvergenceError, SizeError, raise_domain_error
from src.core.settings import get_settings
from src.phase.solver import ModelParams

logger = logging.getLogger(__name__)

MIN_N = 2
MAX_ZERO_DEGREE = 21
ZERO_RESIDUAL_RTOL = 1e-8


def _require_enumerable(n: int) -> None:
    max_n = get_settings().enumeration_max_n
    if not MIN_N <= n <= max_n:
        raise SizeError(
            f"enumeration supports {MIN_N} <= n <= {max_n}, got n={n}",
            component="Enumeration",
            details={"n": n, "max_n": max_n},
        )


@lru_cache(maxsize=None)
def edge_triangle_census(n: int) -> np.ndarray:
    """
    Joint counts N(E, T) over all labelled graphs on n vertices, shape
    (N + 1, C(n, 3) + 1). Read-only; cached per n.
    """
    _require_enumerable(n)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    n_edges = len(edges)
    max_triangles = math.comb(n, 3)
    width = max_triangles + 1

    counts = [0] * ((n_edges + 1) * width)
    rows = [0] * n
    edge_count = 0
    triangle_count = 0
    counts[0] = 1  # empty graph

    for step in range(1, 1 << n_edges):
        bit = (step & -step).bit_length() - 1
        u, v = edges[bit]
        common = (rows[u] & rows[v]).bit_count()
        if rows[u] >> v & 1:
            edge_count -= 1
            triangle_count -= common
        else:
            edge_count += 1
            triangle_count += common
        rows[u] ^= 1 << v
        rows[v] ^= 1 << u
        counts[edge_count * width + triangle_count] += 1

    table = np.array(counts, dtype=np.int64).reshape(n_edges + 1, width)
    table.setflags(write=False)
    logger.info(f"enumerated {1 << n_edges} graphs on n={n} vertices")
    return table


def _log_census(n: int) -> np.ndarray:
    census = edge_triangle_census(n)
    with np.errstate(divide="ignore"):
        return np.log(census.astype(float))


@dataclass(frozen=True)
class EnumerationResult:
    n: int
    params: ModelParams
    log_partition: float
    edge_count_law: np.ndarray = field(repr=False)
    expected_edge_count: float
    expected_triangle_count: float

    @property
    def edge_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def partition(self) -> float:
        return math.exp(self.log_partition)

    def expected_edge_density(self) -> float:
        return 2.0 * self.expected_edge_count / self.n**2

    def to_frame(self) -> pd.DataFrame:
        s = np.arange(self.edge_pairs + 1)
        return pd.DataFrame({
            "s": s,
            "m": 2.0 * s / self.n**2,
            "probability": self.edge_count_law,
        })


def enumerate_ensemble(n: int, params: ModelParams) -> EnumerationResult:
    """Exact law of the edge count and exact moments under the Gibbs measure."""
    log_census = _log_census(n)
    n_edges, n_triangles = log_census.shape
    e = np.arange(n_edges)[:, None]
    t = np.arange(n_triangles)[None, :]
    log_weights = log_census + params.alpha / n * t + params.h * e

    log_partition = float(logsumexp(log_weights))
    joint = np.exp(log_weights - log_partition)
    law = joint.sum(axis=1)
    return EnumerationResult(
        n=n,
        params=params,
        log_partition=log_partition,
        edge_count_law=law,
        expected_edge_count=float(np.sum(joint * e)),
        expected_triangle_count=float(np.sum(joint * t)),
    )


def finite_size_free_energy(n: int, params: ModelParams) -> float:
    """ln Z / n^2 of the true model."""
    return enumerate_ensemble(n, params).log_partition / (n * n)


@dataclass(frozen=True)
class PartitionPolynomial:
    """Z(z) = sum_m C_m z^m with z = e^h; C_m kept as logs (all positive)."""

    n: int
    alpha: float
    log_coefficients: np.ndarray = field(repr=False)
    zeros: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def degree(self) -> int:
        return len(self.log_coefficients) - 1

    def evaluate_log(self, h: float) -> float:
        """ln Z at z = e^h."""
        m = np.arange(self.degree + 1)
        return float(logsumexp(self.log_coefficients + h * m))

    def scaled_coefficients(self) -> np.ndarray:
        """Coefficients divided by the largest one."""
        return np.exp(self.log_coefficients - self.log_coefficients.max())

    def product_form(self, z: complex) -> complex:
        """C_0 * prod(1 - z/z_i) over the stored zeros."""
        if self.zeros is None:
            raise_domain_error("zeros have not been computed", parameter="zeros")
        return complex(math.exp(self.log_coefficients[0]) * np.prod(1.0 - z / self.zeros))


def polynomial_coefficients(n: int, alpha: float) -> PartitionPolynomial:
    """C_m = sum_T N(m, T) exp(alpha T / n), grouped by edge count m."""
    log_census = _log_census(n)
    t = np.arange(log_census.shape[1])[None, :]
    log_coefficients = logsumexp(log_census + alpha / n * t, axis=1)
    return PartitionPolynomial(n=n, alpha=alpha, log_coefficients=log_coefficients)


def _companion_matrix(coefficients: np.ndarray) -> np.ndarray:
    """Companion matrix of sum_m c_m z^m (ascending order)."""
    degree = len(coefficients) - 1
    companion = np.zeros((degree, degree))
    companion[1:, :-1] = np.eye(degree - 1)
    companion[:, -1] = -coefficients[:-1] / coefficients[-1]
    return companion


def _relative_residual(coefficients: np.ndarray, z: complex) -> float:
    powers = z ** np.arange(len(coefficients))
    value = abs(np.dot(coefficients, powers))
    scale = np.dot(np.abs(coefficients), np.abs(powers))
    return value / scale


def lee_yang_zeros(poly: PartitionPolynomial) -> np.ndarray:
    """
    Complex zeros of the partition polynomial from the eigenvalues of its
    companion matrix (LAPACK balances before the QR iteration). Each zero
    must satisfy |Z(z)| <= 1e-8 * sum |C_m| |z|^m.
    """
    if poly.degree > MAX_ZERO_DEGREE:
        raise SizeError(
            f"zero finding is limited to degree {MAX_ZERO_DEGREE}",
            component="Enumeration",
            details={"degree": poly.degree},
        )
    if poly.degree < 1:
        return np.array([], dtype=complex)

    coefficients = poly.scaled_coefficients()
    roots = np.linalg.eigvals(_companion_matrix(coefficients)).astype(complex)

    worst = max(_relative_residual(coefficients, z) for z in roots)
    if worst > ZERO_RESIDUAL_RTOL:
        raise ConvergenceError(
            f"companion eigenvalues miss the residual bound (worst {worst:.2e})",
            component="Enumeration",
            details={"n": poly.n, "alpha": poly.alpha, "worst_residual": worst},
        )
    return np.array(sorted(roots, key=lambda z: (round(z.real, 12), z.imag)))


def with_zeros(poly: PartitionPolynomial) -> PartitionPolynomial:
    return replace(poly, zeros=lee_yang_zeros(poly))


def zeros_frame(poly: PartitionPolynomial) -> pd.DataFrame:
    zeros = poly.zeros if poly.zeros is not None else lee_yang_zeros(poly)
    return pd.DataFrame({
        "real": zeros.real,
        "imag": zeros.imag,
        "modulus": np.abs(zeros),
        "argument": np.angle(zeros),
    })


if __name__ == "__main__":
    from src.core.logging_config import setup_logging

    setup_logging()
    result = enumerate_ensemble(3, ModelParams(alpha=3.0, h=0.0))
    logger.info(f"n=3, (3, 0): Z = {result.partition:.6f}")
    poly = with_zeros(polynomial_coefficients(5, 2.0))
    logger.info(f"n=5, alpha=2: {poly.degree} zeros, product form at z=1: {poly.product_form(1.0)}")
