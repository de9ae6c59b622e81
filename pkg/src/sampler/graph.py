"""
Simple graphs as bit-set rows, with cached edge and triangle counts.

Row u is a Python int whose bit v is set iff {u, v} is an edge, so the
common neighbourhood of u and v is ``(rows[u] & rows[v]).bit_count()``.
Python ints are arbitrary precision, so each row spans ceil(n/64) machine
words and the AND/popcount runs word by word in C.
"""

import logging
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy.special import expit

from src.core.exceptions import raise_domain_error
from src.phase.solver import ModelParams

logger = logging.getLogger(__name__)


class GraphState:
    """Adjacency rows plus cached E (edges) and T (triangles). Single writer."""

    __slots__ = ("n", "rows", "edge_count", "triangle_count")

    def __init__(self, n: int, rows: List[int] = None, edge_count: int = 0, triangle_count: int = 0):
        if n < 2:
            raise_domain_error("graph needs at least two vertices", parameter="n", value=n)
        self.n = n
        self.rows = list(rows) if rows is not None else [0] * n
        self.edge_count = edge_count
        self.triangle_count = triangle_count

    @classmethod
    def empty(cls, n: int) -> "GraphState":
        return cls(n)

    @classmethod
    def complete(cls, n: int) -> "GraphState":
        full = (1 << n) - 1
        rows = [full & ~(1 << u) for u in range(n)]
        return cls(n, rows, n * (n - 1) // 2, n * (n - 1) * (n - 2) // 6)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "GraphState":
        rows = [0] * n
        for u, v in edges:
            _check_pair(n, u, v)
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        state = cls(n, rows)
        state.edge_count, state.triangle_count = full_recount(state)
        return state

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "GraphState":
        adjacency = np.asarray(matrix, dtype=bool)
        n = adjacency.shape[0]
        if adjacency.shape != (n, n) or np.any(adjacency != adjacency.T) or np.any(np.diag(adjacency)):
            raise_domain_error("adjacency must be square, symmetric and zero on the diagonal",
                               parameter="matrix")
        upper = np.argwhere(np.triu(adjacency, k=1))
        return cls.from_edges(n, ((int(u), int(v)) for u, v in upper))

    @classmethod
    def erdos_renyi(cls, n: int, p: float, rng: np.random.Generator) -> "GraphState":
        if not 0.0 <= p <= 1.0:
            raise_domain_error("edge probability must lie in [0, 1]", parameter="p", value=p)
        iu, iv = np.triu_indices(n, k=1)
        keep = rng.random(len(iu)) < p
        return cls.from_edges(n, zip(iu[keep].tolist(), iv[keep].tolist()))

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in range(u + 1, self.n) if self.rows[u] >> v & 1]

    def to_matrix(self) -> np.ndarray:
        matrix = np.zeros((self.n, self.n), dtype=bool)
        for u, v in self.edges():
            matrix[u, v] = matrix[v, u] = True
        return matrix

    def relabel(self, permutation: Sequence[int]) -> "GraphState":
        """Graph with vertex u renamed permutation[u]."""
        if sorted(permutation) != list(range(self.n)):
            raise_domain_error("relabelling needs a permutation of the vertices", parameter="permutation")
        moved = [(permutation[u], permutation[v]) for u, v in self.edges()]
        state = GraphState.from_edges(self.n, moved)
        return state

    def copy(self) -> "GraphState":
        return GraphState(self.n, self.rows, self.edge_count, self.triangle_count)

    @property
    def edge_density(self) -> float:
        return 2.0 * self.edge_count / self.n**2

    @property
    def triangle_density(self) -> float:
        return 6.0 * self.triangle_count / self.n**3

    def __repr__(self) -> str:
        return f"GraphState(n={self.n}, E={self.edge_count}, T={self.triangle_count})"


def _check_pair(n: int, u: int, v: int) -> None:
    if not (0 <= u < n and 0 <= v < n):
        raise_domain_error(f"vertex out of range for n={n}", parameter="vertex", value=(u, v))
    if u == v:
        raise_domain_error("an edge needs two distinct vertices", parameter="vertex", value=(u, v))


def common_neighbors(state: GraphState, u: int, v: int) -> int:
    """|N(u) & N(v)|: triangles through {u, v} if that edge is (or becomes) present."""
    _check_pair(state.n, u, v)
    return (state.rows[u] & state.rows[v]).bit_count()


def hamiltonian(state: GraphState, params: ModelParams) -> float:
    """(alpha/n) T + h E from the cached counts."""
    return params.alpha / state.n * state.triangle_count + params.h * state.edge_count


def full_recount(state: GraphState) -> Tuple[int, int]:
    """(E, T) recomputed from the rows; T = (1/3) sum over edges of common neighbours."""
    rows = state.rows
    edge_count = sum(row.bit_count() for row in rows) // 2
    wedge_sum = 0
    for u in range(state.n):
        neighbours = rows[u] >> (u + 1)
        v = u + 1
        while neighbours:
            if neighbours & 1:
                wedge_sum += (rows[u] & rows[v]).bit_count()
            neighbours >>= 1
            v += 1
    return edge_count, wedge_sum // 3


class HeatBathKernel:
    """
    Acceptance table sigma((alpha/n) c + h) for c = 0..n-2 common neighbours:
    the conditional probability that {u, v} is present given the rest.
    """

    __slots__ = ("n", "params", "acceptance")

    def __init__(self, n: int, params: ModelParams):
        self.n = n
        self.params = params
        c = np.arange(max(n - 1, 1))
        self.acceptance: List[float] = expit(params.alpha / n * c + params.h).tolist()

    def update(self, state: GraphState, u: int, v: int, draw: float) -> bool:
        rows = state.rows
        common = (rows[u] & rows[v]).bit_count()
        present = rows[u] >> v & 1
        if draw < self.acceptance[common]:
            if present:
                return False
            rows[u] |= 1 << v
            rows[v] |= 1 << u
            state.edge_count += 1
            state.triangle_count += common
            return True
        if not present:
            return False
        rows[u] &= ~(1 << v)
        rows[v] &= ~(1 << u)
        state.edge_count -= 1
        state.triangle_count -= common
        return True


def glauber_update(state: GraphState, u: int, v: int, draw: float, params: ModelParams) -> bool:
    """
    Heat-bath update of edge {u, v} with a uniform draw in [0, 1): the edge
    is present afterwards iff draw < sigma((alpha/n) c + h). Returns True
    when the edge flipped.
    """
    _check_pair(state.n, u, v)
    return HeatBathKernel(state.n, params).update(state, u, v, draw)
