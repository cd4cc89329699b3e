"""Dense graph values, G(n, p) sampling and edge-probability handling.

Vertex pairs are indexed in colex order, ``(0,1), (0,2), (1,2), (0,3), ...``,
so pair ``(i, j)`` with ``i < j`` sits at ``j*(j-1)//2 + i``.  This is the
bit order of graph6 and it is prefix-stable in ``n``.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Iterable, Union

import numpy as np

from .errors import InvalidPairError, PreconditionError

Prob = Union[float, Fraction]


def as_prob(p) -> Prob:
    """Normalize an edge probability.

    Strings of the form ``"a/b"`` become exact fractions, other strings and
    numbers become floats.  Fractions and ints stay exact.
    """
    if isinstance(p, str):
        s = p.strip()
        p = Fraction(s) if "/" in s else float(s)
    elif isinstance(p, (int, np.integer)):
        p = Fraction(int(p))
    elif isinstance(p, np.floating):
        p = float(p)
    if not isinstance(p, (float, Fraction)):
        raise TypeError(f"unsupported probability type {type(p).__name__}")
    if not 0 < p < 1:
        raise PreconditionError(f"edge probability must lie in (0, 1), got {p}")
    return p


def is_exact(p) -> bool:
    return isinstance(p, Fraction)


def pair_index(i: int, j: int) -> int:
    if i > j:
        i, j = j, i
    return j * (j - 1) // 2 + i


def colex_pairs(n: int) -> np.ndarray:
    """All pairs ``i < j`` of ``range(n)`` in colex order, shape ``(C(n,2), 2)``."""
    # tril_indices walks rows j then columns i < j: exactly colex
    jj, ii = np.tril_indices(n, -1)
    return np.stack([ii, jj], axis=1).astype(np.intp)


class Graph:
    """Immutable simple graph on ``range(n)``, optionally with loops.

    The adjacency matrix is a read-only symmetric boolean array; loops live
    on the diagonal and are only allowed when ``loops`` is true.
    """

    __slots__ = ("_adj", "loops")

    def __init__(self, adj, loops: bool = False):
        a = np.array(adj, dtype=bool, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise PreconditionError("adjacency must be a square matrix")
        if not np.array_equal(a, a.T):
            raise PreconditionError("adjacency must be symmetric")
        if not loops and a.diagonal().any():
            raise PreconditionError("loops present but loops are disabled")
        a.setflags(write=False)
        self._adj = a
        self.loops = bool(loops)

    @classmethod
    def empty(cls, n: int, loops: bool = False) -> "Graph":
        return cls(np.zeros((n, n), dtype=bool), loops)

    @classmethod
    def complete(cls, n: int, loops: bool = False) -> "Graph":
        a = np.ones((n, n), dtype=bool)
        if not loops:
            np.fill_diagonal(a, False)
        return cls(a, loops)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], loops: bool = False) -> "Graph":
        a = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            a[i, j] = a[j, i] = True
        return cls(a, loops)

    @classmethod
    def from_pair_bits(cls, n: int, bits) -> "Graph":
        """Loopless graph from a 0/1 vector over colex pairs."""
        a = np.zeros((n, n), dtype=bool)
        pairs = colex_pairs(n)
        sel = pairs[np.asarray(bits, dtype=bool)]
        a[sel[:, 0], sel[:, 1]] = True
        a[sel[:, 1], sel[:, 0]] = True
        return cls(a)

    @classmethod
    def from_mask(cls, n: int, mask: int) -> "Graph":
        bits = [(mask >> b) & 1 for b in range(comb(n, 2))]
        return cls.from_pair_bits(n, bits)

    @property
    def adj(self) -> np.ndarray:
        return self._adj

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def num_edges(self) -> int:
        """Number of non-loop edges."""
        return int(np.triu(self._adj, 1).sum())

    @property
    def num_loops(self) -> int:
        return int(self._adj.diagonal().sum())

    def edge_count(self, include_loops: bool = True) -> int:
        return self.num_edges + (self.num_loops if include_loops else 0)

    def degrees(self) -> np.ndarray:
        a = self._adj.copy()
        np.fill_diagonal(a, False)
        return a.sum(axis=1)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    def edges(self) -> list[tuple[int, int]]:
        """Non-loop edges ``(i, j)``, ``i < j``, in lexicographic order."""
        ii, jj = np.nonzero(np.triu(self._adj, 1))
        return list(zip(ii.tolist(), jj.tolist()))

    def loop_vertices(self) -> list[int]:
        return np.flatnonzero(self._adj.diagonal()).tolist()

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self._adj[i, j])

    def pair_bits(self) -> np.ndarray:
        pairs = colex_pairs(self.n)
        return self._adj[pairs[:, 0], pairs[:, 1]]

    def mask(self) -> int:
        """Pair bits packed into an int (bit ``pair_index(i, j)``)."""
        return sum(1 << b for b in np.flatnonzero(self.pair_bits()).tolist())

    def induced(self, vertices) -> "Graph":
        v = np.asarray(vertices, dtype=np.intp)
        return Graph(self._adj[np.ix_(v, v)], self.loops)

    def relabel(self, perm) -> "Graph":
        """Graph with vertex ``v`` renamed to ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.intp)
        a = np.zeros_like(self._adj)
        a[np.ix_(perm, perm)] = self._adj
        return Graph(a, self.loops)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.loops == other.loops and np.array_equal(self._adj, other._adj)

    def __hash__(self) -> int:
        return hash((self.loops, self.n, self._adj.tobytes()))

    def __repr__(self) -> str:
        extra = f", loops={self.num_loops}" if self.loops else ""
        return f"Graph(n={self.n}, edges={self.num_edges}{extra})"


def sample_gnp(n: int, p, seed: int, loops: bool = False) -> Graph:
    """Sample G(n, p) (or its loop variant) with numpy's PCG64 generator.

    Pairs are drawn in colex order, then loops in vertex order, so the
    result is a pure function of ``(n, p, seed, loops)``.
    """
    if n < 1:
        raise PreconditionError("n must be at least 1")
    p = float(as_prob(p))
    rng = np.random.default_rng(seed)
    pairs = colex_pairs(n)
    hit = rng.random(len(pairs)) < p
    a = np.zeros((n, n), dtype=bool)
    sel = pairs[hit]
    a[sel[:, 0], sel[:, 1]] = True
    a[sel[:, 1], sel[:, 0]] = True
    if loops:
        a[np.diag_indices(n)] = rng.random(n) < p
    return Graph(a, loops)


def complement(G: Graph) -> Graph:
    """Toggle every pair; in loop mode also toggle every loop."""
    a = ~G.adj
    if not G.loops:
        np.fill_diagonal(a, False)
    return Graph(a, G.loops)


def flip_pair(G: Graph, i: int, j: int) -> Graph:
    n = G.n
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidPairError(f"pair ({i}, {j}) out of range for n={n}")
    if i == j and not G.loops:
        raise InvalidPairError(f"cannot flip ({i}, {i}) in a loopless graph")
    a = G.adj.copy()
    a[i, j] = a[j, i] = not a[i, j]
    return Graph(a, G.loops)


def _exact(p) -> Fraction:
    # floats are read by their shortest decimal repr so 0.55 means 11/20
    return p if isinstance(p, Fraction) else Fraction(repr(float(p)))


def nearest_integer_target(n: int, p) -> int:
    """The integer closest to ``p * C(n, 2)`` (ties round down)."""
    x = _exact(p) * comb(n, 2)
    lo = x.numerator // x.denominator
    return lo if x - lo <= Fraction(1, 2) else lo + 1


def nearest_integer_distance(n: int, p) -> Prob:
    """Distance from ``p * C(n, 2)`` to the nearest integer."""
    if n < 2:
        raise PreconditionError("n must be at least 2")
    p = as_prob(p)
    x = _exact(p) * comb(n, 2)
    d = abs(x - nearest_integer_target(n, p))
    return d if is_exact(p) else float(d)
