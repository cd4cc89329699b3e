"""Exhaustive ground truth for tiny n.

* ``minimize_u_k``: min of u_k(G, p) over all labeled graphs on n <= 7 vertices.
* ``minimize_schatten``: min of the Schatten norm over all loop-graphs on n <= 5.
* ``proportional_search``: graphs whose 3-vertex census equals its G(n, p)
  expectation exactly.

Rational p runs in scaled integer arithmetic: with p = a/b every expected
count times ``b^C(k,2) * lcm(|Aut|)`` is an integer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from itertools import combinations
from math import comb, lcm, perm

import networkx as nx
import numpy as np

from . import catalog
from .census import census_matrix
from .errors import PreconditionError, WorkCapExceeded
from .graph import Graph, Prob, _exact, as_prob, colex_pairs, is_exact
from .graphio import to_graph6, to_loopgraph

MAX_UK_N = 7
MAX_SCHATTEN_N = 5
MAX_PROPORTIONAL_N = 10
_CHUNK = 1 << 16


def _scaled_expectations(n: int, k: int, p: Fraction) -> tuple[int, np.ndarray]:
    """(scale, scale * E N(F, G(n,p)) for every k-class) as exact integers."""
    classes = catalog.enumerate_classes(k)
    a, b = p.numerator, p.denominator
    K = comb(k, 2)
    L = lcm(*(F.aut for F in classes))
    scale = b**K * L
    exp = [perm(n, k) * (L // F.aut) * a**F.e * (b - a) ** (K - F.e) for F in classes]
    return scale, np.array(exp, dtype=object if max(exp) >= 2**62 // max(1, comb(n, k)) else np.int64)


@cache
def step_up_factor(k: int, n: int) -> Fraction:
    """u_k >= u_2 * factor, from (n-j) N(F, G) = sum_F' N(F, F') N(F', G) chained over j."""
    f = Fraction(1)
    for j in range(2, k):
        beta = max(
            sum(catalog.count_induced_small(F, Fp) for Fp in catalog.enumerate_classes(j + 1))
            for F in catalog.enumerate_classes(j)
        )
        f *= Fraction(n - j, beta)
    return f


def _rows_with_popcount(npairs: int, e: int):
    it = combinations(range(npairs), e)
    while True:
        block = np.fromiter((v for c in _take(it, _CHUNK) for v in c), dtype=np.intp)
        if e:
            block = block.reshape(-1, e)
        if not len(block):
            if e == 0:
                yield np.zeros((1, npairs), dtype=np.uint8)
            return
        rows = np.zeros((len(block), npairs), dtype=np.uint8)
        rows[np.arange(len(block))[:, None], block] = 1
        yield rows


def _take(it, m):
    for _, c in zip(range(m), it):
        yield c


@dataclass(frozen=True)
class OracleResult:
    n: int
    p: Prob
    k: int
    value: Prob
    witness: Graph
    graphs_scanned: int
    strata_skipped: list[int]

    def to_dict(self) -> dict:
        from .reporting import jsonable

        return jsonable({
            "n": self.n, "p": self.p, "k": self.k,
            "min": self.value,
            "witness_graph6": to_graph6(self.witness).decode(),
            "witness_edges": self.witness.num_edges,
            "graphs_scanned": self.graphs_scanned,
            "edge_counts_pruned": self.strata_skipped,
        })


def minimize_u_k(n: int, p, k: int) -> OracleResult:
    """Exact min of u_k over all 2^C(n,2) labeled graphs.

    Edge-count strata are visited by increasing |e - pC(n,2)|; a stratum is
    skipped once its step-up lower bound exceeds the best value found.  The
    witness is the smallest colex mask attaining the minimum.
    """
    p_in = as_prob(p)
    if n > MAX_UK_N:
        raise WorkCapExceeded(f"exhaustive u_k search is capped at n <= {MAX_UK_N}", n=n)
    if not 2 <= k <= min(n, catalog.MAX_K):
        raise PreconditionError(f"need 2 <= k <= min(n, {catalog.MAX_K})")
    p = _exact(p_in)
    npairs = comb(n, 2)
    scale, expect = _scaled_expectations(n, k, p)
    target = p * npairs
    factor = step_up_factor(k, n)
    weights = (1 << np.arange(npairs, dtype=np.int64))
    best, best_mask = None, None
    scanned, skipped = 0, []
    for e in sorted(range(npairs + 1), key=lambda e: (abs(e - target), e)):
        lb = abs(e - target) * factor
        if best is not None and lb > best:
            skipped.append(e)
            continue
        for rows in _rows_with_popcount(npairs, e):
            counts = census_matrix(rows, n, k)
            dev = np.abs(counts * scale - expect[None, :]).max(axis=1)
            scanned += len(rows)
            lo = dev.min()
            val = Fraction(int(lo), scale)
            masks = rows[dev == lo].astype(np.int64) @ weights
            m = int(masks.min())
            if best is None or val < best or (val == best and m < best_mask):
                best, best_mask = val, m
    value = best if is_exact(p_in) else float(best)
    return OracleResult(n, p_in, k, value, Graph.from_mask(n, best_mask), scanned, sorted(skipped))


# ------------------------------------------------------------------ Schatten


@dataclass(frozen=True)
class SchattenOracleResult:
    n: int
    p: Prob
    s: int
    value: float
    trace: Prob
    witness: Graph
    graphs_scanned: int

    def to_dict(self) -> dict:
        from .reporting import jsonable

        return jsonable({
            "n": self.n, "p": self.p, "s": self.s,
            "min": self.value, "trace": self.trace,
            "witness_loopgraph": to_loopgraph(self.witness),
            "graphs_scanned": self.graphs_scanned,
        })


def _loop_slots(n: int) -> list[tuple[int, int]]:
    return [(i, j) for j in range(n) for i in range(j + 1)]


def minimize_schatten(n: int, p, s: int) -> SchattenOracleResult:
    """Exact min over all loop-graphs; traces are exact integers for rational p."""
    from .schatten import _check_s

    _check_s(s)
    p_in = as_prob(p)
    if not 1 <= n <= MAX_SCHATTEN_N:
        raise WorkCapExceeded(f"exhaustive Schatten search is capped at 1 <= n <= {MAX_SCHATTEN_N}", n=n)
    p = _exact(p_in)
    a, b = p.numerator, p.denominator
    slots = _loop_slots(n)
    total = 1 << len(slots)
    exact_int = (n * max(a, b - a)) ** s < 2**62
    si = np.array([i for i, _ in slots])
    sj = np.array([j for _, j in slots])
    best, best_mask = None, None
    for start in range(0, total, _CHUNK):
        masks = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        bits = (masks[:, None] >> np.arange(len(slots))) & 1
        m = np.full((len(masks), n, n), -a, dtype=np.int64 if exact_int else object)
        vals = np.where(bits == 1, b - a, -a)
        m[:, si, sj] = vals
        m[:, sj, si] = vals
        half = m
        for _ in range(s // 2 - 1):
            half = half @ m
        tr = (half * half).sum(axis=(1, 2))
        lo = tr.min()
        cand = int(masks[tr == lo].min())
        if best is None or lo < best or (lo == best and cand < best_mask):
            best, best_mask = lo, cand
    trace = Fraction(int(best), b**s)
    adj = np.zeros((n, n), dtype=bool)
    for t, (i, j) in enumerate(slots):
        if best_mask >> t & 1:
            adj[i, j] = adj[j, i] = True
    value = float(trace) ** (1.0 / s) / n
    return SchattenOracleResult(n, p_in, s, value, trace if is_exact(p_in) else float(trace),
                                Graph(adj, loops=True), total)


# ------------------------------------------------------------- proportional


def _rows_from_nx(g: nx.Graph, n: int) -> np.ndarray:
    a = nx.to_numpy_array(g, nodelist=sorted(g.nodes()), dtype=bool)
    pairs = colex_pairs(n)
    return a[pairs[:, 0], pairs[:, 1]].astype(np.uint8)


@cache
def graph_classes(n: int) -> np.ndarray:
    """One colex pair-row per isomorphism class of n-vertex graphs.

    n <= 7 from the networkx atlas; larger n by appending a vertex in every
    possible way to each (n-1)-class and deduplicating by isomorphism.
    """
    if n < 1:
        raise PreconditionError("n must be positive")
    if n <= 7:
        rows = [_rows_from_nx(g, n) for g in nx.graph_atlas_g() if g.number_of_nodes() == n]
        return np.array(rows, dtype=np.uint8).reshape(len(rows), comb(n, 2))
    if n > 9:
        raise WorkCapExceeded("isomorphism classes are enumerated only up to n = 9", n=n)
    return _dedupe(np.concatenate(list(_extensions(graph_classes(n - 1), n - 1))), n)


def _dedupe(rows: np.ndarray, n: int) -> np.ndarray:
    """Keep the first row of every isomorphism class (in input order)."""
    if not len(rows):
        return rows
    pairs = colex_pairs(n)
    deg = np.zeros((len(rows), n), dtype=np.int64)
    for t, (i, j) in enumerate(pairs):
        deg[:, i] += rows[:, t]
        deg[:, j] += rows[:, t]
    deg.sort(axis=1)
    inv = [deg] + [census_matrix(rows, n, k) for k in (3, 4) if k <= n]
    keys = np.concatenate(inv, axis=1)
    buckets: dict[bytes, list[nx.Graph]] = {}
    keep = []
    for t, key in enumerate(keys):
        g = nx.from_numpy_array(Graph.from_pair_bits(n, rows[t]).adj.astype(np.uint8))
        bucket = buckets.setdefault(key.tobytes(), [])
        if not any(nx.is_isomorphic(g, x) for x in bucket):
            bucket.append(g)
            keep.append(t)
    return rows[keep]


def _extensions(base: np.ndarray, m: int):
    """Rows on m+1 vertices: every base row with every neighbourhood of the new vertex."""
    nbhd = ((np.arange(1 << m)[:, None] >> np.arange(m)) & 1).astype(np.uint8)
    step = max(1, _CHUNK // len(nbhd))
    for s in range(0, len(base), step):
        blk = base[s:s + step]
        yield np.concatenate(
            [np.repeat(blk, len(nbhd), axis=0), np.tile(nbhd, (len(blk), 1))], axis=1
        )


def proportional_orders(p, n_max: int, k: int = 3) -> list[int]:
    """Orders n in 3..n_max where every k-vertex expectation (and pC(n,2)) is an integer."""
    p = _exact(as_prob(p))
    out = []
    for n in range(max(3, k), n_max + 1):
        if (p * comb(n, 2)).denominator != 1:
            continue
        scale, exp = _scaled_expectations(n, k, p)
        if all(int(x) % scale == 0 for x in exp):
            out.append(n)
    return out


@dataclass(frozen=True)
class ProportionalHit:
    graph: Graph
    p: Prob

    def to_dict(self) -> dict:
        from .reporting import jsonable

        return {"graph6": to_graph6(self.graph).decode(), "n": self.graph.n,
                "edges": self.graph.num_edges, "p": jsonable(self.p)}


def proportional_search(p_grid, k: int = 3, n_max: int = 9) -> list[ProportionalHit]:
    """Every graph class with n <= n_max and u_3(G, p) = 0 exactly, for each p in the grid.

    Orders that fail the integrality filter are skipped without enumeration;
    the last order is enumerated as labeled extensions of (n-1)-classes and
    deduplicated afterwards.
    """
    if k != 3:
        raise PreconditionError("proportional search is defined for k = 3")
    if n_max > MAX_PROPORTIONAL_N:
        raise WorkCapExceeded(f"n_max is capped at {MAX_PROPORTIONAL_N}", n_max=n_max)
    hits: list[ProportionalHit] = []
    for p in p_grid:
        p_in = as_prob(p)
        pe = _exact(p_in)
        for n in proportional_orders(pe, n_max, k):
            scale, exp = _scaled_expectations(n, k, pe)
            target = int(pe * comb(n, 2))
            if n <= 7:
                sources = [graph_classes(n)]
            else:
                sources = _extensions(graph_classes(n - 1), n - 1)
            survivors = []
            for rows in sources:
                rows = rows[rows.sum(axis=1) == target]
                if not len(rows):
                    continue
                counts = census_matrix(rows, n, k)
                survivors.append(rows[(counts * scale == exp[None, :]).all(axis=1)])
            if survivors:
                for r in _dedupe(np.concatenate(survivors), n):
                    hits.append(ProportionalHit(Graph.from_pair_bits(n, r), p_in))
    return hits
