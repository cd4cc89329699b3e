"""Induced subgraph census N(F, G), G(n, p) expectations and the deviation u_k.

Two census paths:

* ``brute``: enumerate every k-subset, classify the induced pattern through
  the catalog lookup table.  Works for any k <= 5; this is the oracle.
* ``fast`` (k <= 4): count non-induced copies of every k-vertex pattern from
  degrees, codegrees (A^2), per-vertex triangles and 4-cliques, then invert
  the unitriangular spanning-subgraph matrix to get induced counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, perm

import numpy as np

from . import catalog
from .catalog import SmallGraph
from .errors import PreconditionError, UnsupportedError
from .graph import Graph, Prob, as_prob, colex_pairs

BRUTE_SUBSET_CAP = 5_000_000
_CHUNK = 1 << 16


@dataclass(frozen=True)
class CensusResult:
    k: int
    n: int
    counts: dict[SmallGraph, int]

    def __getitem__(self, F: SmallGraph | str) -> int:
        if isinstance(F, str):
            F = catalog.get(F)
        return self.counts[F]

    def total(self) -> int:
        return sum(self.counts.values())

    def to_dict(self) -> dict:
        return {"k": self.k, "n": self.n, "counts": {str(F): c for F, c in self.counts.items()}}


@dataclass(frozen=True)
class DeviationResult:
    k: int
    n: int
    p: Prob
    counts: dict[SmallGraph, int]
    expected: dict[SmallGraph, Prob]
    per_class: dict[SmallGraph, Prob]
    u: Prob
    argmax: SmallGraph

    def to_dict(self) -> dict:
        from .reporting import jsonable

        return {
            "k": self.k,
            "n": self.n,
            "p": jsonable(self.p),
            "u_k": jsonable(self.u),
            "argmax": str(self.argmax),
            "argmax_key": self.argmax.key,
            "classes": {
                str(F): {
                    "key": F.key,
                    "count": self.counts[F],
                    "expected": jsonable(self.expected[F]),
                    "deviation": jsonable(self.per_class[F]),
                }
                for F in self.counts
            },
        }


# ---------------------------------------------------------------- brute force


def _combination_chunks(n: int, k: int):
    it = combinations(range(n), k)
    while True:
        block = np.fromiter(
            (v for c in _take(it, _CHUNK) for v in c), dtype=np.intp
        ).reshape(-1, k)
        if not len(block):
            return
        yield block


def _take(it, m):
    for _, c in zip(range(m), it):
        yield c


def census_vector_brute(adj: np.ndarray, k: int) -> np.ndarray:
    """Counts indexed like ``enumerate_classes(k)``, by subset enumeration."""
    n = adj.shape[0]
    classes = catalog.enumerate_classes(k)
    counts = np.zeros(len(classes), dtype=np.int64)
    if k > n:
        return counts
    if comb(n, k) > BRUTE_SUBSET_CAP:
        raise PreconditionError(f"brute census over C({n},{k}) subsets exceeds the cap")
    if k == 1:
        counts[0] = n
        return counts
    lut = catalog.class_lookup(k)
    local = [(i, j) for j in range(k) for i in range(j)]
    for block in _combination_chunks(n, k):
        mask = np.zeros(len(block), dtype=np.int64)
        for b, (i, j) in enumerate(local):
            mask |= adj[block[:, i], block[:, j]].astype(np.int64) << b
        counts += np.bincount(lut[mask], minlength=len(classes))
    return counts


def census_matrix(rows: np.ndarray, n: int, k: int) -> np.ndarray:
    """Census of many graphs at once.

    ``rows`` has shape ``(B, C(n,2))``: 0/1 pair indicators in colex order.
    Returns a ``(B, #classes)`` int array.
    """
    rows = np.asarray(rows)
    classes = catalog.enumerate_classes(k)
    out = np.zeros((rows.shape[0], len(classes)), dtype=np.int64)
    if k > n:
        return out
    if k == 1:
        out[:, 0] = n
        return out
    lut = catalog.class_lookup(k)
    pidx = {(int(i), int(j)): t for t, (i, j) in enumerate(colex_pairs(n))}
    local = [(i, j) for j in range(k) for i in range(j)]
    bidx = np.arange(rows.shape[0])
    for sub in combinations(range(n), k):
        mask = np.zeros(rows.shape[0], dtype=np.int64)
        for b, (i, j) in enumerate(local):
            mask |= rows[:, pidx[(sub[i], sub[j])]].astype(np.int64) << b
        out[bidx, lut[mask]] += 1
    return out


# ------------------------------------------------------------------ fast path


def _core_subgraph_counts(adj: np.ndarray, k: int) -> dict[tuple[int, int], int]:
    """Non-induced copy counts of every isolated-free pattern on <= k vertices.

    Keyed by ``(v, canonical mask)`` as returned by ``catalog.strip_isolated``.
    """
    a = adj.astype(np.float32)
    n = a.shape[0]
    d = adj.sum(axis=1).astype(np.int64)
    m = int(d.sum()) // 2
    out: dict[tuple[int, int], int] = {(0, 0): 1, (2, 1): m}
    if k == 2:
        return out
    codeg = (a @ a).astype(np.int64)  # exact: entries < 2**24
    tri_at = (codeg * adj).sum(axis=1) // 2
    t = int(tri_at.sum()) // 3
    cherries = int((d * (d - 1) // 2).sum())

    def key(name):
        g = catalog.get(name)
        return (g.k, g.mask)

    out[key("P2")] = cherries
    out[key("K3")] = t
    if k == 3:
        return out
    iu = np.triu_indices(n, 1)
    cod_u = codeg[iu]
    adj_u = adj[iu]
    pair_c2 = cod_u * (cod_u - 1) // 2
    dm1 = d - 1
    out[key("2K2")] = m * (m - 1) // 2 - cherries
    out[key("P3")] = int(dm1 @ (adj.astype(np.int64) @ dm1)) // 2 - 3 * t
    out[key("K1,3")] = int((d * (d - 1) * (d - 2) // 6).sum())
    out[key("C4")] = int(pair_c2.sum()) // 2
    out[key("paw")] = int((tri_at * (d - 2)).sum())
    out[key("diamond")] = int(pair_c2[adj_u].sum())
    out[key("K4")] = count_k4(adj)
    return out


def count_k4(adj: np.ndarray) -> int:
    """Number of 4-cliques: triangles among the higher-numbered neighbours of each vertex."""
    a = adj.astype(np.float32)
    n = a.shape[0]
    total = 0
    for i in range(n - 3):
        nb = np.flatnonzero(adj[i, i + 1:]) + i + 1
        if len(nb) < 3:
            continue
        b = a[np.ix_(nb, nb)]
        total += int(((b @ b) * b).sum(dtype=np.float64))
    return total // 6


def census_vector_fast(adj: np.ndarray, k: int) -> np.ndarray:
    if k > 4:
        raise UnsupportedError("fast census is available for k <= 4 only")
    n = adj.shape[0]
    classes = catalog.enumerate_classes(k)
    if k > n:
        return np.zeros(len(classes), dtype=np.int64)
    if k == 1:
        return np.array([n], dtype=np.int64)
    cores = _core_subgraph_counts(adj, k)
    # non-induced counts with isolated vertices filled from the rest of [n]
    c = []
    for H in classes:
        v, core = catalog.strip_isolated(k, H.mask)
        c.append(cores[(v, core)] * comb(n - v, k - v))
    s = catalog.spanning_subgraph_counts(k)
    order = sorted(range(len(classes)), key=lambda t: -classes[t].e)
    N = [0] * len(classes)
    for f in order:
        N[f] = c[f] - sum(int(s[f, g]) * N[g] for g in range(len(classes)) if g != f and s[f, g])
    return np.array(N, dtype=np.int64)


# ----------------------------------------------------------------- public API


def _check_loopless(G: Graph) -> None:
    if G.loops:
        raise UnsupportedError("induced census is defined for loopless graphs")


def induced_census(G: Graph, k: int, method: str = "auto") -> CensusResult:
    _check_loopless(G)
    if not 1 <= k <= min(G.n, catalog.MAX_K):
        raise PreconditionError(f"need 1 <= k <= min(n, {catalog.MAX_K}); got k={k}, n={G.n}")
    if method == "auto":
        method = "fast" if k <= 4 else "brute"
    if method == "fast":
        vec = census_vector_fast(G.adj, k)
    elif method == "brute":
        vec = census_vector_brute(G.adj, k)
    else:
        raise ValueError(f"unknown census method {method!r}")
    classes = catalog.enumerate_classes(k)
    return CensusResult(k, G.n, {F: int(c) for F, c in zip(classes, vec)})


def expected_count(F: SmallGraph, n: int, p) -> Prob:
    """E N(F, G(n,p)) = (n)_k / |Aut F| * p^e (1-p)^(C(k,2)-e)."""
    if n < F.k:
        raise PreconditionError(f"n={n} is smaller than v(F)={F.k}")
    p = as_prob(p)
    k, e = F.k, F.e
    val = p**e * (1 - p) ** (comb(k, 2) - e)
    ratio = Fraction(perm(n, k), F.aut)
    return ratio * val if isinstance(p, Fraction) else float(ratio) * val


def deviation_from_census(census: CensusResult, p) -> DeviationResult:
    p = as_prob(p)
    n, k = census.n, census.k
    expected = {F: expected_count(F, n, p) for F in census.counts}
    per = {F: abs(census.counts[F] - expected[F]) for F in census.counts}
    arg = max(per, key=lambda F: (per[F], -F.mask))
    return DeviationResult(k, n, p, dict(census.counts), expected, per, per[arg], arg)


def deviation(G: Graph, p, k: int, method: str = "auto") -> DeviationResult:
    return deviation_from_census(induced_census(G, k, method), p)
