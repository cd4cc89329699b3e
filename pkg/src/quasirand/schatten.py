"""Schatten norms and complete-bipartite density norms of G - p.

M = A - pJ with diagonal 1-p at a loop and -p elsewhere.  The even-cycle
norm is ``n^-1 tr(M^s)^(1/s)``; the K_{a,b} norm is ``n^-1 X^(1/(a+b))`` with
X the (non-injective) homomorphism sum of K_{a,b} into M.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from .errors import UnsupportedError, WorkCapExceeded
from .graph import Graph, as_prob, sample_gnp

MAPSUM_CAP = 10**8
BIPARTITE_CAP = 10**9
_CHUNK = 1 << 16


def shifted_matrix(G: Graph, p) -> np.ndarray:
    p = float(as_prob(p))
    m = np.where(G.adj, 1.0 - p, -p)
    if not G.loops:
        np.fill_diagonal(m, -p)
    return m


def _check_s(s: int) -> None:
    if s % 2 or s < 4:
        raise UnsupportedError(f"Schatten order must be even and >= 4, got {s}")


def _matpow(m: np.ndarray, e: int) -> np.ndarray:
    result = None
    base = m
    while e:
        if e & 1:
            result = base if result is None else result @ base
        e >>= 1
        if e:
            base = base @ base
    return result


def schatten_trace(G: Graph, p, s: int) -> float:
    """tr(M^s) as the squared Frobenius norm of M^(s/2)."""
    _check_s(s)
    half = _matpow(shifted_matrix(G, p), s // 2)
    return math.fsum((half * half).ravel())


def schatten_norm(G: Graph, p, s: int) -> float:
    return schatten_trace(G, p, s) ** (1.0 / s) / G.n


def _maps(n: int, length: int):
    """All maps range(length) -> range(n), in chunks of rows."""
    total = n**length
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK))
        yield np.stack(np.unravel_index(idx, (n,) * length), axis=1)


def schatten_norm_bruteforce(G: Graph, p, s: int, cap: int = MAPSUM_CAP) -> float:
    """Sum over every closed walk map Z_s -> V of the product of M along it."""
    _check_s(s)
    n = G.n
    if n**s * s > cap:
        raise WorkCapExceeded(f"map sum needs {n**s * s} products, cap is {cap}", n=n, s=s, cap=cap)
    m = shifted_matrix(G, p)
    parts = []
    for phi in _maps(n, s):
        prod = np.ones(len(phi))
        for t in range(s):
            prod *= m[phi[:, t], phi[:, (t + 1) % s]]
        parts.append(math.fsum(prod))
    total = math.fsum(parts)
    return max(total, 0.0) ** (1.0 / s) / n


def bipartite_sum(G: Graph, p, a: int, b: int, cap: int = BIPARTITE_CAP) -> float:
    """X for K_{a,b}: sum over maps h of the smaller side of (sum_v prod_x M[h(x), v])^larger."""
    if a % 2 or b % 2 or a < 2 or b < 2:
        raise UnsupportedError(f"part sizes must be even and >= 2, got ({a}, {b})")
    small, large = sorted((a, b))
    n = G.n
    if n ** (small + 1) > cap:
        raise WorkCapExceeded(
            f"K_{{{a},{b}}} sum needs n^{small + 1} = {n ** (small + 1)} evaluations, cap is {cap}; "
            "use a smaller n",
            n=n, a=a, b=b, cap=cap,
        )
    m = shifted_matrix(G, p)
    parts = []
    for h in _maps(n, small):
        rows = m[h[:, 0]].copy()
        for x in range(1, small):
            rows *= m[h[:, x]]
        parts.append(math.fsum(rows.sum(axis=1) ** large))
    return math.fsum(parts)


def bipartite_norm(G: Graph, p, a: int, b: int, cap: int = BIPARTITE_CAP) -> float:
    return max(bipartite_sum(G, p, a, b, cap), 0.0) ** (1.0 / (a + b)) / G.n


def schatten_formula(n: int, p, s: int) -> float:
    """min{p(1-p), (p(1-p))^(1/2) n^(-(k-1)/(2k))} for s = 2k (constant 1)."""
    k = s // 2
    q = float(p) * (1 - float(p))
    return min(q, math.sqrt(q) * n ** (-(k - 1) / (2 * k)))


def bipartite_formula(n: int, p, a: int, b: int) -> float:
    """min{q^(4km), q^(2km) n^(-k)}^(1/(2k+2m)) for K_{2k,2m}, k <= m, q = p(1-p)."""
    k, m = sorted((a // 2, b // 2))
    q = float(p) * (1 - float(p))
    return min(q ** (4 * k * m), q ** (2 * k * m) * n ** (-k)) ** (1 / (2 * k + 2 * m))


def norm_constructions(n: int, p, s: int | None = 4, bipartite: tuple[int, int] | None = None,
                       seed: int = 0) -> dict:
    """Norms of the empty loop-graph and of a loop-enabled G(n, p), next to the Theta formula."""
    p = as_prob(p)
    empty = Graph.empty(n, loops=True)
    rand = sample_gnp(n, p, seed=seed, loops=True)
    if bipartite is None:
        _check_s(s)
        norm = lambda G: schatten_norm(G, p, s)  # noqa: E731
        formula = schatten_formula(n, p, s)
        k = s // 2
        scale = math.sqrt(float(p) * (1 - float(p))) * n ** (-(k - 1) / (2 * k))
        kind = {"s": s}
    else:
        a, b = bipartite
        norm = lambda G: bipartite_norm(G, p, a, b)  # noqa: E731
        formula = bipartite_formula(n, p, a, b)
        k, m = sorted((a // 2, b // 2))
        q = float(p) * (1 - float(p))
        scale = (q ** (2 * k * m) * n ** (-k)) ** (1 / (2 * k + 2 * m))
        kind = {"bipartite": [a, b]}
    e_val, r_val = norm(empty), norm(rand)
    return {
        "n": n, "p": p, "seed": seed, **kind,
        "empty": e_val,
        "looprandom": r_val,
        "formula": formula,
        "looprandom_over_random_scale": r_val / scale,
        "best": min(e_val, r_val),
        "best_over_formula": min(e_val, r_val) / formula,
    }


def all_loop_graphs(n: int):
    """Every loop-enabled graph on n vertices (2^(C(n,2)+n) of them)."""
    slots = [(i, j) for j in range(n) for i in range(j + 1)]
    for bits in product((False, True), repeat=len(slots)):
        a = np.zeros((n, n), dtype=bool)
        for (i, j), b in zip(slots, bits):
            if b:
                a[i, j] = a[j, i] = True
        yield Graph(a, loops=True)
