"""Exhaustive and randomized identity suites (exact rational arithmetic).

Each suite returns a summary dict with the largest absolute residual seen;
every residual is an exact Fraction, so "passes" means exactly zero.
"""

from __future__ import annotations

import time
from fractions import Fraction
from math import comb

import numpy as np

from . import catalog
from .census import census_matrix, census_vector_brute
from .graph import Graph, as_prob, sample_gnp
from .signed import decomposition_coefficients, edge_pair_weight, signed_sum_batch


def all_graph_rows(n: int) -> np.ndarray:
    """Colex pair rows of all 2^C(n,2) labeled graphs, ordered by mask."""
    npairs = comb(n, 2)
    masks = np.arange(1 << npairs, dtype=np.int64)
    return ((masks[:, None] >> np.arange(npairs)) & 1).astype(np.uint8)


def _signed_table(rows: np.ndarray, n: int, p, k: int) -> dict:
    return {F: signed_sum_batch(F, rows, n, p) for F in catalog.family(k)}


def decomposition_suite(n: int = 5, ps=("1/3", "1/2", "2/5"), max_vh: int = 4) -> dict:
    """N(H, G) - E N(H) - sum_F a_{F,H} S(F, G) over every labeled G on n vertices."""
    t0 = time.perf_counter()
    rows = all_graph_rows(n)
    worst = Fraction(0)
    checked = 0
    for p in ps:
        p = as_prob(p)
        S = _signed_table(rows, n, p, max_vh)
        for k in range(2, max_vh + 1):
            counts = census_matrix(rows, n, k)
            for h, H in enumerate(catalog.enumerate_classes(k)):
                dc = decomposition_coefficients(H, n)
                coeffs = dc.at(p)
                const = dc.constant_at(p)
                for g in range(len(rows)):
                    pred = const + sum(c * S[F][g] for F, c in coeffs.items())
                    worst = max(worst, abs(int(counts[g, h]) - pred))
                    checked += 1
    return {"suite": "decomposition", "n": n, "p": list(ps), "checks": checked,
            "max_abs_residual": worst, "ok": worst == 0, "seconds": time.perf_counter() - t0}


def quadratic_suite(n: int = 5, p="2/5") -> dict:
    """e(G)^2 = sum alpha_F N(F, G) and the S(K2)^2 expansion, over every labeled G."""
    t0 = time.perf_counter()
    p = as_prob(p)
    rows = all_graph_rows(n)
    e = rows.sum(axis=1).astype(np.int64)
    rhs = np.zeros(len(rows), dtype=np.int64)
    for k in (2, 3, 4):
        alpha = np.array([edge_pair_weight(F) for F in catalog.enumerate_classes(k)])
        rhs += census_matrix(rows, n, k) @ alpha
    r1 = int(np.abs(e * e - rhs).max())
    get = catalog.get
    sk2, sp2, s2k2 = (signed_sum_batch(get(x), rows, n, p) for x in ("K2", "P2", "2K2"))
    const = p * (1 - p) * comb(n, 2)
    r2 = max(abs(a * a - (const + (1 - 2 * p) * a + 2 * b + 2 * c)) for a, b, c in zip(sk2, sp2, s2k2))
    return {"suite": "quadratic", "n": n, "p": p, "graphs": len(rows),
            "edge_square_max_residual": r1, "signed_square_max_residual": r2,
            "ok": r1 == 0 and r2 == 0, "seconds": time.perf_counter() - t0}


def stepup_suite(count: int = 500, n_max: int = 12, seed: int = 0, max_k: int = 4) -> dict:
    """(n-k) N(F, G) = sum_{F'} N(F, F') N(F', G) over (k+1)-classes F', random G."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0
    checks = 0
    for t in range(count):
        n = int(rng.integers(max_k + 1, n_max + 1))
        p = float(rng.uniform(0.1, 0.9))
        G = sample_gnp(n, p, seed=[seed, t])
        vec = {k: census_vector_brute(G.adj, k) for k in range(1, max_k + 2)}
        for k in range(1, max_k + 1):
            up = catalog.enumerate_classes(k + 1)
            for f, F in enumerate(catalog.enumerate_classes(k)):
                rhs = sum(catalog.count_induced_small(F, Fp) * int(vec[k + 1][g]) for g, Fp in enumerate(up))
                worst = max(worst, abs((n - k) * int(vec[k][f]) - rhs))
                checks += 1
    return {"suite": "stepup", "graphs": count, "n_max": n_max, "seed": seed, "checks": checks,
            "max_abs_residual": worst, "ok": worst == 0, "seconds": time.perf_counter() - t0}


def consistency_check(G: Graph, p, k: int) -> Fraction | float:
    """Largest |u_F - |sum_F' a_{F',F} S(F', G)|| over k-classes F."""
    from .census import deviation
    from .signed import signed_sum

    dev = deviation(G, p, k)
    S = {F: signed_sum(F, G, p) for F in catalog.family(max(k, 2))}
    worst = 0
    for H, u in dev.per_class.items():
        coeffs = decomposition_coefficients(H, G.n).at(p)
        worst = max(worst, abs(u - abs(sum(c * S[F] for F, c in coeffs.items()))))
    return worst


__all__ = ["all_graph_rows", "decomposition_suite", "quadratic_suite", "stepup_suite",
           "consistency_check"]
