"""Numbered acceptance criteria, one test each.

Run ``pytest tests/test_acceptance.py`` (or this file directly); the terminal
summary ends with one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import json
import sys
import time
from fractions import Fraction
from math import sqrt

import numpy as np
import pytest

from quasirand import catalog
from quasirand.census import deviation
from quasirand.flip import construct
from quasirand.graph import Graph, nearest_integer_distance, sample_gnp
from quasirand.identities import decomposition_suite, quadratic_suite, stepup_suite
from quasirand.oracle import minimize_schatten, minimize_u_k
from quasirand.schatten import (
    bipartite_sum,
    schatten_norm,
    schatten_norm_bruteforce,
    schatten_trace,
    all_loop_graphs,
)
from quasirand.signed import pair_deltas, signed_stats

HALF = Fraction(1, 2)
CONSTRUCT_SEEDS = (1, 2, 3)

_built: dict = {}


def built(n: int, seed: int):
    """Construct once per (n, seed) and share between criteria 6 and 7."""
    if (n, seed) not in _built:
        t0 = time.perf_counter()
        rep = construct(n, HALF, 4, seed=seed)
        _built[n, seed] = (rep, time.perf_counter() - t0)
    return _built[n, seed]


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


@pytest.mark.criterion(1)
def test_decomposition_identity(detail):
    res, secs = timed(decomposition_suite, 5, ("1/3", "1/2", "2/5"), 4)
    detail(f"{res['checks']} checks, max residual {res['max_abs_residual']}, {secs:.1f}s")
    assert res["checks"] == 3 * 1024 * 17
    assert res["max_abs_residual"] == 0 and secs < 60


@pytest.mark.criterion(2)
def test_quadratic_identities(detail):
    res, secs = timed(quadratic_suite, 5, "2/5")
    detail(f"residuals {res['edge_square_max_residual']}, {res['signed_square_max_residual']} "
           f"over {res['graphs']} graphs, {secs:.2f}s")
    assert res["graphs"] == 1024
    assert res["edge_square_max_residual"] == 0 and res["signed_square_max_residual"] == 0
    assert secs < 30


@pytest.mark.criterion(3)
def test_step_up_identity(detail):
    res, secs = timed(stepup_suite, 500, 12, 0)
    detail(f"{res['checks']} checks on {res['graphs']} graphs, max residual {res['max_abs_residual']}, {secs:.1f}s")
    assert res["graphs"] == 500 and res["max_abs_residual"] == 0 and secs < 60


@pytest.mark.criterion(4)
def test_u2_oracle_equals_distance(detail):
    t0 = time.perf_counter()
    bad = []
    for n in range(4, 8):
        for p in (Fraction(3, 10), HALF, Fraction(2, 3)):  # 0.3 is read as 3/10
            got = minimize_u_k(n, p, 2).value
            want = nearest_integer_distance(n, p)
            if got != want:
                bad.append((n, p, got, want))
    secs = time.perf_counter() - t0
    detail(f"12 cases, {len(bad)} mismatches, {secs:.1f}s")
    assert not bad and secs < 600


@pytest.mark.criterion(5)
def test_min_u4_shape(detail, golden_dir):
    gold = {r["n"]: r for r in json.loads((golden_dir / "min_uk_p1-2_k4.json").read_text())["results"]}
    vals = {}
    for n in range(4, 8):
        r = minimize_u_k(n, HALF, 4)
        vals[n] = r.value
        assert r.to_dict()["min"] == gold[n]["min"]
    ratios = [float(v) / n**2 for n, v in vals.items()]
    spread = max(ratios) / min(ratios)
    detail("min u4 = " + ", ".join(f"{v}" for v in vals.values()) + f"; ratio spread {spread:.2f}")
    assert all(v > 0 for v in vals.values()) and spread <= 4


@pytest.mark.criterion(6)
def test_construction_postconditions(detail):
    lines, worst_t, ok = [], 0.0, True
    for n in (1000, 2000):
        for seed in CONSTRUCT_SEEDS:
            rep, secs = built(n, seed)
            p = rep.p
            good = (
                rep.S_K2_abs == nearest_integer_distance(n, p)
                and abs(rep.value("P2")) < p * n
                and abs(rep.value("K3")) < p * n
                and rep.bookkeeping_max_rel_error <= 1e-7
                and rep.graph.num_edges == round(p * n * (n - 1) / 2)
                and secs < 600
            )
            ok &= good
            worst_t = max(worst_t, secs)
            lines.append(f"n={n} s={seed} {'ok' if good else 'BAD'}")
    detail("; ".join(lines) + f"; slowest {worst_t:.0f}s")
    assert ok


@pytest.mark.criterion(7)
def test_scaling_band(detail):
    ratios = {}
    for n in (500, 1000, 2000):
        for seed in CONSTRUCT_SEEDS:
            rep, _ = built(n, seed)
            u = rep.u_k
            assert u == deviation(rep.graph, rep.p, 4).u
            ratios[n, seed] = float(u) / n**2
    spread = max(ratios.values()) / min(ratios.values())
    detail(f"u4/n^2 in [{min(ratios.values()):.4f}, {max(ratios.values()):.4f}], spread {spread:.2f}")
    assert spread <= 4


@pytest.mark.criterion(8)
def test_moment_bounds(detail):
    n, p, N, k = 100, 0.3, 200, 4
    fam = catalog.family(k)
    S = np.zeros((N, len(fam)))
    D = np.zeros((N, len(fam)))
    rng = np.random.default_rng(8)
    for t in range(N):
        G = sample_gnp(n, p, seed=[8, t])
        vals = signed_stats(G, p, k)
        S[t] = [float(vals[F]) for F in fam]
        i, j = sorted(rng.choice(n, 2, replace=False).tolist())
        D[t] = np.asarray(pair_deltas(G, p, fam, [(i, j)])[0], dtype=float)
    fails = []
    for f, F in enumerate(fam):
        var_s = p**F.e * n**F.k
        var_d = k * k * p ** (F.e - 1) * n ** (F.k - 2)
        if abs(S[:, f].mean()) > 4 * sqrt(var_s / N) or (S[:, f] ** 2).mean() > var_s:
            fails.append(f"S({F})")
        if abs(D[:, f].mean()) > 4 * sqrt(var_d / N) or (D[:, f] ** 2).mean() > var_d:
            fails.append(f"delta({F})")
    worst = max((S[:, f] ** 2).mean() / (p**F.e * n**F.k) for f, F in enumerate(fam))
    detail(f"{len(fam)} graphs F, {N} samples, violations {fails or 'none'}, "
           f"largest E[S^2]/bound {worst:.3f}")
    assert not fails


@pytest.mark.criterion(9)
def test_schatten_suite(detail):
    bad = []
    for n in (10, 100):
        for s in (4, 6):
            if abs(schatten_norm(Graph.empty(n, loops=True), 0.3, s) - 0.3) > 1e-12:
                bad.append(f"empty n={n} s={s}")
    small = [G for n in range(1, 5) for G in all_loop_graphs(n)]
    small += [sample_gnp(5, 0.5, seed=[9, t], loops=True) for t in range(200)]
    for G in small:
        for p in (0.3, 0.5):
            for s in (4, 6):
                if abs(schatten_norm_bruteforce(G, p, s) - schatten_norm(G, p, s)) > 1e-9:
                    bad.append(f"map-sum n={G.n} s={s}")
            b = bipartite_sum(G, p, 2, 2) ** 0.25 / G.n
            if abs(b - schatten_norm(G, p, 4)) > 1e-9:
                bad.append(f"K22 n={G.n}")
    ratios = []
    for n in (64, 128, 256, 512):
        scale = sqrt(0.25) * n ** (-3 / 8)
        for seed in range(10):
            G = sample_gnp(n, 0.5, seed=[n, seed], loops=True)
            for s in (4, 8):
                ratios.append(schatten_norm(G, 0.5, s) / scale)
    if not all(0.25 <= r <= 4 for r in ratios):
        bad.append("loop-random ratio band")
    detail(f"{len(small)} small graphs; loop-random ratio in [{min(ratios):.2f}, {max(ratios):.2f}]; "
           f"failures {bad[:3] or 'none'}")
    assert not bad


@pytest.mark.criterion(10)
def test_schatten_oracle(detail, golden_dir):
    gold = json.loads((golden_dir / "min_schatten_n4_p1-2_s4.json").read_text())["result"]
    runs = [minimize_schatten(4, HALF, 4) for _ in range(2)]
    detail(f"min = {runs[0].value:.12f} (trace {runs[0].trace}), golden {gold['min']:.12f}")
    assert runs[0].value <= 0.5
    assert all(r.to_dict() == gold for r in runs)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
