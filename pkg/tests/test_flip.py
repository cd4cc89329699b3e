from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np
import pytest

from quasirand import catalog
from quasirand.census import census_vector_fast, deviation
from quasirand.errors import InvalidPairError, PreconditionError, ReservoirShortfall
from quasirand.flip import (
    FlipReservoir,
    FlipState,
    balance_edge_count,
    bounded_degree_edges,
    bounded_degree_subgraph,
    build_flip_reservoir,
    classify_pairs,
    construct,
    greedy_matching,
    high_estar,
    pair_statistics,
    pair_statistics_matrix,
    phase_two_budget,
    verify_sample_properties,
    _v5_histogram,
)
from quasirand.graph import Graph, complement, flip_pair, nearest_integer_target, sample_gnp
from quasirand.signed import _rooted_table, pair_delta, signed_sum


def test_pair_statistics_on_triangle():
    st = pair_statistics(Graph.complete(3), Fraction(1, 2), 1, 2)
    assert (st.Z0star, st.Z1star, st.Z2star) == (0, 0, 1)
    assert st.Z0 == Fraction(-1, 4) and st.Z2 == Fraction(3, 4)
    assert st.Y1 == 1 and st.Y2 == Fraction(1, 4)


def test_pair_statistics_on_empty_graph():
    p = Fraction(1, 3)
    st = pair_statistics(Graph.empty(10), p, 0, 9)
    assert st.Z0 == 8 - 8 * (1 - p) ** 2
    assert st.Z2 == -8 * p**2
    assert st.Y1 == st.Z2 - st.Z0


def test_pair_statistics_errors():
    with pytest.raises(InvalidPairError):
        pair_statistics(Graph.empty(5), 0.5, 2, 2)
    with pytest.raises(InvalidPairError):
        pair_statistics(Graph.empty(5), 0.5, 0, 5)
    with pytest.raises(PreconditionError):
        pair_statistics(Graph.empty(2), 0.5, 0, 1)


def test_statistics_matrix_matches_scalar():
    G = sample_gnp(25, 0.4, seed=9)
    y1, y2 = pair_statistics_matrix(G, 0.4)
    for i, j in [(0, 1), (3, 20), (24, 7)]:
        st = pair_statistics(G, Fraction(2, 5), i, j)
        assert abs(y1[i, j] - float(st.Y1)) < 1e-9 and abs(y2[i, j] - float(st.Y2)) < 1e-9


def test_flip_updates_match_recomputation():
    rng = np.random.default_rng(5)
    for t in range(200):
        n = int(rng.integers(4, 21))
        p = Fraction(int(rng.integers(1, 10)), 10)
        G = sample_gnp(n, float(p), seed=t)
        state = FlipState(G, p)
        i, j = sorted(rng.choice(n, 2, replace=False).tolist())
        sign = -1 if G.has_edge(i, j) else 1
        y1, y2 = state.flip(i, j)
        H = state.graph()
        assert H == flip_pair(G, i, j)
        assert state.s_k2 == signed_sum(catalog.get("K2"), H, p)
        assert state.s_p2 == signed_sum(catalog.get("P2"), H, p)
        assert state.s_k3 == signed_sum(catalog.get("K3"), H, p)
        assert state.s_p2 - signed_sum(catalog.get("P2"), G, p) == sign * y1
        assert state.s_k3 - signed_sum(catalog.get("K3"), G, p) == sign * y2


def test_classes_follow_their_definitions():
    p = 0.5
    G = sample_gnp(120, p, seed=1)
    cl = classify_pairs(G, p, 4, 0.005)
    t1, t2 = np.sqrt(p * 120), p * np.sqrt(120)
    signs = {1: (1, 1), 2: (1, -1), 3: (-1, 1), 4: (-1, -1)}
    for c, pairs in cl.classes.items():
        for i, j in pairs[:50].tolist():
            y1, y2 = cl.Y1[i, j], cl.Y2[i, j]
            if c == 5:
                assert not G.has_edge(i, j) and abs(y1) < 0.1 * t1 and abs(y2) < 0.1 * t2
            else:
                s1, s2 = signs[c]
                assert G.has_edge(i, j) and s1 * y1 > t1 and s2 * y2 > t2
                assert cl.class_of(i, j) == c
    all_pairs = np.concatenate(list(cl.classes.values()))
    assert len({tuple(x) for x in all_pairs.tolist()}) == len(all_pairs)


def test_sample_properties_frequencies():
    a = c = 0
    for s in range(100):
        rep = verify_sample_properties(sample_gnp(200, 0.5, seed=[200, s]), 0.5, 4, seed=s)
        a += rep.A_ok
        c += rep.C_ok
    assert a >= 90 and c >= 60


def test_empty_graph_fails_property_b():
    rep = verify_sample_properties(Graph.empty(200), 0.5, 4)
    assert not rep.B_ok and not rep.ok
    assert rep.class_sizes[1] == 0


def test_property_check_rejects_bad_regime():
    with pytest.raises(PreconditionError):
        verify_sample_properties(Graph.empty(100), 0.001, 4)


def test_v5_histogram_exact_agrees_with_enumeration():
    G = sample_gnp(12, 0.5, seed=3)
    F = catalog.get("C5")
    hist = _v5_histogram(G.adj, 2, 7, None, None)
    tab = np.array([float(v) for v in _rooted_table(F, 0.5)])
    assert abs(tab @ hist - float(pair_delta(F, G, Fraction(1, 2), 2, 7))) < 1e-9
    assert hist.sum() == comb(10, 3)


def test_high_estar_flags_large_deltas():
    G = sample_gnp(30, 0.5, seed=0)
    pairs = np.array([(0, 1), (4, 9)])
    hi, method = high_estar(G, 0.5, 4, eps=1e-12, pairs=pairs)
    assert method == "exact" and not hi.any()
    hi, _ = high_estar(G, 0.5, 4, eps=1e12, pairs=pairs)
    assert hi.all()


def test_greedy_matching_examples():
    star = Graph.from_edges(6, [(0, v) for v in range(1, 6)])
    assert len(greedy_matching(star)) == 1
    perfect = Graph.from_edges(10, [(2 * t, 2 * t + 1) for t in range(5)])
    assert len(greedy_matching(perfect)) == 5
    assert len(greedy_matching(Graph.from_edges(3, [(0, 1), (1, 2)]))) >= 1
    c6 = Graph.from_edges(6, [(t, (t + 1) % 6) for t in range(6)])
    assert len(greedy_matching(c6)) == 3
    with pytest.raises(PreconditionError):
        greedy_matching(Graph.empty(4))


def _check_bounded(H: Graph, m: int) -> None:
    B = bounded_degree_subgraph(H, m)
    assert (B.adj <= H.adj).all()
    assert B.max_degree() <= max(m, 0) or m >= H.max_degree()
    if H.num_edges:
        assert B.num_edges >= m * H.num_edges / (4 * H.max_degree()) - 1e-9 or m >= H.max_degree()


def test_bounded_degree_examples():
    K5 = Graph.complete(5)
    B = bounded_degree_subgraph(K5, 2)
    assert B.max_degree() <= 2 and B.num_edges >= 2 * 10 / 16
    _check_bounded(K5, 2)
    c6 = Graph.from_edges(6, [(t, (t + 1) % 6) for t in range(6)])
    B = bounded_degree_subgraph(c6, 1)
    assert B.max_degree() <= 1 and B.num_edges >= 1
    assert bounded_degree_subgraph(K5, 10) == K5
    assert bounded_degree_edges([], 4, 2) == ([], "empty input")


def test_bounded_degree_random():
    rng = np.random.default_rng(2)
    for t in range(100):
        n = int(rng.integers(3, 40))
        H = sample_gnp(n, float(rng.uniform(0.05, 0.9)), seed=t)
        if H.num_edges == 0:
            continue
        _check_bounded(H, int(rng.integers(1, max(2, H.max_degree() + 2))))


def test_reservoir_shortfall_at_small_n():
    G = sample_gnp(30, 0.5, seed=1)
    with pytest.raises(ReservoirShortfall) as info:
        build_flip_reservoir(G, 0.5, 4)
    ctx = info.value.details
    assert ctx["available"] < ctx["required"]


def test_reservoir_pairs_are_distinct_and_classified():
    G = sample_gnp(400, 0.5, seed=[400, 0, 0])
    res = build_flip_reservoir(G, 0.5, 4)
    seen = set()
    for c, pairs in res.classes.items():
        assert len(pairs) >= res.floors[c]
        for e in pairs:
            assert e not in seen
            seen.add(e)
            assert G.has_edge(*e) == (c != 5)


def _tiny_reservoir(n, classes):
    full = {c: classes.get(c, []) for c in range(1, 6)}
    return FlipReservoir(n, full, m=10, max_degree=n, floors={c: 0 for c in full},
                         excluded={c: 0 for c in full}, estar_method="manual")


def test_balance_edge_count_crafted():
    p = Fraction(1, 2)
    G = Graph.complete(5)  # 10 edges, target 5
    res = _tiny_reservoir(5, {c: [e] for c, e in zip(range(1, 5), [(0, 1), (0, 2), (1, 3), (2, 4)])}
                          | {1: [(0, 1), (3, 4)]})
    out = balance_edge_count(G, p, res)
    assert out.num_edges == nearest_integer_target(5, p) == 5
    G = Graph.empty(5)
    out = balance_edge_count(G, p, _tiny_reservoir(5, {5: [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]}))
    assert out.num_edges == 5


def test_balance_edge_count_spec_instance():
    p = Fraction(1, 2)
    G = Graph.from_edges(5, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 4), (2, 3), (3, 4)])
    res = _tiny_reservoir(5, {1: [(0, 1)], 3: [(2, 3)]})
    out = balance_edge_count(G, p, res)
    assert out.num_edges == 5 and signed_sum(catalog.get("K2"), out, p) == 0
    assert len(res.used) == 2


def test_balance_edge_count_noop_at_target():
    G = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
    res = _tiny_reservoir(5, {1: [(0, 1)], 5: [(0, 2)]})
    assert balance_edge_count(G, Fraction(1, 2), res) == G and not res.used


def test_swap_keeps_edge_count():
    G = sample_gnp(20, 0.5, seed=4)
    st = FlipState(G, Fraction(1, 2))
    e = G.edges()[0]
    non = next((i, j) for i in range(20) for j in range(i + 1, 20) if not G.has_edge(i, j))
    before = st.s_k2
    st.flip(*e)
    st.flip(*non)
    assert st.s_k2 == before and st.edges == G.num_edges


def test_phase_two_budget_fallback():
    b4, note4 = phase_two_budget(1000, 0.5, 4, 20)
    assert b4 > 0 and note4.startswith("(C")
    b5, note5 = phase_two_budget(1000, 0.5, 5, 20)
    assert b5 > 0 and note5.startswith("C p")


def test_construct_precondition():
    with pytest.raises(PreconditionError):
        construct(100, 0.001, 4, seed=1)
    with pytest.raises(PreconditionError):
        construct(400, 0.5, 2, seed=1)


@pytest.mark.slow
def test_construct_n400():
    r = construct(400, 0.5, 4, seed=1)
    G = r.graph
    assert G.num_edges == nearest_integer_target(400, Fraction(1, 2))
    assert abs(r.value("P2")) < r.p * 400 and abs(r.value("K3")) < r.p * 400
    assert r.u_k == deviation(G, r.p, 4).u
    assert r.u_k == r.u_k_via_decomposition
    assert r.bookkeeping_max_rel_error < 1e-9
    assert r.D == 0
    # every flip used a distinct reservoir pair
    assert r.reservoir["used"] == r.phase1_flips + 2 * r.phase2_steps


@pytest.mark.slow
def test_reservoir_at_n1000():
    G = sample_gnp(1000, 0.5, seed=[1, 0, 0])
    res = build_flip_reservoir(G, 0.5, 4)
    for c, pairs in res.classes.items():
        assert len(pairs) >= res.floors[c] >= 1
    assert res.max_degree <= 320 * 20 / 0.005


@pytest.mark.slow
def test_construct_complement_route():
    r = construct(400, 0.7, 4, seed=2)
    assert r.complement_route and r.p == Fraction(7, 10)
    assert r.u_k == deviation(r.graph, r.p, 4).u
    inner = construct(400, 0.3, 4, seed=2)
    assert complement(inner.graph) == r.graph
    for F, v in inner.S_after.items():
        assert r.S_after[F] == (-v if F.e % 2 else v)


@pytest.mark.slow
def test_class_occupancy_over_seeds():
    p, n = 0.5, 400
    t1, t2 = np.sqrt(p * n), p * np.sqrt(n)
    total = comb(n, 2)
    for s in range(20):
        G = sample_gnp(n, p, seed=[n, s])
        y1, y2 = pair_statistics_matrix(G, p)
        iu, ju = np.triu_indices(n, 1)
        Y1, Y2, e = y1[iu, ju], y2[iu, ju], G.adj[iu, ju]
        for s1 in (1, -1):
            for s2 in (1, -1):
                assert (e & (s1 * Y1 > t1) & (s2 * Y2 > t2)).sum() / total >= 5e-4
        assert (~e & (np.abs(Y1) < 0.1 * t1) & (np.abs(Y2) < 0.1 * t2)).sum() / total >= 5e-4
