from __future__ import annotations

import numpy as np
import pytest

from quasirand.errors import GraphParseError, UnsupportedError
from quasirand.graph import Graph, sample_gnp
from quasirand.graphio import (
    from_graph6,
    from_loopgraph,
    read_graph,
    read_graphs,
    to_graph6,
    to_loopgraph,
    write_graph,
)


def test_k3_encodes_to_bw():
    assert to_graph6(Graph.complete(3)) == b"Bw"
    assert from_graph6(b"Bw") == Graph.complete(3)


def test_graph6_roundtrip_random():
    rng = np.random.default_rng(0)
    for t in range(1000):
        n = int(rng.integers(0, 31))
        G = sample_gnp(max(n, 1), float(rng.uniform(0.05, 0.95)), seed=t)
        assert from_graph6(to_graph6(G)) == G


def test_graph6_large_n_header():
    G = sample_gnp(70, 0.1, seed=1)
    data = to_graph6(G)
    assert data[0] == 126
    assert from_graph6(data) == G


def test_graph6_rejects_loops():
    with pytest.raises(UnsupportedError):
        to_graph6(Graph.empty(3, loops=True))


@pytest.mark.parametrize("data,offset", [(b"B", 1), (b"Bw?", 2), (b"B\x20", 1), (b"", 0)])
def test_graph6_parse_errors_carry_offsets(data, offset):
    with pytest.raises(GraphParseError) as err:
        from_graph6(data)
    assert err.value.offset == offset


def test_loopgraph_roundtrip_and_errors():
    G = sample_gnp(9, 0.4, seed=2, loops=True)
    assert from_loopgraph(to_loopgraph(G)) == G
    with pytest.raises(GraphParseError):
        from_loopgraph("LG 3\n2 1\n")
    with pytest.raises(GraphParseError):
        from_loopgraph("3\n")


def test_file_io_infers_format(tmp_path):
    G = sample_gnp(12, 0.5, seed=4)
    write_graph(G, tmp_path / "g.g6")
    assert read_graph(tmp_path / "g.g6") == G
    L = sample_gnp(6, 0.5, seed=4, loops=True)
    write_graph(L, tmp_path / "g.lg")
    assert read_graph(tmp_path / "g.lg") == L
    (tmp_path / "many.g6").write_bytes(b">>graph6<<Bw\nBw\n")
    assert len(read_graphs(tmp_path / "many.g6")) == 2
    assert not list(tmp_path.glob("*.tmp"))
