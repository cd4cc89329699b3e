"""graph6 and loopgraph readers/writers.

loopgraph is a small text format for graphs that may carry loops::

    LG <n>
    i j        # one line per edge, 0-based, i <= j; i == j is a loop
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import GraphParseError, UnsupportedError
from .graph import Graph

GRAPH6_HEADER = b">>graph6<<"


def _encode_n(n: int) -> bytes:
    if n < 63:
        return bytes([n + 63])
    if n < 258048:
        return bytes([126] + [((n >> s) & 63) + 63 for s in (12, 6, 0)])
    return bytes([126, 126] + [((n >> s) & 63) + 63 for s in (30, 24, 18, 12, 6, 0)])


def to_graph6(G: Graph) -> bytes:
    if G.loops:
        raise UnsupportedError("graph6 cannot encode loop-enabled graphs; use loopgraph")
    bits = G.pair_bits().astype(np.uint8)
    pad = (-len(bits)) % 6
    bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)]).reshape(-1, 6)
    body = (bits @ (1 << np.arange(5, -1, -1))) + 63
    return _encode_n(G.n) + bytes(body.astype(np.uint8).tolist())


def from_graph6(data: bytes, offset: int = 0) -> Graph:
    """Decode one graph6 record (no trailing newline)."""
    data = data.strip(b"\r")
    if data.startswith(GRAPH6_HEADER):
        data = data[len(GRAPH6_HEADER):]
        offset += len(GRAPH6_HEADER)
    if not data:
        raise GraphParseError("empty graph6 record", offset)
    for pos, c in enumerate(data):
        if not 63 <= c <= 126:
            raise GraphParseError(f"byte {c!r} outside the graph6 range 63..126", offset + pos)
    if data[0] != 126:
        n, pos = data[0] - 63, 1
    elif len(data) > 1 and data[1] == 126:
        if len(data) < 8:
            raise GraphParseError("truncated 8-byte size header", offset + len(data))
        n, pos = 0, 8
        for c in data[2:8]:
            n = (n << 6) | (c - 63)
    else:
        if len(data) < 4:
            raise GraphParseError("truncated 4-byte size header", offset + len(data))
        n, pos = 0, 4
        for c in data[1:4]:
            n = (n << 6) | (c - 63)
    nbits = n * (n - 1) // 2
    need = (nbits + 5) // 6
    body = data[pos:]
    if len(body) != need:
        raise GraphParseError(
            f"expected {need} body bytes for n={n}, found {len(body)}",
            offset + pos + min(len(body), need),
        )
    vals = np.frombuffer(body, dtype=np.uint8).astype(np.int64) - 63
    bits = ((vals[:, None] >> np.arange(5, -1, -1)) & 1).ravel()[:nbits]
    return Graph.from_pair_bits(n, bits)


def to_loopgraph(G: Graph) -> str:
    lines = [f"LG {G.n}"]
    ii, jj = np.nonzero(np.triu(G.adj))
    lines += [f"{i} {j}" for i, j in zip(ii.tolist(), jj.tolist())]
    return "\n".join(lines) + "\n"


def from_loopgraph(text: str) -> Graph:
    offset = 0
    n = None
    a = None
    for line in text.splitlines(keepends=True):
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            toks = stripped.split()
            if n is None:
                if len(toks) != 2 or toks[0] != "LG" or not toks[1].isdigit():
                    raise GraphParseError("expected header 'LG <n>'", offset)
                n = int(toks[1])
                a = np.zeros((n, n), dtype=bool)
            else:
                if len(toks) != 2 or not all(t.isdigit() for t in toks):
                    raise GraphParseError(f"malformed edge line {stripped!r}", offset)
                i, j = int(toks[0]), int(toks[1])
                if i > j or j >= n:
                    raise GraphParseError(f"edge ({i}, {j}) violates 0 <= i <= j < {n}", offset)
                a[i, j] = a[j, i] = True
        offset += len(line.encode())
    if n is None:
        raise GraphParseError("missing 'LG <n>' header", 0)
    return Graph(a, loops=True)


def _infer_format(path: Path, head: bytes | None = None) -> str:
    suffix = path.suffix.lower()
    if suffix in (".g6", ".graph6"):
        return "graph6"
    if suffix in (".lg", ".loopgraph"):
        return "loopgraph"
    if head is not None and head.lstrip().startswith(b"LG"):
        return "loopgraph"
    return "graph6"


def read_graphs(path, format: str | None = None) -> list[Graph]:
    path = Path(path)
    raw = path.read_bytes()
    fmt = format or _infer_format(path, raw[:16])
    if fmt == "loopgraph":
        return [from_loopgraph(raw.decode())]
    if fmt != "graph6":
        raise UnsupportedError(f"unknown graph format {fmt!r}")
    graphs, offset = [], 0
    for line in raw.split(b"\n"):
        if line.strip():
            graphs.append(from_graph6(line, offset))
        offset += len(line) + 1
    if not graphs:
        raise GraphParseError("no graph6 records found", 0)
    return graphs


def read_graph(path, format: str | None = None) -> Graph:
    return read_graphs(path, format)[0]


def write_graph(G: Graph, path, format: str | None = None) -> None:
    """Write atomically (temp file + rename)."""
    path = Path(path)
    fmt = format or _infer_format(path)
    if fmt == "graph6":
        payload = to_graph6(G) + b"\n"
    elif fmt == "loopgraph":
        payload = to_loopgraph(G).encode()
    else:
        raise UnsupportedError(f"unknown graph format {fmt!r}")
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


__all__ = [
    "to_graph6", "from_graph6", "to_loopgraph", "from_loopgraph",
    "read_graph", "read_graphs", "write_graph",
]
