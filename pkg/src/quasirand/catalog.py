"""Isomorphism classes of graphs on at most five vertices.

A k-vertex graph is an int bitmask over the C(k,2) colex pairs; the
canonical representative of a class is its minimum mask over all k!
relabelings.  Everything here is computed once and cached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cache
from itertools import combinations, permutations
from math import comb, factorial

import numpy as np

from .errors import UnsupportedError

MAX_K = 5


def _pairs(k: int) -> list[tuple[int, int]]:
    return [(i, j) for j in range(k) for i in range(j)]


def _bit(i: int, j: int) -> int:
    if i > j:
        i, j = j, i
    return j * (j - 1) // 2 + i


def mask_from_edges(k: int, edges) -> int:
    m = 0
    for i, j in edges:
        m |= 1 << _bit(i, j)
    return m


def edges_from_mask(k: int, mask: int) -> list[tuple[int, int]]:
    return [pq for b, pq in enumerate(_pairs(k)) if mask >> b & 1]


@cache
def _perm_tables(k: int) -> np.ndarray:
    """``tab[π, b]`` is the bit that pair ``b`` moves to under relabeling π."""
    pairs = _pairs(k)
    return np.array(
        [[_bit(pi[i], pi[j]) for i, j in pairs] for pi in permutations(range(k))],
        dtype=np.int64,
    )


@cache
def _images(k: int) -> np.ndarray:
    """``img[π, mask]``: every mask relabeled by every permutation."""
    npairs = comb(k, 2)
    masks = np.arange(1 << npairs, dtype=np.int64)
    bits = (masks[None, :] >> np.arange(npairs)[:, None]) & 1
    tab = _perm_tables(k)
    return (bits[None, :, :] << tab[:, :, None]).sum(axis=1)


@dataclass(frozen=True)
class SmallGraph:
    """Canonical representative of an isomorphism class on ``k`` vertices."""

    k: int
    mask: int
    aut: int
    name: str = field(default="", compare=False)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return edges_from_mask(self.k, self.mask)

    @property
    def e(self) -> int:
        return bin(self.mask).count("1")

    @property
    def v(self) -> int:
        return self.k

    def degrees(self) -> list[int]:
        deg = [0] * self.k
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    @property
    def has_isolated(self) -> bool:
        return min(self.degrees(), default=0) == 0

    @property
    def key(self) -> str:
        """Stable address: ``"<k>:<hex mask>"``."""
        return f"{self.k}:{self.mask:x}"

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.k, self.k), dtype=bool)
        for i, j in self.edges:
            a[i, j] = a[j, i] = True
        return a

    def __str__(self) -> str:
        return self.name or self.key


# Conventional names for isolated-vertex-free graphs.  P2 is the path with
# two edges, P3 with three, and so on.
_CORE_NAMES: dict[int, dict[str, list[tuple[int, int]]]] = {
    2: {"K2": [(0, 1)]},
    3: {"P2": [(0, 1), (1, 2)], "K3": [(0, 1), (1, 2), (0, 2)]},
    4: {
        "2K2": [(0, 1), (2, 3)],
        "P3": [(0, 1), (1, 2), (2, 3)],
        "K1,3": [(0, 1), (0, 2), (0, 3)],
        "C4": [(0, 1), (1, 2), (2, 3), (0, 3)],
        "paw": [(0, 1), (1, 2), (0, 2), (2, 3)],
        "diamond": [(0, 1), (1, 2), (0, 2), (1, 3), (2, 3)],
        "K4": _pairs(4),
    },
    5: {
        "K2+P2": [(0, 1), (2, 3), (3, 4)],
        "K2+K3": [(0, 1), (2, 3), (3, 4), (2, 4)],
        "P4": [(0, 1), (1, 2), (2, 3), (3, 4)],
        "K1,4": [(0, 1), (0, 2), (0, 3), (0, 4)],
        "chair": [(0, 1), (0, 2), (0, 3), (3, 4)],
        "C5": [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)],
        "bull": [(0, 1), (1, 2), (0, 2), (1, 3), (2, 4)],
        "cricket": [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)],
        "bowtie": [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)],
        "banner": [(0, 1), (1, 2), (2, 3), (0, 3), (3, 4)],
        "kite": [(0, 1), (1, 2), (0, 2), (1, 3), (2, 3), (3, 4)],
        "dart": [(0, 1), (1, 2), (0, 2), (1, 3), (2, 3), (1, 4)],
        "house": [(0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (1, 4)],
        "K2,3": [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)],
        "gem": [(1, 2), (2, 3), (3, 4), (0, 1), (0, 2), (0, 3), (0, 4)],
        "W4": [(1, 2), (2, 3), (3, 4), (1, 4), (0, 1), (0, 2), (0, 3), (0, 4)],
        "K5-e": [pq for pq in _pairs(5) if pq != (3, 4)],
        "K5": _pairs(5),
    },
}


def canonical_mask(k: int, mask: int) -> int:
    return int(_images(k)[:, mask].min())


@cache
def _name_table() -> dict[tuple[int, int], str]:
    names: dict[tuple[int, int], str] = {}
    for k, table in _CORE_NAMES.items():
        for name, edges in table.items():
            names[(k, canonical_mask(k, mask_from_edges(k, edges)))] = name
    return names


def _name(k: int, mask: int) -> str:
    edges = edges_from_mask(k, mask)
    used = sorted({v for e in edges for v in e})
    iso = k - len(used)
    if not edges:
        return f"{k}K1"
    relabel = {v: t for t, v in enumerate(used)}
    core = canonical_mask(len(used), mask_from_edges(len(used), [(relabel[i], relabel[j]) for i, j in edges]))
    core_name = _name_table().get((len(used), core), f"G{len(used)}:{core:x}")
    if iso == 0:
        return core_name
    return f"{core_name}+{'' if iso == 1 else iso}K1"


@cache
def enumerate_classes(k: int) -> tuple[SmallGraph, ...]:
    """One canonical representative per class, sorted by mask."""
    if not 1 <= k <= MAX_K:
        raise UnsupportedError(f"catalog supports 1 <= k <= {MAX_K}, got k={k}")
    if k == 1:
        return (SmallGraph(1, 0, 1, "K1"),)
    img = _images(k)
    canon = img.min(axis=0)
    reps = np.unique(canon)
    out = []
    for m in reps.tolist():
        aut = int((img[:, m] == m).sum())
        out.append(SmallGraph(k, m, aut, _name(k, m)))
    return tuple(out)


@cache
def class_lookup(k: int) -> np.ndarray:
    """``lut[mask]`` is the index into ``enumerate_classes(k)`` of ``mask``."""
    classes = enumerate_classes(k)
    index = {g.mask: t for t, g in enumerate(classes)}
    if k == 1:
        return np.zeros(1, dtype=np.intp)
    canon = _images(k).min(axis=0)
    return np.array([index[int(c)] for c in canon], dtype=np.intp)


def classify_mask(k: int, mask: int) -> SmallGraph:
    return enumerate_classes(k)[class_lookup(k)[mask]]


@cache
def by_name() -> dict[str, SmallGraph]:
    return {g.name: g for k in range(1, MAX_K + 1) for g in enumerate_classes(k)}


def get(name_or_key: str) -> SmallGraph:
    """Look a class up by conventional name or by ``"<k>:<hex>"`` key."""
    if ":" in name_or_key and name_or_key[0].isdigit():
        k, hexmask = name_or_key.split(":", 1)
        g = classify_mask(int(k), int(hexmask, 16))
        if g.mask != int(hexmask, 16):
            raise KeyError(f"{name_or_key} is not a canonical mask")
        return g
    return by_name()[name_or_key]


@cache
def family(k: int) -> tuple[SmallGraph, ...]:
    """Isolated-vertex-free classes on 2..k vertices, by (v, mask)."""
    if not 2 <= k <= MAX_K:
        raise UnsupportedError(f"family needs 2 <= k <= {MAX_K}, got k={k}")
    return tuple(g for j in range(2, k + 1) for g in enumerate_classes(j) if not g.has_isolated)


def family_Fk(k: int) -> tuple[SmallGraph, ...]:
    if not 3 <= k <= MAX_K:
        raise UnsupportedError(f"family_Fk needs 3 <= k <= {MAX_K}, got k={k}")
    return family(k)


@cache
def orbit(g: SmallGraph) -> tuple[int, ...]:
    """All labeled masks on ``range(g.k)`` isomorphic to ``g`` (k!/aut of them)."""
    return tuple(sorted(set(_images(g.k)[:, g.mask].tolist()))) if g.k > 1 else (0,)


@cache
def count_induced_small(F: SmallGraph, Fp: SmallGraph) -> int:
    """Number of vertex subsets of ``Fp`` inducing a copy of ``F``."""
    if F.k > Fp.k:
        return 0
    a = Fp.adjacency()
    total = 0
    for sub in combinations(range(Fp.k), F.k):
        m = mask_from_edges(F.k, [(x, y) for x, y in combinations(range(F.k), 2) if a[sub[x], sub[y]]])
        total += class_lookup(F.k)[m] == enumerate_classes(F.k).index(F)
    return int(total)


@cache
def spanning_subgraph_counts(k: int) -> np.ndarray:
    """``s[h, f]``: edge subsets of class f that form a copy of class h.

    Both index ``enumerate_classes(k)``.  The matrix is unitriangular
    with respect to edge count.
    """
    classes = enumerate_classes(k)
    lut = class_lookup(k)
    s = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for f, F in enumerate(classes):
        bits = [b for b in range(comb(k, 2)) if F.mask >> b & 1]
        for r in range(len(bits) + 1):
            for sub in combinations(bits, r):
                s[lut[sum(1 << b for b in sub)], f] += 1
    return s


def strip_isolated(k: int, mask: int) -> tuple[int, int]:
    """(core vertex count, canonical core mask) after dropping isolated vertices."""
    edges = edges_from_mask(k, mask)
    used = sorted({v for e in edges for v in e})
    relabel = {v: t for t, v in enumerate(used)}
    core = mask_from_edges(len(used), [(relabel[i], relabel[j]) for i, j in edges])
    return len(used), (canonical_mask(len(used), core) if len(used) > 1 else 0)


def automorphism_check(k: int) -> bool:
    """Sum of k!/|Aut| over classes equals the number of labeled graphs."""
    return sum(factorial(k) // g.aut for g in enumerate_classes(k)) == 1 << comb(k, 2)
