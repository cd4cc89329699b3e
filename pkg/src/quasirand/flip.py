"""Sample-and-repair construction of graphs with small u_k.

Pipeline: sample G(n, p); check properties A (signed sums are typical),
B (every pair class is large, degrees are bounded) and C (few pairs have an
oversized delta); pick a bounded-degree reservoir of flippable pairs from
each class; phase 1 fixes the edge count; phase 2 swaps an edge for a
non-edge until S(P2) and S(K3) are both below pn.

Pair classes use the per-pair statistics Y1 = S_ij(P2) and Y2 = S_ij(K3):

    E1: edge,  Y1 >  sqrt(pn),  Y2 >  p sqrt(n)
    E2: edge,  Y1 >  sqrt(pn),  Y2 < -p sqrt(n)
    E3: edge,  Y1 < -sqrt(pn),  Y2 >  p sqrt(n)
    E4: edge,  Y1 < -sqrt(pn),  Y2 < -p sqrt(n)
    E5: non-edge, |Y1| < 0.1 sqrt(pn), |Y2| < 0.1 p sqrt(n)
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import ceil, comb, sqrt

import numpy as np

from . import catalog
from .catalog import SmallGraph
from .census import BRUTE_SUBSET_CAP, census_vector_brute, census_vector_fast, deviation_from_census, CensusResult
from .errors import (
    ConvergenceFailure,
    InvalidPairError,
    PreconditionError,
    ReservoirShortfall,
    RetriesExhausted,
)
from .graph import (
    Graph,
    Prob,
    _exact,
    as_prob,
    complement,
    nearest_integer_distance,
    nearest_integer_target,
    sample_gnp,
)
from .signed import _rooted_table, decomposition_coefficients, pair_deltas, signed_sum_from_counts

log = logging.getLogger(__name__)

DEFAULT_EPS = 0.005
DEFAULT_C = 20.0
DEFAULT_RETRIES = 20
REGIME_FLOOR = 1.0  # minimum p(1-p)sqrt(n)
MC_SAMPLES = 10_000
EXACT_V5_CAP = 200_000  # (v-2)-subsets per pair for exact 5-vertex deltas
ESTAR_SAMPLE_PAIRS = 2_000
CHECK_EVERY = 100


# ----------------------------------------------------------------- pair stats


@dataclass(frozen=True)
class PairStats:
    i: int
    j: int
    n: int
    p: Prob
    Z0star: int
    Z1star: int
    Z2star: int

    @property
    def Z0(self) -> Prob:
        return self.Z0star - (self.n - 2) * (1 - self.p) ** 2

    @property
    def Z2(self) -> Prob:
        return self.Z2star - (self.n - 2) * self.p**2

    @property
    def Y1(self) -> Prob:
        return self.Z2 - self.Z0

    @property
    def Y2(self) -> Prob:
        return (1 - self.p) * self.Z2 + self.p * self.Z0


def _z_counts(adj: np.ndarray, i: int, j: int) -> tuple[int, int, int]:
    ai, aj = adj[i], adj[j]
    z2 = int(np.count_nonzero(ai & aj))
    # positions i and j each contribute A_ij to the xor
    z1 = int(np.count_nonzero(ai ^ aj)) - 2 * int(adj[i, j])
    return adj.shape[0] - 2 - z1 - z2, z1, z2


def pair_statistics(G: Graph, p, i: int, j: int) -> PairStats:
    p = as_prob(p)
    if G.n < 3:
        raise PreconditionError("pair statistics need n >= 3")
    if i == j or not (0 <= i < G.n and 0 <= j < G.n):
        raise InvalidPairError(f"invalid pair ({i}, {j}) for n={G.n}")
    z0, z1, z2 = _z_counts(G.adj, i, j)
    return PairStats(min(i, j), max(i, j), G.n, p, z0, z1, z2)


def pair_statistics_matrix(G: Graph, p) -> tuple[np.ndarray, np.ndarray]:
    """(Y1, Y2) for every pair as float64 n x n arrays (diagonal meaningless)."""
    p = float(as_prob(p))
    n = G.n
    a = G.adj.astype(np.float32)
    z2 = (a @ a).astype(np.float64)
    d = G.degrees().astype(np.float64)
    adj = G.adj.astype(np.float64)
    z1 = (d[:, None] - adj) + (d[None, :] - adj) - 2 * z2
    z0 = (n - 2) - z1 - z2
    Z0 = z0 - (n - 2) * (1 - p) ** 2
    Z2 = z2 - (n - 2) * p**2
    return Z2 - Z0, (1 - p) * Z2 + p * Z0


# ------------------------------------------------------------ classification


def estar_threshold(F: SmallGraph, n: int, p, k: int, eps: float) -> float:
    size = len(catalog.family(k))
    return 4 * k * eps**-0.5 * sqrt(size) * float(p) ** (F.e / 2 - 1) * n ** (F.k / 2 - 1)


@dataclass
class PairClassification:
    n: int
    p: Prob
    k: int
    eps: float
    Y1: np.ndarray
    Y2: np.ndarray
    classes: dict[int, np.ndarray]  # class -> (m, 2) lex-sorted pairs, i < j
    low_estar: np.ndarray  # n x n bool: oversized delta for some F with v(F) <= 3

    def sizes(self) -> dict[int, int]:
        return {c: len(v) for c, v in self.classes.items()}

    def class_of(self, i: int, j: int) -> int | None:
        for c, pairs in self.classes.items():
            if ((pairs[:, 0] == min(i, j)) & (pairs[:, 1] == max(i, j))).any():
                return c
        return None


def classify_pairs(G: Graph, p, k: int = 4, eps: float = DEFAULT_EPS) -> PairClassification:
    p = as_prob(p)
    pf = float(p)
    n = G.n
    y1, y2 = pair_statistics_matrix(G, p)
    t1, t2 = sqrt(pf * n), pf * sqrt(n)
    iu, ju = np.triu_indices(n, 1)
    Y1, Y2, edge = y1[iu, ju], y2[iu, ju], G.adj[iu, ju]
    conds = {
        1: edge & (Y1 > t1) & (Y2 > t2),
        2: edge & (Y1 > t1) & (Y2 < -t2),
        3: edge & (Y1 < -t1) & (Y2 > t2),
        4: edge & (Y1 < -t1) & (Y2 < -t2),
        5: ~edge & (np.abs(Y1) < 0.1 * t1) & (np.abs(Y2) < 0.1 * t2),
    }
    classes = {}
    for c, sel in conds.items():
        pairs = np.stack([iu[sel], ju[sel]], axis=1)
        classes[c] = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    low = np.zeros((n, n), dtype=bool)
    for F in catalog.family(k):
        thr = estar_threshold(F, n, p, k, eps)
        if F.k == 2:
            if thr < 1:
                low[:] = True
        elif F.name == "P2":
            low |= np.abs(y1) > thr
        elif F.name == "K3":
            low |= np.abs(y2) > thr
    np.fill_diagonal(low, False)
    return PairClassification(n, p, k, eps, y1, y2, classes, low)


def high_estar(G: Graph, p, k: int, eps: float, pairs, seed: int = 0,
               mc_samples: int = MC_SAMPLES, batch: int = 256) -> tuple[np.ndarray, str]:
    """E* membership from F with v(F) >= 4, one bool per pair.

    v(F) = 4 is always exact.  v(F) = 5 is exact while C(n-2, 3) is small,
    otherwise a Monte-Carlo estimate compared against half the threshold.
    """
    p = as_prob(p)
    pairs = np.asarray(pairs, dtype=np.intp).reshape(-1, 2)
    out = np.zeros(len(pairs), dtype=bool)
    fam4 = [F for F in catalog.family(k) if F.k == 4]
    fam5 = [F for F in catalog.family(k) if F.k == 5]
    method = "exact"
    pf = float(p)
    if fam4 and len(pairs):
        thr = np.array([estar_threshold(F, G.n, p, k, eps) for F in fam4])
        for s in range(0, len(pairs), batch):
            vals = np.array(pair_deltas(G, pf, fam4, pairs[s:s + batch], batch=batch), dtype=float)
            out[s:s + batch] |= (np.abs(vals) > thr).any(axis=1)
    if fam5 and len(pairs):
        thr = np.array([estar_threshold(F, G.n, p, k, eps) for F in fam5])
        tables = np.array([[float(v) for v in _rooted_table(F, pf)] for F in fam5])
        exact = comb(G.n - 2, 3) <= EXACT_V5_CAP
        rng = np.random.default_rng([seed, 5])
        if not exact:
            method = "exact-v4/sampled-v5"
            thr = thr / 2
        for t, (i, j) in enumerate(pairs.tolist()):
            hist = _v5_histogram(G.adj, i, j, None if exact else mc_samples, rng)
            vals = tables @ hist
            out[t] |= bool((np.abs(vals) > thr).any())
    return out, method


def _v5_histogram(adj: np.ndarray, i: int, j: int, samples: int | None, rng) -> np.ndarray:
    """Counts of labeled 5-vertex patterns on (i, j, w, x, y), scaled to a sum over all triples."""
    n = adj.shape[0]
    others = np.array([v for v in range(n) if v not in (i, j)], dtype=np.intp)
    if samples is None:
        rest = np.array(list(combinations(range(len(others)), 3)), dtype=np.intp).reshape(-1, 3)
        scale = 1.0
    else:
        cand = rng.integers(0, len(others), size=(3 * samples, 3))
        cand.sort(axis=1)
        rest = cand[(np.diff(cand, axis=1) > 0).all(axis=1)][:samples]
        scale = comb(n - 2, 3) / len(rest)
    rest = others[rest]
    verts = np.concatenate([np.full((len(rest), 1), i), np.full((len(rest), 1), j), rest], axis=1)
    mask = np.zeros(len(rest), dtype=np.int64)
    for b, (x, y) in enumerate((x, y) for y in range(5) for x in range(y)):
        mask |= adj[verts[:, x], verts[:, y]].astype(np.int64) << b
    return np.bincount(mask, minlength=1 << 10) * scale


# ------------------------------------------------------------ property check


def _census_vectors(G: Graph, k: int) -> dict[int, np.ndarray | None]:
    """Census vectors for 2..k vertices; None where no exact path fits."""
    out = {}
    for j in range(2, k + 1):
        if j <= 4:
            out[j] = census_vector_fast(G.adj, j)
        elif comb(G.n, j) <= BRUTE_SUBSET_CAP:
            out[j] = census_vector_brute(G.adj, j)
        else:
            out[j] = None
    return out


def signed_values(censuses: dict, p, k: int) -> dict[SmallGraph, Prob | None]:
    return {
        F: (signed_sum_from_counts(F, censuses[F.k], p) if censuses.get(F.k) is not None else None)
        for F in catalog.family(k)
    }


def check_regime(n: int, p, floor: float = REGIME_FLOOR) -> None:
    pf = float(p)
    val = pf * (1 - pf) * sqrt(n)
    if val < floor:
        raise PreconditionError(
            f"p(1-p)sqrt(n) = {val:.4g} is below the floor {floor}: the construction needs "
            "fixed k >= 3 and 1/(p(1-p)) = o(sqrt(n))",
            n=n, p=pf, value=val, floor=floor,
        )


@dataclass
class PropertyReport:
    n: int
    p: Prob
    k: int
    eps: float
    A_ok: bool
    A_values: dict[SmallGraph, tuple[Prob | None, float]]
    A_violations: list[str]
    A_skipped: list[str]
    B_ok: bool
    class_sizes: dict[int, int]
    class_required: dict[int, float]
    max_degree: int
    degree_bound: float
    C_ok: bool
    estar_size: float
    estar_bound: float
    estar_method: str
    classification: PairClassification = field(repr=False)
    censuses: dict = field(repr=False, default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.A_ok and self.B_ok and self.C_ok

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "A": {
                "ok": self.A_ok,
                "violations": self.A_violations,
                "not_evaluated": self.A_skipped,
                "values": {str(F): {"S": s, "bound": b} for F, (s, b) in self.A_values.items()},
            },
            "B": {
                "ok": self.B_ok,
                "class_sizes": {f"E{c}": v for c, v in self.class_sizes.items()},
                "required": {f"E{c}": v for c, v in self.class_required.items()},
                "max_degree": self.max_degree,
                "degree_bound": self.degree_bound,
            },
            "C": {
                "ok": self.C_ok,
                "estar_size": self.estar_size,
                "bound": self.estar_bound,
                "method": self.estar_method,
            },
        }


def verify_sample_properties(G: Graph, p, k: int, eps: float = DEFAULT_EPS, *,
                             floor: float = REGIME_FLOOR, seed: int = 0,
                             estar_pairs: int = ESTAR_SAMPLE_PAIRS,
                             mc_samples: int = MC_SAMPLES) -> PropertyReport:
    p = as_prob(p)
    n = G.n
    if not 3 <= k <= catalog.MAX_K:
        raise PreconditionError(f"k must be in 3..{catalog.MAX_K}")
    check_regime(n, p, floor)
    pf = float(p)
    fam = catalog.family(k)
    size = len(fam)

    censuses = _census_vectors(G, k)
    S = signed_values(censuses, p, k)
    A_values, violations, skipped = {}, [], []
    for F in fam:
        bound = 5 * sqrt(size) * pf ** (F.e / 2) * n ** (F.k / 2)
        A_values[F] = (S[F], bound)
        if S[F] is None:
            skipped.append(str(F))
        elif abs(float(S[F])) > bound:
            violations.append(str(F))

    cl = classify_pairs(G, p, k, eps)
    sizes = cl.sizes()
    required = {c: eps * pf * n * n / 4 for c in range(1, 5)}
    required[5] = eps * n * n / 4
    degree_bound = 2 * pf * n
    B_ok = all(sizes[c] >= required[c] for c in sizes) and G.max_degree() <= degree_bound

    iu, ju = np.triu_indices(n, 1)
    low = cl.low_estar[iu, ju]
    total = len(iu)
    if total <= estar_pairs:
        sel = np.flatnonzero(~low)
        hi, method = high_estar(G, p, k, eps, np.stack([iu[sel], ju[sel]], axis=1), seed, mc_samples)
        estar = float(low.sum() + hi.sum())
    else:
        rng = np.random.default_rng([seed, 7])
        pick = rng.choice(total, size=estar_pairs, replace=False)
        pick = pick[~low[pick]]
        hi, method = high_estar(G, p, k, eps, np.stack([iu[pick], ju[pick]], axis=1), seed, mc_samples)
        estar = float(low.sum()) + hi.sum() / estar_pairs * total
        method += " (sampled pairs)"
    estar_bound = eps * pf * n * n / 8
    return PropertyReport(
        n, p, k, eps,
        A_ok=not violations, A_values=A_values, A_violations=violations, A_skipped=skipped,
        B_ok=bool(B_ok), class_sizes=sizes, class_required=required,
        max_degree=G.max_degree(), degree_bound=degree_bound,
        C_ok=estar <= estar_bound, estar_size=estar, estar_bound=estar_bound, estar_method=method,
        classification=cl, censuses=censuses,
    )


# ------------------------------------------------------------------ matchings


def _greedy(edges, taken: np.ndarray) -> list[tuple[int, int]]:
    out = []
    for i, j in edges:
        if not taken[i] and not taken[j]:
            taken[i] = taken[j] = True
            out.append((i, j))
    return out


def greedy_matching(H: Graph) -> list[tuple[int, int]]:
    """Maximal matching scanning edges in lexicographic order."""
    edges = H.edges()
    if not edges:
        raise PreconditionError("greedy_matching needs at least one edge")
    return _greedy(edges, np.zeros(H.n, dtype=bool))


def bounded_degree_edges(edges, n: int, m: int) -> tuple[list[tuple[int, int]], str]:
    """Edge-list form of ``bounded_degree_subgraph``; returns (edges, note)."""
    edges = sorted((min(e), max(e)) for e in edges)
    if not edges:
        return [], "empty input"
    deg = np.bincount(np.asarray(edges).ravel(), minlength=n)
    delta = int(deg.max())
    if m >= delta:
        return edges, f"m={m} >= max degree {delta}; input returned unchanged"
    if m < 1:
        raise PreconditionError("m must be at least 1")
    quota = -(-len(edges) // (4 * delta))
    remaining = list(edges)
    chosen: list[tuple[int, int]] = []
    for _ in range(m):
        match = _greedy(remaining, np.zeros(n, dtype=bool))[:quota]
        chosen += match
        picked = set(match)
        remaining = [e for e in remaining if e not in picked]
    return sorted(chosen), f"{m} rounds of {quota} matched edges"


def bounded_degree_subgraph(H: Graph, m: int) -> Graph:
    """Subgraph with max degree <= m and >= m e(H)/(4 Delta) edges (H itself if m >= Delta)."""
    edges, _ = bounded_degree_edges(H.edges(), H.n, m)
    return Graph.from_edges(H.n, edges)


# ------------------------------------------------------------------ reservoir


@dataclass
class FlipReservoir:
    """Per-class queues of flippable pairs, consumed in lexicographic order."""

    n: int
    classes: dict[int, list[tuple[int, int]]]
    m: int
    max_degree: int
    floors: dict[int, int]
    excluded: dict[int, int]
    estar_method: str
    notes: dict[int, str] = field(default_factory=dict)
    used: set = field(default_factory=set)
    _next: dict[int, int] = field(default_factory=dict)

    def available(self, c: int) -> int:
        return len(self.classes[c]) - self._next.get(c, 0)

    def take(self, c: int) -> tuple[int, int] | None:
        t = self._next.get(c, 0)
        if t >= len(self.classes[c]):
            return None
        self._next[c] = t + 1
        e = self.classes[c][t]
        if e in self.used:  # classes are disjoint; this would be a bug
            raise RuntimeError(f"pair {e} taken twice")
        self.used.add(e)
        return e

    def summary(self) -> dict:
        return {
            "sizes": {f"E{c}": len(v) for c, v in self.classes.items()},
            "floors": {f"E{c}": v for c, v in self.floors.items()},
            "excluded_by_estar": {f"E{c}": v for c, v in self.excluded.items()},
            "degree_cap_m": self.m,
            "max_degree": self.max_degree,
            "estar_method": self.estar_method,
            "used": len(self.used),
        }


def reservoir_floor(c: int, n: int, p, eps: float, C: float) -> int:
    """Minimum pairs a class must supply: Cn, capped by the class guarantee after E* removal."""
    guaranteed = eps * float(p) * n * n / 8 if c <= 4 else eps * n * n / 8
    return max(1, ceil(min(C * n, guaranteed)))


def build_flip_reservoir(G: Graph, p, k: int, eps: float = DEFAULT_EPS, C: float = DEFAULT_C, *,
                         classification: PairClassification | None = None, seed: int = 0,
                         mc_samples: int = MC_SAMPLES) -> FlipReservoir:
    p = as_prob(p)
    n = G.n
    cl = classification or classify_pairs(G, p, k, eps)
    m = ceil(64 * C / eps)
    classes, floors, excluded, notes = {}, {}, {}, {}
    method = "exact"
    for c in range(1, 6):
        pairs = cl.classes[c]
        keep = ~cl.low_estar[pairs[:, 0], pairs[:, 1]] if len(pairs) else np.zeros(0, bool)
        cand = pairs[keep]
        hi, method = high_estar(G, p, k, eps, cand, seed, mc_samples)
        cand = cand[~hi]
        excluded[c] = len(pairs) - len(cand)
        edges, notes[c] = bounded_degree_edges([tuple(e) for e in cand.tolist()], n, m)
        floors[c] = reservoir_floor(c, n, p, eps, C)
        if len(edges) < floors[c]:
            raise ReservoirShortfall(
                f"class E{c} supplies {len(edges)} pairs, needs {floors[c]}",
                cls=f"E{c}", available=len(edges), required=floors[c], n=n,
            )
        classes[c] = edges
    allpairs = [e for v in classes.values() for e in v]
    deg = np.bincount(np.asarray(allpairs).ravel(), minlength=n) if allpairs else np.zeros(1, int)
    return FlipReservoir(n, classes, m, int(deg.max()), floors, excluded, method, notes)


# ------------------------------------------------------------------ phases


class FlipState:
    """Mutable graph with S(K2), S(P2), S(K3) maintained under single-pair flips."""

    def __init__(self, G: Graph, p, census3: np.ndarray | None = None):
        self.p = as_prob(p)
        self.adj = G.adj.copy()
        self.n = G.n
        self.edges = G.num_edges
        self.s_k2, self.s_p2, self.s_k3 = self.recompute(census3)
        self.flips: list[tuple[int, int, int]] = []  # (i, j, +1 add / -1 remove)

    @property
    def pairs_total(self) -> int:
        return comb(self.n, 2)

    def recompute(self, census3: np.ndarray | None = None) -> tuple[Prob, Prob, Prob]:
        p = self.p
        vec = census3 if census3 is not None else census_vector_fast(self.adj, 3)
        s_k2 = int(self.adj.sum()) // 2 - p * self.pairs_total
        return (
            s_k2,
            signed_sum_from_counts(catalog.get("P2"), vec, p),
            signed_sum_from_counts(catalog.get("K3"), vec, p),
        )

    def current_y(self, i: int, j: int) -> tuple[Prob, Prob]:
        z0, _, z2 = _z_counts(self.adj, i, j)
        p, m = self.p, self.n - 2
        Z0 = z0 - m * (1 - p) ** 2
        Z2 = z2 - m * p**2
        return Z2 - Z0, (1 - p) * Z2 + p * Z0

    def flip(self, i: int, j: int) -> tuple[Prob, Prob]:
        """Toggle ij, update the three sums, return the (Y1, Y2) used."""
        y1, y2 = self.current_y(i, j)
        sign = -1 if self.adj[i, j] else 1
        self.adj[i, j] = self.adj[j, i] = not self.adj[i, j]
        self.edges += sign
        self.s_k2 += sign
        self.s_p2 += sign * y1
        self.s_k3 += sign * y2
        self.flips.append((i, j, sign))
        return y1, y2

    def graph(self) -> Graph:
        return Graph(self.adj.copy())


def _rel_error(a, b) -> float:
    return abs(float(a) - float(b)) / max(1.0, abs(float(b)))


def phase_one(state: FlipState, reservoir: FlipReservoir) -> int:
    """Remove E1..E4 edges or add E5 pairs until e(G) is the integer nearest p C(n,2)."""
    target = nearest_integer_target(state.n, state.p)
    steps, turn = 0, 0
    while state.edges != target:
        if state.edges > target:
            e = None
            for t in range(4):
                c = 1 + (turn + t) % 4
                if reservoir.available(c):
                    e = reservoir.take(c)
                    turn = c % 4
                    break
        else:
            e = reservoir.take(5)
        if e is None:
            raise ReservoirShortfall(
                "reservoir exhausted while fixing the edge count",
                phase=1, steps=steps, edges=state.edges, target=target,
            )
        state.flip(*e)
        steps += 1
    return steps


def _quadrant(s_k3, s_p2) -> int:
    if s_k3 >= 0:
        return 1 if s_p2 >= 0 else 3
    return 2 if s_p2 >= 0 else 4


@dataclass
class PhaseTwoResult:
    steps: int
    checks: int
    max_rel_error: float
    window_warnings: int


def phase_two(state: FlipState, reservoir: FlipReservoir, budget: int, eps: float,
              check_every: int = CHECK_EVERY) -> PhaseTwoResult:
    """Swap a quadrant-class edge for a fresh E5 pair until |S(K3)|, |S(P2)| < pn."""
    p, n = state.p, state.n
    pf = float(p)
    limit = p * n
    lo1, hi1 = 0.8 * sqrt(pf * n), 2 / eps * sqrt(pf * n)
    lo2, hi2 = 0.8 * pf * sqrt(n), 2 / eps * pf * sqrt(n)
    steps = checks = warnings = 0
    worst = 0.0

    def check():
        nonlocal checks, worst
        _, p2, k3 = state.recompute()
        worst = max(worst, _rel_error(state.s_p2, p2), _rel_error(state.s_k3, k3))
        checks += 1

    while not (abs(state.s_k3) < limit and abs(state.s_p2) < limit):
        if steps >= budget:
            check()
            raise ConvergenceFailure(
                "phase-2 budget exhausted",
                steps=steps, budget=budget, S_P2=float(state.s_p2), S_K3=float(state.s_k3), limit=float(limit),
            )
        c = _quadrant(state.s_k3, state.s_p2)
        e, f = reservoir.take(c), reservoir.take(5)
        if e is None or f is None:
            raise ReservoirShortfall(
                f"reservoir exhausted in phase 2 (class E{c if e is None else 5})",
                phase=2, steps=steps, S_P2=float(state.s_p2), S_K3=float(state.s_k3),
            )
        k3, p2 = state.s_k3, state.s_p2
        state.flip(*e)
        state.flip(*f)
        d1, d2 = abs(float(state.s_p2 - p2)), abs(float(state.s_k3 - k3))
        if not (lo1 <= d1 <= hi1 and lo2 <= d2 <= hi2):
            warnings += 1
        steps += 1
        if steps % check_every == 0:
            check()
    check()
    if warnings:
        log.warning("%d of %d swaps moved S(P2) or S(K3) outside the nominal window", warnings, steps)
    return PhaseTwoResult(steps, checks, worst, warnings)


def balance_edge_count(G: Graph, p, reservoir: FlipReservoir) -> Graph:
    state = FlipState(G, p)
    phase_one(state, reservoir)
    return state.graph()


def balance_triad_stats(G: Graph, p, reservoir: FlipReservoir, budget: int,
                        eps: float = DEFAULT_EPS) -> Graph:
    state = FlipState(G, p)
    phase_two(state, reservoir, budget, eps)
    return state.graph()


def phase_two_budget(n: int, p, k: int, C: float) -> tuple[int, str]:
    size = len(catalog.family(k))
    slack = C - 5 * sqrt(size)
    if slack > 0:
        return ceil(slack * sqrt(float(p)) * n), "(C - 5|F_k|^(1/2)) p^(1/2) n"
    return ceil(C * sqrt(float(p)) * n), "C p^(1/2) n (the nominal budget is not positive)"


# ---------------------------------------------------------------- construct


@dataclass
class ConstructionReport:
    graph: Graph
    n: int
    p: Prob
    k: int
    seed: int
    eps: float
    C: float
    retries_used: int
    eps_halved: bool
    complement_route: bool
    properties: dict
    S_before: dict[SmallGraph, Prob | None]
    S_after: dict[SmallGraph, Prob | None]
    D: Prob
    phase1_flips: int
    phase2_steps: int
    phase2_budget: int
    bookkeeping_checks: int
    bookkeeping_max_rel_error: float
    window_warnings: int
    reservoir: dict
    u_k: Prob | None
    u_k_argmax: str | None
    u_k_via_decomposition: Prob | None
    kappa: float | None
    seconds: dict[str, float]

    @property
    def S_K2_abs(self) -> Prob:
        return abs(self.S_after[catalog.get("K2")])

    def value(self, name: str) -> Prob | None:
        return self.S_after[catalog.get(name)]

    def to_dict(self) -> dict:
        from .reporting import jsonable

        return jsonable({
            "n": self.n, "p": self.p, "k": self.k, "seed": self.seed,
            "eps": self.eps, "C": self.C,
            "retries_used": self.retries_used, "eps_halved": self.eps_halved,
            "complement_route": self.complement_route,
            "edges": self.graph.num_edges,
            "D": self.D, "abs_S_K2": self.S_K2_abs,
            "properties": self.properties,
            "S_before": {str(F): v for F, v in self.S_before.items()},
            "S_after": {str(F): v for F, v in self.S_after.items()},
            "phase1_flips": self.phase1_flips,
            "phase2_steps": self.phase2_steps, "phase2_budget": self.phase2_budget,
            "bookkeeping": {"checks": self.bookkeeping_checks, "max_rel_error": self.bookkeeping_max_rel_error},
            "window_warnings": self.window_warnings,
            "reservoir": self.reservoir,
            "u_k": self.u_k, "u_k_argmax": self.u_k_argmax,
            "u_k_via_decomposition": self.u_k_via_decomposition,
            "certificate": {"kappa": self.kappa, "form": "|S(F,G)| <= kappa p n^(v(F)-2) for v(F) >= 4"},
            "seconds": self.seconds,
        })


def _flip_signs(S: dict, flip: bool) -> dict:
    # S(F, complement(G), p) = (-1)^e(F) S(F, G, 1-p)
    if not flip:
        return S
    return {F: (None if v is None else (-v if F.e % 2 else v)) for F, v in S.items()}


def _certificate(G: Graph, p, k: int, censuses: dict):
    S = signed_values(censuses, p, k)
    n = G.n
    u = arg = via = None
    if censuses.get(k) is not None:
        classes = catalog.enumerate_classes(k)
        dev = deviation_from_census(
            CensusResult(k, n, {F: int(c) for F, c in zip(classes, censuses[k])}), p
        )
        u, arg = dev.u, str(dev.argmax)
        if all(v is not None for v in S.values()):
            vals = []
            for H in classes:
                coeffs = decomposition_coefficients(H, n).at(p)
                vals.append(abs(sum(coeffs[F] * S[F] for F in coeffs)))
            via = max(vals)
    big = [abs(float(v)) / (float(p) * n ** (F.k - 2)) for F, v in S.items() if F.k >= 4 and v is not None]
    kappa = max(big) if big else None
    return S, u, arg, via, kappa


def construct(n: int, p, k: int = 4, seed: int = 0, eps: float = DEFAULT_EPS, C: float = DEFAULT_C,
              max_retries: int = DEFAULT_RETRIES, *, floor: float = REGIME_FLOOR,
              mc_samples: int = MC_SAMPLES, check_every: int = CHECK_EVERY) -> ConstructionReport:
    # floats are read by their decimal repr, so 0.7 runs as 7/10 and every
    # reported statistic is exact
    p = _exact(as_prob(p))
    if not 3 <= k <= catalog.MAX_K:
        raise PreconditionError(f"k must be in 3..{catalog.MAX_K}, got {k}")
    check_regime(n, p, floor)
    if p > Fraction(1, 2):
        inner = construct(n, 1 - p, k, seed, eps, C, max_retries, floor=floor,
                          mc_samples=mc_samples, check_every=check_every)
        t0 = time.perf_counter()
        G = complement(inner.graph)
        S, u, arg, via, kappa = _certificate(G, p, k, _census_vectors(G, k))
        inner.seconds["complement_certificate"] = time.perf_counter() - t0
        inner.graph, inner.p, inner.complement_route = G, p, True
        inner.S_before = _flip_signs(inner.S_before, True)
        inner.S_after = S
        inner.u_k, inner.u_k_argmax, inner.u_k_via_decomposition, inner.kappa = u, arg, via, kappa
        return inner

    seconds: dict[str, float] = {}
    t0 = time.perf_counter()
    props = None
    attempts = 0
    cur_eps = eps
    halved = False
    for round_ in range(2):
        for attempt in range(max_retries):
            attempts += 1
            G = sample_gnp(n, p, seed=[seed, round_, attempt])
            props = verify_sample_properties(G, p, k, cur_eps, floor=floor, seed=seed, mc_samples=mc_samples)
            if props.ok:
                break
        if props.ok:
            break
        if round_ == 0:
            cur_eps /= 2
            halved = True
    if not props.ok:
        raise RetriesExhausted(
            f"no sample satisfied properties A-C in {attempts} attempts",
            attempts=attempts, eps=cur_eps, last=props.to_dict(),
        )
    seconds["sample_and_verify"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    reservoir = build_flip_reservoir(G, p, k, cur_eps, C, classification=props.classification,
                                     seed=seed, mc_samples=mc_samples)
    seconds["reservoir"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    state = FlipState(G, p, props.censuses.get(3))
    flips1 = phase_one(state, reservoir)
    seconds["phase1"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    budget, _ = phase_two_budget(n, p, k, C)
    res2 = phase_two(state, reservoir, budget, cur_eps, check_every)
    seconds["phase2"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    final = state.graph()
    S_after, u, arg, via, kappa = _certificate(final, p, k, _census_vectors(final, k))
    seconds["certificate"] = time.perf_counter() - t0

    return ConstructionReport(
        graph=final, n=n, p=p, k=k, seed=seed, eps=cur_eps, C=C,
        retries_used=attempts - 1, eps_halved=halved, complement_route=False,
        properties=props.to_dict(),
        S_before={F: v for F, (v, _) in props.A_values.items()},
        S_after=S_after, D=nearest_integer_distance(n, p),
        phase1_flips=flips1, phase2_steps=res2.steps, phase2_budget=budget,
        bookkeeping_checks=res2.checks, bookkeeping_max_rel_error=res2.max_rel_error,
        window_warnings=res2.window_warnings, reservoir=reservoir.summary(),
        u_k=u, u_k_argmax=arg, u_k_via_decomposition=via, kappa=kappa, seconds=seconds,
    )
