"""Signed subgraph sums S(F, G), per-pair deltas S_ij(F, G) and the exact
expansion of induced counts into signed sums.

A placement of F in G is a labeled copy of F on some v(F)-subset of V(G);
distinct edge sets count once, so there are (n)_v / |Aut F| placements.
S(F, G) sums prod_{e in placement} (I_G(e) - p) over all placements.

Exact arithmetic: when ``p = a/b`` is a Fraction, every factor is scaled to
the integer ``b*I - a`` and the sum is divided by ``b**e(F)`` at the end.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cache
from itertools import combinations
from math import comb, perm

import numpy as np

from . import catalog
from .catalog import SmallGraph
from .census import census_vector_brute, census_vector_fast, induced_census
from .errors import InvalidPairError, PreconditionError, UnsupportedError
from .graph import Graph, Prob, as_prob, colex_pairs, is_exact, pair_index

ENUMERATE_CAP = 2_000_000  # placement rows for direct enumeration


# ------------------------------------------------------------------ placements


def _orbit_edges(F: SmallGraph) -> list[list[tuple[int, int]]]:
    return [catalog.edges_from_mask(F.k, m) for m in catalog.orbit(F)]


def num_placements(F: SmallGraph, n: int) -> int:
    return perm(n, F.k) // F.aut if n >= F.k else 0


@cache
def placement_index(F: SmallGraph, n: int) -> np.ndarray:
    """Colex pair indices of every placement of F in K_n, shape ``(P, e(F))``."""
    if n < F.k:
        return np.zeros((0, F.e), dtype=np.intp)
    subsets = np.array(list(combinations(range(n), F.k)), dtype=np.intp).reshape(-1, F.k)
    blocks = []
    for edges in _orbit_edges(F):
        cols = [subsets[:, j] * (subsets[:, j] - 1) // 2 + subsets[:, i] for i, j in edges]
        blocks.append(np.stack(cols, axis=1) if cols else np.zeros((len(subsets), 0), dtype=np.intp))
    return np.concatenate(blocks, axis=0)


def _scaled(bits: np.ndarray, p, max_e: int, rows: int):
    """Centered indicators, scaled to integers when p is exact.

    Returns ``(x, scale)`` with ``I - p == x / scale``.
    """
    if is_exact(p):
        a, b = p.numerator, p.denominator
        if rows * float(b) ** max_e < 2**62:
            return bits.astype(np.int64) * b - a, b
        return bits.astype(object) * b - a, b
    return bits.astype(np.float64) - float(p), 1


def _finish(total, scale: int, e: int, p):
    if is_exact(p):
        return Fraction(int(total), scale**e)
    return float(total)


def signed_sum_batch(F: SmallGraph, rows: np.ndarray, n: int, p) -> list[Prob]:
    """S(F, G) for many graphs given as colex pair-indicator rows."""
    p = as_prob(p)
    rows = np.atleast_2d(np.asarray(rows))
    idx = placement_index(F, n)
    x, scale = _scaled(rows, p, F.e, len(idx))
    if F.e == 0:
        return [_finish(len(idx), scale, 0, p)] * len(rows)
    totals = x[:, idx].prod(axis=2).sum(axis=1)
    return [_finish(t, scale, F.e, p) for t in totals]


def _enumerate(F: SmallGraph, G: Graph, p) -> Prob:
    return signed_sum_batch(F, G.pair_bits()[None, :], G.n, p)[0]


@cache
def _phi(F: SmallGraph, p) -> tuple[Prob, ...]:
    """S(F, F'') for every class F'' on v(F) vertices."""
    out = []
    for Fpp in catalog.enumerate_classes(F.k):
        g = Graph(Fpp.adjacency())
        out.append(_enumerate(F, g, p))
    return tuple(out)


def phi(F: SmallGraph, p) -> dict[SmallGraph, Prob]:
    p = as_prob(p)
    return dict(zip(catalog.enumerate_classes(F.k), _phi(F, p)))


def signed_sum_from_counts(F: SmallGraph, counts, p) -> Prob:
    """Sum of phi(F, F'') N(F'', G); ``counts`` is indexed like the catalog."""
    p = as_prob(p)
    vals = _phi(F, p)
    total = sum(v * int(c) for v, c in zip(vals, counts))
    return total if is_exact(p) else float(total)


def _check_graph(F: SmallGraph, G: Graph) -> None:
    if G.loops:
        raise UnsupportedError("signed sums are defined for loopless graphs")
    if F.k > G.n:
        raise PreconditionError(f"v(F)={F.k} exceeds n={G.n}")


def signed_sum(F: SmallGraph, G: Graph, p, method: str = "auto") -> Prob:
    """S(F, G) at edge probability p.

    ``enumerate`` walks every placement; ``census`` uses the identity
    S(F, G) = sum_{F''} S(F, F'') N(F'', G) over v(F)-vertex classes, which
    holds because each placement lives on exactly one v(F)-subset.
    """
    p = as_prob(p)
    _check_graph(F, G)
    if method == "auto":
        method = "enumerate" if num_placements(F, G.n) <= ENUMERATE_CAP // 4 else "census"
    if method == "enumerate":
        if num_placements(F, G.n) > ENUMERATE_CAP:
            raise PreconditionError("too many placements for direct enumeration")
        return _enumerate(F, G, p)
    if method == "census":
        if F.k <= 4:
            vec = census_vector_fast(G.adj, F.k)
        else:
            vec = census_vector_brute(G.adj, F.k)
        return signed_sum_from_counts(F, vec, p)
    raise ValueError(f"unknown method {method!r}")


def signed_stats(G: Graph, p, k: int, censuses: dict[int, np.ndarray] | None = None) -> dict[SmallGraph, Prob]:
    """S(F, G) for every F in the family F_k, sharing one census per vertex count."""
    p = as_prob(p)
    censuses = dict(censuses or {})
    out = {}
    for F in catalog.family(k):
        if F.k not in censuses:
            censuses[F.k] = (census_vector_fast if F.k <= 4 else census_vector_brute)(G.adj, F.k)
        out[F] = signed_sum_from_counts(F, censuses[F.k], p)
    return out


def estimate_signed_sum(F: SmallGraph, G: Graph, p, samples: int, rng: np.random.Generator) -> float:
    """Unbiased Monte-Carlo estimate of S(F, G) from random v(F)-subsets."""
    p = as_prob(p)
    n, k = G.n, F.k
    subs = _random_subsets(n, k, samples, rng)
    lut = catalog.class_lookup(k)
    mask = np.zeros(len(subs), dtype=np.int64)
    for b, (i, j) in enumerate((i, j) for j in range(k) for i in range(j)):
        mask |= G.adj[subs[:, i], subs[:, j]].astype(np.int64) << b
    vals = np.array([float(v) for v in _phi(F, p)])
    return float(vals[lut[mask]].mean() * comb(n, k))


def _random_subsets(n: int, k: int, samples: int, rng: np.random.Generator, exclude=()) -> np.ndarray:
    pool = np.setdiff1d(np.arange(n), np.asarray(exclude, dtype=np.intp))
    out = np.empty((0, k), dtype=np.intp)
    while len(out) < samples:
        cand = rng.integers(0, len(pool), size=(2 * samples, k))
        cand.sort(axis=1)
        ok = (np.diff(cand, axis=1) > 0).all(axis=1) if k > 1 else np.ones(len(cand), bool)
        out = np.concatenate([out, cand[ok]])
    # shuffle within rows is unnecessary: placements are summed over the orbit
    return pool[out[:samples]]


# ------------------------------------------------------------------ pair deltas


@cache
def _rooted_table(F: SmallGraph, p) -> tuple[Prob, ...]:
    """Indexed by a labeled mask on ``range(v)``: sum over placements of F
    containing pair (0, 1) of prod over their other edges of (I - p)."""
    k = F.k
    npairs = comb(k, 2)
    placements = [m for m in catalog.orbit(F) if m & 1]
    out = []
    for mask in range(1 << npairs):
        total = 0
        for m in placements:
            term = 1
            for b in range(1, npairs):
                if m >> b & 1:
                    term *= (mask >> b & 1) - p
            total += term
        out.append(total)
    return tuple(out)


def rooted_table(F: SmallGraph, p) -> tuple[Prob, ...]:
    return _rooted_table(F, as_prob(p))


def _check_pair(G: Graph, i: int, j: int) -> None:
    if i == j or not (0 <= i < G.n and 0 <= j < G.n):
        raise InvalidPairError(f"invalid pair ({i}, {j}) for n={G.n}")


def pair_delta(F: SmallGraph, G: Graph, p, i: int, j: int, method: str = "auto") -> Prob:
    """S(F, G + ij) - S(F, G - ij), as a sum over placements containing ij."""
    p = as_prob(p)
    _check_graph(F, G)
    _check_pair(G, i, j)
    if method == "auto":
        method = "rooted" if F.k <= 4 else "enumerate"
    if method == "rooted":
        return pair_deltas(G, p, [F], [(i, j)])[0][0]
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    table = _rooted_table(F, p)
    k = F.k
    others = [w for w in range(G.n) if w not in (i, j)]
    local = [(a, b) for b in range(k) for a in range(b)]
    total = 0
    for rest in combinations(others, k - 2):
        verts = (i, j) + rest
        mask = 0
        for bit, (a, b) in enumerate(local):
            if G.adj[verts[a], verts[b]]:
                mask |= 1 << bit
        total += table[mask]
    return total if is_exact(p) else float(total)


def pair_deltas(G: Graph, p, fams, pairs, batch: int = 256) -> list[list[Prob]]:
    """Exact S_ij(F, G) for many pairs and F with v(F) <= 4.

    For v(F) = 4 the other two vertices w, x of a placement are classified
    by their adjacency to i and j (four types) and by whether wx is an edge;
    the 4x4 type-edge counts come from one product A @ T per batch.
    """
    p = as_prob(p)
    exact = is_exact(p)
    fams = list(fams)
    if any(F.k > 4 for F in fams):
        raise UnsupportedError("exact pair deltas are implemented for v(F) <= 4")
    pairs = np.asarray(pairs, dtype=np.intp).reshape(-1, 2)
    n = G.n
    adj = G.adj
    a32 = adj.astype(np.float32)
    out: list[list[Prob]] = [[None] * len(fams) for _ in range(len(pairs))]

    psi3 = {}
    psi4 = {}
    for F in fams:
        tab = _rooted_table(F, p)
        if F.k == 3:
            # vertex 2 = w; bits: (0,2) -> 1, (1,2) -> 2
            psi3[F] = [tab[(s & 1) << 1 | (s >> 1) << 2] for s in range(4)]
        elif F.k == 4:
            psi4[F] = [[[tab[(s & 1) << 1 | (s >> 1) << 2 | (t & 1) << 3 | (t >> 1) << 4 | e << 5]
                         for e in range(2)] for t in range(4)] for s in range(4)]
    if not exact:
        psi3 = {F: np.array(v, dtype=float) for F, v in psi3.items()}
        psi4 = {F: np.array(v, dtype=float) for F, v in psi4.items()}

    for start in range(0, len(pairs), batch):
        blk = pairs[start:start + batch]
        B = len(blk)
        ai = adj[blk[:, 0]]
        aj = adj[blk[:, 1]]
        T = np.zeros((B, n, 4), dtype=np.float32)
        for s in range(4):
            T[:, :, s] = (ai == bool(s & 1)) & (aj == bool(s >> 1))
        rows = np.arange(B)
        T[rows, blk[:, 0], :] = 0
        T[rows, blk[:, 1], :] = 0
        cnt = T.sum(axis=1).astype(np.int64)  # (B, 4)
        if psi4:
            AT = (a32 @ T.transpose(1, 0, 2).reshape(n, 4 * B)).reshape(n, B, 4)
            E = np.einsum("bws,wbt->bst", T, AT).astype(np.int64)
            NE = cnt[:, :, None] * cnt[:, None, :] - E
            NE[:, np.arange(4), np.arange(4)] -= cnt
        for b in range(B):
            for f, F in enumerate(fams):
                if F.k == 2:
                    val = 1
                elif F.k == 3:
                    val = sum(int(cnt[b, s]) * psi3[F][s] for s in range(4)) if exact else float(cnt[b] @ psi3[F])
                else:
                    ps = psi4[F]
                    if exact:
                        val = Fraction(0)
                        for s in range(4):
                            for t in range(4):
                                val += int(E[b, s, t]) * ps[s][t][1] + int(NE[b, s, t]) * ps[s][t][0]
                        val /= 2
                    else:
                        val = 0.5 * float((E[b] * ps[:, :, 1]).sum() + (NE[b] * ps[:, :, 0]).sum())
                out[start + b][f] = val if exact else float(val)
    return out


def estimate_pair_delta(F: SmallGraph, G: Graph, p, i: int, j: int, samples: int,
                        rng: np.random.Generator) -> float:
    """Monte-Carlo estimate of S_ij(F, G) from random (v-2)-subsets of V - {i, j}."""
    return estimate_pair_deltas([F], G, p, i, j, samples, rng)[0]


def estimate_pair_deltas(fams, G: Graph, p, i: int, j: int, samples: int,
                         rng: np.random.Generator) -> list[float]:
    """Same as ``estimate_pair_delta`` for several F of one vertex count, sharing samples."""
    p = as_prob(p)
    fams = list(fams)
    k = fams[0].k
    if any(F.k != k for F in fams):
        raise PreconditionError("estimate_pair_deltas needs F of equal order")
    if k == 2:
        return [1.0] * len(fams)
    rest = _random_subsets(G.n, k - 2, samples, rng, exclude=(i, j))
    verts = np.concatenate([np.full((len(rest), 1), i), np.full((len(rest), 1), j), rest], axis=1)
    mask = np.zeros(len(rest), dtype=np.int64)
    for b, (x, y) in enumerate((x, y) for y in range(k) for x in range(y)):
        mask |= G.adj[verts[:, x], verts[:, y]].astype(np.int64) << b
    hist = np.bincount(mask, minlength=1 << comb(k, 2)) / len(rest)
    scale = comb(G.n - 2, k - 2)
    return [float(hist @ np.array([float(v) for v in _rooted_table(F, p)]) * scale) for F in fams]


# ---------------------------------------------------------- decomposition


def _poly_add(a: list, b: list) -> list:
    out = list(a) + [Fraction(0)] * (len(b) - len(a))
    for t, c in enumerate(b):
        out[t] += c
    return out


def _poly_scale(a: list, c) -> list:
    return [x * c for x in a]


def _term(sign: int, n_p: int, n_q: int) -> list:
    """sign * p**n_p * (1-p)**n_q, ascending coefficients."""
    coeffs = [Fraction(0)] * (n_p + n_q + 1)
    for t in range(n_q + 1):
        coeffs[n_p + t] = Fraction(sign * comb(n_q, t) * (-1) ** t)
    return coeffs


def poly_eval(coeffs, p) -> Prob:
    acc = Fraction(0) if is_exact(p) else 0.0
    for c in reversed(coeffs):
        acc = acc * p + (c if is_exact(p) else float(c))
    return acc


def _trim(a: list) -> tuple:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


@dataclass(frozen=True)
class DecompositionCoefficients:
    """N(H, G) = constant(p) + sum_F coefficients[F](p) * S(F, G) for every G on n vertices.

    Polynomials are tuples of Fractions in ascending powers of p.
    """

    H: SmallGraph
    n: int
    coefficients: dict[SmallGraph, tuple[Fraction, ...]]
    constant: tuple[Fraction, ...]

    def at(self, p) -> dict[SmallGraph, Prob]:
        p = as_prob(p)
        return {F: poly_eval(c, p) for F, c in self.coefficients.items()}

    def constant_at(self, p) -> Prob:
        return poly_eval(self.constant, as_prob(p))

    def predict(self, S: dict[SmallGraph, Prob], p) -> Prob:
        p = as_prob(p)
        coeffs = self.at(p)
        return self.constant_at(p) + sum(coeffs[F] * S[F] for F in coeffs)


@cache
def decomposition_coefficients(H: SmallGraph, n: int) -> DecompositionCoefficients:
    """Expand one labeled copy of H with I = (I - p) + p and 1 - I = (1-p) - (I - p),
    group monomials by the isolated-free support of their pair set, and scale
    by the number of injective embeddings."""
    if H.k > catalog.MAX_K or n < H.k:
        raise PreconditionError(f"need v(H) <= {catalog.MAX_K} and n >= v(H)")
    k = H.k
    npairs = comb(k, 2)
    hm = H.mask
    acc: dict[tuple[int, int], list] = {}
    for T in range(1 << npairs):
        in_h = bin(T & hm).count("1")
        out_h = bin(T & ~hm).count("1")
        sign = -1 if out_h % 2 else 1
        poly = _term(sign, H.e - in_h, npairs - H.e - out_h)
        key = catalog.strip_isolated(k, T)
        acc[key] = _poly_add(acc.get(key, []), poly)
    coefficients = {}
    constant = ()
    for (v, core), poly in acc.items():
        if v == 0:
            constant = _trim(_poly_scale(poly, Fraction(perm(n, k), H.aut)))
            continue
        F = catalog.classify_mask(v, core)
        scale = Fraction(perm(n - v, k - v) * F.aut, H.aut)
        poly = _trim(_poly_scale(poly, scale))
        if poly:
            coefficients[F] = poly
    ordered = {F: coefficients[F] for F in catalog.family(max(k, 2)) if F in coefficients}
    return DecompositionCoefficients(H, n, ordered, constant)


# ------------------------------------------------------- quadratic identities


@cache
def edge_pair_weight(F: SmallGraph) -> int:
    """Ordered edge pairs (e1, e2) of F whose union covers V(F)."""
    edges = F.edges
    return sum(1 for e1 in edges for e2 in edges if len(set(e1) | set(e2)) == F.k)


def quadratic_identities_check(G: Graph, p) -> dict:
    """Residuals of two exact identities (zero up to float rounding).

    * ``e(G)^2 = sum_F alpha_F N(F, G)`` over classes on 2..4 vertices;
    * ``S(K2)^2 = p(1-p)C(n,2) + (1-2p)S(K2) + 2S(P2) + 2S(2K2)``.
    """
    p = as_prob(p)
    if G.n < 4:
        raise PreconditionError("quadratic identities need n >= 4")
    e = G.num_edges
    rhs = 0
    for k in (2, 3, 4):
        census = induced_census(G, k)
        rhs += sum(edge_pair_weight(F) * c for F, c in census.counts.items())
    get = catalog.get
    S = {name: signed_sum(get(name), G, p) for name in ("K2", "P2", "2K2")}
    n2 = comb(G.n, 2)
    rhs2 = p * (1 - p) * n2 + (1 - 2 * p) * S["K2"] + 2 * S["P2"] + 2 * S["2K2"]
    return {
        "edge_square_residual": e * e - rhs,
        "signed_square_residual": S["K2"] ** 2 - rhs2,
        "S": S,
    }
