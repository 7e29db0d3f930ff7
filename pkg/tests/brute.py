"""Small brute-force oracles shared between unit and acceptance tests.

Everything here is the slow-but-obviously-correct version of something the
package computes cleverly: GF(2) Betti numbers straight from boundary-matrix
ranks, and bottleneck distance by enumerating every partial matching.
"""

import itertools
import math

import numpy as np


def rank_gf2(mat: np.ndarray) -> int:
    m = (np.asarray(mat) % 2).astype(np.uint8)
    if m.size == 0:
        return 0
    rank = 0
    rows, cols = m.shape
    for c in range(cols):
        pivot = -1
        for r in range(rank, rows):
            if m[r, c]:
                pivot = r
                break
        if pivot < 0:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in np.nonzero(m[:, c])[0]:
            if r != rank:
                m[r] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def betti_bruteforce(points: np.ndarray, gamma: float) -> tuple:
    """(b0, b1) of the Rips complex at scale gamma, via boundary ranks."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if d[i, j] <= gamma]
    eidx = {e: p for p, e in enumerate(edges)}
    tris = [(i, j, k)
            for i in range(n) for j in range(i + 1, n)
            for k in range(j + 1, n)
            if d[i, j] <= gamma and d[i, k] <= gamma and d[j, k] <= gamma]
    d1 = np.zeros((n, len(edges)), dtype=np.uint8)
    for p, (i, j) in enumerate(edges):
        d1[i, p] = d1[j, p] = 1
    d2 = np.zeros((len(edges), len(tris)), dtype=np.uint8)
    for p, (i, j, k) in enumerate(tris):
        d2[eidx[(i, j)], p] = 1
        d2[eidx[(i, k)], p] = 1
        d2[eidx[(j, k)], p] = 1
    r1 = rank_gf2(d1)
    r2 = rank_gf2(d2)
    return n - r1, len(edges) - r1 - r2


def betti_from_diagram(pd, gamma: float) -> tuple:
    """(b0, b1) read off a truncated diagram: intervals [birth, death)."""
    alive = (pd.births <= gamma) & ((gamma < pd.deaths) | pd.essential)
    return (int(np.sum(alive & (pd.dims == 0))),
            int(np.sum(alive & (pd.dims == 1))))


def bottleneck_exhaustive(a: np.ndarray, b: np.ndarray) -> float:
    """Bottleneck distance by trying every partial bijection (<= 6 points)."""
    a = [tuple(p) for p in np.asarray(a, dtype=float).reshape(-1, 2)]
    b = [tuple(p) for p in np.asarray(b, dtype=float).reshape(-1, 2)]

    def diag(p):
        return (p[1] - p[0]) / 2.0

    def dinf(p, q):
        return max(abs(p[0] - q[0]), abs(p[1] - q[1]))

    na, nb = len(a), len(b)
    best = math.inf
    for k in range(min(na, nb) + 1):
        for sa in itertools.combinations(range(na), k):
            rest_a = max((diag(a[i]) for i in range(na) if i not in sa),
                         default=0.0)
            for sb in itertools.combinations(range(nb), k):
                rest_b = max((diag(b[j]) for j in range(nb) if j not in sb),
                             default=0.0)
                base = max(rest_a, rest_b)
                if base >= best:
                    continue
                for perm in itertools.permutations(sb):
                    cost = base
                    for i, j in zip(sa, perm):
                        cost = max(cost, dinf(a[i], b[j]))
                        if cost >= best:
                            break
                    if cost < best:
                        best = cost
    return best
