"""Vietoris-Rips persistence for 2D point clouds, plus bottleneck distance.

The filtration truncates at a scale cap: simplices enter when all pairwise
distances among their vertices are at most the cap. Classes still alive at
the cap are either truncated (death set to the cap, flagged essential) or
dropped. Homology is computed over GF(2): degree 0 by union-find over the
sorted edges, degree 1 by reducing triangle columns against edge rows with
Python-int bitmasks (only top-dimension columns need reduction once degree
0 is handled combinatorially).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, ParseError, ShapeError

DEFAULT_GAMMA_MAX = 16.0
DEFAULT_SIMPLEX_BUDGET = 2_000_000


@dataclass(frozen=True)
class Filtration:
    """Sorted edges and triangles of a truncated Vietoris-Rips complex.

    Simplices are ordered by (filtration value, dimension, lexicographic
    vertex tuple); vertices all enter at value 0 so the arrays here hold the
    dimension-1 and dimension-2 parts in their global order.
    """

    n_vertices: int
    edges: np.ndarray          # (E, 2) int, i < j, sorted
    edge_values: np.ndarray    # (E,) float
    triangles: np.ndarray      # (T, 3) int, i < j < k, sorted
    triangle_values: np.ndarray
    gamma_max: float

    @property
    def simplex_count(self) -> int:
        return self.n_vertices + len(self.edges) + len(self.triangles)


def build_vr_filtration(points: np.ndarray, gamma_max: float = DEFAULT_GAMMA_MAX,
                        max_dim: int = 2,
                        budget: int = DEFAULT_SIMPLEX_BUDGET) -> Filtration:
    """Enumerate edges and (optionally) triangles with diameter <= gamma_max."""
    if gamma_max <= 0:
        raise ValueError(f"scale cap must be positive, got {gamma_max}")
    if max_dim not in (1, 2):
        raise ValueError(f"max_dim must be 1 or 2, got {max_dim}")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = pts.shape[0]
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    adj = dist <= gamma_max
    np.fill_diagonal(adj, False)

    iu, ju = np.triu_indices(n, k=1)
    keep = adj[iu, ju]
    ei, ej = iu[keep], ju[keep]
    evals = dist[ei, ej]
    order = np.lexsort((ej, ei, evals))
    edges = np.column_stack([ei, ej])[order]
    edge_values = evals[order]

    count = n + len(edges)
    if count > budget:
        raise BudgetExceeded(f"{count} simplices exceed budget {budget}")

    if max_dim < 2 or n < 3:
        tri = np.empty((0, 3), dtype=int)
        tri_values = np.empty(0)
    else:
        # count triangles before materializing them so the budget check
        # cannot itself blow memory
        adj_int = adj.astype(np.int64)
        common = adj_int @ adj_int
        n_tri = int(np.sum(common[ei, ej])) // 3
        if count + n_tri > budget:
            raise BudgetExceeded(
                f"{count + n_tri} simplices exceed budget {budget}"
            )
        tris = []
        for i in range(n - 2):
            nbrs = np.nonzero(adj[i, i + 1:])[0] + i + 1
            if len(nbrs) < 2:
                continue
            sub = adj[np.ix_(nbrs, nbrs)]
            aa, bb = np.nonzero(np.triu(sub, k=1))
            if len(aa):
                j = nbrs[aa]
                k = nbrs[bb]
                tris.append(np.column_stack([np.full(len(j), i), j, k]))
        if tris:
            tri = np.vstack(tris)
            tri_values = np.maximum.reduce([
                dist[tri[:, 0], tri[:, 1]],
                dist[tri[:, 0], tri[:, 2]],
                dist[tri[:, 1], tri[:, 2]],
            ])
            torder = np.lexsort((tri[:, 2], tri[:, 1], tri[:, 0], tri_values))
            tri = tri[torder]
            tri_values = tri_values[torder]
        else:
            tri = np.empty((0, 3), dtype=int)
            tri_values = np.empty(0)

    return Filtration(n_vertices=n, edges=edges, edge_values=edge_values,
                      triangles=tri, triangle_values=tri_values,
                      gamma_max=float(gamma_max))


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite multiset of (birth, death) pairs tagged with homology degree.

    `essential` marks classes whose death was truncated at `gamma_max`.
    `halfplane` records whether every pair satisfies birth <= death; it is
    False for diagrams rebuilt from corrupted symbol streams, where decoded
    cell centers can land below the diagonal.
    """

    births: np.ndarray
    deaths: np.ndarray
    dims: np.ndarray
    essential: np.ndarray
    gamma_max: float | None = None
    halfplane: bool = True

    def __post_init__(self):
        b = np.asarray(self.births, dtype=float).ravel()
        d = np.asarray(self.deaths, dtype=float).ravel()
        dm = np.asarray(self.dims, dtype=int).ravel()
        es = np.asarray(self.essential, dtype=bool).ravel()
        if not (len(b) == len(d) == len(dm) == len(es)):
            raise ShapeError("birth/death/dim/essential lengths differ")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(d))):
            raise ValueError("diagram coordinates must be finite")
        if np.any(b < 0) or np.any(d < 0):
            raise ValueError("diagram coordinates must be nonnegative")
        if len(dm) and not np.all((dm == 0) | (dm == 1)):
            raise ValueError("homology degree must be 0 or 1")
        if self.halfplane and np.any(d < b):
            raise ValueError("birth exceeds death in a halfplane diagram")
        for name, arr in (("births", b), ("deaths", d), ("dims", dm),
                          ("essential", es)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.births)

    def points(self, dim: int | None = None) -> np.ndarray:
        """(n, 2) array of (birth, death) rows, optionally one degree only."""
        mask = slice(None) if dim is None else self.dims == dim
        return np.column_stack([self.births[mask], self.deaths[mask]])

    def count(self, dim: int) -> int:
        return int(np.sum(self.dims == dim))

    def drop_essential(self) -> "PersistenceDiagram":
        keep = ~self.essential
        return PersistenceDiagram(
            births=self.births[keep], deaths=self.deaths[keep],
            dims=self.dims[keep], essential=self.essential[keep],
            gamma_max=self.gamma_max, halfplane=self.halfplane,
        )

    @classmethod
    def empty(cls, gamma_max: float | None = None) -> "PersistenceDiagram":
        z = np.empty(0)
        return cls(births=z, deaths=z.copy(), dims=np.empty(0, dtype=int),
                   essential=np.empty(0, dtype=bool), gamma_max=gamma_max)

    @classmethod
    def from_received(cls, births, deaths, dims,
                      gamma_max: float | None = None) -> "PersistenceDiagram":
        """Build a diagram from decoded points without the halfplane check."""
        b = np.asarray(births, dtype=float).ravel()
        return cls(births=b, deaths=deaths, dims=dims,
                   essential=np.zeros(len(b), dtype=bool),
                   gamma_max=gamma_max, halfplane=False)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = np.arange(n)

    def find(self, x: int) -> int:
        root = x
        parent = self.parent
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def compute_persistence(filtration: Filtration,
                        drop_essential: bool = False) -> PersistenceDiagram:
    """Degree-0 and degree-1 persistence of a truncated VR filtration.

    Zero-persistence pairs are dropped. Essential classes get death =
    gamma_max unless `drop_essential` removes them outright.
    """
    n = filtration.n_vertices
    edges = filtration.edges
    evals = filtration.edge_values
    gmax = filtration.gamma_max

    births, deaths, dims, ess = [], [], [], []

    uf = _UnionFind(n)
    positive = np.zeros(len(edges), dtype=bool)
    for pos in range(len(edges)):
        a, b = edges[pos]
        if uf.union(int(a), int(b)):
            births.append(0.0)
            deaths.append(float(evals[pos]))
            dims.append(0)
            ess.append(False)
        else:
            positive[pos] = True
    n_components = len({uf.find(v) for v in range(n)})
    if not drop_essential:
        for _ in range(n_components):
            births.append(0.0)
            deaths.append(gmax)
            dims.append(0)
            ess.append(True)

    # degree 1: reduce triangle columns over edge rows; a column's surviving
    # lowest one pairs that edge's cycle with this triangle
    if len(filtration.triangles):
        edge_pos = {}
        for pos, (a, b) in enumerate(edges):
            edge_pos[(int(a), int(b))] = pos
        pivots: dict[int, int] = {}
        paired = np.zeros(len(edges), dtype=bool)
        tvals = filtration.triangle_values
        for t in range(len(filtration.triangles)):
            i, j, k = (int(v) for v in filtration.triangles[t])
            col = ((1 << edge_pos[(i, j)]) | (1 << edge_pos[(i, k)])
                   | (1 << edge_pos[(j, k)]))
            while col:
                low = col.bit_length() - 1
                other = pivots.get(low)
                if other is None:
                    pivots[low] = col
                    paired[low] = True
                    if evals[low] < tvals[t]:
                        births.append(float(evals[low]))
                        deaths.append(float(tvals[t]))
                        dims.append(1)
                        ess.append(False)
                    break
                col ^= other
    else:
        paired = np.zeros(len(edges), dtype=bool)

    if not drop_essential:
        for pos in np.nonzero(positive & ~paired)[0]:
            if evals[pos] < gmax:
                births.append(float(evals[pos]))
                deaths.append(gmax)
                dims.append(1)
                ess.append(True)

    if not births:
        return PersistenceDiagram.empty(gamma_max=gmax)
    b = np.array(births)
    d = np.array(deaths)
    dm = np.array(dims, dtype=int)
    es = np.array(ess, dtype=bool)
    order = np.lexsort((es, d, b, dm))
    return PersistenceDiagram(births=b[order], deaths=d[order], dims=dm[order],
                              essential=es[order], gamma_max=gmax)


def vr_diagram(points: np.ndarray, gamma_max: float = DEFAULT_GAMMA_MAX,
               max_dim: int = 2, drop_essential: bool = False,
               budget: int = DEFAULT_SIMPLEX_BUDGET) -> PersistenceDiagram:
    """Convenience wrapper: filtration construction plus reduction."""
    filt = build_vr_filtration(points, gamma_max=gamma_max, max_dim=max_dim,
                               budget=budget)
    return compute_persistence(filt, drop_essential=drop_essential)


def _kuhn_max_matching(adj: np.ndarray) -> int:
    """Maximum bipartite matching size via augmenting paths."""
    n_left, n_right = adj.shape
    nbrs = [np.nonzero(adj[u])[0] for u in range(n_left)]
    match_right = np.full(n_right, -1)

    def augment(u: int, seen: np.ndarray) -> bool:
        for v in nbrs[u]:
            if not seen[v]:
                seen[v] = True
                if match_right[v] < 0 or augment(match_right[v], seen):
                    match_right[v] = u
                    return True
        return False

    size = 0
    for u in range(n_left):
        if augment(u, np.zeros(n_right, dtype=bool)):
            size += 1
    return size


def _matching_feasible(dist: np.ndarray, diag_a: np.ndarray,
                       diag_b: np.ndarray, delta: float) -> bool:
    """Can every point match within delta, using the diagonal as overflow?"""
    na, nb = dist.shape
    n = na + nb
    adj = np.zeros((n, n), dtype=bool)
    adj[:na, :nb] = dist <= delta
    adj[:na, nb:] = (diag_a <= delta)[:, None]
    adj[na:, :nb] = (diag_b <= delta)[None, :]
    adj[na:, nb:] = True
    return _kuhn_max_matching(adj) == n


def bottleneck_distance(a: np.ndarray, b: np.ndarray,
                        strict_bijection: bool = False) -> float:
    """Exact bottleneck distance between two diagrams given as (n, 2) arrays.

    Points may be matched to the diagonal at cost (death - birth) / 2 unless
    `strict_bijection` demands a pure point-to-point pairing, which raises
    ShapeError when the cardinalities differ.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)

    # classes with infinite death can only match each other, by birth
    inf_a = ~np.isfinite(a[:, 1])
    inf_b = ~np.isfinite(b[:, 1])
    inf_part = 0.0
    if np.any(inf_a) or np.any(inf_b):
        ba = np.sort(a[inf_a, 0])
        bb = np.sort(b[inf_b, 0])
        if len(ba) != len(bb):
            return float("inf")
        if len(ba):
            inf_part = float(np.max(np.abs(ba - bb)))
        a, b = a[~inf_a], b[~inf_b]

    na, nb = len(a), len(b)
    if strict_bijection:
        if na != nb:
            raise ShapeError(
                f"strict matching needs equal sizes, got {na} and {nb}"
            )
        if na == 0:
            return inf_part
        dist = np.max(np.abs(a[:, None, :] - b[None, :, :]), axis=2)
        cands = np.unique(dist)
        lo, hi = 0, len(cands) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if _kuhn_max_matching(dist <= cands[mid]) == na:
                hi = mid
            else:
                lo = mid + 1
        return max(float(cands[lo]), inf_part)

    if na == 0 and nb == 0:
        return inf_part
    diag_a = (a[:, 1] - a[:, 0]) / 2.0
    diag_b = (b[:, 1] - b[:, 0]) / 2.0
    if na and nb:
        dist = np.max(np.abs(a[:, None, :] - b[None, :, :]), axis=2)
    else:
        dist = np.zeros((na, nb))
    cands = np.unique(np.concatenate([dist.ravel(), diag_a, diag_b, [0.0]]))
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _matching_feasible(dist, diag_a, diag_b, float(cands[mid])):
            hi = mid
        else:
            lo = mid + 1
    return max(float(cands[lo]), inf_part)


def write_pd_file(path, entries) -> None:
    """Write diagrams as `object,dim,birth,death` rows, 9 significant digits."""
    if isinstance(entries, dict):
        entries = sorted(entries.items())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["object", "dim", "birth", "death"])
        for object_id, pd in entries:
            for i in range(len(pd)):
                writer.writerow([
                    object_id, int(pd.dims[i]),
                    f"{pd.births[i]:.9g}", f"{pd.deaths[i]:.9g}",
                ])


def load_pd_file(path, gamma_max: float | None = None) -> dict:
    """Read a diagram CSV back into {object id: PersistenceDiagram}.

    With `gamma_max` given, rows whose death equals it are flagged essential.
    Rows below the diagonal are accepted (received diagrams can contain them)
    and mark the whole object's diagram as halfplane=False.
    """
    rows: dict[int, list] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file", line_number=1)
        if [h.strip().lower() for h in header] != ["object", "dim", "birth", "death"]:
            raise ParseError(f"bad header {header!r}", line_number=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}", lineno)
            try:
                obj = int(row[0])
                dim = int(row[1])
                birth = float(row[2])
                death = float(row[3])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from exc
            rows.setdefault(obj, []).append((dim, birth, death))
    out = {}
    for obj in sorted(rows):
        arr = np.array(rows[obj])
        dims = arr[:, 0].astype(int)
        births = arr[:, 1]
        deaths = arr[:, 2]
        if gamma_max is not None:
            essential = deaths == gamma_max
        else:
            essential = np.zeros(len(arr), dtype=bool)
        out[obj] = PersistenceDiagram(
            births=births, deaths=deaths, dims=dims, essential=essential,
            gamma_max=gamma_max, halfplane=bool(np.all(births <= deaths)),
        )
    return out
