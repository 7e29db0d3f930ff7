"""Uniform 2D vector quantization onto an m x m grid over a square box.

Cells are half-open [k*delta, (k+1)*delta) with the final cell closed, so the
box is partitioned exactly and boundary ties resolve to the higher cell.
Cell indices are 1-based and row-major by (x-bin, y-bin): index k satisfies
k - 1 = x_bin * m + y_bin. This layout is fixed in the wire format.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import CorruptSymbol, OutOfBox, ParseError, ShapeError
from .homology import PersistenceDiagram

SOURCE_KINDS = ("pd", "raw", "latent")
DEFAULT_BOX_SIDES = {"pd": 16.0, "raw": 28.0, "latent": 1.0}


def upper_triangle_cells(m: int) -> int:
    """Cells meeting the open halfplane b < d: x_bin <= y_bin."""
    return m * (m + 1) // 2


@dataclass(frozen=True)
class QuantizerGrid:
    """m x m congruent square cells partitioning [0, box_side]^2."""

    box_side: float
    n_bins: int

    def __post_init__(self):
        if self.box_side <= 0:
            raise ValueError(f"box side must be positive, got {self.box_side}")
        if self.n_bins < 2:
            raise ValueError(f"need at least 2 bins per dim, got {self.n_bins}")

    @property
    def cell_width(self) -> float:
        return self.box_side / self.n_bins

    @property
    def n_cells(self) -> int:
        return self.n_bins * self.n_bins

    def _bins(self, coords: np.ndarray) -> np.ndarray:
        bad = (coords < 0) | (coords > self.box_side)
        if np.any(bad):
            idx = np.argwhere(bad)[0]
            raise OutOfBox(
                f"coordinate {coords[tuple(idx)]} outside [0, {self.box_side}]"
            )
        bins = np.floor(coords / self.cell_width).astype(int)
        # closed final cell: points on the far boundary stay in bin m-1
        return np.minimum(bins, self.n_bins - 1)

    def quantize_points(self, points: np.ndarray) -> np.ndarray:
        """1-based cell indices for an (n, 2) array of in-box points."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        bins = self._bins(pts)
        return bins[:, 0] * self.n_bins + bins[:, 1] + 1

    def quantize_point(self, s) -> int:
        return int(self.quantize_points(np.asarray(s).reshape(1, 2))[0])

    def centers_of(self, indices: np.ndarray) -> np.ndarray:
        """Cell centers for 1-based indices; invalid index -> CorruptSymbol."""
        idx = np.asarray(indices, dtype=int).ravel()
        bad = (idx < 1) | (idx > self.n_cells)
        if np.any(bad):
            raise CorruptSymbol(
                f"cell index {idx[bad][0]} outside 1..{self.n_cells}"
            )
        x_bin = (idx - 1) // self.n_bins
        y_bin = (idx - 1) % self.n_bins
        w = self.cell_width
        return np.column_stack([(x_bin + 0.5) * w, (y_bin + 0.5) * w])

    def center(self, k: int) -> np.ndarray:
        return self.centers_of(np.array([k]))[0]


@dataclass(frozen=True)
class QuantizedPointSet:
    """Multiset of cell indices for one object, split into channels.

    `channel_counts` partitions `indices` in order (for diagrams: degree-0
    symbols then degree-1 symbols). Halfplane membership (x_bin <= y_bin) is
    enforced for clean diagram sources; symbol streams rebuilt after a noisy
    channel set check_halfplane=False.
    """

    indices: np.ndarray
    grid: QuantizerGrid
    source_kind: str
    channel_counts: tuple = ()
    check_halfplane: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.source_kind not in SOURCE_KINDS:
            raise ValueError(f"source_kind must be one of {SOURCE_KINDS}")
        idx = np.asarray(self.indices, dtype=int).ravel()
        bad = (idx < 1) | (idx > self.grid.n_cells)
        if np.any(bad):
            raise CorruptSymbol(
                f"cell index {idx[bad][0]} outside 1..{self.grid.n_cells}"
            )
        if not self.channel_counts:
            object.__setattr__(self, "channel_counts", (len(idx),))
        if sum(self.channel_counts) != len(idx):
            raise ShapeError(
                f"channel counts {self.channel_counts} do not partition "
                f"{len(idx)} symbols"
            )
        if self.source_kind == "pd" and self.check_halfplane and len(idx):
            x_bin = (idx - 1) // self.grid.n_bins
            y_bin = (idx - 1) % self.grid.n_bins
            if np.any(x_bin > y_bin):
                k = idx[x_bin > y_bin][0]
                raise ValueError(
                    f"cell {k} lies strictly below the diagonal; "
                    "not reachable from birth <= death input"
                )
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def channel(self, c: int) -> np.ndarray:
        start = sum(self.channel_counts[:c])
        return self.indices[start:start + self.channel_counts[c]]


def quantize_set(grid: QuantizerGrid, points: np.ndarray, source_kind: str,
                 collapse_duplicates: bool = False) -> QuantizedPointSet:
    """Quantize a point multiset; multiplicity kept unless collapsing."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    idx = grid.quantize_points(pts) if len(pts) else np.empty(0, dtype=int)
    if collapse_duplicates:
        idx = np.unique(idx)
    return QuantizedPointSet(indices=idx, grid=grid, source_kind=source_kind)


def dequantize(grid: QuantizerGrid, q: QuantizedPointSet) -> np.ndarray:
    """Representation points (cell centers), preserving order and multiplicity."""
    if len(q) == 0:
        return np.empty((0, 2))
    return grid.centers_of(q.indices)


def quantize_diagram(grid: QuantizerGrid, diagram: PersistenceDiagram,
                     collapse_duplicates: bool = False) -> QuantizedPointSet:
    """Quantize a diagram's (birth, death) points, degree 0 then degree 1."""
    parts = []
    counts = []
    for dim in (0, 1):
        pts = diagram.points(dim)
        idx = grid.quantize_points(pts) if len(pts) else np.empty(0, dtype=int)
        if collapse_duplicates:
            idx = np.unique(idx)
        parts.append(idx)
        counts.append(len(idx))
    return QuantizedPointSet(
        indices=np.concatenate(parts) if parts else np.empty(0, dtype=int),
        grid=grid, source_kind="pd", channel_counts=tuple(counts),
        check_halfplane=diagram.halfplane,
    )


def diagram_from_symbols(grid: QuantizerGrid, indices: np.ndarray,
                         channel_counts: tuple,
                         gamma_max: float | None = None) -> PersistenceDiagram:
    """Rebuild a (possibly corrupted) diagram from decoded cell indices."""
    idx = np.asarray(indices, dtype=int).ravel()
    if sum(channel_counts) != len(idx):
        raise ShapeError(
            f"channel counts {channel_counts} do not partition {len(idx)} symbols"
        )
    centers = grid.centers_of(idx) if len(idx) else np.empty((0, 2))
    dims = np.repeat(np.arange(len(channel_counts)),
                     np.array(channel_counts, dtype=int))
    return PersistenceDiagram.from_received(
        births=centers[:, 0], deaths=centers[:, 1], dims=dims,
        gamma_max=gamma_max,
    )


def write_symbol_stream(path, grid: QuantizerGrid, source_kind: str,
                        objects) -> None:
    """Persist per-object symbol records under a (B, m, source_kind) header."""
    if isinstance(objects, dict):
        objects = sorted(objects.items())
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["box_side", "n_bins", "source_kind"])
        writer.writerow([f"{grid.box_side:.9g}", grid.n_bins, source_kind])
        writer.writerow(["object", "channel", "symbol"])
        for object_id, q in objects:
            for c in range(len(q.channel_counts)):
                for k in q.channel(c):
                    writer.writerow([object_id, c, int(k)])


def load_symbol_stream(path):
    """Read a symbol stream file -> (grid, source_kind, {id: QuantizedPointSet}).

    Indices are accepted as-is (no halfplane check): the file may hold a
    post-channel stream.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        h1 = next(reader, None)
        if h1 is None or [s.strip().lower() for s in h1] != \
                ["box_side", "n_bins", "source_kind"]:
            raise ParseError(f"bad stream header {h1!r}", line_number=1)
        vals = next(reader, None)
        if vals is None or len(vals) != 3:
            raise ParseError("missing grid parameters", line_number=2)
        try:
            grid = QuantizerGrid(box_side=float(vals[0]), n_bins=int(vals[1]))
        except ValueError as exc:
            raise ParseError(str(exc), line_number=2) from exc
        source_kind = vals[2].strip()
        if source_kind not in SOURCE_KINDS:
            raise ParseError(f"unknown source kind {source_kind!r}", 2)
        h2 = next(reader, None)
        if h2 is None or [s.strip().lower() for s in h2] != \
                ["object", "channel", "symbol"]:
            raise ParseError(f"bad record header {h2!r}", line_number=3)
        per_object: dict[int, dict[int, list]] = {}
        for lineno, row in enumerate(reader, start=4):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", lineno)
            try:
                obj, chan, sym = int(row[0]), int(row[1]), int(row[2])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from exc
            per_object.setdefault(obj, {}).setdefault(chan, []).append(sym)
    out = {}
    for obj in sorted(per_object):
        chans = per_object[obj]
        n_chan = max(chans) + 1
        parts = [np.array(chans.get(c, []), dtype=int) for c in range(n_chan)]
        out[obj] = QuantizedPointSet(
            indices=np.concatenate(parts), grid=grid, source_kind=source_kind,
            channel_counts=tuple(len(p) for p in parts),
            check_halfplane=False,
        )
    return grid, source_kind, out
