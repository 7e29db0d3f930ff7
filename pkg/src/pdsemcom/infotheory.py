"""Density estimation, quantizer entropy, semantic rates, and distortions.

The density lives on a fixed partition (default 28x28) of the source box,
independent of the quantizer resolution m. Cell probabilities and the MSE
distortion integrate the piecewise-constant density exactly against the
quantizer grid via 1D overlap weights, so no Monte-Carlo noise enters the
trade-off curves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDensity, OutOfBox, ShapeError
from .quantizer import QuantizerGrid, upper_triangle_cells

DEFAULT_PARTITION = 28


@dataclass(frozen=True)
class EmpiricalDensity:
    """Rescaled histogram over a partition x partition grid on [0, box]^2.

    `mass[a, b]` is the probability mass of the cell with x-bin a and y-bin
    b; masses sum to 1, so the piecewise-constant density mass/cell_area
    integrates to 1 over the box.
    """

    box_side: float
    partition: int
    mass: np.ndarray

    def __post_init__(self):
        if self.box_side <= 0:
            raise ValueError("box side must be positive")
        if self.partition < 1:
            raise ValueError("partition must be at least 1")
        m = np.asarray(self.mass, dtype=float)
        if m.shape != (self.partition, self.partition):
            raise ShapeError(
                f"mass must be {self.partition}x{self.partition}, got {m.shape}"
            )
        if np.any(m < 0):
            raise ValueError("cell mass must be nonnegative")
        if abs(float(np.sum(m)) - 1.0) > 1e-12:
            raise ValueError(f"cell masses sum to {np.sum(m)}, expected 1")
        m.setflags(write=False)
        object.__setattr__(self, "mass", m)

    @property
    def cell_width(self) -> float:
        return self.box_side / self.partition

    @property
    def values(self) -> np.ndarray:
        """Density values per cell (mass / cell area)."""
        return self.mass / (self.cell_width ** 2)

    @property
    def zero_mass_fraction(self) -> float:
        return float(np.mean(self.mass == 0.0))


def estimate_density(point_sets, box_side: float,
                     partition: int = DEFAULT_PARTITION) -> EmpiricalDensity:
    """Histogram a collection of 2D point multisets and rescale to mass 1."""
    if partition < 1:
        raise ValueError("partition must be at least 1")
    w = box_side / partition
    counts = np.zeros((partition, partition))
    total = 0
    for pts in point_sets:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            continue
        if np.any(pts < 0) or np.any(pts > box_side):
            bad = pts[(np.any((pts < 0) | (pts > box_side), axis=1))][0]
            raise OutOfBox(f"point {tuple(bad)} outside [0, {box_side}]^2")
        bins = np.minimum(np.floor(pts / w).astype(int), partition - 1)
        np.add.at(counts, (bins[:, 0], bins[:, 1]), 1)
        total += len(pts)
    if total == 0:
        raise EmptyDensity("no points to estimate a density from")
    return EmpiricalDensity(box_side=box_side, partition=partition,
                            mass=counts / total)


def _overlap_weights(density: EmpiricalDensity, grid: QuantizerGrid) -> np.ndarray:
    """W[a, i] = |partition cell a  intersect  quantizer bin i| / cell width."""
    w = density.cell_width
    d = grid.cell_width
    a = np.arange(density.partition)
    i = np.arange(grid.n_bins)
    lo = np.maximum(a[:, None] * w, i[None, :] * d)
    hi = np.minimum((a[:, None] + 1) * w, (i[None, :] + 1) * d)
    return np.clip(hi - lo, 0.0, None) / w


def cell_probabilities(density: EmpiricalDensity, grid: QuantizerGrid) -> np.ndarray:
    """Integral of the density over each quantizer cell, k-ordered (length m^2)."""
    if abs(density.box_side - grid.box_side) > 1e-12:
        raise ShapeError(
            f"density box {density.box_side} differs from grid box {grid.box_side}"
        )
    W = _overlap_weights(density, grid)
    p = W.T @ density.mass @ W
    return p.ravel()


def quantizer_entropy(p: np.ndarray) -> float:
    """Shannon entropy in bits, with 0 * log 0 = 0."""
    p = np.asarray(p, dtype=float).ravel()
    if np.any(p < 0):
        raise ValueError("probabilities must be nonnegative")
    total = float(np.sum(p))
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total}, expected 1")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


@dataclass(frozen=True)
class RateReport:
    """Both rate notions for one (source kind, m) cell.

    `rate_bits_per_object` is cell count x entropy; the self-information
    variant is mean symbols per object x entropy, which equals the average
    per-object -sum log2 p over its symbols when the density was estimated
    from those same symbols.
    """

    source_kind: str
    m: int
    entropy_bits_per_symbol: float
    M: int
    mean_symbols_per_object: float
    rate_bits_per_object: float
    self_information_bits_per_object: float
    cell_probs: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        if self.entropy_bits_per_symbol < 0:
            raise ValueError("entropy must be nonnegative")
        if self.M >= 1 and self.entropy_bits_per_symbol > np.log2(self.M) + 1e-9:
            raise ValueError(
                f"entropy {self.entropy_bits_per_symbol} exceeds log2({self.M})"
            )
        p = np.asarray(self.cell_probs, dtype=float).ravel()
        if p.size and abs(float(np.sum(p)) - 1.0) > 1e-9:
            raise ValueError("cell probabilities must sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "cell_probs", p)


def semantic_rate(entropy: float, source_kind: str, m: int,
                  mean_symbols: float,
                  cell_probs: np.ndarray | None = None) -> RateReport:
    """Rate per object: upper-triangle cell count for diagrams, m^2 otherwise."""
    if source_kind == "pd":
        M = upper_triangle_cells(m)
    elif source_kind in ("raw", "latent"):
        M = m * m
    else:
        raise ValueError(f"unknown source kind {source_kind!r}")
    return RateReport(
        source_kind=source_kind, m=m, entropy_bits_per_symbol=float(entropy),
        M=M, mean_symbols_per_object=float(mean_symbols),
        rate_bits_per_object=M * float(entropy),
        self_information_bits_per_object=float(mean_symbols) * float(entropy),
        cell_probs=np.empty(0) if cell_probs is None else cell_probs,
    )


@dataclass(frozen=True)
class DistortionReport:
    mse: float
    bottleneck_style: float
    m: int
    source_kind: str

    def __post_init__(self):
        if self.mse < 0 or self.bottleneck_style < 0:
            raise ValueError("distortions must be nonnegative")


def mse_distortion(density: EmpiricalDensity, grid: QuantizerGrid) -> float:
    """Expected squared Euclidean quantization error under the density.

    The 2D integral factorizes per axis: with A[a] the integral of
    (x - nearest center)^2 across partition cell a, the distortion is
    (1/w) * sum_ab mass[a,b] * (A[a] + A[b]). A uniform density gives
    exactly cell_width^2 / 6 for any m.
    """
    if abs(density.box_side - grid.box_side) > 1e-12:
        raise ShapeError(
            f"density box {density.box_side} differs from grid box {grid.box_side}"
        )
    w = density.cell_width
    d = grid.cell_width
    a = np.arange(density.partition)
    i = np.arange(grid.n_bins)
    lo = np.maximum(a[:, None] * w, i[None, :] * d)
    hi = np.minimum((a[:, None] + 1) * w, (i[None, :] + 1) * d)
    centers = (i + 0.5) * d
    t_hi = np.clip(hi, lo, None) - centers[None, :]
    t_lo = lo - centers[None, :]
    seg = np.where(hi > lo, (t_hi ** 3 - t_lo ** 3) / 3.0, 0.0)
    A = np.sum(seg, axis=1)
    return float(np.sum(density.mass * (A[:, None] + A[None, :])) / w)


def bottleneck_style_distortion(point_sets, grid: QuantizerGrid) -> float:
    """Mean over objects of the worst per-point ∞-norm quantization shift."""
    worst = []
    for pts in point_sets:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            worst.append(0.0)
            continue
        centers = grid.centers_of(grid.quantize_points(pts))
        worst.append(float(np.max(np.abs(pts - centers))))
    if not worst:
        raise EmptyDensity("no objects given")
    return float(np.mean(worst))
