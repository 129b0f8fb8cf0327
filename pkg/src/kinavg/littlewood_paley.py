"""Smooth dyadic cutoffs and the frequency-block operators built from them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .spectral_core import Field, GridSpec, NormKind, lebesgue_norm, transform

EDGE = 0.75
_GL_NODES = 64


class CutoffError(ValueError):
    pass


def _bump(y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    inside = np.abs(y) < 1
    out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
    return out


@dataclass(frozen=True)
class DyadicCutoffs:
    """Radial low-pass ``psi`` and annulus ``phi(r) = psi(r/2) - psi(r)``.

    ``psi`` is the indicator of ``r <= 3/4`` convolved with the normalised
    ``exp(-1/(1-y^2))`` bump of half-width ``width``, so it equals 1 for
    ``r <= 3/4 - width`` and vanishes for ``r >= 3/4 + width``.
    """

    width: float = 0.2

    def __post_init__(self):
        if not 0 < self.width < 0.25:
            raise CutoffError(f"mollification width must lie in (0, 1/4), got {self.width}")

    @cached_property
    def _quadrature(self):
        nodes, weights = np.polynomial.legendre.leggauss(_GL_NODES)
        total = np.sum(weights * _bump(nodes))
        return nodes, weights, total

    def _cdf(self, u: np.ndarray) -> np.ndarray:
        """Mass of the normalised bump on [-1, u]."""
        nodes, weights, total = self._quadrature
        u = np.asarray(u, dtype=float)
        out = np.where(u >= 1, 1.0, 0.0)
        mid = (u > -1) & (u < 1)
        if np.any(mid):
            # integrate over the shorter side and use the bump's symmetry, so 0 <= cdf <= 1
            um = -np.abs(u[mid])[:, None]
            half = 0.5 * (um + 1)
            y = half * nodes[None, :] + (half - 1)
            low = np.minimum(np.sum(weights * _bump(y), axis=1) * half[:, 0] / total, 0.5)
            out[mid] = np.where(u[mid] > 0, 1.0 - low, low)
        return out

    def psi(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self._cdf((EDGE - r) / self.width)

    def phi(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.psi(r / 2) - self.psi(r)

    @property
    def plateau(self) -> float:
        """Largest radius on which psi is identically 1."""
        return EDGE - self.width

    @property
    def support(self) -> float:
        """Radius beyond which psi vanishes."""
        return EDGE + self.width


def build_cutoffs(width: float = 0.2) -> DyadicCutoffs:
    return DyadicCutoffs(width)


@dataclass(frozen=True)
class BlockIndex:
    """Selects one of the block operators.

    ``zero`` is the low block (psi), ``dyadic`` is phi(xi/delta), ``band`` is
    S_{2 delta2} - S_{delta}, and ``low`` is S_delta = psi(xi/delta).
    """

    kind: str
    delta: float = 1.0
    delta2: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "dyadic", "band", "low"):
            raise CutoffError(f"unknown block kind {self.kind!r}")
        if self.kind != "zero" and not self.delta > 0:
            raise CutoffError(f"block scale must be positive, got {self.delta}")
        if self.kind == "band" and not self.delta2 > self.delta:
            raise CutoffError(f"band requires 0 < delta1 < delta2, got ({self.delta}, {self.delta2})")

    @classmethod
    def zero(cls) -> "BlockIndex":
        return cls("zero")

    @classmethod
    def dyadic(cls, delta: float) -> "BlockIndex":
        return cls("dyadic", delta)

    @classmethod
    def band(cls, lo: float, hi: float) -> "BlockIndex":
        return cls("band", lo, hi)

    @classmethod
    def low(cls, delta: float) -> "BlockIndex":
        return cls("low", delta)

    def scaled(self, factor: float) -> "BlockIndex":
        """Same block with every frequency scale multiplied by ``factor``."""
        if self.kind == "zero":
            return BlockIndex.low(factor)
        return BlockIndex(self.kind, self.delta * factor, self.delta2 * factor)

    def symbol(self, cutoffs: DyadicCutoffs, r: np.ndarray) -> np.ndarray:
        if self.kind == "zero":
            return cutoffs.psi(r)
        if self.kind == "low":
            return cutoffs.psi(r / self.delta)
        if self.kind == "dyadic":
            return cutoffs.phi(r / self.delta)
        return cutoffs.psi(r / (2 * self.delta2)) - cutoffs.psi(r / self.delta)

    def outer_radius(self, cutoffs: DyadicCutoffs) -> float:
        s = cutoffs.support
        return {"zero": s, "low": s * self.delta, "dyadic": 2 * s * self.delta,
                "band": 2 * s * self.delta2}[self.kind]

    def inner_radius(self, cutoffs: DyadicCutoffs) -> float:
        p = cutoffs.plateau
        return {"zero": 0.0, "low": 0.0, "dyadic": p * self.delta, "band": p * self.delta}[self.kind]


def block_truncated(grid: GridSpec, block: BlockIndex, cutoffs: DyadicCutoffs) -> bool:
    """True when part of the block's support lies beyond the grid's Nyquist frequency."""
    return block.outer_radius(cutoffs) > grid.nyquist


def block_empty(grid: GridSpec, block: BlockIndex, cutoffs: DyadicCutoffs) -> bool:
    """True when the block misses every lattice frequency."""
    return block.inner_radius(cutoffs) > grid.nyquist * math.sqrt(grid.dim)


def block_project(field: Field, group: str, block: BlockIndex, cutoffs: DyadicCutoffs) -> Field:
    """Apply the block multiplier on one variable group, keeping the representation."""
    was_spectral = group in field.spectral
    hat = field if was_spectral else transform(field, group, "forward")
    out = hat.with_data(hat.data * block.symbol(cutoffs, hat.radial_frequency(group)))
    return out if was_spectral else transform(out, group, "inverse")


def dyadic_indices(grid: GridSpec, cutoffs: DyadicCutoffs) -> list[int]:
    """Dyadic exponents k whose block Delta_{2^k} meets the lattice, with -1 for the low block."""
    top = grid.nyquist * math.sqrt(grid.dim)
    ks = [-1]
    k = 0
    while 2.0 ** k / 2 < top:
        ks.append(k)
        k += 1
    return ks


def block_for(k: int) -> BlockIndex:
    return BlockIndex.zero() if k < 0 else BlockIndex.dyadic(2.0 ** k)


def dyadic_decomposition(field: Field, group: str, cutoffs: DyadicCutoffs,
                         ks: list[int] | None = None) -> dict[int, Field]:
    """All blocks of ``field`` on ``group`` keyed by k (-1 is the low block), physical space."""
    ks = dyadic_indices(field.grid, cutoffs) if ks is None else ks
    hat = field if group in field.spectral else transform(field, group, "forward")
    r = hat.radial_frequency(group)
    out = {}
    for k in ks:
        piece = hat.with_data(hat.data * block_for(k).symbol(cutoffs, r))
        out[k] = transform(piece, group, "inverse") if group not in field.spectral else piece
    return out


@dataclass(frozen=True)
class BernsteinReport:
    k: int
    r: float
    p: float
    ratio: float


def bernstein_check(field: Field, group: str, k: int, r: float, p: float,
                    cutoffs: DyadicCutoffs) -> BernsteinReport:
    """Ratio ||D_k f||_p / (2^{kD(1/r-1/p)} ||D_k f||_r) for the dyadic block 2^k."""
    if p < r:
        raise CutoffError(f"Bernstein ratio needs p >= r, got r={r}, p={p}")
    piece = block_project(field, group, BlockIndex.dyadic(2.0 ** k), cutoffs)
    lo = lebesgue_norm(piece, NormKind(r))
    hi = lebesgue_norm(piece, NormKind(p))
    gap = field.grid.dim * ((1 / r) - (0 if math.isinf(p) else 1 / p))
    ratio = hi / (2.0 ** (k * gap) * lo) if lo > 0 else 0.0
    return BernsteinReport(k, r, p, ratio)


def partition_of_unity_residual(grid: GridSpec, cutoffs: DyadicCutoffs, samples: int = 4097) -> float:
    """max |psi(r) + sum_k phi(r / 2^k) - 1| over the lattice radii and a fine radial sample."""
    ks = [k for k in dyadic_indices(grid, cutoffs) if k >= 0]
    top = grid.nyquist * math.sqrt(grid.dim)
    lattice = np.abs(grid.freqs("x"))
    radii = np.concatenate([np.linspace(0.0, top, samples), lattice])
    total = cutoffs.psi(radii) + sum(cutoffs.phi(radii / 2.0 ** k) for k in ks)
    return float(np.max(np.abs(total - 1.0)))
