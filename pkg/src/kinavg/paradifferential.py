"""Bony decomposition of a product f(x, v) phi(v) in the velocity variable."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .besov_norms import ChLSpec, chemin_lerner_norm
from .littlewood_paley import (BlockIndex, DyadicCutoffs, block_empty, block_for, block_project,
                               dyadic_decomposition, dyadic_indices)
from .spectral_core import Field, lebesgue_norm, transform

# labels: -1 is the low block, j >= 0 the annulus at 2^j
LOW = -1
HALF = BlockIndex.low(0.5)


class ParaproductError(ValueError):
    pass


@dataclass(frozen=True)
class BonyParts:
    """f phi = low_high + high_low + remainder.

    ``low_high`` is sum_{k>=2} Delta_{2^k} f S_{2^{k-3}} phi, ``high_low`` swaps the
    roles of f and phi, ``remainder`` holds every remaining pair of blocks, i.e.
    the pairs whose labels differ by at most 3 apart from the two k=2 terms with
    S_{1/2}. ``window_gap`` is the part of the remainder carried by label distance
    exactly 3, which a remainder restricted to distance <= 2 would miss.
    """

    low_high: Field
    high_low: Field
    remainder: Field
    window_gap: Field
    product: Field
    f: Field
    phi: Field
    f_blocks: dict
    phi_blocks: dict
    truncated: bool

    @property
    def reconstruction_residual(self) -> float:
        total = self.low_high + self.high_low + self.remainder
        scale = lebesgue_norm(self.product)
        diff = lebesgue_norm(total - self.product)
        return diff if scale == 0 else diff / scale


def _as_phase_space(phi: Field, like: Field) -> Field:
    if phi.groups == like.groups:
        return phi
    if phi.groups != ("v",):
        raise ParaproductError("phi must be a velocity-only field or share the groups of f")
    pad = (None,) * like.grid.dim + (slice(None),) * like.grid.dim
    return like.with_data(np.broadcast_to(phi.data[pad], like.data.shape))


def _mul(a: Field, b: Field) -> Field:
    return a.with_data(a.data * b.data)


def _low_sum(blocks: dict, top: int, field: Field) -> Field:
    """S_{2^top} as the telescoped sum of blocks with label < top (top >= 0)."""
    out = field.with_data(np.zeros_like(field.data))
    for j, piece in blocks.items():
        if j < top:
            out = out + piece
    return out


def bony_decompose(f: Field, phi: Field, cutoffs: DyadicCutoffs) -> BonyParts:
    """Split f phi into the two paraproducts and the remainder, blockwise in v."""
    if f.spectral or phi.spectral:
        raise ParaproductError("bony_decompose expects physical-space fields")
    phi_full = _as_phase_space(phi, f)
    ks = dyadic_indices(f.grid, cutoffs)
    fb = dyadic_decomposition(f, "v", cutoffs, ks)
    pb = dyadic_decomposition(phi_full, "v", cutoffs, ks)
    zero = f.with_data(np.zeros_like(f.data))
    low_half_f = block_project(f, "v", HALF, cutoffs)
    low_half_phi = block_project(phi_full, "v", HALF, cutoffs)

    def paraproduct(high: dict, low: dict, low_half: Field) -> Field:
        out = zero
        for k in ks:
            if k < 2:
                continue
            lows = low_half if k == 2 else _low_sum(low, k - 3, zero)
            out = out + _mul(high[k], lows)
        return out

    low_high = paraproduct(fb, pb, low_half_phi)
    high_low = paraproduct(pb, fb, low_half_f)
    remainder, gap = zero, zero
    for a in ks:
        for b in ks:
            d = abs(a - b)
            if d <= 3:
                term = _mul(fb[a], pb[b])
                remainder = remainder + term
                if d == 3:
                    gap = gap + term
    # the k=2 terms of the paraproducts use S_{1/2}, which sits inside the low block
    k2 = fb.get(2)
    if k2 is not None:
        remainder = remainder - _mul(fb[2], low_half_phi) - _mul(low_half_f, pb[2])
        gap = gap - _mul(fb[2], low_half_phi) - _mul(low_half_f, pb[2])
    truncated = bool(max(ks) >= 0 and 2 * cutoffs.support * 2.0 ** max(ks) > f.grid.nyquist)
    return BonyParts(low_high, high_low, remainder, gap, _mul(f, phi_full), f, phi_full, fb, pb, truncated)


@dataclass(frozen=True)
class SupportTerm:
    j: int
    k: int
    residual: float
    expected_zero: bool
    empty_block: bool

    @property
    def passed(self) -> bool:
        return self.residual <= 1e-10 if self.expected_zero else True


@dataclass(frozen=True)
class SupportReport:
    terms: tuple[SupportTerm, ...]
    aliasing_free: bool

    @property
    def passed(self) -> bool:
        return self.aliasing_free and all(t.passed for t in self.terms)


def paraproduct_term(parts: BonyParts, j: int, cutoffs: DyadicCutoffs) -> Field:
    """Delta_{2^j} f S_{2^{j-3}} phi for j >= 2."""
    if j < 2:
        raise ParaproductError("paraproduct terms start at j = 2")
    if j not in parts.f_blocks:
        raise ParaproductError(f"block j={j} is beyond the grid")
    if j == 2:
        low = block_project(parts.phi, "v", HALF, cutoffs)
    else:
        low = _low_sum(parts.phi_blocks, j - 3, parts.f_blocks[j])
    return _mul(parts.f_blocks[j], low)


def support_localization_check(parts: BonyParts, cutoffs: DyadicCutoffs,
                               pairs=((4, -1), (4, 8), (4, 1), (4, 7), (4, 4))) -> SupportReport:
    """Project paraproduct terms onto v-blocks and measure what survives.

    A pair (j, k) asks for Delta_k applied to the j-th paraproduct term, with k = -1
    meaning the low block. The term is expected to vanish when k = -1 and j >= 2
    or when |j - k| >= 3, and the report compares against the term's own norm.
    Products are computed pointwise, so the check is only meaningful when the
    fields' v-spectra stay below half the Nyquist frequency; ``aliasing_free``
    records that.
    """
    grid = parts.product.grid
    terms = []
    for j, k in pairs:
        term = paraproduct_term(parts, j, cutoffs)
        ref = lebesgue_norm(term)
        block = block_for(k)
        empty = block_empty(grid, block, cutoffs)
        projected = block_project(term, "v", block, cutoffs)
        res = lebesgue_norm(projected) / ref if ref > 0 else 0.0
        zero_expected = (k == LOW and j >= 2) or (k >= 0 and abs(j - k) >= 3)
        terms.append(SupportTerm(j, k, res, zero_expected, empty))
    return SupportReport(tuple(terms), _aliasing_free(parts))


def _aliasing_free(parts: BonyParts, tol: float = 1e-12) -> bool:
    """True when f and phi carry no v-spectrum above half the Nyquist frequency."""
    for field in (parts.f, parts.phi):
        hat = transform(field, "v", "forward")
        r = np.broadcast_to(hat.radial_frequency("v"), hat.data.shape)
        high = np.abs(hat.data[r > field.grid.nyquist / 2]).max(initial=0.0)
        if high > tol * max(np.abs(hat.data).max(), 1e-300):
            return False
    return True


@dataclass(frozen=True)
class ProductEstimateReport:
    spec: ChLSpec
    seeds: tuple[int, ...]
    ratios: tuple[float, ...]
    skipped: tuple[int, ...]
    budget: float

    @property
    def spread(self) -> float:
        return max(self.ratios) / min(self.ratios) if self.ratios else 1.0

    @property
    def passed(self) -> bool:
        return bool(self.ratios) and self.spread <= 10 and max(self.ratios) <= self.budget


def product_estimate_check(fields: dict[int, Field], phi: Field, spec: ChLSpec,
                           cutoffs: DyadicCutoffs, budget: float = 1e2) -> ProductEstimateReport:
    """Ratios ||f phi|| / ||f|| in a Chemin-Lerner space over a seeded family of fields."""
    seeds, ratios, skipped = [], [], []
    for seed in sorted(fields):
        f = fields[seed]
        denom = chemin_lerner_norm(f, spec, cutoffs)
        if denom == 0:
            skipped.append(seed)
            continue
        prod = _mul(f, _as_phase_space(phi, f))
        seeds.append(seed)
        ratios.append(chemin_lerner_norm(prod, spec, cutoffs) / denom)
    return ProductEstimateReport(spec, tuple(seeds), tuple(ratios), tuple(skipped), budget)


def bony_residuals(parts: BonyParts) -> dict[str, float]:
    scale = max(lebesgue_norm(parts.product), 1e-300)
    return {"reconstruction": parts.reconstruction_residual,
            "window_gap": lebesgue_norm(parts.window_gap) / scale}
