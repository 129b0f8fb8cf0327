"""Besov, mixed Besov and Chemin-Lerner norms from dyadic block profiles."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .littlewood_paley import (DyadicCutoffs, block_for, block_truncated, dyadic_decomposition,
                               dyadic_indices)
from .spectral_core import Field, NormKind, lebesgue_norm, transform


class NormError(ValueError):
    pass


def lq_sum(values, q: float) -> float:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    if math.isinf(q):
        return float(values.max())
    return float(np.sum(values ** q) ** (1.0 / q))


@dataclass(frozen=True)
class BesovSpec:
    s: float
    p: float = 2.0
    q: float = 2.0
    homogeneous: bool = False
    k_window: tuple[int, int] | None = None

    def __post_init__(self):
        if not (self.p >= 1 and self.q >= 1):
            raise NormError(f"p and q must be >= 1, got p={self.p}, q={self.q}")
        if self.homogeneous:
            if self.k_window is None:
                raise NormError("homogeneous norms need a declared dyadic window")
            lo, hi = self.k_window
            if hi < lo:
                raise NormError(f"empty homogeneous window {self.k_window}")


@dataclass(frozen=True)
class MixedBesovSpec:
    t: float
    s: float
    r: float = 2.0
    p: float = 2.0
    q: float = 2.0


@dataclass(frozen=True)
class ChLSpec:
    """Chemin-Lerner flavour: ``tilde`` takes block norms before the x-norm."""

    r: float
    s: float
    p: float = 2.0
    q: float = 2.0
    tilde: bool = True


@dataclass(frozen=True)
class BlockNormProfile:
    """Per-scale block norms; k = -1 labels the low block."""

    ks: tuple[int, ...]
    values: tuple[float, ...]
    truncated: tuple[bool, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.ks, self.ks[1:])):
            raise NormError("profile scales must be strictly increasing")
        if any(v < 0 for v in self.values):
            raise NormError("block norms must be nonnegative")

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.ks, self.values))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "block_norm", "truncated_flag"])
        for k, v, t in zip(self.ks, self.values, self.truncated):
            writer.writerow([k, repr(float(v)), int(t)])
        return buf.getvalue()


def _weight(k: int, s: float) -> float:
    return 1.0 if k < 0 else 2.0 ** (k * s)


def block_profile(field: Field, group: str, p: float | NormKind, cutoffs: DyadicCutoffs,
                  ks: list[int] | None = None) -> BlockNormProfile:
    """Unweighted block norms of ``field`` on ``group``."""
    kind = p if isinstance(p, NormKind) else NormKind(p)
    if field.spectral:
        raise NormError("profiles are computed from physical-space fields")
    blocks = dyadic_decomposition(field, group, cutoffs, ks)
    keys = sorted(blocks)
    values = tuple(lebesgue_norm(blocks[k], kind) for k in keys)
    flags = tuple(block_truncated(field.grid, block_for(k), cutoffs) for k in keys)
    return BlockNormProfile(tuple(keys), values, flags)


def _homogeneous_profile(field: Field, group: str, spec: BesovSpec,
                         cutoffs: DyadicCutoffs) -> BlockNormProfile:
    lo, hi = spec.k_window
    hat = transform(field, group, "forward")
    r = hat.radial_frequency(group)
    step = field.grid.lattice_step(group)
    ks, values, flags = [], [], []
    for k in range(lo, hi + 1):
        block = hat.with_data(hat.data * cutoffs.phi(r / 2.0 ** k))
        ks.append(k)
        values.append(lebesgue_norm(transform(block, group, "inverse"), NormKind(spec.p)))
        # below the lattice step or above Nyquist the block is not fully represented
        flags.append(bool(2.0 ** (k - 1) * cutoffs.support < step
                          or block_truncated(field.grid, block_for(k), cutoffs)))
    return BlockNormProfile(tuple(ks), tuple(values), tuple(flags))


def besov_norm(field: Field, group: str, spec: BesovSpec,
               cutoffs: DyadicCutoffs) -> tuple[float, BlockNormProfile]:
    """Besov norm on one group with block L^p norms taken over all axes of ``field``."""
    if spec.homogeneous:
        profile = _homogeneous_profile(field, group, spec, cutoffs)
        weights = [2.0 ** (k * spec.s) for k in profile.ks]
    else:
        profile = block_profile(field, group, spec.p, cutoffs)
        weights = [_weight(k, spec.s) for k in profile.ks]
    if not any(profile.values):
        return 0.0, BlockNormProfile((), (), ())
    value = lq_sum(np.array(weights) * np.array(profile.values), spec.q)
    return value, profile


def mixed_block_matrix(field: Field, spec: MixedBesovSpec,
                       cutoffs: DyadicCutoffs) -> tuple[list[int], list[int], np.ndarray]:
    """Mixed L^r_x L^p_v norms of the double blocks Delta_i^x Delta_j^v f."""
    kind = NormKind(spec.p, spec.r, outer="x")
    xks = dyadic_indices(field.grid, cutoffs)
    vks = dyadic_indices(field.grid, cutoffs)
    xblocks = dyadic_decomposition(field, "x", cutoffs, xks)
    mat = np.zeros((len(xks), len(vks)))
    for a, i in enumerate(xks):
        vblocks = dyadic_decomposition(xblocks[i], "v", cutoffs, vks)
        for b, j in enumerate(vks):
            mat[a, b] = lebesgue_norm(vblocks[j], kind)
    return xks, vks, mat


def besov_norm_mixed(field: Field, spec: MixedBesovSpec, cutoffs: DyadicCutoffs) -> float:
    xks, vks, mat = mixed_block_matrix(field, spec, cutoffs)
    w = np.outer([_weight(i, spec.t) for i in xks], [_weight(j, spec.s) for j in vks])
    return lq_sum((w * mat).ravel(), spec.q)


def chemin_lerner_norm(field: Field, spec: ChLSpec, cutoffs: DyadicCutoffs) -> float:
    """Tilde flavour: l^q over v-blocks of L^r_x L^p_v norms. Plain flavour: L^r_x of the v-Besov norm."""
    vks = dyadic_indices(field.grid, cutoffs)
    blocks = dyadic_decomposition(field, "v", cutoffs, vks)
    weights = np.array([_weight(k, spec.s) for k in vks])
    if spec.tilde:
        kind = NormKind(spec.p, spec.r, outer="x")
        return lq_sum(weights * [lebesgue_norm(blocks[k], kind) for k in vks], spec.q)
    # per-x Besov norm in v, then L^r over x
    per_x = []
    for k in vks:
        data = np.abs(blocks[k].data)
        axes = field.axes("v")
        vol = field.grid.cell_volume("v")
        if math.isinf(spec.p):
            per_x.append(data.max(axis=axes))
        else:
            per_x.append((np.sum(data ** spec.p, axis=axes) * vol) ** (1 / spec.p))
    stack = np.stack(per_x) * weights.reshape((-1,) + (1,) * (per_x[0].ndim))
    if math.isinf(spec.q):
        local = stack.max(axis=0)
    else:
        local = np.sum(stack ** spec.q, axis=0) ** (1 / spec.q)
    xvol = field.grid.cell_volume("x")
    if math.isinf(spec.r):
        return float(local.max())
    return float((np.sum(local ** spec.r) * xvol) ** (1 / spec.r))


@dataclass(frozen=True)
class IndexFit:
    slope: float
    r2: float

    @property
    def index(self) -> float:
        return -self.slope


def regularity_index_fit(profile: BlockNormProfile, window: tuple[int, int]) -> IndexFit:
    """Least-squares slope of log2(block norm) against k inside ``window``."""
    lo, hi = window
    pts = [(k, v) for k, v in zip(profile.ks, profile.values) if lo <= k <= hi and v > 0]
    if len(pts) < 4:
        raise NormError(f"need at least 4 nonzero blocks in window {window}, got {len(pts)}")
    k = np.array([p[0] for p in pts], dtype=float)
    y = np.log2([p[1] for p in pts])
    slope, intercept = np.polyfit(k, y, 1)
    resid = y - (slope * k + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return IndexFit(float(slope), r2)
