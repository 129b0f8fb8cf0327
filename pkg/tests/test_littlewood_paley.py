import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kinavg.families import random_band_limited, random_wave_packet
from kinavg.littlewood_paley import (BlockIndex, CutoffError, bernstein_check, block_project, build_cutoffs,
                                     dyadic_decomposition, dyadic_indices, partition_of_unity_residual)
from kinavg.spectral_core import GridSpec, NormKind, lebesgue_norm, relative_l2, sample_function


@pytest.mark.parametrize("width", [0.0, 0.25, -0.1, 0.3])
def test_width_outside_range_is_rejected(width):
    with pytest.raises(CutoffError):
        build_cutoffs(width)


def test_cutoff_values_at_landmarks(cutoffs):
    assert cutoffs.psi(0.0) == 1.0 and cutoffs.phi(0.0) == 0.0
    assert cutoffs.psi(1.5) == 0.0
    assert sum(cutoffs.phi(1.5 / 2 ** k) for k in range(12)) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("width", [0.05, 0.2, 0.24])
def test_supports(width):
    c = build_cutoffs(width)
    r = np.linspace(0, 5, 20001)
    assert np.all(c.psi(r[r >= 1.0]) == 0)
    phi = c.phi(r)
    assert np.all(phi[(r <= 0.5) | (r >= 2.0)] == 0)
    assert np.all(phi >= 0) and np.all(c.psi(r) >= 0) and np.all(c.psi(r) <= 1)


def test_phi_is_the_difference_of_dilated_psi(cutoffs):
    r = np.random.default_rng(0).uniform(0, 4, 10_000)
    assert np.max(np.abs(cutoffs.phi(r) - (cutoffs.psi(r / 2) - cutoffs.psi(r)))) <= 1e-14


@given(st.floats(0, 64))
def test_partition_of_unity_pointwise(r):
    from kinavg.littlewood_paley import DyadicCutoffs
    c = DyadicCutoffs()
    total = c.psi(r) + sum(c.phi(r / 2 ** k) for k in range(10))
    assert abs(total - 1) <= 1e-12


@pytest.mark.parametrize("dim,n,period", [(1, 256, 2 * math.pi), (1, 128, 8 * math.pi), (2, 32, 2 * math.pi)])
def test_partition_of_unity_on_lattices(cutoffs, dim, n, period):
    assert partition_of_unity_residual(GridSpec(dim, n, period), cutoffs) <= 1e-12


def test_band_index_requires_ordered_scales():
    with pytest.raises(CutoffError):
        BlockIndex.band(2.0, 1.0)
    with pytest.raises(CutoffError):
        BlockIndex.dyadic(0.0)


def test_blocks_on_constants(cutoffs, grid_small):
    one = sample_function(lambda x, v: np.ones_like(x + v), grid_small)
    for delta in (1.0, 2.0, 8.0):
        assert np.max(np.abs(block_project(one, "x", BlockIndex.dyadic(delta), cutoffs).data)) < 1e-14
        assert relative_l2(block_project(one, "v", BlockIndex.low(delta), cutoffs), one) < 1e-14


@given(st.integers(0, 2 ** 16))
def test_telescoping_reconstruction(seed):
    from kinavg.littlewood_paley import DyadicCutoffs
    c = DyadicCutoffs()
    g = GridSpec(1, 64, 2 * math.pi)
    f = random_band_limited(g, seed, 30)
    for group in ("x", "v"):
        blocks = dyadic_decomposition(f, group, c)
        total = sum(blocks.values(), start=0 * f)
        assert relative_l2(total, f) <= 1e-10


def test_disjoint_annuli_annihilate(cutoffs, grid_mid):
    f = random_band_limited(grid_mid, 5, 60)
    for delta in (0.5, 1.0, 2.0):
        inner = block_project(f, "x", BlockIndex.dyadic(delta), cutoffs)
        for factor in (4.0, 8.0):
            out = block_project(inner, "x", BlockIndex.dyadic(factor * delta), cutoffs)
            assert np.max(np.abs(out.data)) <= 1e-13 * np.max(np.abs(f.data))


def test_band_and_low_blocks_reproduce_inner_blocks(cutoffs, grid_mid):
    f = random_band_limited(grid_mid, 6, 60)
    for delta in (1.0, 2.0, 4.0):
        d = block_project(f, "x", BlockIndex.dyadic(delta), cutoffs)
        dd = block_project(d, "x", BlockIndex.band(delta / 2, 2 * delta), cutoffs)
        assert relative_l2(dd, d) <= 1e-12
    d0 = block_project(f, "v", BlockIndex.zero(), cutoffs)
    assert relative_l2(block_project(d0, "v", BlockIndex.low(2.0), cutoffs), d0) <= 1e-12


def test_blocks_are_not_idempotent(cutoffs, grid_mid):
    f = random_band_limited(grid_mid, 7, 60)
    d = block_project(f, "x", BlockIndex.dyadic(4.0), cutoffs)
    assert relative_l2(block_project(d, "x", BlockIndex.dyadic(4.0), cutoffs), d) > 1e-3


def test_dyadic_indices_cover_the_lattice(cutoffs):
    g = GridSpec(1, 64, 2 * math.pi)
    ks = dyadic_indices(g, cutoffs)
    assert ks[0] == -1 and ks[1:] == list(range(len(ks) - 1))
    assert 2.0 ** ks[-1] * 2 * cutoffs.support >= g.nyquist


def test_bernstein_identity_case(cutoffs, grid_small):
    f = random_band_limited(grid_small, 1, 30, groups=("x",))
    assert bernstein_check(f, "x", 3, 2.0, 2.0, cutoffs).ratio == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(CutoffError):
        bernstein_check(f, "x", 3, 2.0, 1.0, cutoffs)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_bernstein_plane_wave_closed_form(cutoffs, k):
    # cos(2^k x) lies on the plateau of phi, so the block is the wave itself: sup = 1 and
    # the ratio is 1 / (2^k ||cos||_1), with ||cos||_1 -> 4 on a 2 pi period
    g = GridSpec(1, 256, 2 * math.pi)
    f = sample_function(lambda x: np.cos(2 ** k * x), g, ("x",))
    l1 = lebesgue_norm(f, NormKind(1.0))
    ratio = bernstein_check(f, "x", k, 1.0, math.inf, cutoffs).ratio
    assert ratio * 2 ** k * l1 == pytest.approx(1.0, rel=1e-12)
    assert l1 == pytest.approx(4.0, rel=2e-2)


def test_bernstein_ratio_is_scale_free_on_wave_packets(cutoffs):
    g = GridSpec(1, 512, 2 * math.pi)
    ratios = [bernstein_check(random_wave_packet(g, k, s), "x", k, 1.0, math.inf, cutoffs).ratio
              for s in range(3) for k in (3, 4, 5, 6)]
    assert max(ratios) / min(ratios) <= 4
