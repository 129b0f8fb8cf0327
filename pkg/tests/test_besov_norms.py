import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kinavg.besov_norms import (BesovSpec, BlockNormProfile, ChLSpec, MixedBesovSpec, NormError, besov_norm,
                                besov_norm_mixed, block_profile, chemin_lerner_norm, lq_sum, mixed_block_matrix,
                                regularity_index_fit)
from kinavg.families import FamilySpec, dilate_x, random_band_limited, synthesize_besov_field
from kinavg.littlewood_paley import DyadicCutoffs
from kinavg.spectral_core import Field, GridSpec, lebesgue_norm, sample_function, zeros

C = DyadicCutoffs()
G = GridSpec(1, 64, 2 * math.pi)


def test_zero_field_has_zero_norm_and_empty_profile():
    value, prof = besov_norm(zeros(G), "x", BesovSpec(1.0), C)
    assert value == 0.0 and prof.ks == ()


def test_multiplier_squares_lie_between_half_and_one():
    r = np.linspace(0, 300, 30001)
    total = C.psi(r) ** 2 + sum(C.phi(r / 2 ** k) ** 2 for k in range(10))
    assert total.min() >= 0.5 - 1e-12 and total.max() <= 1 + 1e-12


@given(st.integers(0, 2 ** 16), st.sampled_from(["x", "v"]))
def test_l2_sandwich_at_zero_smoothness(seed, group):
    f = random_band_limited(G, seed, 30)
    value, _ = besov_norm(f, group, BesovSpec(0, 2, 2), C)
    l2 = lebesgue_norm(f)
    assert 2 ** -0.5 * l2 - 1e-12 <= value <= l2 + 1e-12


@pytest.mark.parametrize("s", [-1.0, 0.5, 2.0])
def test_single_mode_scales_with_its_frequency(s):
    g = GridSpec(1, 256, 2 * math.pi)
    vals = []
    for k0 in range(1, 6):
        f = sample_function(lambda x: np.cos(2 ** k0 * x), g, ("x",))
        vals.append(besov_norm(f, "x", BesovSpec(s, 2, 2), C)[0] / 2 ** (k0 * s))
    # blocks are dilates of each other, so the weighted mode norm does not depend on k0
    assert max(vals) / min(vals) == pytest.approx(1.0, abs=1e-10)


@given(st.integers(0, 2 ** 16), st.floats(-2, 2), st.floats(0, 2))
def test_monotone_in_smoothness(seed, s, ds):
    f = random_band_limited(G, seed, 30)
    lo, _ = besov_norm(f, "v", BesovSpec(s, 2, 2), C)
    hi, _ = besov_norm(f, "v", BesovSpec(s + ds, 2, 2), C)
    assert lo <= hi * (1 + 1e-12)


@given(st.lists(st.floats(0, 1e3), min_size=1, max_size=12), st.floats(1, 8), st.floats(0, 8))
def test_lq_sum_non_increasing_in_q(values, q, dq):
    assert lq_sum(values, q + dq) <= lq_sum(values, q) * (1 + 1e-12) + 1e-300
    assert lq_sum(values, math.inf) <= lq_sum(values, q) * (1 + 1e-12) + 1e-300


def test_homogeneous_needs_a_window():
    with pytest.raises(NormError):
        BesovSpec(0, homogeneous=True)
    with pytest.raises(NormError):
        BesovSpec(0, homogeneous=True, k_window=(3, 1))
    with pytest.raises(NormError):
        BesovSpec(0, p=0.5)


def test_homogeneous_profile_shifts_under_dyadic_dilation():
    g = GridSpec(1, 512, 2 * math.pi * 16)
    base = sample_function(lambda x: np.exp(-x ** 2), g, ("x",))
    spec = BesovSpec(0.5, 2, 2, homogeneous=True, k_window=(-4, 4))
    _, p0 = besov_norm(base, "x", spec, C)
    _, p1 = besov_norm(dilate_x(base, 2), "x", spec, C)
    # blocks of f(x/2) at 2^k are dilates of the blocks of f at 2^(k+1), so L^2 norms gain 2^(1/2).
    # On the torus the dilate samples every other lattice mode; blocks holding many modes agree closely.
    for k in range(-1, 3):
        assert p1.as_dict()[k] == pytest.approx(2 ** 0.5 * p0.as_dict()[k + 1], rel=1e-3)


def test_mixed_matrix_of_separable_field_is_an_outer_product():
    g = GridSpec(1, 128, 2 * math.pi * 2)
    a = sample_function(lambda x: np.exp(np.cos(x)), g, ("x",))
    b = sample_function(lambda v: np.exp(-v ** 2), g, ("v",))
    f = Field(g, a.data[:, None] * b.data[None, :])
    _, _, mat = mixed_block_matrix(f, MixedBesovSpec(0, 0, 2, 2, 2), C)
    outer = np.outer(block_profile(a, "x", 2.0, C).values, block_profile(b, "v", 2.0, C).values)
    assert np.max(np.abs(mat - outer)) <= 1e-10 * np.max(mat)


def test_mixed_norm_with_sup_summation_is_the_largest_block():
    f = random_band_limited(G, 3, 30)
    _, _, mat = mixed_block_matrix(f, MixedBesovSpec(0, 0, 1, 2, math.inf), C)
    assert besov_norm_mixed(f, MixedBesovSpec(0, 0, 1, 2, math.inf), C) == pytest.approx(mat.max(), rel=1e-14)


def test_mixed_norm_regression_value():
    # stored golden value for a fixed reference field
    g = GridSpec(1, 64, 2 * math.pi)
    f = sample_function(lambda x, v: np.exp(np.cos(x) + np.sin(2 * v)) * (1 + 0.3 * np.cos(5 * x - 3 * v)), g)
    value = besov_norm_mixed(f, MixedBesovSpec(0.5, 1.0, 1, 2, 2), C)
    assert value == pytest.approx(GOLDEN_MIXED, abs=1e-9)


GOLDEN_MIXED = 60.008838889000096


@given(st.integers(0, 2 ** 16), st.floats(-1, 1), st.sampled_from([1.0, 2.0]))
def test_chemin_lerner_below_plain_when_q_at_least_r(seed, s, r):
    f = random_band_limited(G, seed, 30, real=True)
    tilde = chemin_lerner_norm(f, ChLSpec(r, s, 2, 2, tilde=True), C)
    plain = chemin_lerner_norm(f, ChLSpec(r, s, 2, 2, tilde=False), C)
    assert tilde <= plain * (1 + 1e-12)


@given(st.integers(0, 2 ** 16), st.floats(-1, 1), st.sampled_from([1.0, 2.0, math.inf]))
def test_chemin_lerner_below_mixed_space_with_unit_summation(seed, s, q):
    f = random_band_limited(G, seed, 30, real=True)
    tilde = chemin_lerner_norm(f, ChLSpec(1, s, 2, q), C)
    mixed = besov_norm_mixed(f, MixedBesovSpec(0, s, 1, 2, 1), C)
    assert tilde <= mixed * (1 + 1e-12)


def test_chemin_lerner_equals_plain_when_exponents_coincide():
    # with r = p = q the order of x-integration and block summation does not matter
    f = random_band_limited(G, 8, 30)
    tilde = chemin_lerner_norm(f, ChLSpec(2, 0.5, 2, 2, tilde=True), C)
    plain = chemin_lerner_norm(f, ChLSpec(2, 0.5, 2, 2, tilde=False), C)
    assert tilde == pytest.approx(plain, rel=1e-12)


def test_index_fit_on_exact_power_law():
    ks = tuple(range(-1, 8))
    prof = BlockNormProfile(ks, tuple(2.0 ** (-1.7 * k) for k in ks), (False,) * len(ks))
    fit = regularity_index_fit(prof, (0, 7))
    assert fit.index == pytest.approx(1.7, abs=1e-12) and fit.r2 == pytest.approx(1.0, abs=1e-12)
    flat = BlockNormProfile(ks, (3.0,) * len(ks), (False,) * len(ks))
    assert regularity_index_fit(flat, (0, 7)).slope == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(NormError):
        regularity_index_fit(prof, (0, 2))


@pytest.mark.parametrize("group", ["x", "v"])
def test_index_fit_recovers_synthetic_regularity(group):
    g = GridSpec(1, 256, 8 * math.pi)
    f = synthesize_besov_field(FamilySpec(x_index=1.5, v_index=1.5, seed=11), g)
    assert regularity_index_fit(block_profile(f, group, 2.0, C), (1, 4)).index == pytest.approx(1.5, abs=0.05)


def test_profile_invariants_and_csv():
    with pytest.raises(NormError):
        BlockNormProfile((0, 0), (1.0, 1.0), (False, False))
    with pytest.raises(NormError):
        BlockNormProfile((0, 1), (1.0, -1.0), (False, False))
    prof = BlockNormProfile((-1, 0), (1.0, 0.5), (False, True))
    assert prof.to_csv().splitlines() == ["k,block_norm,truncated_flag", "-1,1.0,0", "0,0.5,1"]
