import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kinavg.families import random_band_limited
from kinavg.spectral_core import (Field, GridError, GridSpec, NormKind, SpaceError, apply_multiplier,
                                  lebesgue_norm, load_field, relative_l2, sample_function, save_field,
                                  to_physical, transform, zeros)


@pytest.mark.parametrize("kwargs", [dict(dim=3), dict(n=63), dict(n=0), dict(dim=1, n=1024),
                                    dict(dim=2, n=128), dict(period=0.0), dict(v_ratio=0),
                                    dict(dim=2, n=32, v_ratio=2)])
def test_grid_rejects_bad_parameters(kwargs):
    with pytest.raises(GridError):
        GridSpec(**kwargs)


def test_coordinates_and_frequencies_are_in_fft_order():
    g = GridSpec(1, 8, 2 * math.pi)
    assert g.coords("x")[0] == 0.0
    assert np.allclose(g.coords("x"), np.array([0, 1, 2, 3, -4, -3, -2, -1]) * g.spacing)
    assert np.allclose(g.freqs("x"), [0, 1, 2, 3, -4, -3, -2, -1])
    assert g.nyquist == pytest.approx(4.0)


def test_v_ratio_refines_velocity_lattice_only():
    g = GridSpec(1, 16, 2 * math.pi, v_ratio=4)
    assert g.points("v") == 64 and g.points("x") == 16
    assert g.lattice_step("v") == pytest.approx(g.lattice_step("x") / 4)
    assert g.shape() == (16, 64)


@given(st.integers(0, 2 ** 16))
def test_transform_round_trip(seed):
    g = GridSpec(1, 32, 2 * math.pi)
    f = random_band_limited(g, seed, 16)
    back = transform(transform(f, "both", "forward"), "both", "inverse")
    assert relative_l2(back, f) < 1e-13


def test_transform_twice_raises(grid_small):
    f = transform(zeros(grid_small), "x", "forward")
    with pytest.raises(SpaceError):
        transform(f, "x", "forward")
    with pytest.raises(SpaceError):
        transform(f, "v", "inverse")


def test_parseval(grid_small):
    f = random_band_limited(grid_small, 3, 20)
    hat = transform(f, "both", "forward")
    L = grid_small.period
    spectral_energy = np.sum(np.abs(hat.data) ** 2) / L ** 2
    assert spectral_energy == pytest.approx(lebesgue_norm(f) ** 2, rel=1e-12)


def test_spectral_derivative_of_a_mode_is_exact(grid_small):
    f = sample_function(lambda x: np.sin(3 * x), grid_small, ("x",))
    d = apply_multiplier(f, "x", lambda k: 1j * k)
    expected = sample_function(lambda x: 3 * np.cos(3 * x), grid_small, ("x",))
    assert relative_l2(d, expected) < 1e-13


def test_multiplier_keeps_representation(grid_small):
    hat = transform(zeros(grid_small), "x", "forward")
    out = apply_multiplier(hat, "x", lambda k: k)
    assert out.spectral == hat.spectral
    with pytest.raises(FloatingPointError), np.errstate(divide="ignore"):
        apply_multiplier(zeros(grid_small), "x", lambda k: 1 / k)


def test_lebesgue_norms_of_constants(grid_small):
    one = sample_function(lambda x: np.ones_like(x), grid_small, ("x",))
    L = grid_small.period
    for p in (1.0, 2.0, 3.5):
        assert lebesgue_norm(one, NormKind(p)) == pytest.approx(L ** (1 / p), rel=1e-13)
    assert lebesgue_norm(one, NormKind(math.inf)) == 1.0


@pytest.mark.parametrize("r,p", [(1, 2), (2, 1), (math.inf, 1), (1, math.inf), (3, 2)])
def test_mixed_norm_factorizes_on_products(grid_small, r, p):
    a = sample_function(lambda x: 1 + np.cos(x), grid_small, ("x",))
    b = sample_function(lambda v: np.exp(np.sin(v)), grid_small, ("v",))
    f = Field(grid_small, a.data[:, None] * b.data[None, :])
    for outer in ("x", "v"):
        expected = lebesgue_norm(a, NormKind(r)) * lebesgue_norm(b, NormKind(p))
        assert lebesgue_norm(f, NormKind(p, r, outer)) == pytest.approx(expected, rel=1e-12)


def test_minkowski_order_of_mixed_norms(grid_small):
    f = random_band_limited(grid_small, 1, 12)
    # L^2_v(L^1_x) <= L^1_x(L^2_v) by Minkowski's integral inequality
    assert lebesgue_norm(f, NormKind(2, 1, "v")) <= lebesgue_norm(f, NormKind(2, 1, "x")) + 1e-12


def test_norms_need_physical_space(grid_small):
    with pytest.raises(SpaceError):
        lebesgue_norm(transform(zeros(grid_small), "x", "forward"))


def test_relative_l2_against_zero_is_absolute(grid_small):
    f = random_band_limited(grid_small, 2, 10)
    assert relative_l2(f, zeros(grid_small)) == pytest.approx(lebesgue_norm(f))


def test_fields_are_immutable(grid_small):
    f = zeros(grid_small)
    with pytest.raises(ValueError):
        f.data[0, 0] = 1.0


def test_incompatible_fields_do_not_add(grid_small):
    with pytest.raises(GridError):
        zeros(grid_small) + zeros(GridSpec(1, 32, 2 * math.pi))
    with pytest.raises(GridError):
        zeros(grid_small) + transform(zeros(grid_small), "x", "forward")


@pytest.mark.parametrize("dtype", ["complex128", "complex64"])
def test_field_file_round_trip(tmp_path, grid_small, dtype):
    f = transform(random_band_limited(grid_small, 4, 20), "v", "forward")
    path = tmp_path / "f.bin"
    save_field(path, f, dtype)
    g = load_field(path)
    assert g.grid == f.grid and g.groups == f.groups and g.spectral == f.spectral
    tol = 1e-15 if dtype == "complex128" else 1e-6
    assert np.max(np.abs(g.data - f.data)) <= tol * np.max(np.abs(f.data))
    assert relative_l2(to_physical(g), to_physical(f)) < 10 * tol


def test_load_rejects_foreign_files(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"hello\n")
    with pytest.raises(ValueError):
        load_field(path)
