"""Test-function families: random fields of prescribed regularity, an oscillating
non-equi-integrable sequence, spatial dilations and an L log L Luxemburg norm."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .littlewood_paley import DyadicCutoffs
from .spectral_core import Field, GridSpec, NormKind, lebesgue_norm, sample_function, transform, zeros
from .transport import TransportPair, apply_transport


class FamilyError(ValueError):
    pass


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based child generator: the same (seed, stream...) always gives the same draws."""
    return np.random.Generator(np.random.Philox(key=seed % 2 ** 64, counter=list(stream)[:4] + [0] * (4 - len(stream[:4]))))


def derive_seed(seed: int, *stream: int) -> int:
    """Child seed for a named stream; the splitting scheme used by the experiment runner."""
    return int(rng_for(seed, *stream).integers(0, 2 ** 32))


def compact_bump(y) -> np.ndarray:
    """exp(-1/(1-y^2)) on |y| < 1, zero elsewhere."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < 1
    out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
    return out


def plateau_window(y, inner: float, outer: float) -> np.ndarray:
    """Smooth radial window equal to 1 for |y| <= inner and 0 for |y| >= outer."""
    y = np.abs(np.asarray(y, dtype=float))
    s = np.clip((outer - y) / (outer - inner), 0.0, 1.0)
    a = np.where(s > 0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
    b = np.where(s < 1, np.exp(-1.0 / np.maximum(1 - s, 1e-300)), 0.0)
    return a / (a + b)


# --- synthetic fields --------------------------------------------------------------

@dataclass(frozen=True)
class FamilySpec:
    """Parameters of a generated field.

    ``x_index`` and ``v_index`` are the decay rates of the dyadic block norms in
    each group, ``v_radius`` the radius of the smooth velocity envelope and
    ``x_band`` an optional hard cap on spatial frequencies.
    """

    kind: str = "synthetic"
    x_index: float = 1.0
    v_index: float = 1.0
    seed: int = 0
    amplitude: float = 1.0
    v_radius: float | None = None
    x_band: float | None = None
    n: int = 4
    scale: int = 1

    def __post_init__(self):
        if self.kind not in ("synthetic", "oscillatory", "scaling"):
            raise FamilyError(f"unknown family kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "FamilySpec":
        """Parse ``kind:key=value,key=value`` descriptors used in configs."""
        kind, _, rest = text.strip().partition(":")
        fields = {}
        for item in filter(None, (p.strip() for p in rest.split(","))):
            key, sep, value = item.partition("=")
            if not sep:
                raise FamilyError(f"malformed family parameter {item!r}")
            key = key.strip()
            if key not in cls.__dataclass_fields__ or key == "kind":
                raise FamilyError(f"unknown family parameter {key!r}")
            if key in ("seed", "n", "scale"):
                fields[key] = int(value)
            elif value.strip() == "none":
                fields[key] = None
            else:
                fields[key] = float(value)
        return cls(kind.strip(), **fields)


def _spectral_weight(freqs: list[np.ndarray], index: float, dim: int, floor: float) -> np.ndarray:
    # pure power law: annulus 2^k holds ~2^{kD} modes, so block norms scale like 2^{-k index}
    r = np.sqrt(sum(k ** 2 for k in freqs))
    return np.maximum(r, floor) ** (-(index + dim / 2))


def _reflect(a: np.ndarray) -> np.ndarray:
    """a(-k) in FFT ordering along every axis."""
    for ax in range(a.ndim):
        a = np.roll(np.flip(a, axis=ax), 1, axis=ax)
    return a


def synthesize_besov_field(spec: FamilySpec, grid: GridSpec, cutoffs: DyadicCutoffs | None = None) -> Field:
    """Real random field whose (x, v) dyadic block norms decay like 2^{-i x_index} 2^{-j v_index}.

    Coefficients have seeded uniformly random Hermitian-symmetric phases and
    deterministic moduli max(|eta|, step)^{-(a+D/2)} max(|xi|, step)^{-(b+D/2)}, so
    the field is real and every block norm is fixed by Parseval. With ``v_radius`` set, the field is multiplied by a smooth
    velocity window of that radius, which bounds its velocity support.
    """
    if spec.kind != "synthetic":
        raise FamilyError("synthesize_besov_field needs a synthetic family spec")
    if spec.amplitude == 0:
        return zeros(grid)
    base = zeros(grid)
    rng = rng_for(spec.seed, 1)
    theta = 2 * np.pi * rng.random(base.data.shape)
    phases = np.exp(1j * (theta - _reflect(theta)))
    hat = Field(grid, phases, base.groups, frozenset(("x", "v")))
    weight = (_spectral_weight(hat.frequency_arrays("x"), spec.x_index, grid.dim, grid.lattice_step("x"))
              * _spectral_weight(hat.frequency_arrays("v"), spec.v_index, grid.dim, grid.lattice_step("v")))
    if spec.x_band is not None:
        weight = weight * (hat.radial_frequency("x") <= spec.x_band)
    phys = transform(hat.with_data(hat.data * weight), "both", "inverse")
    data = np.real(phys.data)  # imaginary part is roundoff: the spectrum is Hermitian
    if spec.v_radius is not None:
        speed = np.sqrt(sum(v ** 2 for v in phys.coordinate_arrays("v")))
        data = data * plateau_window(speed / spec.v_radius, 0.5, 1.0)
    norm = lebesgue_norm(phys.with_data(data))
    return phys.with_data(spec.amplitude * data / norm)


def synthetic_pair(spec: FamilySpec, grid: GridSpec) -> TransportPair:
    f = synthesize_besov_field(spec, grid)
    return TransportPair(f, apply_transport(f))


def random_band_limited(grid: GridSpec, seed: int, x_band: float, v_band: float | None = None,
                        groups=("x", "v"), real: bool = False) -> Field:
    """Seeded random field with spectrum in |eta| <= x_band and |xi| <= v_band."""
    base = zeros(grid, groups)
    rng = rng_for(seed, 2)
    shape = base.data.shape
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    hat = Field(grid, coeffs, base.groups, frozenset(base.groups))
    mask = np.ones(shape, dtype=bool)
    bands = {"x": x_band, "v": v_band if v_band is not None else x_band}
    for g in base.groups:
        mask &= hat.radial_frequency(g) <= bands[g]
    out = transform(hat.with_data(hat.data * mask), "both", "inverse")
    if real:
        out = out.with_data(out.data.real)
    return out * (1.0 / lebesgue_norm(out))


def localized_random_field(grid: GridSpec, seed: int, x_band: float, v_radius: float,
                           v_modes: int = 4) -> Field:
    """Random field band-limited in x and made of Gaussian velocity profiles.

    Useful where both a bounded x-spectrum and a bounded velocity support are needed
    (shift quadratures, localization identities).
    """
    if grid.dim != 1:
        raise FamilyError("localized_random_field is one-dimensional")
    rng = rng_for(seed, 3)
    eta = grid.freqs("x")
    v = grid.coords("v")
    mask = np.abs(eta) <= x_band
    hat = np.zeros(grid.shape(), dtype=np.complex128)
    width = v_radius / 6
    for _ in range(v_modes):
        a = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)) * mask
        centre = rng.uniform(-v_radius / 2, v_radius / 2)
        hat += a[:, None] * np.exp(-((v[None, :] - centre) ** 2) / (2 * width ** 2))
    field = transform(Field(grid, hat, ("x", "v"), frozenset("x")), "x", "inverse")
    return field * (1.0 / lebesgue_norm(field))


def random_wave_packet(grid: GridSpec, k: int, seed: int, modes: int = 4) -> Field:
    """x-only packet w(2^k x) with w a seeded sum of cosines at frequencies in [0.8, 1.4]
    under a unit Gaussian envelope.

    The draws do not depend on ``k``, so packets at different scales are exact
    dilates of one profile; they concentrate on the dyadic annulus at 2^k.
    """
    if grid.dim != 1:
        raise FamilyError("random_wave_packet is one-dimensional")
    rng = rng_for(seed, 5)
    freqs = rng.uniform(0.8, 1.4, modes)
    phases = 2 * np.pi * rng.random(modes)
    amps = rng.standard_normal(modes)
    y = 2.0 ** k * grid.coords("x")
    data = np.exp(-y ** 2 / 2) * sum(a * np.cos(w * y + ph) for a, w, ph in zip(amps, freqs, phases))
    return Field(grid, data, ("x",))


# --- oscillatory sequence --------------------------------------------------------------

@dataclass(frozen=True)
class OscillatoryTriple:
    n: int
    f: Field
    g: Field
    h: Field
    dvg: Field
    residual: float


def oscillatory_counterexample(grid: GridSpec, n: int, profile=compact_bump) -> OscillatoryTriple:
    """f_n = n p(n x1) cos(n v1), g_n = v1 n p'(n x1) sin(n v1), h_n = n p'(n x1) sin(n v1).

    ``n p'(n x1)`` is obtained from the spectral x1-derivative of the sampled
    profile, the same derivative the transport operator uses, and the v1-derivative of g_n is taken
    exactly on its explicit velocity factor. The residual of
    v.grad_x f_n = d/dv1 g_n - h_n is returned relative to ||v.grad_x f_n||.
    """
    if n < 1:
        raise FamilyError("n must be a positive integer")
    if n >= grid.nyquist:
        raise FamilyError(f"n={n} is beyond the Nyquist frequency {grid.nyquist:.4g}")
    if abs(n * grid.length("v") / (2 * np.pi) - round(n * grid.length("v") / (2 * np.pi))) > 1e-9:
        raise FamilyError("cos(n v1) must be periodic on the velocity torus")
    xgroups = ("x",)
    prof = sample_function(lambda *x: n * profile(n * x[0]), grid, xgroups)
    dprof = transform(prof, "x", "forward")
    # n p'(n x1) is (1/n) d/dx1 of the sampled n p(n x1)
    dprof = transform(dprof.with_data(dprof.data * 1j * dprof.frequency_arrays("x")[0] / n), "x", "inverse")
    pad = (slice(None),) * grid.dim + (None,) * grid.dim

    def vfac(rule):
        return sample_function(lambda *c: rule(c[0]), grid, ("v",)).data

    cos_v = vfac(lambda v1: np.cos(n * v1))
    sin_v = vfac(lambda v1: np.sin(n * v1))
    v_sin = vfac(lambda v1: v1 * np.sin(n * v1))
    d_v_sin = vfac(lambda v1: np.sin(n * v1) + n * v1 * np.cos(n * v1))
    mk = lambda a, b: Field(grid, a.data[pad] * b[(None,) * grid.dim], ("x", "v"))
    f = mk(prof, cos_v)
    g = mk(dprof, v_sin)
    h = mk(dprof, sin_v)
    dvg = mk(dprof, d_v_sin)
    lhs = apply_transport(f)
    residual = lebesgue_norm(lhs - (dvg - h)) / lebesgue_norm(lhs)
    return OscillatoryTriple(n, f, g, h, dvg, residual)


def box_indicator(grid: GridSpec, half_width: float) -> np.ndarray:
    """Velocity indicator of |v_i| <= half_width with half weight on boundary nodes."""
    v = grid.coords("v")
    tol = 1e-9 * grid.spacing
    one = np.where(np.abs(v) < half_width - tol, 1.0, np.where(np.abs(v) <= half_width + tol, 0.5, 0.0))
    out = one
    for _ in range(grid.dim - 1):
        out = np.multiply.outer(out, one)
    return out


def average_l1(f: Field, weight: np.ndarray) -> float:
    from .transport import velocity_average
    return lebesgue_norm(velocity_average(f, weight), NormKind(1.0))


def concentration_mass(f: Field, n: int, v_half_width: float) -> float:
    """Mass of |f| on {|x1| <= 1/n} x {|v_i| <= v_half_width}."""
    d = f.grid.dim
    region = [(-1.0 / n, 1.0 / n)] + [None] * (d - 1) + [(-v_half_width, v_half_width)] * d
    return lebesgue_norm(f, NormKind(1.0), region=region)


# --- dilations ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaledPair:
    R: int
    pair: TransportPair


def dilate_x(field: Field, R: int) -> Field:
    """f(x / R, v) by frequency decimation: coefficient at eta comes from R * eta.

    Exact when R times the x-support of ``field`` fits in the period and the
    x-spectrum of ``field`` stays below Nyquist, so the dilate loses nothing.
    """
    if field.grid.dim != 1:
        raise FamilyError("dilations are implemented for dim=1")
    if R < 1 or R & (R - 1):
        raise FamilyError(f"dilation ratio must be a power of two, got {R}")
    hat = transform(field, "x", "forward")
    n = field.grid.n
    m = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    src = m * R
    valid = np.abs(src) < n // 2
    out = np.zeros_like(hat.data)
    out[valid] = R * hat.data[src[valid] % n]
    return transform(hat.with_data(out), "x", "inverse")


def scaling_family(base: TransportPair, R: int) -> ScaledPair:
    """Dilated pair (f(x/R, v), g(x/R, v)/R), which again satisfies the transport relation."""
    return ScaledPair(R, TransportPair(dilate_x(base.f, R), dilate_x(base.g, R) * (1.0 / R), base.provenance))


# --- Orlicz norm ----------------------------------------------------------------------

def young_llogl(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return (1 + z) * np.log1p(z) - z


def orlicz_llogl_norm(field: Field, region=None, upper: float = 1e12) -> float:
    """Luxemburg norm inf{lam > 0 : int_K h(|f|/lam) <= 1} with h(z) = (1+z)log(1+z) - z."""
    values = np.abs(field.data)
    if region is not None:
        from .spectral_core import box_mask
        mask = box_mask(field, region)
        if not mask.any():
            raise FamilyError("region has no grid points")
        values = np.where(mask, values, 0.0)
    if not np.all(np.isfinite(values)):
        raise FamilyError("field has non-finite values")
    peak = float(values.max())
    if peak == 0:
        return 0.0
    vol = float(np.prod([field.grid.cell_volume(g) for g in field.groups]))

    def excess(log_lam):
        return float(np.sum(young_llogl(values / math.exp(log_lam))) * vol) - 1.0

    lo, hi = math.log(peak) - 60, math.log(peak * upper)
    if excess(lo) < 0 or excess(hi) > 0:
        raise FamilyError("Luxemburg bracket did not straddle the root")
    return math.exp(bisect(excess, lo, hi, xtol=1e-12, rtol=1e-12, maxiter=400))


def young_inverse(y: float, upper: float = 1e12) -> float:
    """h^{-1}(y) by bisection on [0, upper]."""
    if y < 0:
        raise FamilyError("h^{-1} needs a nonnegative argument")
    if y == 0:
        return 0.0
    return bisect(lambda z: float(young_llogl(z)) - y, 0.0, upper, xtol=1e-15, rtol=1e-14, maxiter=500)


# --- resonant pairs ---------------------------------------------------------------------

def resonant_pair(grid: GridSpec, ks, width_exponent: float, seed: int = 0,
                  weight=None, f_norm=None, g_norm=None) -> TransportPair:
    """Sum over k of cos(2^k x1 + phase_k) G(v / eps_k) with eps_k = 2^{-k width_exponent}.

    ``G`` is a unit Gaussian in velocity. Each piece concentrates near the
    resonant set v.eta = 0, where transport is weakest; with
    width_exponent = 1/(1 + alpha - beta) the pieces balance the norms of f and g
    and the velocity average loses the least regularity. When ``f_norm`` and
    ``g_norm`` are given (callables on fields) every piece is scaled to
    f_norm + g_norm = 1.
    """
    if grid.dim != 1:
        raise FamilyError("resonant pairs are one-dimensional")
    rng = rng_for(seed, 4)
    x, v = grid.coords("x"), grid.coords("v")
    f_total = np.zeros(grid.shape())
    g_total = np.zeros(grid.shape())
    for k in ks:
        eta = 2.0 ** k
        if abs(eta / grid.lattice_step("x") - round(eta / grid.lattice_step("x"))) > 1e-9:
            raise FamilyError(f"frequency 2^{k} is not on the x-lattice")
        if eta >= grid.nyquist:
            raise FamilyError(f"frequency 2^{k} is beyond Nyquist")
        eps = 2.0 ** (-k * width_exponent)
        phase = 2 * np.pi * rng.random()
        prof = np.exp(-(v / eps) ** 2 / 2)
        f_piece = np.cos(eta * x + phase)[:, None] * prof[None, :]
        g_piece = -eta * np.sin(eta * x + phase)[:, None] * (v * prof)[None, :]
        scale = 1.0
        if f_norm is not None and g_norm is not None:
            scale = 1.0 / (f_norm(Field(grid, f_piece)) + g_norm(Field(grid, g_piece)))
        f_total += scale * f_piece
        g_total += scale * g_piece
    return TransportPair(Field(grid, f_total), Field(grid, g_total))


def bessel_profile(grid: GridSpec, order: float) -> np.ndarray:
    """Velocity profile with Fourier transform (1 + |xi|^2)^{-order/2} on the v-lattice.

    Its dyadic L^2 block norms decay like 2^{-j(order - D/2)} and its L^inf block
    norms like 2^{-j(order - D)}, with no transition region.
    """
    if grid.dim != 1:
        raise FamilyError("bessel_profile is one-dimensional")
    xi = grid.freqs("v")
    return np.fft.ifft((1 + xi ** 2) ** (-order / 2)).real / grid.spacing


def point_source_pair(grid: GridSpec, order: float = 1.5) -> TransportPair:
    """f = delta(x) w(v) with w a Bessel profile; delta is the lattice-periodic point mass."""
    if grid.dim != 1:
        raise FamilyError("point_source_pair is one-dimensional")
    spike = np.zeros(grid.n)
    spike[0] = 1.0 / grid.spacing
    f = Field(grid, spike[:, None] * bessel_profile(grid, order)[None, :])
    return TransportPair(f, apply_transport(f))
