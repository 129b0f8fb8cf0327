"""Free transport v.grad_x, free-streaming shifts and the averaging decomposition operators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .littlewood_paley import BlockIndex, DyadicCutoffs, block_empty, block_project, block_truncated
from .spectral_core import Field, NormKind, lebesgue_norm, relative_l2, transform


ROW_FLOOR = 1e-14


class TransportError(ValueError):
    pass


# --- quadrature -------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Rule for integrals over an interval.

    ``gauss`` uses ``n`` Gauss-Legendre nodes, ``trapezoid`` and ``simpson`` use
    ``n`` equal panels, ``lattice`` is the trapezoid rule with fixed node spacing
    ``step`` (the interval length must be a multiple of it).
    """

    kind: str = "gauss"
    n: int = 64
    step: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gauss", "trapezoid", "simpson", "lattice"):
            raise TransportError(f"unknown quadrature kind {self.kind!r}")
        if self.kind == "lattice":
            if not self.step > 0:
                raise TransportError("lattice quadrature needs a positive step")
        elif self.n < 1:
            raise TransportError("quadrature needs at least one node")
        if self.kind == "simpson" and self.n % 2:
            raise TransportError("Simpson's rule needs an even panel count")

    def nodes(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        if b == a:
            return np.array([a]), np.array([0.0])
        if self.kind == "gauss":
            x, w = np.polynomial.legendre.leggauss(self.n)
            return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w
        if self.kind == "lattice":
            panels = (b - a) / self.step
            m = int(round(panels))
            if m < 1 or abs(panels - m) > 1e-9 * max(1.0, panels):
                raise TransportError(f"interval [{a}, {b}] is not a multiple of the lattice step {self.step}")
        else:
            m = self.n
        x = np.linspace(a, b, m + 1)
        h = (b - a) / m
        if self.kind == "simpson":
            w = np.ones(m + 1)
            w[1:-1:2] = 4
            w[2:-1:2] = 2
            return x, w * h / 3
        w = np.full(m + 1, h)
        w[[0, -1]] = h / 2
        return x, w


# --- cutoff measure -----------------------------------------------------------

def _expm1_ratio(w: np.ndarray) -> np.ndarray:
    """(1 - exp(-w)) / w with its removable singularity at 0."""
    w = np.asarray(w, dtype=np.complex128)
    out = np.empty_like(w)
    small = np.abs(w) < 1e-3
    ws = w[small]
    out[small] = 1 - ws / 2 + ws ** 2 / 6 - ws ** 3 / 24
    wl = w[~small]
    out[~small] = -np.expm1(-wl) / wl
    return out


@dataclass(frozen=True)
class CutoffRho:
    """Probability measure on s used to average free-streaming shifts.

    Stored as nodes and weights summing to one; the associated symbol is
    ``rho(z) = sum_i w_i exp(-i s_i z)``.
    """

    kind: str
    nodes: tuple[float, ...]
    weights: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("dirac", "smooth"):
            raise TransportError(f"unknown cutoff kind {self.kind!r}")
        if len(self.nodes) != len(self.weights) or not self.nodes:
            raise TransportError("cutoff needs matching, non-empty nodes and weights")
        if abs(sum(self.weights) - 1) > 1e-12:
            raise TransportError("cutoff weights must sum to one")
        if self.kind == "smooth" and (min(self.nodes) < 1 or max(self.nodes) > 2):
            raise TransportError("smooth cutoff must be supported in [1, 2]")

    @classmethod
    def dirac(cls, at: float = 1.0) -> "CutoffRho":
        return cls("dirac", (float(at),), (1.0,), label=f"dirac@{at:g}")

    @classmethod
    def smooth(cls, n: int = 64, power: int = 4) -> "CutoffRho":
        """Polynomial bump (s-1)^m (2-s)^m on [1, 2] tabulated at Gauss-Legendre nodes."""
        s, w = QuadratureRule("gauss", n).nodes(1.0, 2.0)
        return cls._from_profile(s, w, power, f"gauss{n}")

    @classmethod
    def lattice(cls, step: float, power: int = 4) -> "CutoffRho":
        """Same bump tabulated on nodes 1, 1+step, ..., 2 with trapezoid weights."""
        s, w = QuadratureRule("lattice", step=step).nodes(1.0, 2.0)
        keep = (s > 1) & (s < 2)
        return cls._from_profile(s[keep], w[keep], power, f"lattice{step:g}")

    @classmethod
    def _from_profile(cls, s, w, power, label):
        mass = w * ((s - 1) * (2 - s)) ** power
        mass = mass / mass.sum()
        return cls("smooth", tuple(float(x) for x in s), tuple(float(x) for x in mass), label)

    @property
    def _arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.nodes), np.array(self.weights)

    def moment(self, order: int) -> float:
        s, w = self._arrays
        return float(np.sum(w * s ** order))

    def rho(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape, dtype=np.complex128)
        for s, w in zip(self.nodes, self.weights):
            out += w * np.exp(-1j * s * z)
        return out

    def tau(self, z) -> np.ndarray:
        """(1 - rho(z)) / (i z), smooth through z = 0."""
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape, dtype=np.complex128)
        for s, w in zip(self.nodes, self.weights):
            out += w * s * _expm1_ratio(1j * s * z)
        return out


# --- basic operators ----------------------------------------------------------

def _require_phase_space(f: Field) -> None:
    if f.groups != ("x", "v"):
        raise TransportError("transport operators act on (x, v) fields")


def _eta_dot_v(hat: Field) -> np.ndarray:
    etas = hat.frequency_arrays("x")
    vs = hat.coordinate_arrays("v")
    return sum(e * v for e, v in zip(etas, vs))


def apply_transport(f: Field) -> Field:
    """g = v . grad_x f, computed as i (v . eta) times the x-spectrum."""
    _require_phase_space(f)
    hat = transform(f, "x", "forward")
    return transform(hat.with_data(hat.data * 1j * _eta_dot_v(hat)), "x", "inverse")


def duhamel_shift(f: Field, t: float) -> Field:
    """(x, v) -> f(x - t v, v), exact on the periodic grid for every real t."""
    _require_phase_space(f)
    hat = transform(f, "x", "forward")
    return transform(hat.with_data(hat.data * np.exp(-1j * t * _eta_dot_v(hat))), "x", "inverse")


def shift_combination(f: Field, shifts, weights) -> Field:
    """sum_j w_j f(x - u_j v, v), accumulated in x-frequency on the populated rows only.

    Rows of the x-spectrum below ``ROW_FLOOR`` times the peak are rounding noise
    left by earlier projections and are skipped.
    """
    _require_phase_space(f)
    hat = transform(f, "x", "forward")
    vaxes = hat.axes("v")
    mags = np.abs(hat.data).max(axis=vaxes)
    active = mags > ROW_FLOOR * mags.max() if mags.max() > 0 else np.zeros(mags.shape, bool)
    out = np.zeros_like(hat.data)
    if np.any(active):
        ev = _eta_dot_v(hat)
        ev = np.broadcast_to(ev, hat.data.shape)[active]
        rows = hat.data[active]
        acc = np.zeros_like(rows)
        for u, w in zip(np.asarray(shifts, float), np.asarray(weights, float)):
            if w != 0:
                acc += w * np.exp(-1j * u * ev)
        out[active] = rows * acc
    return transform(hat.with_data(out), "x", "inverse")


def xv_multiplier(f: Field, symbol_of_z, t: float) -> Field:
    """Apply symbol(t eta.v) per (eta, v) node on the x-spectrum."""
    _require_phase_space(f)
    hat = transform(f, "x", "forward")
    return transform(hat.with_data(hat.data * symbol_of_z(t * _eta_dot_v(hat))), "x", "inverse")


def velocity_average(f: Field, weight: Field | np.ndarray | None = None) -> Field:
    """x-only field  int f(x, v) weight(v) dv."""
    _require_phase_space(f)
    if f.spectral:
        raise TransportError("velocity averages are taken in physical space")
    data = f.data
    if weight is not None:
        w = weight.data if isinstance(weight, Field) else np.asarray(weight)
        data = data * w.reshape((1,) * f.grid.dim + w.shape)
    avg = np.sum(data, axis=f.axes("v")) * f.grid.cell_volume("v")
    return Field(f.grid, avg, ("x",))


@dataclass(frozen=True)
class TransportPair:
    f: Field
    g: Field
    provenance: str = "g_computed_from_f"

    def __post_init__(self):
        if self.provenance not in ("g_computed_from_f", "independent"):
            raise TransportError(f"unknown provenance {self.provenance!r}")
        if self.f.grid != self.g.grid:
            raise TransportError("f and g must share a grid")


def make_pair(f: Field) -> TransportPair:
    return TransportPair(f, apply_transport(f))


# --- Duhamel and T_A / T_B ------------------------------------------------------

@dataclass(frozen=True)
class ResidualReport:
    name: str
    residual: float
    tolerance: float
    skipped: bool = False
    details: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.skipped or self.residual <= self.tolerance


def duhamel_identity_check(pair: TransportPair, t: float, rule: QuadratureRule,
                           tolerance: float = 1e-8) -> ResidualReport:
    """Residual of f = f(x - t v, v) + int_0^t g(x - s v, v) ds."""
    nodes, weights = rule.nodes(0.0, t)
    rhs = duhamel_shift(pair.f, t) + shift_combination(pair.g, nodes, weights)
    res = relative_l2(rhs, pair.f)
    return ResidualReport("duhamel", res, tolerance, details={"t": t, "rule": rule.kind, "nodes": len(nodes)})


def _tb_shifts(t: float, rho: CutoffRho, sigma: QuadratureRule) -> tuple[np.ndarray, np.ndarray]:
    """Shifts u and weights with T_B g = sum_j w_j g(x - u_j v, v)."""
    us, ws = [], []
    for s, w in zip(rho.nodes, rho.weights):
        u, omega = sigma.nodes(0.0, s * t)
        us.append(u)
        ws.append(w * omega / t)
    return np.concatenate(us), np.concatenate(ws)


def apply_TA(f: Field, t: float, rho: CutoffRho, representation: str = "physical") -> Field:
    """Averaged shift  int f(x - s t v, v) rho~(s) ds."""
    if representation == "fourier":
        return xv_multiplier(f, rho.rho, t)
    _check_repr(representation)
    return shift_combination(f, t * np.array(rho.nodes), rho.weights)


def apply_TB(g: Field, t: float, rho: CutoffRho, sigma: QuadratureRule = QuadratureRule(),
             representation: str = "physical") -> Field:
    """int int_0^s g(x - sigma t v, v) d sigma rho~(s) ds, so that f = T_A f + t T_B g."""
    if t <= 0:
        raise TransportError("T_B needs t > 0")
    if representation == "fourier":
        return xv_multiplier(g, rho.tau, t)
    _check_repr(representation)
    u, w = _tb_shifts(t, rho, sigma)
    return shift_combination(g, u, w)


def _check_repr(representation: str) -> None:
    if representation not in ("physical", "fourier"):
        raise TransportError(f"representation must be 'physical' or 'fourier', got {representation!r}")


# --- the dyadic decomposition of velocity averages ---------------------------------

@dataclass(frozen=True)
class DecompParams:
    t: float
    delta: BlockIndex
    rho: CutoffRho
    sigma: QuadratureRule = QuadratureRule()

    def __post_init__(self):
        if not self.t > 0:
            raise TransportError(f"t must be positive, got {self.t}")


def block_average_A(f: Field, params: DecompParams, cutoffs: DyadicCutoffs,
                    representation: str = "physical") -> Field:
    fx = block_project(f, "x", params.delta, cutoffs)
    return velocity_average(apply_TA(fx, params.t, params.rho, representation))


def block_average_B(g: Field, params: DecompParams, cutoffs: DyadicCutoffs,
                    representation: str = "physical") -> Field:
    gx = block_project(g, "x", params.delta, cutoffs)
    return velocity_average(apply_TB(gx, params.t, params.rho, params.sigma, representation))


@dataclass(frozen=True)
class DecompositionResult:
    A: Field
    B: Field
    residual: float
    fourier_gap_A: float
    fourier_gap_B: float
    truncated: bool


def dyadic_average_decomposition(pair: TransportPair, params: DecompParams,
                                 cutoffs: DyadicCutoffs) -> DecompositionResult:
    """x-block of the velocity average split as A + t B, with both representations compared."""
    grid = pair.f.grid
    truncated = block_truncated(grid, params.delta, cutoffs)
    if block_empty(grid, params.delta, cutoffs):
        zero = Field(grid, np.zeros(grid.shape(("x",))), ("x",))
        return DecompositionResult(zero, zero, 0.0, 0.0, 0.0, True)
    lhs = block_project(velocity_average(pair.f), "x", params.delta, cutoffs)
    A = block_average_A(pair.f, params, cutoffs)
    B = block_average_B(pair.g, params, cutoffs)
    res = relative_l2(A + params.t * B, lhs)
    A_f = block_average_A(pair.f, params, cutoffs, "fourier")
    B_f = block_average_B(pair.g, params, cutoffs, "fourier")
    return DecompositionResult(A, B, res, relative_l2(A, A_f), relative_l2(B, B_f), truncated)


def x_to_v_transfer_check(f: Field, t: float, block: BlockIndex, cutoffs: DyadicCutoffs,
                          tolerance: float = 1e-10) -> ResidualReport:
    """x-block of the shifted average against the average of the shifted v-block at scale t."""
    vblock = block.scaled(t)
    scale = vblock.delta
    if scale < f.grid.lattice_step("v"):
        return ResidualReport("x_to_v", 0.0, tolerance, skipped=True,
                              details={"reason": "t*delta below one lattice step"})
    lhs = block_project(velocity_average(duhamel_shift(f, t)), "x", block, cutoffs)
    rhs = velocity_average(duhamel_shift(block_project(f, "v", vblock, cutoffs), t))
    return ResidualReport("x_to_v", relative_l2(rhs, lhs), tolerance,
                          details={"t": t, "block": block.kind, "delta": block.delta})


def localization_check(pair: TransportPair, params: DecompParams, cutoffs: DyadicCutoffs,
                       tolerance: float = 1e-8) -> dict[str, ResidualReport]:
    """The four band-localization identities plus a wrong-band negative control."""
    if params.rho.kind != "smooth":
        raise TransportError("localization identities need a cutoff supported in [1, 2]")
    t = params.t
    delta = params.delta.delta
    low = DecompParams(t, BlockIndex.zero(), params.rho, params.sigma)
    high = DecompParams(t, BlockIndex.dyadic(delta), params.rho, params.sigma)
    f, g = pair.f, pair.g

    def loc(field, xb, vb):
        return block_project(block_project(field, "x", xb, cutoffs), "v", vb, cutoffs)

    x_low, x_band = BlockIndex.low(2.0), BlockIndex.band(delta / 2, 2 * delta)
    cases = {
        "A0": (block_average_A, low, f, loc(f, x_low, BlockIndex.low(4 * t))),
        "B0": (block_average_B, low, g, loc(g, x_low, BlockIndex.low(4 * t))),
        "A_delta": (block_average_A, high, f, loc(f, x_band, BlockIndex.band(t * delta / 2, 4 * t * delta))),
        "B_delta": (block_average_B, high, g, loc(g, x_band, BlockIndex.low(8 * t * delta))),
    }
    out = {}
    for name, (op, prm, full, localized) in cases.items():
        out[name] = ResidualReport(name, relative_l2(op(localized, prm, cutoffs), op(full, prm, cutoffs)),
                                   tolerance)
    wrong = loc(f, x_band, BlockIndex.band(4 * t * delta, 8 * t * delta))
    res = relative_l2(block_average_A(wrong, high, cutoffs), block_average_A(f, high, cutoffs))
    out["negative_control"] = ResidualReport("negative_control", res, math.inf,
                                             details={"must_exceed": 1e-2, "failed_as_expected": res > 1e-2})
    return out


# --- dispersion -------------------------------------------------------------------

@dataclass(frozen=True)
class DispersiveReport:
    p: float
    ts: tuple[float, ...]
    ratios: tuple[float, ...]
    slope: float
    predicted_slope: float
    bound_holds: bool
    t_window: float


def aliasing_window(h: Field, threshold: float = 1e-12) -> float:
    """Largest t for which the sheared support of h stays within half an x-period."""
    mass = np.sum(np.abs(h.data), axis=h.axes("x"))
    speeds = np.sqrt(sum(v ** 2 for v in np.meshgrid(*([h.grid.coords("v")] * h.grid.dim), indexing="ij")))
    occupied = mass > threshold * mass.max()
    vmax = float(speeds[occupied].max()) if np.any(occupied) else 0.0
    return math.inf if vmax == 0 else h.grid.length("x") / (2 * vmax)


def dispersive_estimate_check(h: Field, p: float, ts, quadrature_slack: float = 1e-9) -> DispersiveReport:
    """||h(x - t v, v)||_{L^p_x L^1_v} / ||h||_{L^1_x L^p_v} over a t sweep with a log-log fit."""
    ts = tuple(float(t) for t in ts)
    window = aliasing_window(h)
    if any(t <= 0 or t > window for t in ts):
        raise TransportError(f"t sweep leaves the aliasing-safe window (0, {window:.4g}]")
    denom = lebesgue_norm(h, NormKind(p, 1.0, outer="x"))
    ratios = tuple(lebesgue_norm(duhamel_shift(h, t), NormKind(1.0, p, outer="x")) / denom for t in ts)
    expo = h.grid.dim * (1 - (0 if math.isinf(p) else 1 / p))
    slope = float(np.polyfit(np.log(ts), np.log(ratios), 1)[0]) if len(ts) > 1 else 0.0
    holds = all(r <= t ** (-expo) * (1 + quadrature_slack) for r, t in zip(ratios, ts))
    return DispersiveReport(p, ts, ratios, slope, -expo, holds, window)
