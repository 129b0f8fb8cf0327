"""Periodic tensor grids for phase-space functions f(x, v) and their Fourier transforms.

Every axis is sampled at spacing ``h = period / n``. Coordinates are stored in FFT
order: node ``j`` sits at ``j*h`` reduced to the symmetric window ``[-length/2, length/2)``,
so index 0 is the origin and the velocity value used by transport operators is the
centred representative. The forward transform carries the quadrature weight ``h**D``
(coefficients approximate the continuum transform with kernel ``exp(-i xi.v)``); the
inverse carries ``1/length**D`` so the round trip is the identity.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

GROUPS = ("x", "v")
MAX_POINTS = {1: 512, 2: 48}
HEADER_MAGIC = "kinavg-field 1"
HEADER_END = "end_header"


class GridError(ValueError):
    """Invalid grid parameters or incompatible fields."""


class SpaceError(RuntimeError):
    """A transform was requested in the wrong representation."""


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid on the torus shared by the x and v axes.

    ``v_ratio`` stretches every velocity axis to ``v_ratio * period`` with the same
    spacing, which refines the velocity frequency lattice by that factor. The
    default of 1 gives identical x and v axes.
    """

    dim: int = 1
    n: int = 256
    period: float = 2 * np.pi * 16
    v_ratio: int = 1

    def __post_init__(self):
        if self.dim not in MAX_POINTS:
            raise GridError(f"dim must be 1 or 2, got {self.dim}")
        if self.n <= 0 or self.n % 2:
            raise GridError(f"points per axis must be a positive even integer, got {self.n}")
        if self.n > MAX_POINTS[self.dim]:
            raise GridError(f"n={self.n} exceeds the limit {MAX_POINTS[self.dim]} for dim={self.dim}")
        if not self.period > 0:
            raise GridError(f"period must be positive, got {self.period}")
        if int(self.v_ratio) != self.v_ratio or self.v_ratio < 1:
            raise GridError(f"v_ratio must be a positive integer, got {self.v_ratio}")
        if self.dim == 2 and self.v_ratio != 1:
            raise GridError("v_ratio > 1 is only supported for dim=1")

    @property
    def spacing(self) -> float:
        return self.period / self.n

    def points(self, group: str) -> int:
        _check_group(group)
        return self.n if group == "x" else self.n * self.v_ratio

    def length(self, group: str) -> float:
        _check_group(group)
        return self.period if group == "x" else self.period * self.v_ratio

    def coords(self, group: str) -> np.ndarray:
        """Centred node coordinates in FFT order."""
        m = self.points(group)
        j = np.arange(m)
        j = np.where(j < m // 2, j, j - m)
        return j * self.spacing

    def freqs(self, group: str) -> np.ndarray:
        """Angular lattice frequencies in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.points(group), d=self.spacing)

    def lattice_step(self, group: str) -> float:
        return 2 * np.pi / self.length(group)

    @property
    def nyquist(self) -> float:
        return np.pi / self.spacing

    def cell_volume(self, group: str) -> float:
        _check_group(group)
        return self.spacing ** self.dim

    def shape(self, groups: Sequence[str] = GROUPS) -> tuple[int, ...]:
        return tuple(m for g in groups for m in (self.points(g),) * self.dim)


def _check_group(group: str) -> None:
    if group not in GROUPS:
        raise GridError(f"unknown variable group {group!r}")


@dataclass(frozen=True, eq=False)
class Field:
    """Immutable complex samples on a grid.

    ``groups`` lists the variable groups present, in axis order; ``spectral`` is the
    subset currently held in frequency representation.
    """

    grid: GridSpec
    data: np.ndarray
    groups: tuple[str, ...] = GROUPS
    spectral: frozenset = dc_field(default_factory=frozenset)

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups or any(g not in GROUPS for g in groups) or len(set(groups)) != len(groups):
            raise GridError(f"invalid groups {self.groups!r}")
        if list(groups) != sorted(groups, key=GROUPS.index):
            raise GridError("groups must be ordered x before v")
        spectral = frozenset(self.spectral)
        if not spectral <= set(groups):
            raise GridError("spectral groups must be a subset of groups")
        data = np.array(self.data, dtype=np.complex128)
        expected = self.grid.shape(groups)
        if data.shape != expected:
            raise GridError(f"data shape {data.shape} does not match grid shape {expected}")
        data.setflags(write=False)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "spectral", spectral)
        object.__setattr__(self, "data", data)

    @property
    def space(self) -> str:
        if not self.spectral:
            return "physical"
        return "spectral_" + "".join(g for g in GROUPS if g in self.spectral)

    def axes(self, group: str) -> tuple[int, ...]:
        if group not in self.groups:
            raise GridError(f"field has no {group!r} axes")
        start = self.groups.index(group) * self.grid.dim
        return tuple(range(start, start + self.grid.dim))

    def with_data(self, data: np.ndarray) -> "Field":
        return Field(self.grid, data, self.groups, self.spectral)

    def broadcast(self, group: str, values_per_axis: Sequence[np.ndarray]) -> list[np.ndarray]:
        """Reshape one 1-D array per axis of ``group`` so it broadcasts against ``data``."""
        out = []
        for ax, vals in zip(self.axes(group), values_per_axis):
            shape = [1] * self.data.ndim
            shape[ax] = len(vals)
            out.append(np.reshape(vals, shape))
        return out

    def coordinate_arrays(self, group: str) -> list[np.ndarray]:
        return self.broadcast(group, [self.grid.coords(group)] * self.grid.dim)

    def frequency_arrays(self, group: str) -> list[np.ndarray]:
        return self.broadcast(group, [self.grid.freqs(group)] * self.grid.dim)

    def radial_frequency(self, group: str) -> np.ndarray:
        return np.sqrt(sum(k ** 2 for k in self.frequency_arrays(group)))

    def __add__(self, other: "Field") -> "Field":
        _check_compatible(self, other)
        return self.with_data(self.data + other.data)

    def __sub__(self, other: "Field") -> "Field":
        _check_compatible(self, other)
        return self.with_data(self.data - other.data)

    def __mul__(self, scalar) -> "Field":
        return self.with_data(self.data * scalar)

    __rmul__ = __mul__


def _check_compatible(a: Field, b: Field) -> None:
    if a.grid != b.grid or a.groups != b.groups or a.spectral != b.spectral:
        raise GridError("fields live on different grids, groups or representations")


def zeros(grid: GridSpec, groups: Sequence[str] = GROUPS) -> Field:
    return Field(grid, np.zeros(grid.shape(groups)), tuple(groups))


def sample_function(rule: Callable[..., np.ndarray], grid: GridSpec,
                    groups: Sequence[str] = GROUPS) -> Field:
    """Evaluate ``rule`` at the grid nodes.

    ``rule`` receives one broadcastable coordinate array per axis, in axis order
    (``x1[, x2], v1[, v2]``). It should be periodic in every axis; the centred
    representative of each node is what it sees.
    """
    probe = zeros(grid, groups)
    coords = [c for g in probe.groups for c in probe.coordinate_arrays(g)]
    values = np.broadcast_to(np.asarray(rule(*coords), dtype=np.complex128), probe.data.shape)
    return probe.with_data(values)


def transform(field: Field, group: str, direction: str) -> Field:
    """Discrete Fourier transform on one group (``x``, ``v``) or ``both``."""
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    targets = list(field.groups) if group == "both" else [group]
    data = field.data
    spectral = set(field.spectral)
    for g in targets:
        axes = field.axes(g)
        if direction == "forward":
            if g in spectral:
                raise SpaceError(f"group {g!r} is already spectral")
            data = np.fft.fftn(data, axes=axes) * field.grid.cell_volume(g)
            spectral.add(g)
        else:
            if g not in spectral:
                raise SpaceError(f"group {g!r} is already physical")
            data = np.fft.ifftn(data, axes=axes) / field.grid.cell_volume(g)
            spectral.discard(g)
    return Field(field.grid, data, field.groups, frozenset(spectral))


def to_physical(field: Field) -> Field:
    for g in list(field.spectral):
        field = transform(field, g, "inverse")
    return field


def apply_multiplier(field: Field, group: str, symbol: Callable[..., np.ndarray]) -> Field:
    """Apply the Fourier multiplier ``symbol(*frequency_arrays)`` on ``group``.

    The symbol sees broadcastable angular frequencies, one array per axis of the
    group. The result is returned in the input's representation.
    """
    was_spectral = group in field.spectral
    hat = field if was_spectral else transform(field, group, "forward")
    values = np.asarray(symbol(*hat.frequency_arrays(group)), dtype=np.complex128)
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("multiplier symbol returned non-finite values")
    out = hat.with_data(hat.data * values)
    return out if was_spectral else transform(out, group, "inverse")


@dataclass(frozen=True)
class NormKind:
    """Lebesgue exponent selection.

    With ``r=None`` the plain L^p norm over all axes. Otherwise a mixed norm with
    exponent ``r`` over x and ``p`` over v; ``outer`` names the group integrated last.
    """

    p: float = 2.0
    r: float | None = None
    outer: str = "x"

    def __post_init__(self):
        for e in (self.p, self.r):
            if e is not None and not e >= 1:
                raise ValueError(f"Lebesgue exponents must be >= 1, got {e}")
        if self.outer not in GROUPS:
            raise ValueError(f"outer must be 'x' or 'v', got {self.outer!r}")


def _lp_reduce(values: np.ndarray, p: float, axes: tuple[int, ...], weight: float) -> np.ndarray:
    if np.isinf(p):
        return values.max(axis=axes)
    return (np.sum(values ** p, axis=axes) * weight) ** (1.0 / p)


def box_mask(field: Field, region: Sequence[tuple[float, float] | None]) -> np.ndarray:
    """Indicator of an axis-aligned box given one (lo, hi) pair or None per axis."""
    coords = [c for g in field.groups for c in field.coordinate_arrays(g)]
    if len(region) != len(coords):
        raise ValueError(f"region needs {len(coords)} entries, got {len(region)}")
    mask = np.ones(field.data.shape, dtype=bool)
    for c, box in zip(coords, region):
        if box is not None:
            mask &= (c >= box[0]) & (c <= box[1])
    return mask


def lebesgue_norm(field: Field, kind: NormKind = NormKind(),
                  region: Sequence[tuple[float, float] | None] | None = None) -> float:
    """Riemann-sum Lebesgue norm, computed inner group first."""
    if field.spectral:
        raise SpaceError("norms are computed in physical space")
    values = np.abs(field.data)
    if region is not None:
        values = np.where(box_mask(field, region), values, 0.0)
    if kind.r is None or len(field.groups) == 1:
        p = kind.p if (kind.r is None or field.groups == ("v",)) else kind.r
        weight = float(np.prod([field.grid.cell_volume(g) for g in field.groups]))
        return float(_lp_reduce(values, p, tuple(range(values.ndim)), weight))
    exps = {"x": kind.r, "v": kind.p}
    inner = "v" if kind.outer == "x" else "x"
    partial = _lp_reduce(values, exps[inner], field.axes(inner), field.grid.cell_volume(inner))
    outer_axes = tuple(range(partial.ndim))
    return float(_lp_reduce(partial, exps[kind.outer], outer_axes, field.grid.cell_volume(kind.outer)))


def relative_l2(a: Field, b: Field) -> float:
    """||a - b|| / ||b|| in L^2, or ||a - b|| when b vanishes."""
    diff = lebesgue_norm(a - b)
    ref = lebesgue_norm(b)
    return diff / ref if ref > 0 else diff


def save_field(path: str | Path, field: Field, dtype: str = "complex128") -> None:
    """Write a text header followed by a little-endian row-major payload."""
    if dtype not in ("complex64", "complex128"):
        raise ValueError("dtype must be complex64 or complex128")
    g = field.grid
    header = [
        HEADER_MAGIC,
        f"dim: {g.dim}",
        f"n: {g.n}",
        f"period: {g.period!r}",
        f"v_ratio: {g.v_ratio}",
        f"groups: {','.join(field.groups)}",
        f"space: {field.space}",
        f"dtype: {dtype}",
        "byte_order: little",
        f"shape: {','.join(str(s) for s in field.data.shape)}",
        HEADER_END,
    ]
    payload = np.ascontiguousarray(field.data.astype(np.dtype(dtype).newbyteorder("<")))
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(payload.tobytes(order="C"))


def load_field(path: str | Path) -> Field:
    with open(path, "rb") as fh:
        meta = {}
        first = fh.readline().decode("ascii").strip()
        if first != HEADER_MAGIC:
            raise ValueError(f"{path}: not a field file")
        for raw in fh:
            line = raw.decode("ascii").strip()
            if line == HEADER_END:
                break
            key, _, value = line.partition(":")
            meta[key.strip()] = value.strip()
        else:
            raise ValueError(f"{path}: header not terminated")
        payload = fh.read()
    if meta.get("byte_order") != "little":
        raise ValueError(f"{path}: unsupported byte order {meta.get('byte_order')!r}")
    grid = GridSpec(int(meta["dim"]), int(meta["n"]), float(meta["period"]), int(meta["v_ratio"]))
    groups = tuple(meta["groups"].split(","))
    shape = tuple(int(s) for s in meta["shape"].split(","))
    data = np.frombuffer(payload, dtype=np.dtype(meta["dtype"]).newbyteorder("<")).reshape(shape)
    space = meta["space"]
    spectral = frozenset() if space == "physical" else frozenset(space.removeprefix("spectral_"))
    return Field(grid, data.astype(np.complex128), groups, spectral)

