"""Predicted regularity gains of velocity averages, dyadic interpolation schedules,
and empirical verification of the averaging estimates on sampled transport pairs."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .besov_norms import (BesovSpec, ChLSpec, MixedBesovSpec, NormError, besov_norm,
                          besov_norm_mixed, block_profile, chemin_lerner_norm, lq_sum, regularity_index_fit)
from .littlewood_paley import BlockIndex, DyadicCutoffs, block_project
from .spectral_core import Field, GridSpec, NormKind, lebesgue_norm
from .transport import (CutoffRho, DecompParams, TransportPair, block_average_A, block_average_B,
                        velocity_average)

THEOREMS = ("P", "P2", "PH", "P2H", "CLASSICAL", "MAIN", "MAIN2", "PROP_B011")
NEEDS_PHI = ("CLASSICAL", "MAIN", "MAIN2")
INF = math.inf


class CaseError(ValueError):
    """A theorem hypothesis is violated; ``invariant`` names it."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"invariant violated: {invariant}" + (f" ({detail})" if detail else ""))


def _inv(p):
    """1/p with 1/inf = 0, exact for int and Fraction inputs."""
    if isinstance(p, float) and math.isinf(p):
        return 0
    if isinstance(p, (int, Fraction)):
        return Fraction(1) / p
    return 1.0 / p


def _dual(r):
    """Hoelder conjugate r' of r >= 1."""
    if r == 1:
        return INF
    if isinstance(r, float) and math.isinf(r):
        return 1
    return r / (r - 1)


def _num(x):
    return float(x) if isinstance(x, Fraction) else x


@dataclass(frozen=True)
class TheoremCase:
    """Parameters of one averaging theorem. Unused exponents are ignored.

    ``boundary`` relaxes the strict lower bounds on alpha to non-strict ones, so the
    formulas can be evaluated on the edge of their range (for instance p = 1 with
    alpha = 0, or MAIN at r = p = 2); reports carry a note when it is used.
    """

    theorem: str
    dim: int = 1
    alpha: float = 0
    beta: float = 0
    a: float = 0
    b: float = 0
    p: float = 2
    q: float = 2
    r: float = 2
    r0: float = 2
    p0: float = 2
    q0: float = 2
    r1: float = 2
    p1: float = 2
    q1: float = 2
    lam: float | None = None
    eps: float = Fraction(1, 10)
    boundary: bool = False

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise CaseError("theorem id is known", f"got {self.theorem!r}")
        if self.dim not in (1, 2):
            raise CaseError("dimension is 1 or 2", f"got {self.dim}")
        self.validate()

    # -- derived exponents ------------------------------------------------------
    @property
    def dispersion(self):
        """D(1 - 1/p): the Sobolev-embedding loss of an L^1_x L^p_v average."""
        return self.dim * (1 - _inv(self.p))

    @property
    def mixed_loss(self):
        """D(1/r - 1/p)."""
        return self.dim * (_inv(self.r) - _inv(self.p))

    @property
    def threshold(self):
        """Velocity regularity of g at which the gain saturates."""
        t = self.theorem
        if t in ("P", "P2", "PH", "P2H"):
            return 1 - self.dispersion
        if t == "CLASSICAL":
            return Fraction(1, 2)
        if t == "MAIN":
            return _inv(self.r) - self.mixed_loss
        if t == "MAIN2":
            return _inv(self.r1) - self.dim * (_inv(self.r1) - _inv(self.p1))
        return None

    @property
    def regime(self) -> str:
        """``sub`` below the threshold, ``saturated`` above it (or at it with q = 1), ``critical`` otherwise."""
        thr = self.threshold
        if thr is None or self.theorem in ("PH", "MAIN2"):
            return "sub"
        if self.beta < thr:
            return "sub"
        if self.beta > thr or self.q == 1:
            return "saturated"
        return "critical"

    @property
    def theta(self):
        if self.theorem != "MAIN2":
            raise CaseError("theta is defined for MAIN2 only")
        top = self.alpha + 1 - _inv(self.r0) + self.dim * (_inv(self.r0) - _inv(self.p0))
        bottom = -self.beta + _inv(self.r1) - self.dim * (_inv(self.r1) - _inv(self.p1))
        return top / (top + bottom)

    # -- hypotheses ---------------------------------------------------------------
    def validate(self) -> None:
        t = self.theorem
        for name in ("p", "q", "r", "r0", "p0", "q0", "r1", "p1", "q1"):
            if getattr(self, name) < 1:
                raise CaseError(f"{name} >= 1", f"{name}={getattr(self, name)}")
        d = self.dispersion
        above = (lambda x, lo: x >= lo) if self.boundary else (lambda x, lo: x > lo)
        if t == "P":
            if not (above(self.alpha, -d) and -d > -1):
                raise CaseError("alpha > -D(1-1/p) > -1", f"alpha={self.alpha}, D(1-1/p)={d}")
            if self.regime == "critical":
                raise CaseError("beta + D(1-1/p) != 1 unless q = 1",
                                "the critical line with q != 1 is only covered by P2")
        elif t == "P2":
            if not (above(self.alpha, -d) and -d > -1):
                raise CaseError("alpha > -D(1-1/p) > -1", f"alpha={self.alpha}, D(1-1/p)={d}")
            self._b_vs_a()
        elif t == "PH":
            if not above(self.alpha, -d):
                raise CaseError("alpha > -D(1-1/p)", f"alpha={self.alpha}")
            if not self.beta < 1 - d:
                raise CaseError("beta < 1 - D(1-1/p)", f"beta={self.beta}")
        elif t == "P2H":
            if not above(self.alpha, -d):
                raise CaseError("alpha > -D(1-1/p)", f"alpha={self.alpha}")
            self._b_vs_a()
            if not (self.beta < 1 - d or (self.beta == 1 - d and self.q == 1)):
                raise CaseError("beta < 1 - D(1-1/p), or equality with q = 1", f"beta={self.beta}")
        elif t == "CLASSICAL":
            if not above(self.alpha, Fraction(-1, 2)):
                raise CaseError("alpha > -1/2", f"alpha={self.alpha}")
            self._b_vs_a()
        elif t == "MAIN":
            if not self.r <= self.p:
                raise CaseError("r <= p", f"r={self.r}, p={self.p}")
            if isinstance(self.q, float) and math.isinf(self.q):
                raise CaseError("q < infinity")
            low = _inv(self.r) - 1 - self.mixed_loss
            if not (above(self.alpha, low) and above(low, -_inv(self.r))):
                raise CaseError("alpha > 1/r - 1 - D(1/r-1/p) > -1/r", f"alpha={self.alpha}, bound={low}")
            self._b_vs_a()
        elif t == "MAIN2":
            self._validate_main2()
        # PROP_B011 accepts every beta; the schedule rejects beta >= 1

    def _b_vs_a(self) -> None:
        if not self.b >= self.a - 1:
            raise CaseError("b >= a - 1", f"a={self.a}, b={self.b}")

    def _validate_main2(self) -> None:
        D = self.dim
        for r, p, q, tag in ((self.r0, self.p0, self.q0, "0"), (self.r1, self.p1, self.q1, "1")):
            if not (r <= p <= _dual(r)):
                raise CaseError(f"r{tag} <= p{tag} <= r{tag}'", f"r={r}, p={p}")
            if isinstance(q, float) and math.isinf(q):
                raise CaseError(f"q{tag} < infinity")
        if not self.alpha > _inv(self.r0) - 1 - D * (_inv(self.r0) - _inv(self.p0)):
            raise CaseError("alpha > 1/r0 - 1 - D(1/r0-1/p0)", f"alpha={self.alpha}")
        if not self.beta < _inv(self.r1) - D * (_inv(self.r1) - _inv(self.p1)):
            raise CaseError("beta < 1/r1 - D(1/r1-1/p1)", f"beta={self.beta}")
        if not (2 * _inv(self.r1) - 1 - D * (_inv(self.r1) - _inv(self.p1)) > 0
                or (self.p1 == 2 and self.r1 == 2)):
            raise CaseError("2/r1 - 1 - D(1/r1-1/p1) > 0 or p1 = r1 = 2")
        th = self.theta
        if not 0 < th < 1:
            raise CaseError("theta in (0, 1)", f"theta={th}")
        lhs = (1 - th) * _inv(self.p0) + th * _inv(self.p1)
        rhs = (1 - th) * _inv(self.q0) + th * _inv(self.q1)
        if not _close(lhs, rhs):
            raise CaseError("(1-theta)/p0 + theta/p1 = (1-theta)/q0 + theta/q1", f"{lhs} != {rhs}")


def _close(a, b) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= 1e-12


# --- predicted gains ---------------------------------------------------------------

@dataclass(frozen=True)
class GainPrediction:
    """Predicted index plus the norms the estimate is stated in.

    ``s`` is the regularity index of the theorem and ``s_tested`` the index actually
    used for the left-hand side (``s - eps`` on the critical line). The
    ``lhs``/``rhs_*`` strings name the norm flavours; ``rhs_f`` is ``low_block``
    when only the joint low block of f enters.
    """

    s: float
    s_tested: float
    regime: str
    lhs: str
    lhs_p: float
    lhs_q: float
    rhs_f: str
    rhs_g: str
    multiplicative: tuple | None = None
    theta: float | None = None


def predicted_gain(case: TheoremCase) -> GainPrediction:
    case.validate()
    t, reg = case.theorem, case.regime
    al, be, a, b, d = case.alpha, case.beta, case.a, case.b, case.dispersion
    mult = None
    theta = None
    lhs_p, lhs_q = case.p, case.q
    if t == "P":
        s = (al + d) / (1 + al - be) - d if reg == "sub" else 1 - d
        lhs = "B" if reg == "sub" else "B_q=inf"
        if reg != "sub":
            lhs_q = INF
        rhs_f = "ChL1" if reg == "sub" else "low_block"
        rhs_g = "ChL1"
    elif t in ("P2", "P2H"):
        s = (1 + b - a) * (al + d) / (1 + al - be) + a - d if reg == "sub" else 1 + b - d
        if t == "P2H":
            s = (1 + b - a) * (al + d) / (1 + al - be) + a - d
        lhs = "B" if t == "P2" else "B_homogeneous"
        rhs_f = "low_block" if reg == "saturated" and t == "P2" else "mixed_r1"
        rhs_g = "mixed_r1"
        if t == "P2H":
            mult = ((1 - be - d) / (1 + al - be), (al + d) / (1 + al - be))
    elif t == "PH":
        s = (al + d) / (1 + al - be) - d
        lhs, rhs_f, rhs_g = "B_homogeneous", "ChL1", "ChL1"
        mult = ((1 - be - d) / (1 + al - be), (al + d) / (1 + al - be))
    elif t == "CLASSICAL":
        s = (1 + b - a) * (al + Fraction(1, 2)) / (1 + al - be) + a if reg == "sub" else 1 + b
        lhs, lhs_p = "B", 2
        rhs_f = "low_block" if reg == "saturated" else "mixed_r2"
        rhs_g = "mixed_r2"
    elif t == "MAIN":
        c = case.threshold
        m = case.mixed_loss
        s = (1 + b - a) * (1 + al - c) / (1 + al - be) + a - m if reg == "sub" else 1 + b - m
        lhs = "B"
        rhs_f = "low_block" if reg == "saturated" else "mixed_r"
        rhs_g = "mixed_r"
    elif t == "MAIN2":
        theta = case.theta
        D = case.dim
        s = ((1 - theta) * (a - D * (_inv(case.r0) - _inv(case.p0)))
             + theta * (b - D * (_inv(case.r1) - _inv(case.p1))) + theta)
        inv_p = (1 - theta) * _inv(case.p0) + theta * _inv(case.p1)
        lhs_p = INF if inv_p == 0 else 1 / inv_p
        lhs_q = lhs_p
        lhs, rhs_f, rhs_g = "B", "mixed_r0", "mixed_r1"
    else:  # PROP_B011
        s = 0
        lhs, lhs_p, lhs_q, rhs_f, rhs_g = "B", 1, 1, "L1B011", "L1B011"
    s_tested = s - case.eps if reg == "critical" else s
    return GainPrediction(s, s_tested, reg, lhs, lhs_p, lhs_q, rhs_f, rhs_g, mult, theta)


# --- interpolation schedules ----------------------------------------------------------

def interpolation_schedule(case: TheoremCase, k: int, lam: float | None = None) -> float:
    """Interpolation parameter t_k used at dyadic scale 2^k, or ``inf`` when only the B term is kept."""
    t = case.theorem
    if t == "PROP_B011":
        if case.beta >= 1:
            raise CaseError("beta < 1 in the schedule t_k = 2^{k beta/(1-beta)}",
                            f"beta={case.beta}; larger beta reduces to any beta < 1 by inclusion")
        return 2.0 ** (k * _num(case.beta) / (1 - _num(case.beta)))
    if t == "MAIN2":
        raise CaseError("MAIN2 has no dyadic schedule", "its gain comes from abstract interpolation")
    al, be = _num(case.alpha), _num(case.beta)
    if t in ("PH", "P2H"):
        lam = case.lam if lam is None else lam
        if lam is None or not lam > 0:
            raise CaseError("lambda = ||f|| / ||g|| > 0 is given for homogeneous schedules")
        shift = _num(case.a) - _num(case.b) if t == "P2H" else 0.0
        return lam ** (1 / (1 + al - be)) * 2.0 ** (-k * ((al - be) + shift) / (1 + al - be))
    if case.regime == "saturated":
        return INF
    gamma = min(be, _num(case.threshold))
    shift = 0.0 if t == "P" else _num(case.a) - _num(case.b)
    tk = 2.0 ** (-k * ((al - gamma) + shift) / (1 + al - gamma))
    if tk < 2.0 ** (-k) * (1 - 1e-12):
        raise CaseError("t_k >= 2^{-k}", f"t_k={tk} at k={k}")
    return tk


# --- norms for the estimates ----------------------------------------------------------

def _low_block(field: Field, cutoffs: DyadicCutoffs) -> Field:
    z = BlockIndex.zero()
    return block_project(block_project(field, "x", z, cutoffs), "v", z, cutoffs)


def rhs_norm(field: Field, flavour: str, case: TheoremCase, role: str, cutoffs: DyadicCutoffs) -> float:
    """Norm of f (role 'f') or g (role 'g') in the space the theorem assumes."""
    reg = case.alpha if role == "f" else case.beta
    xreg = case.a if role == "f" else case.b
    reg, xreg = _num(reg), _num(xreg)
    p, q = _num(case.p), _num(case.q)
    if flavour == "low_block":
        low = _low_block(field, cutoffs)
        if case.theorem == "MAIN":
            return besov_norm_mixed(low, MixedBesovSpec(xreg, reg, _num(case.r), p, q), cutoffs)
        outer = 2 if case.theorem == "CLASSICAL" else 1
        inner = 2 if case.theorem == "CLASSICAL" else p
        return lebesgue_norm(low, NormKind(inner, outer, outer="x"))
    if flavour == "ChL1":
        return chemin_lerner_norm(field, ChLSpec(1, reg, p, q, tilde=True), cutoffs)
    if flavour == "L1B011":
        return chemin_lerner_norm(field, ChLSpec(1, reg, 1, 1, tilde=False), cutoffs)
    if flavour == "mixed_r1":
        return besov_norm_mixed(field, MixedBesovSpec(xreg, reg, 1, p, q), cutoffs)
    if flavour == "mixed_r2":
        return besov_norm_mixed(field, MixedBesovSpec(xreg, reg, 2, 2, q), cutoffs)
    if flavour == "mixed_r":
        return besov_norm_mixed(field, MixedBesovSpec(xreg, reg, _num(case.r), p, q), cutoffs)
    if flavour == "mixed_r0":
        return besov_norm_mixed(field, MixedBesovSpec(xreg, reg, _num(case.r0), _num(case.p0), _num(case.q0)),
                                cutoffs)
    raise NormError(f"unknown norm flavour {flavour!r}")


def _rhs_g_norm(g: Field, pred: GainPrediction, case: TheoremCase, cutoffs: DyadicCutoffs) -> float:
    if case.theorem == "MAIN2":
        return besov_norm_mixed(g, MixedBesovSpec(_num(case.b), _num(case.beta), _num(case.r1),
                                                  _num(case.p1), _num(case.q1)), cutoffs)
    return rhs_norm(g, pred.rhs_g, case, "g", cutoffs)


# --- estimate reports -----------------------------------------------------------------

@dataclass(frozen=True)
class EstimateReport:
    case: TheoremCase
    family: str
    ks: tuple[int, ...]
    lhs_blocks: tuple[float, ...]
    truncated: tuple[bool, ...]
    lhs_norm: float
    rhs_f: float
    rhs_g: float
    ratio: float
    fitted_index: float
    fit_r2: float
    predicted_s: float
    tested_s: float
    slack: float
    budget: float
    verdict: str
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> dict:
        case = {k: _jsonable(v) for k, v in self.case.__dict__.items()}
        return {
            "case": case, "family": self.family,
            "profile": [{"k": k, "block_norm": v, "truncated": t}
                        for k, v, t in zip(self.ks, self.lhs_blocks, self.truncated)],
            "lhs_norm": self.lhs_norm, "rhs_f": self.rhs_f, "rhs_g": self.rhs_g, "ratio": self.ratio,
            "fitted_index": _jsonable(self.fitted_index), "fit_r2": self.fit_r2,
            "predicted_s": self.predicted_s, "tested_s": self.tested_s, "slack": self.slack,
            "budget": self.budget, "verdict": self.verdict, "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "block_norm", "truncated_flag"])
        for k, v, t in zip(self.ks, self.lhs_blocks, self.truncated):
            w.writerow([k, repr(float(v)), int(t)])
        return buf.getvalue()


def _jsonable(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _phase_space_weight(phi, grid: GridSpec):
    if phi is None:
        return None
    return phi.data if isinstance(phi, Field) else np.asarray(phi)


def verify_estimate(pair: TransportPair, case: TheoremCase, cutoffs: DyadicCutoffs, phi=None, chi=None,
                    family: str = "", slack: float = 0.2, budget: float = 1e3,
                    fit_window: tuple[int, int] | None = None, zero_floor: float = 1e-13) -> EstimateReport:
    """Measure the velocity average of ``pair`` against the estimate of ``case``.

    The left-hand side is the Besov norm of int f chi phi dv at the predicted index,
    the right-hand side the case's norms of f and g. The empirical index is the
    fitted decay rate of the x-block profile of the average over ``fit_window``
    (default: every untruncated dyadic block). The verdict is ``pass`` when the ratio
    stays within ``budget`` and the fitted index is at least the tested index minus
    ``slack``. An average with no high-frequency content passes trivially.
    """
    pred = predicted_gain(case)
    if case.theorem in NEEDS_PHI and phi is None:
        raise CaseError("a compactly supported velocity cutoff phi is supplied", case.theorem)
    notes = ["evaluated on the boundary of the alpha range"] if case.boundary else []
    grid = pair.f.grid
    avg = velocity_average(pair.f, _phase_space_weight(phi, grid))
    if chi is not None:
        chi_data = chi.data if isinstance(chi, Field) else np.asarray(chi)
        avg = avg.with_data(avg.data * chi_data)
    elif case.theorem == "MAIN2" and pred.lhs_p < case.r0:
        notes.append("p < r0 without a spatial cutoff chi")
    kind = NormKind(_num(pred.lhs_p))
    profile = block_profile(avg, "x", kind, cutoffs)
    s = _num(pred.s_tested)
    weights = np.array([1.0 if k < 0 else 2.0 ** (k * s) for k in profile.ks])
    lhs = lq_sum(weights * np.array(profile.values), _num(pred.lhs_q))
    if pred.lhs == "B_homogeneous":
        notes.append("homogeneous norms evaluated on the grid's dyadic window")
    if case.theorem in ("P", "P2") and pred.regime == "saturated" or pred.rhs_f == "low_block":
        notes.append("low block read as the joint x-v low block")
    rf = rhs_norm(pair.f, pred.rhs_f, case, "f", cutoffs)
    rg = _rhs_g_norm(pair.g, pred, case, cutoffs)
    if pred.multiplicative is not None:
        ef, eg = (float(e) for e in pred.multiplicative)
        rhs = (rf ** ef) * (rg ** eg) if rf > 0 and rg > 0 else rf + rg
    else:
        rhs = rf + rg
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else INF)
    ks_hi = [k for k, t in zip(profile.ks, profile.truncated) if k >= 0 and not t]
    window = fit_window if fit_window is not None else (min(ks_hi, default=0), max(ks_hi, default=0))
    high = [v for k, v in zip(profile.ks, profile.values) if window[0] <= k <= window[1]]
    scale = max(max(profile.values, default=0.0), 1e-300)
    if not high or max(high) <= zero_floor * scale:
        index, r2 = INF, 1.0
        notes.append("no high-frequency content: trivial pass")
    else:
        fit = regularity_index_fit(profile, window)
        index, r2 = fit.index, fit.r2
    ok = ratio <= budget and index >= s - slack
    return EstimateReport(case, family, profile.ks, profile.values, profile.truncated, lhs, rf, rg, ratio,
                          index, r2, _num(pred.s), s, slack, budget, "pass" if ok else "fail", tuple(notes))


@dataclass(frozen=True)
class SweepSummary:
    reports: tuple[EstimateReport, ...]
    spread_limit: float = 10.0

    @property
    def ratio_spread(self) -> float:
        ratios = [r.ratio for r in self.reports if r.ratio > 0]
        return max(ratios) / min(ratios) if ratios else 1.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports) and self.ratio_spread <= self.spread_limit


# --- block operator bounds -----------------------------------------------------------

@dataclass(frozen=True)
class BlockBoundReport:
    k: int
    t: float
    a_norm: float
    b_norm: float
    a_bound: float
    b_bound: float

    @property
    def a_constant(self) -> float:
        return self.a_norm / self.a_bound if self.a_bound > 0 else 0.0

    @property
    def b_constant(self) -> float:
        return self.b_norm / self.b_bound if self.b_bound > 0 else 0.0


@dataclass(frozen=True)
class LemmaParams:
    """Exponents of the block-operator lemmas, which hold beyond the theorems' ranges.

    ``setting`` is ``dispersive`` (L^1_x L^p_v norms) or ``l2`` (L^2 norms).
    """

    alpha: float
    beta: float
    p: float = 2.0
    q: float = 2.0
    dim: int = 1
    setting: str = "dispersive"

    def __post_init__(self):
        if self.setting not in ("dispersive", "l2"):
            raise CaseError("lemma setting is dispersive or l2", f"got {self.setting!r}")

    @classmethod
    def from_case(cls, case: TheoremCase) -> "LemmaParams":
        setting = "l2" if case.theorem == "CLASSICAL" else "dispersive"
        return cls(_num(case.alpha), _num(case.beta), _num(case.p), _num(case.q), case.dim, setting)


def dyadic_block_bound_check(pair: TransportPair, case, k: int, t: float, cutoffs: DyadicCutoffs,
                             phi=None, rho: CutoffRho | None = None) -> BlockBoundReport:
    """Measured ||A_{2^k}^t (f phi)|| and ||B_{2^k}^t (g phi)|| against the lemma's right-hand sides.

    ``case`` is a TheoremCase or LemmaParams. In the dispersive setting the bounds
    are t^{-(alpha + D(1-1/p))} 2^{-k alpha} ||f|| and the analogous B bound with
    gamma = min(beta, 1 - D(1-1/p)), norms in L~^1_x B_{p,q}. In the L^2 setting
    they are (t 2^k)^{-(alpha+1/2)} ||Delta_k^x f|| and (t 2^k)^{-(gamma+1/2)}
    ||Delta_k^x g|| with gamma = min(beta, 1/2), norms in L~^2_x B_{2,q}. The
    measured constants are the ratios.
    """
    if t < 2.0 ** (-k) * (1 - 1e-12):
        raise CaseError("t >= 2^{-k}", f"t={t}, k={k}")
    lp = case if isinstance(case, LemmaParams) else LemmaParams.from_case(case)
    rho = CutoffRho.dirac() if rho is None else rho
    w = _phase_space_weight(phi, pair.f.grid)
    f, g = pair.f, pair.g
    if w is not None:
        pad = (None,) * f.grid.dim + (Ellipsis,)
        f = f.with_data(f.data * w[pad])
        g = g.with_data(g.data * w[pad])
    params = DecompParams(t, BlockIndex.dyadic(2.0 ** k), rho)
    A = block_average_A(f, params, cutoffs)
    B = block_average_B(g, params, cutoffs)
    al, be, q = lp.alpha, lp.beta, lp.q
    if lp.setting == "l2":
        gamma = min(be, 0.5)
        fx = block_project(pair.f, "x", params.delta, cutoffs)
        gx = block_project(pair.g, "x", params.delta, cutoffs)
        fa = chemin_lerner_norm(fx, ChLSpec(2, al, 2, q), cutoffs)
        gb = chemin_lerner_norm(gx, ChLSpec(2, be, 2, q), cutoffs)
        a_bound = (t * 2.0 ** k) ** (-(al + 0.5)) * fa
        b_bound = (t * 2.0 ** k) ** (-(gamma + 0.5)) * gb
        kind = NormKind(2)
    else:
        d = lp.dim * (1 - (0 if math.isinf(lp.p) else 1 / lp.p))
        gamma = min(be, 1 - d)
        fa = chemin_lerner_norm(pair.f, ChLSpec(1, al, lp.p, q), cutoffs)
        gb = chemin_lerner_norm(pair.g, ChLSpec(1, be, lp.p, q), cutoffs)
        a_bound = t ** (-(al + d)) * 2.0 ** (-k * al) * fa
        b_bound = t ** (-(gamma + d)) * 2.0 ** (-k * gamma) * gb
        kind = NormKind(lp.p)
    return BlockBoundReport(k, t, lebesgue_norm(A, kind), lebesgue_norm(B, kind), a_bound, b_bound)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    r2: float
    xs: tuple[float, ...]
    ys: tuple[float, ...]


def loglog_fit(xs, ys) -> SlopeFit:
    x, y = np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float))
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if tot == 0 else 1 - float(np.sum(resid ** 2)) / tot
    return SlopeFit(float(slope), r2, tuple(float(v) for v in xs), tuple(float(v) for v in ys))


# --- strip decay (D = 2) ----------------------------------------------------------------

@dataclass(frozen=True)
class StripReport:
    alpha: float
    q: float
    lambdas: tuple[float, ...]
    norms: tuple[float, ...]
    slope: float
    predicted: float
    log_ratios: tuple[float, ...]

    @property
    def passed(self) -> bool:
        if self.alpha == 0.5:
            return max(self.log_ratios) / min(self.log_ratios) <= 2.0
        return abs(self.slope - self.predicted) <= 0.15


def strip_profile(grid: GridSpec, lam: float, cutoffs: DyadicCutoffs) -> Field:
    """h(v) = chi(v2) P_lam(v1) on the velocity grid, with eta along the first axis.

    ``chi`` is the low-pass profile at radius L/4 and ``P_lam`` the periodisation of
    rho(lam v1), where rho has the flat-top Fourier transform psi(|s|), so the
    spectrum of rho contains the origin.
    """
    if grid.dim != 2:
        raise CaseError("strip geometry needs D = 2", f"D={grid.dim}")
    L = grid.length("v")
    v = grid.coords("v")
    xi = grid.freqs("v")
    chi = cutoffs.psi(np.abs(v) / (L / 4))
    # Fourier coefficients of the periodised rho(lam v1); psi is even, so rho is real
    coeff = (2 * np.pi / lam) * cutoffs.psi(np.abs(xi) / lam) / L
    periodic = np.fft.ifft(coeff * grid.n).real
    data = periodic[:, None] * chi[None, :]
    return Field(grid, data, ("v",))


def strip_norm(h: Field, alpha: float, q: float, cutoffs: DyadicCutoffs) -> float:
    """B^{-alpha}_{2,q} norm of a velocity-only field."""
    value, _ = besov_norm(h, "v", BesovSpec(-alpha, 2, q), cutoffs)
    return value


def lambda_strip_decay(grid: GridSpec, alpha: float, q: float, lambdas, cutoffs: DyadicCutoffs) -> StripReport:
    """Decay of the B^{-alpha}_{2,q} norm of the strip profile as lambda grows."""
    if grid.dim != 2:
        raise CaseError("lambda strip needs D = 2", f"D={grid.dim}")
    lams = tuple(float(l) for l in lambdas)
    top = math.pi * grid.n / grid.length("v")
    if any(l < 1 or l > top for l in lams):
        raise CaseError("1 <= lambda <= pi N / L", f"window [1, {top:.4g}]")
    norms = tuple(strip_norm(strip_profile(grid, l, cutoffs), alpha, q, cutoffs) for l in lams)
    fit = loglog_fit(lams, norms)
    gamma = min(alpha, 0.5)
    qd = _dual(q)
    log_power = 0.0 if (isinstance(qd, float) and math.isinf(qd)) else 1.0 / qd
    ratios = tuple(l * n / math.log(1 + l) ** log_power for l, n in zip(lams, norms))
    return StripReport(alpha, q, lams, norms, fit.slope, -(gamma + 0.5), ratios)
