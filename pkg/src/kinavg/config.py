"""INI experiment configs: typed values, defaults and line-anchored diagnostics."""
from __future__ import annotations

import ast
import configparser
import math
import operator
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path


class ConfigError(ValueError):
    """Malformed config; the message starts with ``path:line:``."""


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "inf": math.inf, "e": math.e}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    raise ValueError("only numbers, pi, inf and + - * / ** are allowed")


def parse_real(text: str) -> float:
    """Arithmetic on numbers, ``pi`` and ``inf``; ``8pi`` is read as ``8*pi``."""
    src = re.sub(r"(\d|\))\s*(pi|inf)\b", r"\1*\2", text.strip().lower())
    try:
        return float(_eval_node(ast.parse(src, mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError, TypeError) as exc:
        raise ValueError(f"not a real number: {text!r} ({exc})") from None


def parse_exact(text: str):
    """Exact rational (``1/2``, ``0.25``, ``3``) or ``inf`` for theorem exponents."""
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        value = Fraction(t)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not an exact rational or inf: {text!r}") from None
    return int(value) if value.denominator == 1 else value


def parse_int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ValueError(f"not an integer: {text!r}") from None


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def list_of(item):
    def parse(text: str) -> tuple:
        parts = [p.strip() for p in text.split(",") if p.strip()]
        return tuple(item(p) for p in parts)
    return parse


def parse_str(text: str) -> str:
    return text.strip()


REAL, INT, BOOL, STR = parse_real, parse_int, parse_bool, parse_str
REALS, INTS = list_of(parse_real), list_of(parse_int)

# section -> key -> (parser, default). Values below are the shipped defaults.
SCHEMA: dict[str, dict[str, tuple]] = {
    "run": {"seed": (INT, 0), "threads": (INT, 1), "out": (STR, "reports")},
    "cutoffs": {"width": (REAL, 0.2)},
    "identities": {
        "n": (INT, 256), "period": (REAL, 8 * math.pi), "v_ratio": (INT, 8),
        "x_band": (REAL, 20.0), "v_radius": (REAL, 4.0), "t": (REAL, 0.5), "delta": (REAL, 8.0),
        "transfer_ts": (REALS, (0.125, 0.5, 1.0)), "transfer_deltas": (REALS, (0.0, 2.0, 8.0)),
        "smooth_nodes": (INT, 8), "gauss_nodes": (INT, 32), "duhamel_nodes": (INT, 64),
        "bony_n": (INT, 256), "bony_period": (REAL, 2 * math.pi),
        "bony_x_band": (REAL, 40.0), "bony_v_band": (REAL, 60.0),
        "tol_partition": (REAL, 1e-12), "tol_transfer": (REAL, 1e-10), "tol_decomposition": (REAL, 1e-8),
        "tol_localization": (REAL, 1e-8), "negative_control_floor": (REAL, 1e-2),
        "tol_duhamel": (REAL, 1e-8), "tol_bony": (REAL, 1e-10),
    },
    "norms": {
        "n": (INT, 256), "period": (REAL, 8 * math.pi), "seeds": (INT, 3),
        "indices": (REALS, (0.5, 1.0, 1.5)), "fit_window": (INTS, (1, 4)), "index_tol": (REAL, 0.05),
        "band": (REAL, 24.0), "bernstein_n": (INT, 512), "bernstein_period": (REAL, 2 * math.pi),
        "bernstein_ks": (INTS, (3, 4, 5, 6)), "bernstein_spread": (REAL, 4.0),
        "product_spread": (REAL, 10.0),
    },
    "dispersive": {
        "n": (INT, 512), "period": (REAL, 32 * math.pi), "x_width": (REAL, 0.8), "v_radius": (REAL, 4.0),
        "ps": (REALS, (1.0, 2.0, 4.0, math.inf)), "log2_t": (REALS, (0.0, 3.0, 0.25)),
        "slope_tol": (REAL, 0.15), "p1_tol": (REAL, 1e-10), "bound_slack": (REAL, 0.02),
    },
    "counterexample": {
        "n": (INT, 512), "period": (REAL, math.pi), "ns": (INTS, (4, 8, 16)),
        "box_half_width": (REAL, math.pi / 12), "v_half_width": (REAL, math.pi / 4),
        "tol_identity": (REAL, 1e-8), "slope_tol": (REAL, 0.2), "mass_spread": (REAL, 0.1),
        "scaling_n": (INT, 512), "scaling_period": (REAL, 16 * math.pi), "scaling_rs": (INTS, (1, 2, 4, 8)),
        "scaling_p": (REALS, (1.0, 1.0, 2.0)), "scaling_r0": (REALS, (2.0, math.inf, 4.0)),
        "scaling_tol": (REAL, 0.05),
    },
    "lambda_strip": {
        "n": (INT, 48), "period": (REAL, 2 * math.pi), "alphas": (REALS, (0.0, 0.5, 1.0)), "q": (REAL, 2.0),
        "log2_lambda": (REALS, (0.0, 5.0, 0.5)), "lambda_min": (REAL, 4.0),
    },
    "block_bounds": {
        "n": (INT, 512), "period": (REAL, 16 * math.pi), "k": (INT, 3), "order": (REAL, 1.5),
        "log2_t": (REALS, (-1.0, 1.0, 0.25)), "dispersive_alpha": (REAL, 0.5), "l2_alpha": (REAL, 1.0),
        "slope_tol": (REAL, 0.2),
    },
    "verify": {
        "n": (INT, 512), "period": (REAL, 4 * math.pi), "seeds": (INT, 5), "slack": (REAL, 0.2),
        "budget": (REAL, 1e3), "r2_min": (REAL, 0.9), "spread": (REAL, 10.0),
    },
}

# sections that are only run when present in the file
OPTIONAL_SECTIONS = ("block_bounds",)

CASE_PREFIX = "case "
CASE_KEYS: dict[str, tuple] = {
    "theorem": (STR, None), "dim": (INT, 1), "boundary": (BOOL, False), "lam": (REAL, None),
    "family": (STR, "synthetic"), "phi": (STR, "none"), "seeds": (INT, None),
    **{k: (parse_exact, None) for k in ("alpha", "beta", "a", "b", "p", "q", "r", "r0", "p0", "q0",
                                         "r1", "p1", "q1", "eps")},
}


@dataclass(frozen=True)
class CaseEntry:
    name: str
    values: dict
    line: int


@dataclass(frozen=True)
class ExperimentConfig:
    path: str
    sections: dict
    present: frozenset
    cases: tuple[CaseEntry, ...] = ()
    lines: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return self.sections[name]

    def where(self, section: str, key: str | None = None) -> str:
        line = self.lines.get((section, key)) or self.lines.get((section, None)) or 0
        return f"{self.path}:{line}"

    def with_overrides(self, seed: int | None = None, threads: int | None = None,
                       out: str | None = None) -> "ExperimentConfig":
        run = dict(self.sections["run"])
        if seed is not None:
            run["seed"] = seed
        if threads is not None:
            run["threads"] = threads
        if out is not None:
            run["out"] = out
        sections = dict(self.sections, run=run)
        return ExperimentConfig(self.path, sections, self.present, self.cases, self.lines)


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^([^\s=:#;\[][^=:]*?)\s*[=:]")


def _line_map(text: str) -> dict:
    lines, current = {}, None
    for no, raw in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(raw)
        if m:
            current = m.group(1).strip()
            lines.setdefault((current, None), no)
            continue
        m = _KEY_RE.match(raw)
        if m and current is not None:
            lines.setdefault((current, m.group(1).strip().lower()), no)
    return lines


def _typed(parser_default: dict, raw: dict, section: str, path: str, lines: dict) -> dict:
    out = {k: d for k, (_, d) in parser_default.items()}
    for key, text in raw.items():
        line = lines.get((section, key), lines.get((section, None), 0))
        if key not in parser_default:
            raise ConfigError(f"{path}:{line}: unknown key {key!r} in section [{section}]")
        parse = parser_default[key][0]
        try:
            out[key] = parse(text)
        except ValueError as exc:
            raise ConfigError(f"{path}:{line}: [{section}] {key}: {exc}") from None
    return out


def loads(text: str, path: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       strict=True, empty_lines_in_values=False)
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        msg = str(exc).splitlines()[0]
        raise ConfigError(f"{path}:{line if line is not None else 0}: {msg}") from None
    lines = _line_map(text)
    sections = {}
    cases = []
    for name in parser.sections():
        raw = dict(parser.items(name))
        if name.startswith(CASE_PREFIX):
            label = name[len(CASE_PREFIX):].strip()
            values = _typed(CASE_KEYS, raw, name, path, lines)
            if values["theorem"] is None:
                raise ConfigError(f"{path}:{lines.get((name, None), 0)}: [{name}] needs a theorem key")
            cases.append(CaseEntry(label, values, lines.get((name, None), 0)))
        elif name in SCHEMA:
            sections[name] = _typed(SCHEMA[name], raw, name, path, lines)
        else:
            raise ConfigError(f"{path}:{lines.get((name, None), 0)}: unknown section [{name}]")
    present = frozenset(sections)
    for name, schema in SCHEMA.items():
        sections.setdefault(name, {k: d for k, (_, d) in schema.items()})
    return ExperimentConfig(path, sections, present, tuple(cases), lines)


def load(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}:0: cannot read config ({exc.strerror})") from None
    return loads(text, str(p))


def sweep(spec: tuple, where: str = "<config>:0") -> tuple[float, ...]:
    """``(start, stop, step)`` in log2 units to the list 2^start, ..., 2^stop."""
    if len(spec) != 3 or not spec[2] > 0 or spec[1] < spec[0]:
        raise ConfigError(f"{where}: a log2 sweep is 'start, stop, step' with step > 0, got {spec}")
    count = int(round((spec[1] - spec[0]) / spec[2]))
    return tuple(2.0 ** (spec[0] + i * spec[2]) for i in range(count + 1))
