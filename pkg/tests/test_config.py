import math
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from kinavg.config import (SCHEMA, ConfigError, load, loads, parse_bool, parse_exact, parse_int, parse_real,
                           sweep)


@pytest.mark.parametrize("text,value", [
    ("8pi", 8 * math.pi), ("pi/12", math.pi / 12), ("2*pi", 2 * math.pi), ("inf", math.inf),
    ("-3", -3.0), ("1e-3", 1e-3), ("2**-3", 0.125), ("(1+1)pi", 2 * math.pi),
])
def test_real_expressions(text, value):
    assert parse_real(text) == value


@pytest.mark.parametrize("text", ["__import__('os')", "abc", "1/0", "pi(", "[1]"])
def test_real_rejects_everything_else(text):
    with pytest.raises(ValueError):
        parse_real(text)


def test_exact_values():
    assert parse_exact("1/2") == Fraction(1, 2) and parse_exact("0.25") == Fraction(1, 4)
    assert parse_exact("3") == 3 and isinstance(parse_exact("3"), int)
    assert parse_exact("inf") == math.inf
    with pytest.raises(ValueError):
        parse_exact("pi")
    assert parse_bool("Yes") and not parse_bool("off")
    with pytest.raises(ValueError):
        parse_bool("maybe")
    with pytest.raises(ValueError):
        parse_int("2.5")


@given(st.integers(-6, 6), st.integers(0, 8), st.sampled_from([0.25, 0.5, 1.0]))
def test_sweep_endpoints_and_count(start, span, step):
    values = sweep((start, start + span, step))
    assert values[0] == 2.0 ** start and values[-1] == pytest.approx(2.0 ** (start + span))
    assert len(values) == round(span / step) + 1


def test_sweep_rejects_bad_specs():
    for spec in ((0, 1), (0, 1, 0), (2, 1, 0.5)):
        with pytest.raises(ConfigError, match="cfg.ini:7:"):
            sweep(spec, "cfg.ini:7")


def test_defaults_fill_missing_sections():
    cfg = loads("[run]\nseed = 4\n", "x.ini")
    assert cfg.section("run")["seed"] == 4
    assert cfg.section("identities")["period"] == SCHEMA["identities"]["period"][1]
    assert cfg.present == frozenset({"run"}) and cfg.cases == ()


def test_cases_keep_exact_exponents_and_lines():
    text = "[run]\nseed = 1\n\n[case demo]\ntheorem = P\nbeta = 1/3\np = inf\n"
    cfg = loads(text, "c.ini")
    (case,) = cfg.cases
    assert case.name == "demo" and case.line == 4
    assert case.values["beta"] == Fraction(1, 3) and case.values["p"] == math.inf
    assert cfg.where("case demo", "p") == "c.ini:7"


@pytest.mark.parametrize("text,line,fragment", [
    ("[run]\nseed = 1\nthreads = two\n", 3, "not an integer"),
    ("[run]\nseed = 1\n\n[colours]\nred = 1\n", 4, "unknown section"),
    ("[norms]\nn = 64\nwidth = 3\n", 3, "unknown key"),
    ("[run]\nseed = 1\nseed = 2\n", 3, "seed"),
    ("seed = 1\n", 1, "section"),
    ("[case x]\nalpha = 1\n", 1, "theorem"),
    ("[case x]\ntheorem = P\nalpha = pi\n", 3, "exact rational"),
])
def test_errors_are_anchored_to_lines(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        loads(text, "bad.ini")
    msg = str(info.value)
    assert msg.startswith(f"bad.ini:{line}:") and fragment in msg


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load(tmp_path / "absent.ini")


def test_overrides_only_touch_the_run_section():
    cfg = loads("[run]\nseed = 1\n", "x.ini")
    new = cfg.with_overrides(seed=9, threads=3, out="o")
    assert new.section("run") == {"seed": 9, "threads": 3, "out": "o"}
    assert cfg.section("run")["seed"] == 1 and new.section("norms") is cfg.section("norms")


def test_shipped_config_parses():
    cfg = load(Path(__file__).resolve().parents[1] / "configs" / "default.ini")
    assert {c.name for c in cfg.cases} == {"classical", "p_beta0", "p_beta_half"}
    assert "block_bounds" in cfg.present
