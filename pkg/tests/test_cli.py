import json
import math

import pytest

from kinavg.cli import build_parser, main, run
from kinavg.experiments import SUITES

CHEAP = """[run]
seed = 3
[lambda_strip]
n = 32
log2_lambda = 2, 4, 0.5
"""


@pytest.fixture
def cheap(tmp_path):
    path = tmp_path / "cheap.ini"
    path.write_text(CHEAP)
    return path


def _run(path, out, *extra):
    return main(["lambda-strip", "--config", str(path), "--out", str(out), *extra])


def test_suite_writes_reports_and_passes(cheap, tmp_path, capsys):
    assert _run(cheap, tmp_path / "r") == 0
    report = json.loads((tmp_path / "r" / "lambda_strip.json").read_text())
    assert report["version"] == 1 and report["suite"] == "lambda_strip" and report["passed"]
    header = (tmp_path / "r" / "lambda_strip_strip.csv").read_text().splitlines()[0]
    assert header == "alpha,lambda,norm,log_corrected_ratio"
    assert "lambda-strip: PASS" in capsys.readouterr().out


def test_reports_are_byte_identical_across_thread_counts(cheap, tmp_path):
    _run(cheap, tmp_path / "a", "--threads", "1")
    _run(cheap, tmp_path / "b", "--threads", "3")
    for name in ("lambda_strip.json", "lambda_strip_strip.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


NORMS = ("[norms]\nn = 64\nperiod = 2pi\nseeds = 1\nindices = 1\nfit_window = 1, 4\n"
         "bernstein_n = 256\nbernstein_ks = 2, 3, 4\n")


def test_failing_check_gives_status_one(tmp_path, capsys):
    # a zero tolerance on fitted indices cannot be met
    path = tmp_path / "fail.ini"
    path.write_text(NORMS + "index_tol = 0\n")
    assert run("norms", str(path), str(tmp_path / "r")) == 1
    assert "norms: FAIL" in capsys.readouterr().out


@pytest.mark.parametrize("text,fragment", [
    ("[run]\nthreads = 0\n", ":2: threads must be >= 1"),
    ("[run]\nseed = x\n", ":2:"),
    ("[case c]\ntheorem = PROP_B011\nbeta = 1\n", "beta < 1"),
    ("[case c]\ntheorem = CLASSICAL\nalpha = -1\n", "alpha > -1/2"),
    ("[case c]\ntheorem = P\nfamily = oscillatory\n", ":3:"),
    ("[case c]\ntheorem = P\nphi = box:2\n", ":3:"),
])
def test_config_and_hypothesis_errors_give_status_two(tmp_path, capsys, text, fragment):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    assert _run(path, tmp_path / "r") == 2
    err = capsys.readouterr().err
    assert str(path) in err and fragment in err
    assert not (tmp_path / "r").exists()


def test_missing_config_gives_status_two(tmp_path):
    assert _run(tmp_path / "nope.ini", tmp_path / "r") == 2


def test_parser_lists_every_suite():
    parser = build_parser()
    for name in [*SUITES, "all"]:
        assert parser.parse_args([name]).command == name
    with pytest.raises(SystemExit):
        parser.parse_args(["nonsense"])


def test_seed_override_changes_seeded_suites(tmp_path):
    path = tmp_path / "n.ini"
    path.write_text(NORMS)
    outs = []
    for seed in ("1", "1", "2"):
        out = tmp_path / f"s{len(outs)}"
        run("norms", str(path), str(out), 1, int(seed))
        outs.append((out / "norms.json").read_bytes())
    assert outs[0] == outs[1] != outs[2]
