import csv
import io
import json
import re
import subprocess
import sys

import pytest

from gausscrit.cli import CSV_SCHEMAS, run, to_json


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _json(text):
    return json.loads(text)


def test_verify_el_p2_assert(capsys):
    code, out, _ = _run(capsys, "verify-el", "--d", "3", "--p", "2", "--a-max", "8", "--a-steps", "21", "--assert")
    rep = _json(out)
    assert code == 0
    assert rep["results"]["verdict"] == "critical"
    assert rep["results"]["fitted_constant"] == pytest.approx(1.5707963268, rel=1e-9)
    assert rep["verdicts"][0]["status"] == "pass"


def test_verify_el_expect_not_critical(capsys):
    code, out, _ = _run(capsys, "verify-el", "--d", "2", "--p", "1.5", "--assert", "--expect", "not-critical")
    assert code == 0 and _json(out)["results"]["verdict"] == "not-critical"


def test_assertion_failure_exit_4(capsys):
    code, out, _ = _run(capsys, "verify-el", "--d", "2", "--p", "1.5", "--assert", "--expect", "critical")
    assert code == 4 and _json(out)["verdicts"][0]["status"] == "fail"


def test_no_assert_exit_0_regardless(capsys):
    code, _, _ = _run(capsys, "verify-el", "--d", "2", "--p", "1.5", "--expect", "critical")
    assert code == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["verify-el", "--d", "2", "--p", "0.5"],
        ["verify-el", "--d", "1", "--p", "1.5"],
        ["verify-mixed", "--d", "2", "--q", "4", "--r", "7.9"],
        ["verify-mixed", "--d", "2", "--q", "4"],
        ["series", "--d", "2", "--p", "2"],
        ["series", "--d", "2", "--p", "1.5", "--kmax", "2"],
        ["verify-el", "--d", "2", "--p", "2", "--a-steps", "1"],
        ["verify-el", "--d", "2", "--p", "2", "--threads", "0"],
        ["derivative", "--d", "3", "--p", "2"],
        ["functional", "--d", "2"],
        ["verify-el", "--d", "2"],
        ["no-such-command"],
    ],
)
def test_invalid_configuration_exit_2(capsys, argv):
    code, out, _ = _run(capsys, *argv)
    assert code == 2 and out == ""


def test_non_convergence_exit_3(capsys, monkeypatch):
    import gausscrit.cli as cli
    from gausscrit.quadrature import ConvergenceError

    def boom(*a, **k):
        raise ConvergenceError("forced")

    monkeypatch.setattr(cli, "equivalence_suite", boom)
    code, _, err = _run(capsys, "contour-check")
    assert code == 3 and "forced" in err


def test_verify_mixed(capsys):
    code, out, _ = _run(capsys, "verify-mixed", "--d", "3", "--q", "4", "--r", "4", "--assert")
    rep = _json(out)
    assert code == 0 and rep["results"]["fitted_constant"] == pytest.approx(1.5707963268, rel=1e-9)


def test_series_json_and_csv(capsys):
    code, out, _ = _run(capsys, "series", "--d", "2", "--p", "1.5", "--kmax", "12", "--assert")
    rep = _json(out)
    assert code == 0 and rep["results"]["consistent"] is False
    code, out, _ = _run(capsys, "series", "--d", "2", "--p", "1.5", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == CSV_SCHEMAS["series"].split(",") and len(rows) == 14
    code, out, _ = _run(capsys, "series", "--d", "2", "--p", "2.5", "--kmax", "4")
    assert code == 0 and len(_json(out)["results"]["values"]) == 5


def test_contour_check(capsys):
    code, out, _ = _run(capsys, "contour-check", "--assert")
    rep = _json(out)
    assert code == 0 and len(rep["results"]["instances"]) == 25


def test_variation(capsys):
    code, out, _ = _run(capsys, "variation", "--q", "4", "--r", "8", "--assert")
    rep = _json(out)
    assert code == 0 and rep["results"]["width_z1"]["fitted_slope"] > 1.15


def test_functional(capsys):
    code, out, _ = _run(capsys, "functional", "--d", "2", "--p", "2", "--seed", "3", "--samples", "4", "--assert")
    rep = _json(out)
    assert code == 0 and rep["results"]["closed_rel_err"] < 1e-6
    code, out, _ = _run(capsys, "functional", "--d", "2", "--q", "4", "--r", "8", "--samples", "2", "--assert")
    assert code == 0 and _json(out)["results"]["name"] == "psi"


@pytest.mark.parametrize("p,expect", [("2", None), ("1.5", None), ("1.5", "not-critical")])
def test_derivative(capsys, p, expect):
    argv = ["derivative", "--p", p, "--assert"] + (["--expect", expect] if expect else [])
    code, out, _ = _run(capsys, *argv)
    assert code == 0


def _strip_timing(text):
    return re.sub(r'"timing_ms": \d+', '"timing_ms": 0', text)


@pytest.mark.parametrize(
    "argv",
    [
        ["verify-el", "--d", "2", "--p", "1.5", "--threads", "3"],
        ["functional", "--d", "2", "--p", "1.5", "--seed", "11", "--samples", "3"],
    ],
)
def test_determinism(capsys, argv):
    _, a, _ = _run(capsys, *argv)
    _, b, _ = _run(capsys, *argv)
    assert _strip_timing(a) == _strip_timing(b)


def test_threads_do_not_change_numbers(capsys):
    _, a, _ = _run(capsys, "verify-el", "--d", "2", "--p", "2.5", "--threads", "1")
    _, b, _ = _run(capsys, "verify-el", "--d", "2", "--p", "2.5", "--threads", "4")
    ra, rb = _json(a), _json(b)
    assert ra["results"] == rb["results"]


def test_round_trip_from_echoed_config(capsys):
    _, out, _ = _run(capsys, "verify-el", "--d", "4", "--p", "2", "--a-min", "1", "--a-max", "5", "--a-steps", "5")
    rep = _json(out)
    c = rep["config"]
    argv = ["verify-el", "--d", str(c["d"]), "--p", repr(c["p"]), "--a-min", repr(c["a_min"]), "--a-max", repr(c["a_max"]), "--a-steps", str(c["a_steps"])]
    _, again, _ = _run(capsys, *argv)
    assert _json(again)["results"] == rep["results"]


def test_out_writes_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = _run(capsys, "verify-el", "--d", "3", "--p", "2", "--a-steps", "3", "--out", str(path))
    assert code == 0 and out == ""
    assert _json(path.read_text())["command"] == "verify-el"


def test_seventeen_digits():
    text = to_json({"x": 0.1, "z": 1 + 2j, "n": float("nan"), "b": True, "i": 3})
    assert '"x": 0.10000000000000001' in text
    assert json.loads(text)["z"] == {"re": 1, "im": 2}
    assert json.loads(text)["n"] == "nan"


def test_help_lists_csv_schema(capsys):
    with pytest.raises(SystemExit):
        from gausscrit.cli import build_parser

        build_parser().parse_args(["--help"])
    assert "CSV columns per command" in capsys.readouterr().out


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "gausscrit", "verify-el", "--d", "3", "--p", "2", "--a-steps", "3", "--format", "csv"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0
    assert res.stdout.splitlines()[0] == "a,R"
