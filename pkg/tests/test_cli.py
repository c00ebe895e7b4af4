import json
import pathlib
import subprocess
import sys

import jsonschema
import pytest

from schwarzkit import __version__
from schwarzkit.cli import UsageError, main, parse_complex

SCHEMA = json.loads((pathlib.Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())
GRID = ["--n-r", "48", "--n-theta", "96"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    return code, doc


@pytest.mark.parametrize("text,value", [
    ("0.3+0.4i", 0.3 + 0.4j), ("(0.3+0.4i)", 0.3 + 0.4j), ("-2i", -2j), ("0.5", 0.5),
    ("1+2j", 1 + 2j), ("i/2", 0.5j),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == pytest.approx(value)


@pytest.mark.parametrize("text", ["z", "hello", ""])
def test_parse_complex_rejects(text):
    with pytest.raises(UsageError):
        parse_complex(text)


def test_eval_table(capsys):
    code, out, _ = run(capsys, "eval", "--expr", "z/(1-z)^2", "--op", "S", "--at", "0")
    assert code == 0 and out.split() == ["value", "-6"]


def test_eval_json(capsys):
    code, doc = report(capsys, "eval", "--expr", "log((1+z)/(1-z))", "--op", "V:3", "--at", "0.2i")
    assert code == 0
    assert doc["schema_version"] == 1 and doc["version"] == __version__
    assert doc["command"] == "eval"
    assert set(doc["result"]["value"]) == {"re", "im"}


def test_eval_route(capsys):
    _, a = report(capsys, "eval", "--expr", "exp(z)*z", "--op", "Sn:5", "--at", "0.1",
                  "--route", "series")
    _, b = report(capsys, "eval", "--expr", "exp(z)*z", "--op", "Sn:5", "--at", "0.1",
                  "--route", "recursion")
    assert a["result"]["value"]["re"] == pytest.approx(b["result"]["value"]["re"], rel=1e-9)


def test_norm_json(capsys):
    code, doc = report(capsys, "norm", "--expr", "exp(4*z)", "--op", "S", *GRID)
    assert code == 0 and doc["result"]["value"] == pytest.approx(8)
    assert doc["result"]["converged"] is True


def test_check_json(capsys):
    code, doc = report(capsys, "check", "--expr", "exp(4*z)", *GRID)
    assert code == 0 and doc["result"]["conclusion"] == "not_univalent"


def test_repr_json(capsys):
    code, doc = report(capsys, "repr", "--expr", "log((1+z)/(1-z))", "--at", "0")
    assert code == 0 and doc["result"]["error"] < 1e-3


def test_repr_outside_disk(capsys):
    code, _, err = run(capsys, "repr", "--expr", "z", "--at", "2")
    assert code == 2 and "unit disk" in err


def test_poly_dump(capsys):
    code, out, _ = run(capsys, "poly", "dump", "--family", "T", "--n", "5")
    assert code == 0 and out.splitlines() == ["1 x5", "13 x2*x3"]
    _, doc = report(capsys, "poly", "dump", "--family", "P", "--n", "2")
    assert doc["result"]["polynomial"] == "x2 - 3/2*x1^2"


def test_poly_bad_order(capsys):
    code, _, _ = run(capsys, "poly", "dump", "--family", "P", "--n", "20")
    assert code == 2


def test_verify_group(capsys):
    code, doc = report(capsys, "verify", "--only", "polynomials")
    assert code == 0 and doc["result"]["ok"]
    assert all(r["status"] == "pass" for r in doc["result"]["rows"])


def test_verify_seed_determinism(capsys):
    _, a = report(capsys, "verify", "--only", "metric", "--seed", "7")
    _, b = report(capsys, "verify", "--only", "metric", "--seed", "7")
    assert a == b


def test_verify_bad_group(capsys):
    code, _, _ = run(capsys, "verify", "--only", "nothing")
    assert code == 2


@pytest.mark.parametrize("argv,code,fragment", [
    (["eval", "--expr", "z+", "--op", "S", "--at", "0"], 2, "offset"),
    (["eval", "--expr", "z", "--op", "W:2", "--at", "0"], 2, "W"),
    (["eval", "--expr", "z", "--op", "S", "--at", "0", "--source", "flat"], 2, "flat"),
    (["eval", "--expr", "z^2", "--op", "S", "--at", "0"], 1, "error [schwarzian]"),
    (["eval", "--expr", "log(z)", "--op", "S", "--at", "-1"], 1, "error ["),
])
def test_error_exit_codes(capsys, argv, code, fragment):
    got, _, err = run(capsys, *argv)
    assert got == code
    assert fragment in err


def test_missing_subcommand_is_usage_error():
    proc = subprocess.run([sys.executable, "-m", "schwarzkit"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_version_flag():
    proc = subprocess.run([sys.executable, "-m", "schwarzkit", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout


def test_nonfinite_values_become_null():
    from schwarzkit.cli import _jsonable
    assert _jsonable(complex(float("nan"), 1.0)) == {"re": None, "im": 1.0}
    assert _jsonable(float("inf")) is None
