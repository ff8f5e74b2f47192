import json
from io import StringIO

import pytest

from cli import build_parser, create_config, run
from errors import UsageError
from tests.conftest import CATALOG_IDS


def call(*argv: str):
    out = StringIO()
    code = run(list(argv), out=out)
    return code, out.getvalue()


def test_eval_table():
    code, text = call("eval", "--model", "P2", "--invariant", "S", "--class", "1")
    assert code == 0
    assert "S(1) on P2/generic" in text
    assert "divisors" in text


def test_eval_json():
    code, text = call(
        "eval", "--model", "BlqP2", "--profile", "on_curve_F", "--invariant", "S",
        "--class", "1,0", "--format", "json",
    )
    assert code == 0
    payload = json.loads(text)
    assert payload["agree"] is True
    assert {r["route"]: r["value"] for r in payload["routes"]} == {"exit": "0", "polar": "0", "divisors": "0"}


def test_eval_single_route():
    code, text = call(
        "eval", "--model", "BlqP2", "--invariant", "n", "--class", "1,1",
        "--profile", "on_curve_F", "--route", "exit", "--format", "json",
    )
    assert code == 0
    assert json.loads(text)["routes"] == [{"route": "exit", "value": "3", "exact": True, "error": ""}]


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--model", "P2", "--invariant", "s", "--class", "1", "--route", "divisors"],
        ["eval", "--model", "P2", "--invariant", "N", "--class", "1", "--kind", "div"],
        ["eval", "--model", "P2", "--invariant", "s", "--class", "1,x"],
        ["eval", "--model", "BlqP2", "--invariant", "s", "--class=0,1"],
        ["eval", "--model", "BlqP2", "--invariant", "s", "--class", "1,0,0"],
        ["eval", "--model", "P7", "--invariant", "s", "--class", "1"],
        ["eval", "--model", "P2", "--profile", "on_line", "--invariant", "s", "--class", "1"],
        ["suite", "--model", "P2", "--tol", "-1"],
        ["suite", "--model", "P2", "--samples", "0"],
        ["eval", "--model", "P2", "--invariant", "q", "--class", "1"],
        [],
    ],
)
def test_usage_errors_exit_with_two(argv):
    code, _ = call(*argv)
    assert code == 2


def test_usage_error_names_flag():
    args = build_parser().parse_args(
        ["eval", "--model", "P2", "--invariant", "n", "--class", "1", "--route", "curves"]
    )
    with pytest.raises(UsageError) as err:
        create_config(args)
    assert err.value.flag == "--route"


def test_suite_on_one_model():
    code, text = call("suite", "--model", "BlqP2", "--samples", "3", "--seed", "5", "--format", "json")
    assert code == 0
    reports = json.loads(text)
    assert {r["status"] for r in reports} <= {"PASS", "SKIP"}
    assert {r["profile"] for r in reports} == {"generic", "on_curve_F", ""}
    assert reports == sorted(reports, key=lambda r: (r["model"], r["profile"], r["check"]))


def test_suite_single_profile_table():
    code, text = call("suite", "--model", "P1xP1", "--profile", "generic", "--samples", "2")
    assert code == 0
    assert "theorem_A" in text and "FAIL" not in text


def test_golden():
    code, text = call("golden", "--model", "P2", "--format", "json")
    assert code == 0
    (report,) = json.loads(text)
    assert report["status"] == "PASS"


def test_dual():
    code, text = call("dual", "--model", "BlqP2", "--format", "json")
    assert code == 0
    spaces = json.loads(text)
    assert [s["space"] for s in spaces] == ["X", "Y[generic]", "Y[on_curve_F]"]
    assert all(all(s["dualities"].values()) for s in spaces)


def test_list():
    code, text = call("list", "--format", "json")
    assert code == 0
    assert sorted(e["id"] for e in json.loads(text)) == sorted(CATALOG_IDS)


def test_export(tmp_path):
    code, text = call("export-catalog", "--dest", str(tmp_path))
    assert code == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == sorted(f"{i}.json" for i in CATALOG_IDS)
    assert len(text.splitlines()) == len(CATALOG_IDS)


@pytest.mark.parametrize(
    "argv",
    [
        ("suite", "--model", "BlqP2", "--samples", "3", "--seed", "5"),
        ("suite", "--model", "BlqP2", "--samples", "3", "--seed", "5", "--format", "json"),
        ("eval", "--model", "BlpP3", "--invariant", "M", "--class", "7,-1", "--format", "json"),
    ],
)
def test_same_argv_gives_same_bytes(argv):
    first, second = call(*argv), call(*argv)
    assert first[0] == 0
    assert first == second
