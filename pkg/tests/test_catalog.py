import json

import pytest

from catalog import export_catalog, golden_run, list_catalog, load_entry
from errors import ModelLoadError
from models import CheckStatus
from tests.conftest import CATALOG_IDS

EXPECTED_COUNTS = {"P2": 13, "P1xP1": 11, "BlqP2": 14, "Bl2P2": 11, "BlpP3": 12}


def test_catalog_lists_every_model():
    entries = list_catalog()
    assert sorted(e.id for e in entries) == sorted(CATALOG_IDS)
    assert {e.id: len(e.expected_values) for e in entries} == EXPECTED_COUNTS
    for e in entries:
        assert e.provenance_note
        assert e.to_json()["expected_values"] == EXPECTED_COUNTS[e.id]


@pytest.mark.parametrize("entry", list_catalog(), ids=lambda e: e.id)
def test_golden_values_match(entry):
    report = golden_run(entry)
    assert report.status is CheckStatus.PASS, report.witnesses
    assert report.samples == len(entry.expected_values)


def test_load_by_id_and_by_path():
    entry = next(e for e in list_catalog() if e.id == "BlqP2")
    by_id = load_entry("BlqP2")
    assert by_id is load_entry("BlqP2")
    assert load_entry(entry.json_path).name == "BlqP2"


def test_unknown_model():
    with pytest.raises(ModelLoadError):
        load_entry("P7")


def test_untagged_oracle_is_rejected(tmp_path):
    src = next(e for e in list_catalog() if e.id == "P2").json_path
    data = json.loads(src.read_text(encoding="utf-8"))
    data["expected"][0]["oracle"] = "trust me"
    (tmp_path / "P2.json").write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(ModelLoadError) as err:
        list_catalog(tmp_path)
    assert err.value.location == "expected[0].oracle"


def test_golden_mismatch_is_reported(tmp_path):
    src = next(e for e in list_catalog() if e.id == "BlqP2").json_path
    data = json.loads(src.read_text(encoding="utf-8"))
    data["expected"][0]["expected"] = "5"
    (tmp_path / "BlqP2.json").write_text(json.dumps(data), encoding="utf-8")
    (entry,) = list_catalog(tmp_path)
    report = golden_run(entry)
    assert report.status is CheckStatus.FAIL
    assert report.witnesses[0]["expected"] == "5"
    assert report.witnesses[0]["got"] == "1"


def test_export_is_byte_identical(tmp_path):
    written = export_catalog(tmp_path / "out")
    assert len(written) == len(CATALOG_IDS)
    for entry in list_catalog():
        copy = tmp_path / "out" / entry.json_path.name
        assert copy.read_bytes() == entry.json_path.read_bytes()
