import json
import pathlib

import pytest

import campus_core

ROOT = pathlib.Path(__file__).resolve().parents[2]
F1 = (ROOT / "fixtures" / "f1.json").read_text()


@pytest.fixture
def svc():
    s = campus_core.Service(data_dir=":memory:", today="2011-02-14", pbkdf2_iterations=1000)
    s.load_fixture(F1)
    return s


def test_load_fixture_counts():
    s = campus_core.Service(data_dir=":memory:", today="2011-02-14")
    counts = s.load_fixture(json.loads(F1))
    assert counts["students"] == 2
    assert counts["units"] == 5


def test_eligibility_and_enrollment(svc):
    token = svc.login(*svc.reset_password("S001"))
    rows = svc.call("eligible_units", token, student_id="S001", campus="LTK", term="2011-T1")
    assert [(r["unit_code"], r["prerequisite_met"]) for r in rows] == [("CS201", True), ("CS301", False)]
    e = svc.call("enroll", token, student_id="S001", unit_code="CS301", campus="LTK", term="2011-T1")
    assert e["status"] == "PendingApproval"


def test_errors_carry_catalog_codes(svc):
    token = svc.login(*svc.reset_password("S001"))
    with pytest.raises(campus_core.CampusError) as info:
        svc.call("view_transcript", token, student_id="S002")
    assert info.value.code == "Forbidden"
    assert info.value.code in campus_core.error_catalog()
    with pytest.raises(campus_core.CampusError) as info:
        svc.report("GradeDistribution", campus="NOWHERE")
    assert info.value.code == "UnknownFilter"


def test_report_matches_expected_csv(svc):
    csv = svc.report("GradeDistribution", campus="LTK")
    assert csv.splitlines()[0] == "unit_code,grade,count"
    assert "CS101,B,1" in csv.splitlines()
    assert csv == svc.report("GradeDistribution", campus="LTK")


def test_coursework_csv_parser():
    rows = campus_core.parse_coursework_csv("student_id,assessment,score,max_score\r\nS001,Test1,18,20\r\n")
    assert rows == [(2, "S001", "Test1", "18", "20")]
    with pytest.raises(campus_core.CampusError) as info:
        campus_core.parse_coursework_csv("id,score\n")
    assert info.value.code == "MalformedFile"
    assert info.value.details["line"] == 1


def test_file_store_migrates(tmp_path):
    assert campus_core.migrate(str(tmp_path / "data")) >= 1
    s = campus_core.Service(data_dir=tmp_path / "data", today="2011-02-14")
    s.load_fixture(F1)
    assert "CS101" in s.report("GradeDistribution")
