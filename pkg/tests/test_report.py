import json

import pytest

from gradal.report import FAIL, INFO, PASS, UNVERIFIABLE, Report
from gradal.validation import validate_model

from support import load


def test_verdict_precedence():
    r = Report("x")
    assert r.verdict == PASS
    r.add("a", INFO, "here")
    assert r.verdict == PASS
    r.add("b", UNVERIFIABLE, "here", reason="WHY")
    assert r.verdict == UNVERIFIABLE and r.ok and not r.passed
    r.add("c", FAIL, "there")
    assert r.verdict == FAIL and not r.ok


def test_failure_needs_location():
    with pytest.raises(ValueError):
        Report().add("a", FAIL)
    with pytest.raises(ValueError):
        Report().add("a", "maybe", "here")


def test_json_is_stable_and_compact():
    a = validate_model(load("t2m"), "t2m.gradal")
    b = validate_model(load("t2m"), "t2m.gradal")
    assert a.to_json() == b.to_json()
    text = a.to_json({"command": "validate"})
    assert text.startswith('{"verdict":')
    data = json.loads(text)
    assert data["meta"] == {"command": "validate"}
    assert set(data["entries"][0]) == {"check", "status", "location", "message", "offending", "reason"}


def test_unverifiable_carries_reason_code():
    report = validate_model(load("generic_deg2"))
    undecided = [e for e in report.entries if e.status == UNVERIFIABLE]
    assert undecided and {e.reason for e in undecided} == {"OPAQUE_INVERTIBILITY"}
    # skipped cocycle is recorded but does not decide the verdict
    assert "[OPAQUE_COMPOSITION]" in report.to_text()


def test_text_shows_offending_expression():
    text = validate_model(load("not_homogeneous")).to_text()
    assert text.splitlines()[0] == "verdict: fail"
    assert "offending: z" in text
