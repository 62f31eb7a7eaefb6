import pytest

from gradal.atlas import (
    OPAQUE_COMPOSITION,
    GradedBundleModel,
    GradedChart,
    TransitionMap,
    check_affine_fibration,
    check_cocycle,
    check_connected,
    is_vector_bundle,
    permute_gradings,
    single_chart_model,
    truncate_to_degree,
    validate_transition,
)
from gradal.errors import InvariantViolation, ModelError
from gradal.symcore import const, coord
from gradal.validation import validate_model

from support import load

U = GradedChart("U", (("x", 0), ("y", 1), ("z", 2)))
V = GradedChart("V", (("X", 0), ("Y", 1), ("Z", 2)))


def transition(**laws):
    return TransitionMap(U, V, tuple((n, laws[n]) for n in ("X", "Y", "Z")))


def statuses(report, check):
    return [e.status for e in report.entries if e.check == check]


def test_good_explicit_law_passes_every_check():
    x, y, z = coord("x"), coord("y"), coord("z")
    t = transition(X=x + 1, Y=2 * y, Z=z + x * y**2)
    report = validate_transition(t)
    assert report.passed, report.to_text()
    assert {e.check for e in report.entries} == {"polynomial", "homogeneity", "invertibility", "symmetry"}


def test_law_leaving_the_source_chart():
    t = transition(X=coord("x"), Y=coord("q"), Z=coord("z"))
    report = validate_transition(t)
    assert statuses(report, "polynomial") == ["fail"]
    assert "homogeneity" not in {e.check for e in report.entries}


def test_inhomogeneous_law_names_the_stray_piece():
    report = validate_model(load("not_homogeneous"))
    (bad,) = report.failures()
    assert bad.check == "homogeneity"
    assert bad.location.endswith(":Y")
    assert bad.offending == "z"


def test_singular_linear_block():
    t = transition(X=coord("x"), Y=const(0), Z=coord("z"))
    report = validate_transition(t)
    bad = [e for e in report.failures() if e.check == "invertibility"]
    assert bad and "singular" in bad[0].message


def test_nonconstant_determinant_is_unverifiable():
    t = transition(X=coord("x"), Y=coord("x") * coord("y"), Z=coord("z"))
    report = validate_transition(t)
    assert report.verdict == "unverifiable"
    (e,) = [e for e in report.entries if e.status == "unverifiable"]
    assert e.reason == "NONCONSTANT_DETERMINANT"


def test_rank_mismatch():
    W = GradedChart("W", (("X", 0), ("Y", 1), ("Y2", 1), ("Z", 2)))
    x, y, z = coord("x"), coord("y"), coord("z")
    t = TransitionMap(U, W, (("X", x), ("Y", y), ("Y2", y), ("Z", z)))
    bad = validate_transition(t).failures()
    assert any("rank mismatch" in e.message for e in bad)


def test_opaque_laws_without_inverse_are_unverifiable():
    m = load("generic_deg2")
    reasons = {e.reason for e in validate_model(m).entries if e.status == "unverifiable"}
    assert "OPAQUE_INVERTIBILITY" in reasons or "OPAQUE_COMPOSITION" in reasons


def test_cocycle_catches_wrong_inverse():
    report = check_cocycle(load("bad_inverse"))
    assert report.verdict == "fail"
    assert all(e.check == "cocycle" for e in report.failures())


def test_cocycle_with_opaque_symbols():
    report = check_cocycle(load("base"))
    assert report.verdict == "unverifiable"
    assert {e.reason for e in report.entries} == {OPAQUE_COMPOSITION}


def test_cocycle_on_explicit_inverse_pair():
    assert check_cocycle(load("wedge2te")).passed


def test_disconnected_atlas():
    m = GradedBundleModel((U, V), ())
    assert check_connected(m).verdict == "fail"
    assert check_connected(single_chart_model(U)).passed


def test_truncation_drops_top_weights():
    t2 = truncate_to_degree(load("t2m"), 1)
    assert t2.degree == 1
    assert set(t2.chart("U").names) == {"x1", "x2", "x1@1", "x2@1"}
    assert truncate_to_degree(load("t2m"), 0).degree == 0


def test_truncation_refuses_non_graded_dependence():
    # weight-1 law reading a weight-2 coordinate cannot be truncated
    with pytest.raises(InvariantViolation):
        truncate_to_degree(load("not_homogeneous"), 1)


def test_negative_truncation():
    with pytest.raises(ValueError):
        truncate_to_degree(load("t2m"), -1)


def test_affine_fibration_failure():
    x, y, z = coord("x"), coord("y"), coord("z")
    m = GradedBundleModel((U, V), (transition(X=x, Y=y, Z=z + z**2),))
    report = check_affine_fibration(m, 2)
    assert report.verdict == "fail"
    assert report.failures()[0].offending == "z^2"
    assert check_affine_fibration(load("t3m"), 3).passed


def test_vector_bundle_recognition():
    assert is_vector_bundle(load("vector_bundle"))
    assert not is_vector_bundle(load("t2m"))
    with pytest.raises(ModelError):
        is_vector_bundle(load("two_gradings_base"))


def test_permute_gradings_round_trip():
    m = load("two_gradings_base")
    swapped = permute_gradings(m, (1, 0))
    assert permute_gradings(swapped, (1, 0)) == m
    with pytest.raises(ValueError):
        permute_gradings(m, (0, 0))


def test_empty_chart_model_validates():
    assert validate_model(load("empty_chart")).ok
