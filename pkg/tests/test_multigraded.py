import pytest

from gradal.errors import ModelError
from gradal.grading import PolynomialVectorField, weight_vector_field
from gradal.linearise import linearise
from gradal.multigraded import bracket, check_compatibility, is_double_vector_bundle, is_grl_bundle
from gradal.prolong import tangent_lift
from gradal.symcore import coord

from support import load


def test_mixed_law_breaks_bihomogeneity():
    report = check_compatibility(load("bihomogeneity"))
    assert report.verdict == "fail"
    bad = report.failures()
    assert all(e.check == "multi-homogeneity" for e in bad)
    assert {e.location.rsplit(":", 1)[1] for e in bad} == {"U1"}
    # both gradings see the stray summand
    assert {e.message.split(":")[0] for e in bad} == {"grading 0", "grading 1"}


def test_weight_fields_of_one_chart_commute():
    c = tangent_lift(load("t3m")).chart("U")
    assert bracket(weight_vector_field(c, 0), weight_vector_field(c, 1)).is_zero


def test_bracket_of_noncommuting_fields():
    x, y = coord("x"), coord("y")
    X = PolynomialVectorField({"x": y, "y": x * 0})
    Y = PolynomialVectorField({"x": x * 0, "y": x})
    br = bracket(X, Y)
    assert br.coefficient("x") == -x
    assert br.coefficient("y") == y
    assert bracket(X, X).is_zero


def test_bracket_is_antisymmetric():
    x, y = coord("x"), coord("y")
    X = PolynomialVectorField({"x": x * y, "y": y**2})
    Y = PolynomialVectorField({"x": y, "y": x**3})
    assert bracket(X, Y) == PolynomialVectorField({n: -v for n, v in bracket(Y, X).coefficients.items()})


def test_double_and_grl_recognition():
    lf2 = linearise(load("generic_deg2")).model
    assert is_double_vector_bundle(lf2)
    assert is_grl_bundle(lf2)
    tt2 = tangent_lift(load("t2m"))
    assert not is_double_vector_bundle(tt2)
    assert is_grl_bundle(tt2)
    assert not is_grl_bundle(load("bihomogeneity"))


def test_multiplicity_is_enforced():
    with pytest.raises(ModelError):
        is_double_vector_bundle(load("t2m"))
    with pytest.raises(ModelError):
        is_grl_bundle(load("t2m"))
