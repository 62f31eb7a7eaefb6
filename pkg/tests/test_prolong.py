import pytest
import sympy as sp

from gradal.atlas import GradedBundleModel, GradedChart, TransitionMap
from gradal.errors import ModelError, NameCollisionError
from gradal.prolong import (
    cotangent_chart_model,
    cotangent_weights,
    dual_name,
    higher_tangent,
    jet_name,
    split_jet,
    tangent_lift,
    total_derivative,
)
from gradal.symcore import apply_derivation, coord, func, partial
from gradal.validation import validate_model

from oracles import curve_prolongation, same, sym, taylor_prolongation
from support import load


@pytest.mark.parametrize("k", [1, 2, 3])
def test_opaque_laws_match_curve_oracle(k):
    base = load("base")
    t = higher_tangent(base, k).transition("U", "V")
    phi = {f"X{i}": sp.Function(f"P{i}")(sym("x1"), sym("x2")) for i in (1, 2)}
    for name, expected in curve_prolongation(phi, ["x1", "x2"], k).items():
        assert same(t.law(name), expected), name


def test_two_oracles_agree_on_polynomials():
    phi = {"X": sym("x") ** 3 * sym("y") - 2 * sym("y") ** 2, "Y": sym("x") + sym("y") ** 2}
    a = taylor_prolongation(phi, ["x", "y"], 3)
    b = curve_prolongation(phi, ["x", "y"], 3)
    assert all(sp.expand(a[n] - b[n]) == 0 for n in a)


def test_order_zero_is_identity():
    base = load("base")
    assert higher_tangent(base, 0) == base
    with pytest.raises(ValueError):
        higher_tangent(base, -1)


def test_needs_a_base_model():
    with pytest.raises(ModelError):
        higher_tangent(load("t2m"), 2)


def test_jet_names():
    assert jet_name("x", 0) == "x"
    assert jet_name("x", 2) == "x@2"
    assert split_jet("x1@3") == ("x1", 3)
    assert split_jet("x1") == ("x1", 0)
    with pytest.raises(ModelError):
        jet_name("x@1", 1)


def test_total_derivative_on_symbols():
    U = GradedChart("U", (("x", 0),))
    D = total_derivative(U, 2)
    T = func("T", ["x"])
    expected = partial(T, "x") * coord("x@1") ** 2 + T * coord("x@2")
    assert apply_derivation(D, T * coord("x@1")) == expected


def test_prolongation_validates():
    for k in (1, 2, 3):
        assert validate_model(higher_tangent(load("explicit_base"), k)).ok


def test_tangent_lift_weights():
    lifted = tangent_lift(load("t2m"))
    c = lifted.chart("U")
    assert lifted.multiplicity == 2
    assert c.weight("x1@2") == (2, 0)
    assert c.weight("d1_x1@2") == (2, 1)
    assert c.weight("d1_x1") == (0, 1)


def test_tangent_lift_name_collision():
    U = GradedChart("U", (("x", 0), ("d1_x", 0)))
    V = GradedChart("V", (("X", 0), ("Y", 0)))
    t = TransitionMap(U, V, (("X", coord("x")), ("Y", coord("d1_x"))))
    with pytest.raises(NameCollisionError):
        tangent_lift(GradedBundleModel((U, V), (t,)))


def test_cotangent_weights_are_dual():
    m = load("t3m")
    table = cotangent_weights(m)["U"]
    k = m.degree
    for name, w in m.chart("U").coordinates:
        assert table[name] == (w[0], 0)
        assert table[dual_name(name)] == (k - w[0], 1)
    one = cotangent_chart_model(m)
    assert one.multiplicity == 2 and len(one.charts) == 1


def test_cotangent_needs_single_grading():
    with pytest.raises(ModelError):
        cotangent_weights(load("two_gradings_base"))
