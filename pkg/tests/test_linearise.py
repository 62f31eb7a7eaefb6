from fractions import Fraction

import pytest

from gradal.atlas import GradedBundleModel, GradedChart, TransitionMap
from gradal.errors import InvariantViolation, ModelError, NameCollisionError, NonBijectiveError
from gradal.linearise import (
    compare_models,
    embedding_bindings,
    holonomic_embedding,
    linearise,
    parse_correspondence,
    total_linearise,
)
from gradal.prolong import higher_tangent, tangent_lift
from gradal.symcore import coord
from gradal.validation import validate_model

from support import FIXTURES, load


def test_plain_renaming_misses_by_a_factor_of_two():
    base = load("base")
    lt2 = linearise(higher_tangent(base, 2)).model
    ttm = tangent_lift(higher_tangent(base, 1))
    plain = {}
    for old, (new, _) in parse_correspondence((FIXTURES / "l_t2m_to_ttm.renaming").read_text()).items():
        plain[old] = new
    report = compare_models(lt2, ttm, plain)
    assert report.verdict == "fail"
    assert all(e.check == "law" for e in report.failures())


def test_correspondence_file_format():
    corr = parse_correspondence("# header\na -> b\nc -> 3/2*d   # scaled\n\n")
    assert corr == {"a": ("b", Fraction(1)), "c": ("d", Fraction(3, 2))}
    with pytest.raises(NonBijectiveError):
        parse_correspondence("a -> b\na -> c\n")
    with pytest.raises(ValueError):
        parse_correspondence("a b\n")


def test_non_injective_renaming():
    m = load("t2m")
    with pytest.raises(NonBijectiveError):
        compare_models(m, m, {"x1@1": "x2@1"})


def test_comparison_against_itself():
    m = load("wedge2te")
    assert compare_models(m, m).passed


def test_base_coordinates_are_not_rescaled():
    m = load("t2m")
    report = compare_models(m, m, {"x1": ("x1", 2), "X1": ("X1", 2)})
    assert report.verdict == "fail"


def test_linearisation_weights():
    lm = linearise(load("t3m"))
    c = lm.model.chart("U")
    assert lm.model.multiplicity == 2
    assert "x1@3" not in c.names
    assert c.weight("d1_x1@3") == (2, 1)
    assert c.weight("d1_x1@1") == (0, 1)
    assert c.weight("x1@2") == (2, 0)
    assert validate_model(lm.model).ok


def test_linearising_a_vector_bundle_gives_its_tangent_fibers():
    vb = load("vector_bundle")
    lm = linearise(vb).model
    assert lm.grading_degrees == (0, 1)


def test_degree_zero_cannot_be_linearised():
    with pytest.raises(ModelError):
        linearise(load("base"))


def test_linearisation_dotted_name_collision():
    U = GradedChart("U", (("y", 1), ("d1_y", 0)))
    V = GradedChart("V", (("Y", 1), ("W", 0)))
    t = TransitionMap(U, V, (("Y", coord("y")), ("W", coord("d1_y"))))
    with pytest.raises(NameCollisionError):
        linearise(GradedBundleModel((U, V), (t,)))


def test_embedding_scales_by_weight():
    c = load("t3m").chart("U")
    b = embedding_bindings(c, 3)
    assert b["d1_x1@3"] == 3 * coord("x1@3")
    assert b["d1_x2@1"] == coord("x2@1")
    assert b["x1@2"] == coord("x1@2")


def test_embedding_on_corpus():
    for name in ("t2m", "t3m", "generic_deg3", "wedge2te", "automorphism"):
        emb = holonomic_embedding(load(name))
        assert emb.report.ok, name


def test_embedding_fails_on_a_non_graded_law():
    U = GradedChart("U", (("y", 1), ("z", 2)))
    V = GradedChart("V", (("Y", 1), ("Z", 2)))
    t = TransitionMap(U, V, (("Y", coord("y")), ("Z", coord("z") + coord("y") ** 3)))
    with pytest.raises(InvariantViolation) as info:
        holonomic_embedding(GradedBundleModel((U, V), (t,)))
    assert info.value.report.verdict == "fail"


def test_total_linearisation_is_k_fold_linear():
    m = total_linearise(load("t3m"))
    assert m.multiplicity == 3
    assert all(d <= 1 for d in m.grading_degrees)
    assert validate_model(m).ok
    with pytest.raises(ModelError):
        total_linearise(load("two_gradings_base"))
