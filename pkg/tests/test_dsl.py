import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradal.dsl import (
    AlgebroidNode,
    AnchorNode,
    ChartNode,
    CoordNode,
    ExtraNode,
    LawNode,
    ModelDocument,
    StructureNode,
    SymbolNode,
    TransitionNode,
    format_expression,
    parse,
    print_document,
    tokenize_line,
)
from gradal.errors import DslSyntaxError, ResolutionError, VersionError
from gradal.symcore import FunctionSymbol, Expression, const, coord, partial

from support import FIXTURES

COORD_POOL = ["x", "y", "z", "u", "v", "w", "x'", "y''", "q@1", "q@2", "p_1", "d1_x", "Za"]
SYMBOL_POOL = ["T", "S", "R", "Phi", "g_2"]
COEFFS = [Fraction(1), Fraction(-1), Fraction(2), Fraction(-3), Fraction(1, 2), Fraction(-5, 7)]


def _random_expr(rng, coords, symbols, depth=3):
    e = const(0)
    for _ in range(rng.randint(0, depth)):
        term = const(rng.choice(COEFFS))
        for _ in range(rng.randint(0, 3)):
            term = term * coord(rng.choice(coords)) if coords else term
        if symbols and rng.random() < 0.5:
            name, args = rng.choice(symbols)
            f = Expression.function(FunctionSymbol(name, args))
            if args and rng.random() < 0.5:
                f = partial(f, rng.choice(args))
            term = term * f
        e = e + term
    return e


def _suffixed(name, i):
    stem, at, order = name.partition("@")
    core = stem.rstrip("'")
    return f"{core}_{i}" + stem[len(core):] + at + order


def random_document(rng: random.Random) -> ModelDocument:
    """A small document that resolves; laws need not be graded-bundle laws."""
    n = rng.choice([1, 1, 2])
    names = rng.sample(COORD_POOL, rng.randint(2, 5))
    charts = []
    for ci in range(rng.randint(1, 3)):
        coords = []
        for j, name in enumerate(names):
            cname = name if ci == 0 else _suffixed(name, ci)
            if j == 0:
                w = (0,) * n
            else:
                w = tuple(rng.randint(0, 3) for _ in range(n))
            coords.append(CoordNode(cname, w))
        charts.append(ChartNode(f"C{ci}", tuple(coords)))
    base_of = {c.name: [k.name for k in c.coordinates if not any(k.weight)] for c in charts}
    symbols = []
    for sname in rng.sample(SYMBOL_POOL, rng.randint(0, 3)):
        chart = rng.choice(charts)
        pool = base_of[chart.name]
        args = tuple(rng.sample(pool, rng.randint(1, len(pool))))
        definition = _random_expr(rng, list(args), []) if rng.random() < 0.4 else None
        symbols.append((SymbolNode(sname, args, definition), chart.name))
    transitions = []
    pairs = [(a.name, b.name) for a in charts for b in charts if a.name != b.name]
    rng.shuffle(pairs)
    for src, tgt in pairs[: rng.randint(0, len(pairs))]:
        src_chart = next(c for c in charts if c.name == src)
        tgt_chart = next(c for c in charts if c.name == tgt)
        usable = [(s.name, s.args) for s, home in symbols if home == src]
        laws = tuple(
            LawNode(k.name, _random_expr(rng, [c.name for c in src_chart.coordinates], usable))
            for k in tgt_chart.coordinates
        )
        inverse = (tgt, src) if any(t.source == tgt and t.target == src for t in transitions) and rng.random() < 0.7 else None
        transitions.append(TransitionNode(src, tgt, laws, inverse))
    algebroids = []
    if rng.random() < 0.3:
        chart = charts[0]
        cn = [k.name for k in chart.coordinates]
        usable = [(s.name, s.args) for s, home in symbols if home == chart.name]
        anchors = tuple(AnchorNode(rng.choice(cn), rng.choice(cn), _random_expr(rng, cn, usable)) for _ in range(rng.randint(0, 2)))
        structures = tuple(
            StructureNode(rng.choice(cn), rng.choice(cn), rng.choice(cn), _random_expr(rng, cn, usable))
            for _ in range(rng.randint(0, 2))
        )
        extras = tuple(ExtraNode(c, rng.randint(0, 3)) for c in rng.sample(cn, rng.randint(0, len(cn))))
        algebroids.append(AlgebroidNode("A", chart.name, anchors, structures, extras))
    return ModelDocument(n, tuple(s for s, _ in symbols), tuple(charts), tuple(transitions), tuple(algebroids))


def test_t2m_fixture_parses():
    doc = parse((FIXTURES / "t2m.gradal").read_text())
    assert [c.name for c in doc.charts] == ["U", "V"]
    assert sorted({k.weight for k in doc.charts[0].coordinates}) == [(0,), (1,), (2,)]
    assert len(doc.transitions[0].laws) == 6


def test_empty_chart_block():
    doc = parse("gradal v1\nchart U\n")
    assert doc.charts == (ChartNode("U", ()),)


def test_multi_weights_print_as_tuples():
    doc = parse("gradal v1\nweights 2\nchart U\n  x : (0,0)\n  y : (1,0)\n")
    assert "  y : (1,0)" in print_document(doc)


def test_single_integer_weight_promotes():
    doc = parse("gradal v1\nchart U\n  y : 1\n")
    assert doc.charts[0].coordinates[0].weight == (1,)


def test_syntax_error_position():
    text = "gradal v1\nchart U\n  z : 2\nchart V\n  Z : 2\ntransition U -> V\n  Z = z **\n"
    with pytest.raises(DslSyntaxError) as info:
        parse(text)
    err = info.value
    assert (err.line, err.column) == (7, 10)
    assert "expected one of" in str(err)


def test_undeclared_name():
    with pytest.raises(ResolutionError) as info:
        parse("gradal v1\nchart U\n  y : 1\nchart V\n  Y : 1\ntransition U -> V\n  Y = q\n")
    assert info.value.name == "q"
    assert (info.value.line, info.value.column) == (7, 7)


def test_unknown_version():
    with pytest.raises(VersionError):
        parse("gradal v2\n")


def test_missing_header():
    with pytest.raises(DslSyntaxError):
        parse("chart U\n")


def test_symbol_argument_must_be_base():
    with pytest.raises(ResolutionError):
        parse("gradal v1\nsymbol T(y)\nchart U\n  y : 1\n")


def test_inverse_must_reverse():
    text = "gradal v1\nchart U\n  x : 0\nchart V\n  X : 0\ntransition U -> V inverse of U -> V\n  X = x\n"
    with pytest.raises(ResolutionError):
        parse(text)


def test_keyword_is_not_a_name():
    with pytest.raises(DslSyntaxError):
        parse("gradal v1\nchart U\n  d : 0\n")


def test_division_by_constant_only():
    with pytest.raises(DslSyntaxError):
        parse("gradal v1\nchart U\n  x : 0\nchart V\n  X : 0\ntransition U -> V\n  X = 1/x\n")
    doc = parse("gradal v1\nchart U\n  x : 0\nchart V\n  X : 0\ntransition U -> V\n  X = x/2\n")
    assert doc.transitions[0].laws[0].expr == coord("x") * Fraction(1, 2)


def test_partial_syntax_evaluates():
    doc = parse("gradal v1\nsymbol T(x)\nchart U\n  x : 0\nchart V\n  X : 0\ntransition U -> V\n  X = d(x^3*T, x)\n")
    T = Expression.function(FunctionSymbol("T", ("x",)))
    expected = 3 * coord("x") ** 2 * T + coord("x") ** 3 * partial(T, "x")
    assert doc.transitions[0].laws[0].expr == expected


def test_printer_orders_terms():
    e = coord("y") + coord("x") ** 2 - 3 + coord("x") * coord("y")
    assert format_expression(e, ["x", "y"]) == "x^2 + x*y + y - 3"


@pytest.mark.parametrize("path", sorted(p.name for p in FIXTURES.glob("*.gradal") if p.stem != "corrupt"))
def test_fixture_round_trip(path):
    doc = parse((FIXTURES / path).read_text())
    text = print_document(doc)
    assert parse(text) == doc
    assert print_document(parse(text)) == text


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_random_round_trip(seed):
    doc = random_document(random.Random(seed))
    text = print_document(doc)
    assert parse(text) == doc
    assert print_document(parse(text)) == text


JUNK = ["*", "=", ")", ":", "->", "(", "^", "+", "chart", "7"]


def _corruptions(text, rng, count=12):
    """Replace one token by a different one.

    Yields the corrupted text with the line of the corruption and the
    column of the token right after it.  A left-to-right parser must have
    noticed the problem by then, except for an unclosed bracket, which can
    only show at the end of the line.
    """
    lines = text.splitlines()
    candidates = [i for i, l in enumerate(lines) if l.strip() and not l.startswith("gradal") and not l.lstrip().startswith("#")]
    for _ in range(count):
        i = rng.choice(candidates)
        tokens = [t for t in tokenize_line(lines[i], i + 1) if t.kind != "eol"]
        k = rng.randrange(len(tokens))
        tok = tokens[k]
        junk = rng.choice([j for j in JUNK if j != tok.text])
        start = tok.column - 1
        new_line = lines[i][:start] + junk + lines[i][start + len(tok.text):]
        after = [t for t in tokenize_line(new_line, i + 1) if t.column > start + len(junk)]
        limit = after[0].column if after else len(new_line) + 1
        yield i + 1, (limit, len(new_line) + 1), "\n".join(lines[:i] + [new_line] + lines[i + 1:]) + "\n"


@pytest.mark.parametrize("path", ["t2m.gradal", "generic_deg2.gradal", "wedge2te.gradal", "so3.gradal", "bihomogeneity.gradal"])
def test_error_position_not_after_corruption(path):
    rng = random.Random(path)
    text = (FIXTURES / path).read_text()
    for line, (limit, eol), bad in _corruptions(text, rng):
        try:
            parse(bad)
        except (DslSyntaxError, ResolutionError) as exc:
            assert exc.line <= line, (bad, exc)
            if exc.line == line:
                assert exc.column <= limit or exc.column == eol, (bad, exc)
        # some replacements stay well formed (say '+' for '*'); that is fine
