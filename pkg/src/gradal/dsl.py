"""The ``gradal v1`` model format: parser and canonical printer.

A document is line oriented::

    gradal v1
    weights 1                      # grading multiplicity (optional)
    symbol T(x)                    # opaque coefficient of base coordinate x
    symbol S(x) = 1 + x^2          # explicit coefficient
    chart U
      x : 0
      y : 1                        # multi-gradings: y : (1,0)
    chart V
      X : 0
      Y : 1
    transition U -> V
      X = x
      Y = y*T
    transition V -> U inverse of U -> V
      x = X
      y = Y*S
    algebroid A over U
      anchor y x = 1               # rho_y^x
      structure a b c = 1          # C^c_{ab}
      extra x : 1                  # auxiliary weight

Expressions use ``+ - * /``, ``^`` with a non-negative integer exponent,
and ``d(e, v1, v2, ...)`` for formal partials.  Names may carry trailing
primes and an ``@n`` suffix encoding derivative order (``x@2`` is the
second velocity of ``x``).  ``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DslSyntaxError, ResolutionError, VersionError
from .symcore import Expression, FunctionSymbol, coord, partial

FORMAT_VERSION = "v1"

KEYWORDS = frozenset(
    {"gradal", "weights", "symbol", "chart", "transition", "inverse", "of", "algebroid", "over",
     "anchor", "structure", "extra", "d"}
)

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)"
    r"|(?P<comment>\#.*)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*'*(?:@[0-9]+)?)"
    r"|(?P<int>[0-9]+)"
    r"|(?P<arrow>->)"
    r"|(?P<op>[()+\-*/^,:=])"
)

_EXPR_START = ("name", "integer", "'('", "'-'", "'d'")


@dataclass(frozen=True)
class Pos:
    line: int
    column: int


def _pos_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SymbolNode:
    name: str
    args: tuple[str, ...]
    definition: Expression | None = None
    pos: Pos | None = _pos_field()


@dataclass(frozen=True)
class CoordNode:
    name: str
    weight: tuple[int, ...]
    pos: Pos | None = _pos_field()


@dataclass(frozen=True)
class ChartNode:
    name: str
    coordinates: tuple[CoordNode, ...] = ()
    pos: Pos | None = _pos_field()


@dataclass(frozen=True)
class LawNode:
    target: str
    expr: Expression
    pos: Pos | None = _pos_field()


@dataclass(frozen=True)
class TransitionNode:
    source: str
    target: str
    laws: tuple[LawNode, ...] = ()
    inverse_of: tuple[str, str] | None = None
    pos: Pos | None = _pos_field()


@dataclass(frozen=True)
class AnchorNode:
    fiber: str
    base: str
    expr: Expression
    pos: Pos | None = _pos_field()


@dataclass(frozen=True)
class StructureNode:
    a: str
    b: str
    c: str
    expr: Expression
    pos: Pos | None = _pos_field()


@dataclass(frozen=True)
class ExtraNode:
    name: str
    weight: int
    pos: Pos | None = _pos_field()


@dataclass(frozen=True)
class AlgebroidNode:
    name: str
    chart: str
    anchors: tuple[AnchorNode, ...] = ()
    structures: tuple[StructureNode, ...] = ()
    extras: tuple[ExtraNode, ...] = ()
    pos: Pos | None = _pos_field()


@dataclass(frozen=True)
class ModelDocument:
    multiplicity: int = 1
    symbols: tuple[SymbolNode, ...] = ()
    charts: tuple[ChartNode, ...] = ()
    transitions: tuple[TransitionNode, ...] = ()
    algebroids: tuple[AlgebroidNode, ...] = ()
    version: str = FORMAT_VERSION

    def chart(self, name: str) -> ChartNode:
        for c in self.charts:
            if c.name == name:
                return c
        raise KeyError(name)


# ---------------------------------------------------------------------------
# lexer


@dataclass(frozen=True)
class Token:
    kind: str  # name, int, arrow, op, eol
    text: str
    line: int
    column: int


def tokenize_line(text: str, lineno: int) -> list[Token]:
    tokens = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[i]!r}", lineno, i + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), lineno, i + 1))
        i = m.end()
    tokens.append(Token("eol", "", lineno, len(text) + 1))
    return tokens


def _describe(tok: Token) -> str:
    return "end of line" if tok.kind == "eol" else repr(tok.text)


class _Line:
    """Cursor over the tokens of one line."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eol":
            self.i += 1
        return t

    def fail(self, expected) -> None:
        t = self.tok
        raise DslSyntaxError(f"unexpected {_describe(t)}", t.line, t.column, expected)

    def is_op(self, text: str) -> bool:
        return self.tok.kind in ("op", "arrow") and self.tok.text == text

    def expect_op(self, text: str) -> Token:
        if not self.is_op(text):
            self.fail([f"'{text}'"])
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        if not (self.tok.kind == "name" and self.tok.text == word):
            self.fail([f"'{word}'"])
        return self.advance()

    def expect_name(self, what="name") -> Token:
        t = self.tok
        if t.kind != "name":
            self.fail([what])
        if t.text in KEYWORDS:
            raise DslSyntaxError(f"keyword {t.text!r} cannot be used as a {what}", t.line, t.column, [what])
        return self.advance()

    def expect_int(self) -> int:
        if self.tok.kind != "int":
            self.fail(["integer"])
        return int(self.advance().text)

    def expect_end(self) -> None:
        if self.tok.kind != "eol":
            self.fail(["end of line"])


# ---------------------------------------------------------------------------
# expressions


class _ExprParser:
    """Recursive descent over one line; names are resolved as they are read."""

    def __init__(self, cur: _Line, resolve, resolve_coordinate):
        self.cur = cur
        self.resolve = resolve
        self.resolve_coordinate = resolve_coordinate

    def expr(self) -> Expression:
        cur = self.cur
        value = self.term()
        while cur.is_op("+") or cur.is_op("-"):
            op = cur.advance().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Expression:
        cur = self.cur
        value = self.unary()
        while cur.is_op("*") or cur.is_op("/"):
            op = cur.advance()
            rhs = self.unary()
            if op.text == "*":
                value = value * rhs
            else:
                if not rhs.is_constant:
                    raise DslSyntaxError("division by a non-constant expression", op.line, op.column)
                if rhs.is_zero:
                    raise DslSyntaxError("division by zero", op.line, op.column)
                value = value / rhs.constant_value
        return value

    def unary(self) -> Expression:
        if self.cur.is_op("-"):
            self.cur.advance()
            return -self.unary()
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.cur.is_op("^"):
            self.cur.advance()
            base = base ** self.cur.expect_int()
        return base

    def atom(self) -> Expression:
        cur = self.cur
        t = cur.tok
        if t.kind == "int":
            cur.advance()
            return Expression.constant(int(t.text))
        if cur.is_op("("):
            cur.advance()
            inner = self.expr()
            cur.expect_op(")")
            return inner
        if t.kind == "name" and t.text == "d":
            cur.advance()
            cur.expect_op("(")
            value = self.expr()
            if not cur.is_op(","):
                cur.fail(["','"])
            while cur.is_op(","):
                cur.advance()
                v = cur.expect_name("coordinate")
                self.resolve_coordinate(v.text, v.line, v.column)
                value = partial(value, v.text)
            cur.expect_op(")")
            return value
        if t.kind == "name" and t.text not in KEYWORDS:
            cur.advance()
            return self.resolve(t.text, t.line, t.column)
        cur.fail(_EXPR_START)


# ---------------------------------------------------------------------------
# document parser


class _Scope:
    """Names visible inside one expression."""

    def __init__(self, coordinates, symbols):
        self.coordinates = set(coordinates)
        self.symbols = symbols

    def resolve(self, name, line, column):
        if name in self.coordinates:
            return coord(name)
        decl = self.symbols.get(name)
        if decl is not None:
            return Expression.function(FunctionSymbol(name, decl.args))
        raise ResolutionError(name, line, column)

    def resolve_coordinate(self, name, line, column):
        if name not in self.coordinates:
            raise ResolutionError(name, line, column, f"{name!r} is not a coordinate here")


def parse(text: str) -> ModelDocument:
    """Parse a ``gradal v1`` document."""
    lines = text.splitlines()
    symbols: dict[str, SymbolNode] = {}
    arg_tokens: dict[str, list[Token]] = {}
    charts: dict[str, dict] = {}
    transitions: dict[tuple[str, str], dict] = {}
    algebroids: dict[str, dict] = {}
    multiplicity = None
    header_seen = False
    block = None  # ("chart", dict) | ("transition", dict) | ("algebroid", dict)

    def parse_expr(cur, scope):
        return _ExprParser(cur, scope.resolve, scope.resolve_coordinate).expr()

    def weight_tuple(cur) -> tuple[int, ...]:
        if cur.is_op("("):
            cur.advance()
            parts = [cur.expect_int()]
            while cur.is_op(","):
                cur.advance()
                parts.append(cur.expect_int())
            cur.expect_op(")")
            return tuple(parts)
        if cur.tok.kind != "int":
            cur.fail(["integer", "'('"])
        return (cur.expect_int(),)

    for lineno, raw in enumerate(lines, start=1):
        tokens = tokenize_line(raw, lineno)
        if tokens[0].kind == "eol":
            continue
        cur = _Line(tokens)
        first = cur.tok
        if not header_seen:
            cur.expect_keyword("gradal")
            v = cur.tok
            if v.kind != "name":
                cur.fail(["version"])
            cur.advance()
            cur.expect_end()
            if v.text != FORMAT_VERSION:
                raise VersionError(f"unsupported format version {v.text!r}", v.line, v.column)
            header_seen = True
            continue

        word = first.text if first.kind == "name" else None
        if word == "weights":
            cur.advance()
            n_tok = cur.tok
            n = cur.expect_int()
            cur.expect_end()
            if multiplicity is not None or charts:
                raise DslSyntaxError("'weights' must appear once, before any chart", first.line, first.column)
            if n < 1:
                raise DslSyntaxError("grading multiplicity must be at least 1", n_tok.line, n_tok.column)
            multiplicity = n
            block = None
        elif word == "symbol":
            cur.advance()
            nt = cur.expect_name("symbol name")
            if nt.text in symbols:
                raise ResolutionError(nt.text, nt.line, nt.column, f"symbol {nt.text!r} declared twice")
            cur.expect_op("(")
            args = []
            if not cur.is_op(")"):
                args.append(cur.expect_name("argument"))
                while cur.is_op(","):
                    cur.advance()
                    args.append(cur.expect_name("argument"))
            cur.expect_op(")")
            names = tuple(a.text for a in args)
            if len(set(names)) != len(names):
                raise ResolutionError(nt.text, nt.line, nt.column, f"repeated argument in symbol {nt.text!r}")
            definition = None
            if cur.is_op("="):
                cur.advance()
                definition = parse_expr(cur, _Scope(names, {}))
            cur.expect_end()
            symbols[nt.text] = SymbolNode(nt.text, names, definition, Pos(first.line, first.column))
            # argument names are checked against charts once the whole file is read
            arg_tokens[nt.text] = args
            block = None
        elif word == "chart":
            cur.advance()
            nt = cur.expect_name("chart name")
            cur.expect_end()
            if nt.text in charts:
                raise ResolutionError(nt.text, nt.line, nt.column, f"chart {nt.text!r} declared twice")
            charts[nt.text] = {"name": nt.text, "coords": [], "pos": Pos(first.line, first.column)}
            block = ("chart", charts[nt.text])
        elif word == "transition":
            cur.advance()
            src = cur.expect_name("chart name")
            cur.expect_op("->")
            tgt = cur.expect_name("chart name")
            inverse_of = None
            if cur.tok.kind == "name" and cur.tok.text == "inverse":
                cur.advance()
                cur.expect_keyword("of")
                a = cur.expect_name("chart name")
                cur.expect_op("->")
                b = cur.expect_name("chart name")
                inverse_of = (a.text, b.text, a)
            cur.expect_end()
            for t in (src, tgt):
                if t.text not in charts:
                    raise ResolutionError(t.text, t.line, t.column, f"unknown chart {t.text!r}")
            key = (src.text, tgt.text)
            if key in transitions:
                raise ResolutionError(src.text, src.line, src.column, f"transition {src.text} -> {tgt.text} declared twice")
            transitions[key] = {
                "source": src.text,
                "target": tgt.text,
                "laws": [],
                "inverse_of": inverse_of,
                "pos": Pos(first.line, first.column),
            }
            block = ("transition", transitions[key])
        elif word == "algebroid":
            cur.advance()
            nt = cur.expect_name("algebroid name")
            cur.expect_keyword("over")
            ct = cur.expect_name("chart name")
            cur.expect_end()
            if ct.text not in charts:
                raise ResolutionError(ct.text, ct.line, ct.column, f"unknown chart {ct.text!r}")
            if nt.text in algebroids:
                raise ResolutionError(nt.text, nt.line, nt.column, f"algebroid {nt.text!r} declared twice")
            algebroids[nt.text] = {
                "name": nt.text,
                "chart": ct.text,
                "anchors": [],
                "structures": [],
                "extras": [],
                "pos": Pos(first.line, first.column),
            }
            block = ("algebroid", algebroids[nt.text])
        elif block is None:
            cur.fail(["'weights'", "'symbol'", "'chart'", "'transition'", "'algebroid'"])
        elif block[0] == "chart":
            chart = block[1]
            nt = cur.expect_name("coordinate name")
            cur.expect_op(":")
            w = weight_tuple(cur)
            cur.expect_end()
            if any(c.name == nt.text for c in chart["coords"]):
                raise ResolutionError(nt.text, nt.line, nt.column, f"coordinate {nt.text!r} declared twice")
            if nt.text in symbols:
                raise ResolutionError(nt.text, nt.line, nt.column, f"{nt.text!r} is already a symbol")
            if multiplicity is None:
                multiplicity = len(w)
            if len(w) != multiplicity:
                raise DslSyntaxError(
                    f"expected {multiplicity} weight component(s), got {len(w)}", first.line, first.column
                )
            chart["coords"].append(CoordNode(nt.text, w, Pos(first.line, first.column)))
        elif block[0] == "transition":
            tr = block[1]
            nt = cur.expect_name("coordinate name")
            target_names = [c.name for c in charts[tr["target"]]["coords"]]
            if nt.text not in target_names:
                raise ResolutionError(nt.text, nt.line, nt.column, f"{nt.text!r} is not a coordinate of chart {tr['target']}")
            if any(law.target == nt.text for law in tr["laws"]):
                raise ResolutionError(nt.text, nt.line, nt.column, f"law for {nt.text!r} given twice")
            cur.expect_op("=")
            scope = _Scope([c.name for c in charts[tr["source"]]["coords"]], symbols)
            e = parse_expr(cur, scope)
            cur.expect_end()
            tr["laws"].append(LawNode(nt.text, e, Pos(first.line, first.column)))
        else:
            alg = block[1]
            chart_names = [c.name for c in charts[alg["chart"]]["coords"]]

            def chart_name(cur):
                t = cur.expect_name("coordinate name")
                if t.text not in chart_names:
                    raise ResolutionError(t.text, t.line, t.column, f"{t.text!r} is not a coordinate of chart {alg['chart']}")
                return t.text

            if word == "anchor":
                cur.advance()
                a, b = chart_name(cur), chart_name(cur)
                cur.expect_op("=")
                e = parse_expr(cur, _Scope(chart_names, symbols))
                cur.expect_end()
                alg["anchors"].append(AnchorNode(a, b, e, Pos(first.line, first.column)))
            elif word == "structure":
                cur.advance()
                a, b, c = chart_name(cur), chart_name(cur), chart_name(cur)
                cur.expect_op("=")
                e = parse_expr(cur, _Scope(chart_names, symbols))
                cur.expect_end()
                alg["structures"].append(StructureNode(a, b, c, e, Pos(first.line, first.column)))
            elif word == "extra":
                cur.advance()
                name = chart_name(cur)
                cur.expect_op(":")
                w = cur.expect_int()
                cur.expect_end()
                alg["extras"].append(ExtraNode(name, w, Pos(first.line, first.column)))
            else:
                cur.fail(["'anchor'", "'structure'", "'extra'", "'chart'", "'transition'", "'algebroid'", "'symbol'"])

    if not header_seen:
        raise DslSyntaxError("missing 'gradal v1' header", 1, 1, ["'gradal'"])

    # deferred resolution
    all_coords = {c.name: c for ch in charts.values() for c in ch["coords"]}
    for s in symbols.values():
        for tok in arg_tokens[s.name]:
            cn = all_coords.get(tok.text)
            if cn is None:
                raise ResolutionError(tok.text, tok.line, tok.column, f"symbol argument {tok.text!r} is not a coordinate")
            if any(cn.weight):
                raise ResolutionError(tok.text, tok.line, tok.column, f"symbol argument {tok.text!r} is not a base coordinate")
        if s.name in all_coords:
            raise ResolutionError(s.name, s.pos.line, s.pos.column, f"{s.name!r} is both a symbol and a coordinate")
    for tr in transitions.values():
        inv = tr["inverse_of"]
        if inv is not None:
            a, b, tok = inv
            if (a, b) not in transitions:
                raise ResolutionError(f"{a} -> {b}", tok.line, tok.column, f"unknown transition {a} -> {b}")
            if (a, b) != (tr["target"], tr["source"]):
                raise ResolutionError(
                    f"{a} -> {b}", tok.line, tok.column, f"transition {tr['source']} -> {tr['target']} cannot invert {a} -> {b}"
                )
            tr["inverse_of"] = (a, b)

    return ModelDocument(
        multiplicity=multiplicity or 1,
        symbols=tuple(SymbolNode(s.name, s.args, s.definition, s.pos) for s in symbols.values()),
        charts=tuple(ChartNode(c["name"], tuple(c["coords"]), c["pos"]) for c in charts.values()),
        transitions=tuple(
            TransitionNode(t["source"], t["target"], tuple(t["laws"]), t["inverse_of"], t["pos"])
            for t in transitions.values()
        ),
        algebroids=tuple(
            AlgebroidNode(a["name"], a["chart"], tuple(a["anchors"]), tuple(a["structures"]), tuple(a["extras"]), a["pos"])
            for a in algebroids.values()
        ),
    )


# ---------------------------------------------------------------------------
# printer


def _fmt_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_symbol(s: FunctionSymbol) -> str:
    if not s.derivs:
        return s.name
    return "d(" + ", ".join((s.name,) + s.derivs) + ")"


def _term_key(mono, syms, rank):
    exps = dict(mono)
    vec = tuple(-exps.get(n, 0) for n in rank)
    sym_key = tuple((_fmt_symbol(s), -k) for s, k in syms)
    return (vec, sum(exps.values()), sym_key)


def format_expression(e: Expression, order=None) -> str:
    """Render ``e`` with terms sorted lexicographically by ``order``, then by degree.

    Coordinates missing from ``order`` are ranked after it, alphabetically.
    """
    if e.is_zero:
        return "0"
    order = list(order or ())
    extra = sorted(e.coordinates() - set(order))
    rank = order + extra
    pos = {n: i for i, n in enumerate(rank)}
    terms = sorted(e.items(), key=lambda kv: _term_key(kv[0][0], kv[0][1], rank))
    out = []
    for i, ((mono, syms), c) in enumerate(terms):
        factors = [n if k == 1 else f"{n}^{k}" for n, k in sorted(mono, key=lambda nk: pos[nk[0]])]
        factors += [_fmt_symbol(s) if k == 1 else f"{_fmt_symbol(s)}^{k}" for s, k in syms]
        mag = abs(c)
        if not factors:
            body = _fmt_fraction(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = _fmt_fraction(mag) + "*" + "*".join(factors)
        if i == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


def _fmt_weight(w: tuple[int, ...], multiplicity: int) -> str:
    if multiplicity == 1:
        return str(w[0])
    return "(" + ",".join(str(x) for x in w) + ")"


def print_document(doc: ModelDocument) -> str:
    """Canonical text of ``doc``; ``parse(print_document(doc)) == doc``."""
    out = [f"gradal {doc.version}", f"weights {doc.multiplicity}"]
    if doc.symbols:
        out.append("")
    for s in doc.symbols:
        line = f"symbol {s.name}(" + ", ".join(s.args) + ")"
        if s.definition is not None:
            line += " = " + format_expression(s.definition, s.args)
        out.append(line)
    chart_order = {c.name: [n.name for n in c.coordinates] for c in doc.charts}
    for c in doc.charts:
        out.append("")
        out.append(f"chart {c.name}")
        for n in c.coordinates:
            out.append(f"  {n.name} : {_fmt_weight(n.weight, doc.multiplicity)}")
    for t in doc.transitions:
        out.append("")
        head = f"transition {t.source} -> {t.target}"
        if t.inverse_of is not None:
            head += f" inverse of {t.inverse_of[0]} -> {t.inverse_of[1]}"
        out.append(head)
        order = chart_order.get(t.source)
        for law in t.laws:
            out.append(f"  {law.target} = " + format_expression(law.expr, order))
    for a in doc.algebroids:
        out.append("")
        out.append(f"algebroid {a.name} over {a.chart}")
        order = chart_order.get(a.chart)
        for n in a.anchors:
            out.append(f"  anchor {n.fiber} {n.base} = " + format_expression(n.expr, order))
        for n in a.structures:
            out.append(f"  structure {n.a} {n.b} {n.c} = " + format_expression(n.expr, order))
        for n in a.extras:
            out.append(f"  extra {n.name} : {n.weight}")
    return "\n".join(out) + "\n"
