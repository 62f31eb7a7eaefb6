"""Graded bundle models: charts, transition laws and their validation.

A model is a list of charts in homogeneous coordinates plus polynomial
transition laws between them.  Coordinates of weight zero in every grading
are base coordinates; all others are fiber coordinates.  Coefficient
symbols may only depend on base coordinates of the source chart.

Coefficient mode is a property of the laws, not a flag: a transition is
*explicit* when every symbol it uses has a polynomial definition, and
*opaque* otherwise.  Composition (and therefore cocycle checking) is only
attempted in explicit mode.
"""
from __future__ import annotations

import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import factorial

from .dsl import format_expression
from .errors import InvariantViolation, ModelError, NameCollisionError, UnboundCoordinateError
from .grading import GradedSpace, _fmt_weight, check_graded_morphism
from .report import FAIL, INFO, PASS, UNVERIFIABLE, Report
from .symcore import Context, Expression, SymbolDecl, coord, expand, partial, substitute

OPAQUE_COMPOSITION = "OPAQUE_COMPOSITION"


@dataclass(frozen=True)
class GradedChart:
    name: str
    coordinates: tuple[tuple[str, tuple[int, ...]], ...]
    multiplicity: int = 1

    def __post_init__(self):
        coords = []
        for name, w in self.coordinates:
            w = (w,) if isinstance(w, int) else tuple(w)
            if len(w) != self.multiplicity:
                raise ModelError(f"{self.name}.{name}: expected {self.multiplicity} weight components")
            if any(x < 0 for x in w):
                raise ModelError(f"{self.name}.{name}: weights must be non-negative")
            coords.append((name, w))
        names = [n for n, _ in coords]
        if len(set(names)) != len(names):
            raise NameCollisionError(f"chart {self.name} declares a coordinate twice")
        object.__setattr__(self, "coordinates", tuple(coords))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.coordinates)

    @property
    def weights(self) -> dict[str, tuple[int, ...]]:
        return dict(self.coordinates)

    @property
    def base(self) -> tuple[str, ...]:
        return tuple(n for n, w in self.coordinates if not any(w))

    @property
    def fiber(self) -> tuple[str, ...]:
        return tuple(n for n, w in self.coordinates if any(w))

    def weight(self, name: str) -> tuple[int, ...]:
        return self.weights[name]

    def measure(self, grading: int | None = None) -> dict[str, int]:
        """Per-coordinate weight in one grading, or total weight if ``grading`` is None."""
        if grading is None:
            return {n: sum(w) for n, w in self.coordinates}
        return {n: w[grading] for n, w in self.coordinates}

    def degree(self, grading: int | None = None) -> int:
        return max(self.measure(grading).values(), default=0)

    def graded_space(self, grading: int | None = None) -> GradedSpace:
        return GradedSpace.from_weights(self.measure(grading).values())


@dataclass(frozen=True)
class TransitionMap:
    """Laws expressing every target coordinate in source coordinates."""

    source: GradedChart
    target: GradedChart
    laws: tuple[tuple[str, Expression], ...]
    inverse_of: tuple[str, str] | None = None

    def __post_init__(self):
        given = dict(self.laws)
        if len(given) != len(tuple(self.laws)):
            raise ModelError(f"transition {self.key}: duplicate law")
        unknown = set(given) - set(self.target.names)
        if unknown:
            raise ModelError(f"transition {self.key}: laws for unknown coordinates {sorted(unknown)}")
        missing = [n for n in self.target.names if n not in given]
        if missing:
            raise UnboundCoordinateError(f"transition {self.key}: no law for {', '.join(missing)}")
        object.__setattr__(self, "laws", tuple((n, given[n]) for n in self.target.names))

    @property
    def key(self) -> tuple[str, str]:
        return (self.source.name, self.target.name)

    @property
    def bindings(self) -> dict[str, Expression]:
        return dict(self.laws)

    def law(self, name: str) -> Expression:
        return self.bindings[name]

    def __str__(self):
        return f"{self.source.name} -> {self.target.name}"


@dataclass(frozen=True)
class GradedBundleModel:
    charts: tuple[GradedChart, ...] = ()
    transitions: tuple[TransitionMap, ...] = ()
    symbols: tuple[SymbolDecl, ...] = ()
    multiplicity: int = 1
    algebroids: tuple = field(default=(), compare=True)

    def __post_init__(self):
        object.__setattr__(self, "charts", tuple(self.charts))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "algebroids", tuple(self.algebroids))
        names = [c.name for c in self.charts]
        if len(set(names)) != len(names):
            raise NameCollisionError("chart declared twice")
        for c in self.charts:
            if c.multiplicity != self.multiplicity:
                raise ModelError(f"chart {c.name} has grading multiplicity {c.multiplicity}, model has {self.multiplicity}")
        keys = [t.key for t in self.transitions]
        if len(set(keys)) != len(keys):
            raise ModelError("transition declared twice")
        for t in self.transitions:
            for ch in (t.source, t.target):
                if self.chart(ch.name) != ch:
                    raise ModelError(f"transition {t} refers to a chart not in the model")
        coords = {n for c in self.charts for n in c.names}
        for s in self.symbols:
            if s.name in coords:
                raise NameCollisionError(f"{s.name!r} is both a symbol and a coordinate")

    # lookup -----------------------------------------------------------------

    def chart(self, name: str) -> GradedChart:
        for c in self.charts:
            if c.name == name:
                return c
        raise KeyError(name)

    def transition(self, source: str, target: str) -> TransitionMap | None:
        for t in self.transitions:
            if t.key == (source, target):
                return t
        return None

    def declared_inverse(self, t: TransitionMap) -> TransitionMap | None:
        back = self.transition(t.target.name, t.source.name)
        if back is None:
            return None
        if back.inverse_of == t.key or t.inverse_of == back.key:
            return back
        return None

    @property
    def symbol_table(self) -> dict[str, SymbolDecl]:
        return {s.name: s for s in self.symbols}

    @property
    def definitions(self) -> dict[str, Expression]:
        return {s.name: s.definition for s in self.symbols if s.definition is not None}

    def context(self, chart: GradedChart | str) -> Context:
        if isinstance(chart, str):
            chart = self.chart(chart)
        return Context(chart.names, self.symbol_table)

    def is_explicit(self, e: Expression) -> bool:
        defs = self.definitions
        return all(s.name in defs for s in e.symbols())

    def transition_is_explicit(self, t: TransitionMap) -> bool:
        return all(self.is_explicit(e) for _, e in t.laws)

    # grading data -------------------------------------------------------------

    @property
    def degree(self) -> int:
        """Largest total weight of a coordinate."""
        return max((c.degree() for c in self.charts), default=0)

    def grading_degree(self, i: int) -> int:
        return max((c.degree(i) for c in self.charts), default=0)

    @property
    def grading_degrees(self) -> tuple[int, ...]:
        return tuple(self.grading_degree(i) for i in range(self.multiplicity))


def single_chart_model(chart: GradedChart, symbols=()) -> GradedBundleModel:
    return GradedBundleModel((chart,), (), tuple(symbols), chart.multiplicity)


# ---------------------------------------------------------------------------
# validation


def _det(rows: list[list[Expression]]) -> Expression:
    n = len(rows)
    if n == 0:
        return Expression.constant(1)
    if n == 1:
        return rows[0][0]
    total = Expression()
    for j in range(n):
        if rows[0][j].is_zero:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def symmetric_coefficients(law: Expression, fiber: Sequence[str]) -> dict[tuple[str, ...], Expression]:
    """Extract the symmetric coefficient tensors of a fiber law.

    For each multiset of fiber indices ``b1 <= ... <= bn`` with ``n >= 2``,
    returns ``T_{b1...bn}`` such that the degree-``n`` part of the law is
    ``sum over ordered index tuples of (1/n!) y^{b1}...y^{bn} T_{b1...bn}``.
    The tensor is obtained as the n-th partial derivative at the zero
    section, which is symmetric exactly when partials commute.
    """
    at_zero = {n: Expression() for n in fiber}
    out = {}
    for mono in law.collect(fiber):
        idx = tuple(sorted(n for n, k in mono for _ in range(k)))
        if len(idx) < 2:
            continue
        d = law
        for v in idx:
            d = partial(d, v)
        out[idx] = substitute(d, at_zero)
    return out


def _rebuild_from_symmetric(coeffs: Mapping[tuple[str, ...], Expression]) -> Expression:
    total = Expression()
    for idx, T in coeffs.items():
        n = len(idx)
        orderings = len(set(itertools.permutations(idx)))
        mono = Expression.constant(1)
        for v in idx:
            mono = mono * coord(v)
        total = total + mono * T * Fraction(orderings, factorial(n))
    return total


def validate_transition(t: TransitionMap, model: GradedBundleModel | None = None) -> Report:
    """Check that ``t`` is a graded bundle transition law.

    (a) laws are polynomial in fiber coordinates with coefficients depending
    on source base coordinates only; (b) each law is homogeneous of its
    target weight; (c) each same-weight linear block has an invertibility
    witness; (d) higher coefficient tensors are symmetric and reproduce the
    nonlinear part of the law with the 1/n! convention.
    """
    src, tgt = t.source, t.target
    loc = str(t)
    report = Report(f"transition {loc}")
    order = src.names
    symbols = model.symbol_table if model is not None else {}
    definitions = model.definitions if model is not None else {}
    base = set(src.base)
    src_names = set(src.names)

    # (a) polynomiality
    poly_ok = True
    for name, law in t.laws:
        bad_coords = sorted(law.coordinates() - src_names)
        if bad_coords:
            poly_ok = False
            report.add("polynomial", FAIL, f"{loc}:{name}", f"law uses coordinates outside {src.name}: {', '.join(bad_coords)}",
                       format_expression(law, order))
        for s in sorted(law.symbols()):
            moved = [a for a in s.args if a not in base]
            if moved:
                poly_ok = False
                report.add("polynomial", FAIL, f"{loc}:{name}",
                           f"coefficient {s.name} depends on non-base coordinates {', '.join(moved)}",
                           format_expression(law, order))
            elif model is not None and s.name not in symbols:
                poly_ok = False
                report.add("polynomial", FAIL, f"{loc}:{name}", f"undeclared symbol {s.name}")
    if poly_ok:
        report.add("polynomial", PASS, loc)
    else:
        return report

    # (b) homogeneity
    sw = src.weights
    tw = tgt.weights
    if len(next(iter(sw.values()), (0,) * src.multiplicity)) != len(next(iter(tw.values()), (0,) * tgt.multiplicity)):
        report.add("homogeneity", FAIL, loc, "source and target have different grading multiplicities")
        return report
    morph = check_graded_morphism(t.bindings, sw, tw, order)
    for e in morph.entries:
        report.entries.append(replace(e, location=f"{loc}:{e.location}"))
    homogeneous = morph.ok

    # (c) invertibility of the linear blocks
    inverse = model.declared_inverse(t) if model is not None else None
    explicit = model.transition_is_explicit(t) if model is not None else not any(e.symbols() for _, e in t.laws)
    blocks: dict[tuple[int, ...], list[str]] = {}
    for n, w in tgt.coordinates:
        if any(w):
            blocks.setdefault(w, []).append(n)
    src_blocks: dict[tuple[int, ...], list[str]] = {}
    for n, w in src.coordinates:
        if any(w):
            src_blocks.setdefault(w, []).append(n)
    for w in sorted(set(blocks) | set(src_blocks)):
        rows_t = blocks.get(w, [])
        cols_s = src_blocks.get(w, [])
        where = f"{loc}:weight {_fmt_weight(w if len(w) > 1 else w[0])}"
        if len(rows_t) != len(cols_s):
            report.add("invertibility", FAIL, where,
                       f"rank mismatch: {len(cols_s)} source vs {len(rows_t)} target coordinates")
            continue
        if inverse is not None:
            report.add("invertibility", PASS, where, f"witnessed by declared inverse {inverse}")
            continue
        if not explicit:
            report.add("invertibility", UNVERIFIABLE, where, "opaque coefficients and no declared inverse",
                       reason="OPAQUE_INVERTIBILITY")
            continue
        matrix = []
        for r in rows_t:
            law = expand(t.law(r), definitions)
            coeffs = law.collect(cols_s)
            matrix.append([coeffs.get(((c, 1),), Expression()) for c in cols_s])
        det = _det(matrix)
        if det.is_constant and not det.is_zero:
            report.add("invertibility", PASS, where, f"constant determinant {det.constant_value}")
        elif det.is_zero:
            report.add("invertibility", FAIL, where, "linear block is singular", "0")
        else:
            report.add("invertibility", UNVERIFIABLE, where, "determinant is not constant",
                       format_expression(det, order), reason="NONCONSTANT_DETERMINANT")

    # (d) symmetric higher coefficients
    if homogeneous:
        fiber = src.fiber
        sym_ok = True
        for name, law in t.laws:
            if not any(tw[name]):
                continue
            coeffs = symmetric_coefficients(law, fiber)
            for idx, T in coeffs.items():
                for perm in set(itertools.permutations(idx)):
                    d = law
                    for v in perm:
                        d = partial(d, v)
                    if substitute(d, {n: Expression() for n in fiber}) != T:
                        sym_ok = False
                        report.add("symmetry", FAIL, f"{loc}:{name}", f"coefficient along {perm} is not symmetric")
            nonlinear = Expression()
            for mono, c in law.collect(fiber).items():
                if sum(k for _, k in mono) >= 2:
                    nonlinear = nonlinear + c * Expression({(mono, ()): 1})
            if _rebuild_from_symmetric(coeffs) != nonlinear:
                sym_ok = False
                report.add("symmetry", FAIL, f"{loc}:{name}", "symmetrized coefficients do not reproduce the law",
                           format_expression(nonlinear, order))
        if sym_ok:
            report.add("symmetry", PASS, loc)
    return report


def compose(first: TransitionMap, second: TransitionMap, definitions=None) -> dict[str, Expression]:
    """Laws of ``second o first`` in the source coordinates of ``first``."""
    if first.target.name != second.source.name:
        raise ModelError(f"cannot compose {first} with {second}")
    binds = {n: expand(e, definitions or {}) for n, e in first.laws}
    return {n: substitute(expand(e, definitions or {}), binds, definitions) for n, e in second.laws}


def _identity_report(report: Report, composed: Mapping[str, Expression], chart: GradedChart, what: str) -> None:
    bad = False
    for n in chart.names:
        got = composed[n]
        if got != coord(n):
            bad = True
            report.add("cocycle", FAIL, f"{what}:{n}", f"composition is not the identity on {n}",
                       format_expression(got - coord(n), chart.names))
    if not bad:
        report.add("cocycle", PASS, what, "identity")


def check_cocycle(m: GradedBundleModel) -> Report:
    """Compose each transition with its declared inverse, and every 3-cycle of transitions."""
    report = Report("cocycle")
    defs = m.definitions
    opaque = [t for t in m.transitions if not m.transition_is_explicit(t)]
    if opaque:
        for t in opaque:
            report.add("cocycle", UNVERIFIABLE, str(t), "opaque coefficients cannot be composed", reason=OPAQUE_COMPOSITION)
        return report
    for t in m.transitions:
        inv = m.declared_inverse(t)
        if inv is None:
            if t.inverse_of is None and m.transition(t.target.name, t.source.name) is None:
                report.add("cocycle", INFO, str(t), "no inverse declared")
            continue
        if inv.inverse_of != t.key:
            continue  # each pair once, from the forward direction
        _identity_report(report, compose(t, inv, defs), t.source, f"{inv} o {t}")
        _identity_report(report, compose(inv, t, defs), t.target, f"{t} o {inv}")
    charts = [c.name for c in m.charts]
    for a, b, c in itertools.permutations(charts, 3):
        if a != min(a, b, c):
            continue
        ab, bc, ca = m.transition(a, b), m.transition(b, c), m.transition(c, a)
        if ab and bc and ca:
            first = compose(ab, bc, defs)
            loop = {n: substitute(expand(e, defs), first, defs) for n, e in ca.laws}
            _identity_report(report, loop, m.chart(a), f"{a} -> {b} -> {c} -> {a}")
    if not report.entries:
        report.add("cocycle", INFO, "model", "nothing to compose")
    return report


def check_connected(m: GradedBundleModel) -> Report:
    report = Report("atlas")
    names = [c.name for c in m.charts]
    if len(names) <= 1:
        report.add("connected", PASS, "atlas")
        return report
    adj = {n: set() for n in names}
    for t in m.transitions:
        adj[t.source.name].add(t.target.name)
        adj[t.target.name].add(t.source.name)
    seen = {names[0]}
    stack = [names[0]]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    missing = [n for n in names if n not in seen]
    if missing:
        report.add("connected", FAIL, "atlas", f"charts not linked by transitions: {', '.join(missing)}")
    else:
        report.add("connected", PASS, "atlas")
    return report


# ---------------------------------------------------------------------------
# towers


def truncate_to_degree(m: GradedBundleModel, j: int, grading: int | None = None) -> GradedBundleModel:
    """Forget fiber coordinates of weight > ``j`` (total weight unless ``grading`` is given)."""
    if j < 0:
        raise ValueError("truncation degree must be non-negative")
    new_charts = {}
    for c in m.charts:
        meas = c.measure(grading)
        kept = tuple((n, w) for n, w in c.coordinates if meas[n] <= j)
        new_charts[c.name] = GradedChart(c.name, kept, c.multiplicity)
    transitions = []
    for t in m.transitions:
        src, tgt = new_charts[t.source.name], new_charts[t.target.name]
        keep = set(src.names)
        laws = []
        for n in tgt.names:
            law = t.law(n)
            dropped = sorted(law.coordinates() - keep)
            if dropped:
                raise InvariantViolation(
                    f"{t}: law for {n} depends on dropped coordinates {', '.join(dropped)}"
                )
            laws.append((n, law))
        transitions.append(TransitionMap(src, tgt, tuple(laws), t.inverse_of))
    algebroids = tuple(
        a for a in m.algebroids if set(a.chart.names) <= set(new_charts[a.chart.name].names)
    )
    return GradedBundleModel(tuple(new_charts.values()), tuple(transitions), m.symbols, m.multiplicity, algebroids)


def check_affine_fibration(m: GradedBundleModel, j: int, grading: int | None = None) -> Report:
    """Weight-``j`` laws must be affine in the weight-``j`` source coordinates."""
    report = Report(f"affine fibration F_{j} -> F_{j - 1}")
    for t in m.transitions:
        smeas = t.source.measure(grading)
        tmeas = t.target.measure(grading)
        top = [n for n in t.source.names if smeas[n] == j]
        for n, law in t.laws:
            if tmeas[n] != j:
                continue
            deg = law.degree(top)
            if deg > 1:
                high = Expression()
                for mono, c in law.collect(top).items():
                    if sum(k for _, k in mono) > 1:
                        high = high + c * Expression({(mono, ()): 1})
                report.add("affine", FAIL, f"{t}:{n}", f"degree {deg} in weight-{j} coordinates",
                           format_expression(high, t.source.names))
    if not report.failures():
        report.add("affine", PASS, f"level {j}")
    return report


def is_vector_bundle(m: GradedBundleModel) -> bool:
    if m.multiplicity != 1:
        raise ModelError("is_vector_bundle expects a single grading")
    if m.degree > 1:
        return False
    return all(validate_transition(t, m).ok for t in m.transitions)


def permute_gradings(m: GradedBundleModel, perm: Sequence[int]) -> GradedBundleModel:
    """Reorder weight components: new component i is old component ``perm[i]``."""
    perm = tuple(perm)
    if sorted(perm) != list(range(m.multiplicity)):
        raise ValueError("not a permutation of the gradings")
    charts = {
        c.name: GradedChart(c.name, tuple((n, tuple(w[p] for p in perm)) for n, w in c.coordinates), c.multiplicity)
        for c in m.charts
    }
    trs = tuple(
        TransitionMap(charts[t.source.name], charts[t.target.name], t.laws, t.inverse_of) for t in m.transitions
    )
    return GradedBundleModel(tuple(charts.values()), trs, m.symbols, m.multiplicity)
