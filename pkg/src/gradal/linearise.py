"""Linearisation l(F_k), the holonomic embedding and total linearisation.

Linearising with respect to grading ``i`` (degree ``k``) keeps every
coordinate of ``i``-weight at most ``k - 1`` and adds a dotted copy
``d<n>_c`` of each coordinate of positive ``i``-weight ``w``, with
``i``-weight ``w - 1`` and weight 1 in a new, appended grading.  The
dotted laws are ``D(law)`` for the derivation ``D(c) = d<n>_c`` on
coordinates of positive ``i``-weight and ``D(c) = 0`` otherwise.

With this convention the embedding ``F_k -> l(F_k)`` sends the dotted copy
of a weight-``w`` coordinate to ``w`` times that coordinate, and
``l(T^k M)`` is isomorphic to ``T T^(k-1) M`` through ``d1_x@w = w * d1_x@(w-1)``
rather than a plain renaming.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

from .atlas import GradedBundleModel, GradedChart, TransitionMap, truncate_to_degree
from .dsl import format_expression
from .errors import InvariantViolation, ModelError, NonBijectiveError, NameCollisionError
from .grading import check_graded_morphism, total_weights
from .prolong import dotted_name
from .report import FAIL, PASS, Report
from .symcore import Derivation, Expression, apply_derivation, coord, expand, rename, substitute


@dataclass(frozen=True)
class LinearisedModel:
    model: GradedBundleModel
    source: GradedBundleModel
    grading: int

    @property
    def dotted_prefix_index(self) -> int:
        return self.source.multiplicity


def _check_single(m: GradedBundleModel) -> None:
    if m.multiplicity != 1:
        raise ModelError("expected a single-graded model")


def linearise(m: GradedBundleModel, grading: int | None = None) -> LinearisedModel:
    """Linearise ``m`` with respect to one grading (the only one if ``m`` is single-graded)."""
    if grading is None:
        _check_single(m)
        grading = 0
    k = m.grading_degree(grading)
    if k < 1:
        raise ModelError("linearisation needs degree at least 1")
    index = m.multiplicity
    base = truncate_to_degree(m, k - 1, grading)
    charts = {}
    for c, bc in zip(m.charts, base.charts):
        coords = [(n, w + (0,)) for n, w in bc.coordinates]
        existing = {n for n, _ in coords}
        for n, w in c.coordinates:
            if w[grading] >= 1:
                dn = dotted_name(n, index)
                if dn in existing:
                    raise NameCollisionError(f"dotted name {dn!r} collides with a coordinate of chart {c.name}")
                lowered = tuple(x - 1 if i == grading else x for i, x in enumerate(w))
                coords.append((dn, lowered + (1,)))
        charts[c.name] = GradedChart(c.name, tuple(coords), index + 1)
    transitions = []
    for t, bt in zip(m.transitions, base.transitions):
        D = Derivation(
            {n: (coord(dotted_name(n, index)) if w[grading] >= 1 else Expression()) for n, w in t.source.coordinates}
        )
        top = {n for n, w in t.source.coordinates if w[grading] == k}
        laws = list(bt.laws)
        for n, w in t.target.coordinates:
            if w[grading] < 1:
                continue
            law = apply_derivation(D, t.law(n))
            stray = law.coordinates() & top
            if stray:
                raise InvariantViolation(
                    f"{t}: dotted law for {n} still contains top-weight coordinates {sorted(stray)}"
                )
            laws.append((dotted_name(n, index), law))
        transitions.append(TransitionMap(charts[t.source.name], charts[t.target.name], tuple(laws), t.inverse_of))
    out = GradedBundleModel(tuple(charts.values()), tuple(transitions), m.symbols, index + 1)
    return LinearisedModel(out, m, grading)


@dataclass(frozen=True)
class HolonomicEmbedding:
    bindings: Mapping[str, Mapping[str, Expression]]  # chart -> l-coordinate -> expression on F
    linearised: LinearisedModel
    report: Report


def embedding_bindings(chart: GradedChart, k: int) -> dict[str, Expression]:
    """``y_w -> y_w`` for ``w < k`` and ``d1_y_w -> w * y_w``."""
    out = {}
    for n, w in chart.coordinates:
        if w[0] <= k - 1:
            out[n] = coord(n)
    for n, w in chart.coordinates:
        if w[0] >= 1:
            out[dotted_name(n, 1)] = coord(n) * w[0]
    return out


def holonomic_embedding(m: GradedBundleModel) -> HolonomicEmbedding:
    """The graded embedding ``F_k -> l(F_k)``, verified against every transition."""
    _check_single(m)
    lin = linearise(m)
    lm = lin.model
    k = m.degree
    binds = {c.name: embedding_bindings(c, k) for c in m.charts}
    report = Report("holonomic embedding")
    defs = m.definitions
    for c, lc in zip(m.charts, lm.charts):
        sub = check_graded_morphism(binds[c.name], total_weights(c.weights), total_weights(lc.weights), c.names)
        for e in sub.entries:
            report.add("graded", e.status, f"{c.name}:{e.location}", e.message, e.offending)
    for t, lt in zip(m.transitions, lm.transitions):
        iota_src = binds[t.source.name]
        iota_tgt = binds[t.target.name]
        bad = False
        for n in lt.target.names:
            after = substitute(iota_tgt[n], t.bindings, defs)
            before = substitute(lt.law(n), iota_src, defs)
            if expand(after, defs) != expand(before, defs):
                bad = True
                report.add("intertwining", FAIL, f"{t}:{n}", "iota o transition != transition o iota",
                           format_expression(after - before, t.source.names))
        if not bad:
            report.add("intertwining", PASS, str(t))
    if not report.ok:
        err = InvariantViolation("holonomic embedding does not intertwine transitions")
        err.report = report
        raise err
    return HolonomicEmbedding(binds, lin, report)


def total_linearise(m: GradedBundleModel) -> GradedBundleModel:
    """Iterate linearisation until every grading is linear (a k-fold vector bundle)."""
    _check_single(m)
    current = m
    while current.grading_degree(0) > 1:
        current = linearise(current, 0).model
    return current


# ---------------------------------------------------------------------------
# comparison


def parse_correspondence(text: str) -> dict[str, tuple[str, Fraction]]:
    """Read a renaming file.

    One entry per line, ``old -> new`` or ``old -> q*new`` meaning that
    the coordinate ``old`` of the first model equals ``q`` times the
    coordinate ``new`` of the second.  ``#`` starts a comment.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise ValueError(f"line {lineno}: expected 'old -> new'")
        old, new = (p.strip() for p in line.split("->", 1))
        scale = Fraction(1)
        if "*" in new:
            q, new = (p.strip() for p in new.split("*", 1))
            scale = Fraction(q)
        if not old or not new or " " in old or " " in new:
            raise ValueError(f"line {lineno}: malformed entry")
        if old in out:
            raise NonBijectiveError(f"line {lineno}: {old!r} mapped twice")
        out[old] = (new, scale)
    return out


def _normalize_correspondence(corr) -> dict[str, tuple[str, Fraction]]:
    out = {}
    for k, v in corr.items():
        if isinstance(v, str):
            out[k] = (v, Fraction(1))
        else:
            name, q = v
            out[k] = (name, Fraction(q))
    return out


def compare_models(m1: GradedBundleModel, m2: GradedBundleModel, correspondence=None) -> Report:
    """Compare two models after renaming (and rescaling) coordinates of ``m1``.

    Unlisted coordinates keep their names.  Base coordinates may be renamed
    but not rescaled.
    """
    corr = _normalize_correspondence(correspondence or {})
    report = Report("comparison")
    targets = [v[0] for v in corr.values()]
    if len(set(targets)) != len(targets):
        raise NonBijectiveError("two coordinates are mapped to the same name")
    if m1.multiplicity != m2.multiplicity:
        report.add("gradings", FAIL, "model", f"{m1.multiplicity} vs {m2.multiplicity} gradings")
        return report
    names1 = [c.name for c in m1.charts]
    names2 = [c.name for c in m2.charts]
    if sorted(names1) != sorted(names2):
        report.add("charts", FAIL, "model", f"charts {names1} vs {names2}")
        return report
    if {s.name: s for s in m1.symbols} != {s.name: s for s in m2.symbols}:
        report.add("symbols", FAIL, "model", "symbol declarations differ")
    mapping = {}
    scales = {}
    for c1 in m1.charts:
        c2 = m2.chart(c1.name)
        if len(c1.names) != len(c2.names):
            report.add("coordinates", FAIL, c1.name, f"coordinate count mismatch: {len(c1.names)} vs {len(c2.names)}")
            continue
        image = {n: corr.get(n, (n, Fraction(1))) for n in c1.names}
        if len({v[0] for v in image.values()}) != len(image):
            raise NonBijectiveError(f"renaming is not injective on chart {c1.name}")
        w2 = c2.weights
        ok = True
        for n, (new, q) in image.items():
            if new not in w2:
                ok = False
                report.add("coordinates", FAIL, f"{c1.name}:{n}", f"{n} maps to {new}, which is not in the second model")
            elif w2[new] != c1.weight(n):
                ok = False
                report.add("weights", FAIL, f"{c1.name}:{n}", f"weight {c1.weight(n)} vs {w2[new]} for {new}")
            elif not any(c1.weight(n)) and q != 1:
                ok = False
                report.add("coordinates", FAIL, f"{c1.name}:{n}", "base coordinates cannot be rescaled")
            mapping[n] = new
            scales[new] = q
        if ok:
            report.add("coordinates", PASS, c1.name)
    if not report.ok:
        return report
    keys1 = sorted(t.key for t in m1.transitions)
    keys2 = sorted(t.key for t in m2.transitions)
    if keys1 != keys2:
        report.add("transitions", FAIL, "model", f"transitions {keys1} vs {keys2}")
        return report
    d1, d2 = m1.definitions, m2.definitions
    for t1 in m1.transitions:
        t2 = m2.transition(*t1.key)
        src_scale = {mapping[n]: coord(mapping[n]) * scales[mapping[n]] for n in t1.source.names if scales[mapping[n]] != 1}
        bad = False
        for n, law in t1.laws:
            new = mapping[n]
            moved = substitute(rename(expand(law, d1), mapping), src_scale) / scales[new]
            other = expand(t2.law(new), d2)
            if moved != other:
                bad = True
                report.add("law", FAIL, f"{t1}:{n}", f"law differs from {new}", format_expression(moved - other, t2.source.names))
        if not bad:
            report.add("law", PASS, str(t1))
    return report
