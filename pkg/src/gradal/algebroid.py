"""Lie algebroid axioms in local coordinates, and weighted compatibility.

An algebroid over a chart pairs base coordinates ``x^A`` (weight zero) with
linear fiber coordinates ``y^a``; the anchor is ``rho(e_a) = rho_a^A d_A``
and the bracket ``[e_a, e_b] = C^c_{ab} e_c``.

Weighted compatibility.  Let the extra homogeneity act by
``x^A -> t^w(x^A) x^A`` and ``y^a -> t^w(y^a) y^a``.  Requiring it to be an
algebroid morphism, i.e. to commute with the anchor (through its tangent
map) and with the bracket of local frames, gives

    rho_a^A(h_t x)   = t^(w(x^A) - w(y^a)) rho_a^A(x)
    C^c_{ab}(h_t x)  = t^(w(y^c) - w(y^a) - w(y^b)) C^c_{ab}(x)

so each component must be homogeneous in the base extra weights with
those exponents; a negative exponent forces the component to vanish.
"""
from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass, field

from .atlas import GradedChart
from .dsl import format_expression
from .errors import ModelError
from .grading import weight_decompose
from .report import FAIL, PASS, UNVERIFIABLE, Report
from .symcore import Expression, expand, partial


@dataclass(frozen=True)
class AlgebroidStructure:
    name: str
    chart: GradedChart
    anchor: Mapping[tuple[str, str], Expression] = field(default_factory=dict)  # (a, A) -> rho_a^A
    structure: Mapping[tuple[str, str, str], Expression] = field(default_factory=dict)  # (c, a, b) -> C^c_{ab}
    extra: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        base, fiber = set(self.base), set(self.fiber)
        for (a, A), e in self.anchor.items():
            if a not in fiber or A not in base:
                raise ModelError(f"algebroid {self.name}: anchor index ({a}, {A}) out of range")
            self._check_base_only(e, f"anchor {a} {A}")
        for (c, a, b), e in self.structure.items():
            if not {a, b, c} <= fiber:
                raise ModelError(f"algebroid {self.name}: structure index ({a}, {b}, {c}) out of range")
            self._check_base_only(e, f"structure {a} {b} {c}")
        for n, w in self.extra.items():
            if n not in base and n not in fiber:
                raise ModelError(f"algebroid {self.name}: extra weight for unknown coordinate {n}")
            if w < 0:
                raise ModelError(f"algebroid {self.name}: extra weights must be non-negative")
        object.__setattr__(self, "anchor", dict(self.anchor))
        object.__setattr__(self, "structure", dict(self.structure))
        object.__setattr__(self, "extra", dict(self.extra))

    def _check_base_only(self, e: Expression, what: str) -> None:
        bad = e.coordinates() - set(self.base)
        if bad:
            raise ModelError(f"algebroid {self.name}: {what} depends on fiber coordinates {sorted(bad)}")

    @property
    def base(self) -> tuple[str, ...]:
        return self.chart.base

    @property
    def fiber(self) -> tuple[str, ...]:
        return self.chart.fiber

    def rho(self, a: str, A: str) -> Expression:
        return self.anchor.get((a, A), Expression())

    def C(self, c: str, a: str, b: str) -> Expression:
        return self.structure.get((c, a, b), Expression())


def _expanded(s: AlgebroidStructure, definitions) -> AlgebroidStructure:
    if not definitions:
        return s
    return AlgebroidStructure(
        s.name,
        s.chart,
        {k: expand(e, definitions) for k, e in s.anchor.items()},
        {k: expand(e, definitions) for k, e in s.structure.items()},
        s.extra,
    )


def _check_linear(s: AlgebroidStructure, report: Report) -> bool:
    bad = [n for n, w in s.chart.coordinates if any(w) and sum(w) != 1]
    if bad:
        report.add("algebroid", FAIL, f"{s.name}", f"fiber coordinates must have weight 1: {', '.join(bad)}")
        return False
    return True


def anchor_defect(s: AlgebroidStructure, a: str, b: str, A: str) -> Expression:
    """``rho_a^B d_B rho_b^A - rho_b^B d_B rho_a^A - C^c_{ab} rho_c^A``."""
    total = Expression()
    for B in s.base:
        total = total + s.rho(a, B) * partial(s.rho(b, A), B) - s.rho(b, B) * partial(s.rho(a, A), B)
    for c in s.fiber:
        total = total - s.C(c, a, b) * s.rho(c, A)
    return total


def jacobi_defect(s: AlgebroidStructure, a: str, b: str, c: str, d: str) -> Expression:
    """Cyclic sum of ``rho_a^B d_B C^d_{bc} + C^d_{ae} C^e_{bc}``."""
    total = Expression()
    for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
        for B in s.base:
            total = total + s.rho(p, B) * partial(s.C(d, q, r), B)
        for e in s.fiber:
            total = total + s.C(d, p, e) * s.C(e, q, r)
    return total


def check_lie_algebroid(s: AlgebroidStructure, definitions: Mapping[str, Expression] | None = None) -> Report:
    report = Report(f"algebroid {s.name}")
    if not _check_linear(s, report):
        return report
    s = _expanded(s, definitions)
    order = s.chart.names
    fiber = s.fiber

    ok = True
    for c in fiber:
        for a, b in itertools.combinations_with_replacement(fiber, 2):
            total = s.C(c, a, b) + s.C(c, b, a)
            if not total.is_zero:
                ok = False
                report.add("antisymmetry", FAIL, f"{s.name}:C^{c}_{a}{b}", "C^c_ab + C^c_ba != 0",
                           format_expression(total, order))
    if ok:
        report.add("antisymmetry", PASS, s.name)
    else:
        return report

    ok = True
    for a, b in itertools.combinations(fiber, 2):
        for A in s.base:
            defect = anchor_defect(s, a, b, A)
            if not defect.is_zero:
                ok = False
                report.add("anchor", FAIL, f"{s.name}:({a},{b}) on {A}", "anchor does not preserve the bracket",
                           format_expression(defect, order))
    if ok:
        report.add("anchor", PASS, s.name)

    ok = True
    for a, b, c in itertools.combinations(fiber, 3):
        for d in fiber:
            defect = jacobi_defect(s, a, b, c, d)
            if not defect.is_zero:
                ok = False
                report.add("jacobi", FAIL, f"{s.name}:({a},{b},{c}) component {d}", "Jacobi identity fails",
                           format_expression(defect, order))
    if ok:
        report.add("jacobi", PASS, s.name)
    return report


def required_weights(s: AlgebroidStructure, extra: Mapping[str, int]) -> tuple[dict, dict]:
    """Extra weights each anchor and structure component must have."""
    w = {n: extra.get(n, 0) for n in s.chart.names}
    rho = {(a, A): w[A] - w[a] for a in s.fiber for A in s.base}
    C = {(c, a, b): w[c] - w[a] - w[b] for c in s.fiber for a in s.fiber for b in s.fiber}
    return rho, C


def check_weighted_algebroid(
    s: AlgebroidStructure,
    extra: Mapping[str, int] | None = None,
    definitions: Mapping[str, Expression] | None = None,
) -> Report:
    """Check that the extra homogeneity acts by algebroid morphisms.

    ``extra`` defaults to the weights stored on ``s``.
    """
    extra = dict(s.extra if extra is None else extra)
    report = Report(f"weighted algebroid {s.name}")
    if not _check_linear(s, report):
        return report
    for n, v in extra.items():
        if n not in s.chart.names:
            raise ModelError(f"extra weight for unknown coordinate {n}")
        if v < 0:
            raise ModelError("extra weights must be non-negative")
    s = _expanded(s, definitions)
    order = s.chart.names
    base_w = {n: extra.get(n, 0) for n in s.base}
    weighted_base = {n for n, v in base_w.items() if v}
    rho_w, C_w = required_weights(s, extra)
    components = [(f"rho_{a}^{A}", s.rho(a, A), rho_w[a, A]) for a, A in rho_w]
    components += [(f"C^{c}_{a}{b}", s.C(c, a, b), C_w[c, a, b]) for c, a, b in C_w]
    ok = True
    for label, e, need in components:
        if e.is_zero:
            continue
        if any(set(sym.args) & weighted_base for sym in e.symbols()):
            ok = False
            report.add("weighted", UNVERIFIABLE, f"{s.name}:{label}",
                       "opaque coefficient of weighted base coordinates", format_expression(e, order),
                       reason="OPAQUE_HOMOGENEITY")
            continue
        if need < 0:
            ok = False
            report.add("weighted", FAIL, f"{s.name}:{label}", f"required weight {need} is negative but component is nonzero",
                       format_expression(e, order))
            continue
        parts = weight_decompose(e, base_w)
        stray = {k: v for k, v in parts.items() if k != need}
        if stray:
            ok = False
            shown = Expression()
            for v in stray.values():
                shown = shown + v
            got = ", ".join(str(k) for k in stray)
            report.add("weighted", FAIL, f"{s.name}:{label}", f"weight-{got} part present, expected weight {need}",
                       format_expression(shown, order))
    if ok:
        report.add("weighted", PASS, s.name)
    return report
