"""Weights, homogeneity and weight vector fields.

A weighting maps each coordinate name to an ``int`` (one grading) or a
tuple of ints (several gradings).  Coefficient symbols count as weight 0,
which is only sound when all of their arguments have weight 0; anything
else raises :class:`NonPolynomialError`.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .dsl import format_expression
from .errors import GradalError, NonPolynomialError, UndeclaredNameError, UnboundCoordinateError
from .report import FAIL, PASS, Report
from .symcore import Derivation, Expression, apply_derivation, coord, partial, substitute

Weight = int | tuple[int, ...]


def _zero_like(w: Weight) -> Weight:
    return 0 if isinstance(w, int) else (0,) * len(w)


def _add(a: Weight, b: Weight) -> Weight:
    if isinstance(a, int):
        return a + b
    return tuple(x + y for x, y in zip(a, b))


def _scale(w: Weight, k: int) -> Weight:
    if isinstance(w, int):
        return w * k
    return tuple(x * k for x in w)


def _is_zero(w: Weight) -> bool:
    return w == 0 if isinstance(w, int) else not any(w)


def select_grading(weights: Mapping[str, Weight], index: int) -> dict[str, int]:
    """Single component ``index`` of a multi-weighting."""
    return {n: (w if isinstance(w, int) else w[index]) for n, w in weights.items()}


def total_weights(weights: Mapping[str, Weight]) -> dict[str, int]:
    return {n: (w if isinstance(w, int) else sum(w)) for n, w in weights.items()}


def term_weight(monomial, symbols, weights: Mapping[str, Weight]) -> Weight:
    w = None
    for name, k in monomial:
        try:
            wc = weights[name]
        except KeyError:
            raise UndeclaredNameError(name, "coordinate without weight") from None
        w = _scale(wc, k) if w is None else _add(w, _scale(wc, k))
    for s, _k in symbols:
        for a in s.args:
            wa = weights.get(a)
            if wa is None:
                raise UndeclaredNameError(a, f"argument of {s.name} without weight")
            if not _is_zero(wa):
                raise NonPolynomialError(f"symbol {s.name} depends on weighted coordinate {a!r}")
    if w is None:
        sample = next(iter(weights.values()), 0)
        w = _zero_like(sample)
    return w


def weight_decompose(e: Expression, weights: Mapping[str, Weight]) -> dict[Weight, Expression]:
    """Split ``e`` into homogeneous components keyed by weight."""
    parts: dict = {}
    for (mono, syms), c in e.items():
        w = term_weight(mono, syms, weights)
        parts.setdefault(w, {})[(mono, syms)] = c
    return {w: Expression(t) for w, t in sorted(parts.items())}


def is_homogeneous(e: Expression, w: Weight, weights: Mapping[str, Weight]) -> bool:
    """Zero counts as homogeneous of every weight."""
    return set(weight_decompose(e, weights)) <= {w}


def apply_dilation(e: Expression, weights: Mapping[str, Weight], t: str | Sequence[str] = "t") -> Expression:
    """Act by the dilation ``c -> t**weight(c) * c``.

    For multi-weights pass one parameter name per grading.
    """
    params = (t,) if isinstance(t, str) else tuple(t)
    for p in params:
        if p in weights or p in e.coordinates():
            raise GradalError(f"dilation parameter {p!r} collides with a coordinate")
    bindings = {}
    for name, w in weights.items():
        ws = (w,) if isinstance(w, int) else tuple(w)
        if len(ws) != len(params):
            raise GradalError("one dilation parameter per grading is required")
        factor = coord(name)
        for p, k in zip(params, ws):
            if k:
                factor = factor * coord(p) ** k
        bindings[name] = factor
    return substitute(e, bindings)


def euler_operator(weights: Mapping[str, int]) -> Derivation:
    return Derivation({n: coord(n) * w for n, w in weights.items()})


def euler_check(e: Expression, w: Weight, weights: Mapping[str, Weight]) -> bool:
    """True iff the weight vector field acts on ``e`` as multiplication by ``w``."""
    sample = next(iter(weights.values()), 0)
    if isinstance(sample, int):
        return apply_derivation(euler_operator(weights), e) == e * w
    for i, wi in enumerate(w):
        nabla = euler_operator(select_grading(weights, i))
        if apply_derivation(nabla, e) != e * wi:
            return False
    return True


class PolynomialVectorField:
    """Vector field ``sum_c X_c d/dc`` with polynomial coefficients."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Mapping[str, Expression]):
        self.coefficients = {n: c for n, c in coefficients.items() if not c.is_zero}

    def __call__(self, e: Expression) -> Expression:
        out = Expression()
        for name, c in self.coefficients.items():
            d = partial(e, name)
            if d:
                out = out + c * d
        return out

    def coefficient(self, name: str) -> Expression:
        return self.coefficients.get(name, Expression())

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def __eq__(self, other):
        if not isinstance(other, PolynomialVectorField):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __repr__(self):
        inner = " + ".join(f"({format_expression(c)})*d_{n}" for n, c in self.coefficients.items())
        return f"PolynomialVectorField({inner or '0'})"


WeightVectorField = PolynomialVectorField


def weight_vector_field(chart, grading: int | None = None) -> WeightVectorField:
    """Weight vector field of a chart (or of a plain weighting)."""
    weights = chart.weights if hasattr(chart, "weights") else dict(chart)
    sample = next(iter(weights.values()), 0)
    if not isinstance(sample, int):
        if len(sample) == 1:
            weights = select_grading(weights, 0)
        elif grading is None:
            raise GradalError("multi-graded chart: select a grading index")
        else:
            weights = select_grading(weights, grading)
    return PolynomialVectorField({n: coord(n) * w for n, w in weights.items()})


@dataclass(frozen=True)
class GradedSpace:
    """Model space R^d with ``ranks[i-1]`` coordinates of weight ``i``."""

    ranks: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ranks", tuple(self.ranks))
        if any(r < 0 for r in self.ranks):
            raise GradalError("ranks must be non-negative")

    @property
    def degree(self) -> int:
        return max((i + 1 for i, r in enumerate(self.ranks) if r > 0), default=0)

    @property
    def dimension(self) -> int:
        return sum(self.ranks)

    @classmethod
    def from_weights(cls, weights) -> GradedSpace:
        ws = [w for w in weights if w > 0]
        top = max(ws, default=0)
        return cls(tuple(sum(1 for w in ws if w == i) for i in range(1, top + 1)))


def is_regular(space: GradedSpace) -> bool:
    """A dilation structure is regular iff it has no coordinates of weight >= 2."""
    return all(r == 0 for r in space.ranks[1:])


def check_graded_morphism(
    bindings: Mapping[str, Expression],
    source_weights: Mapping[str, Weight],
    target_weights: Mapping[str, Weight],
    order=None,
) -> Report:
    """Each target coordinate must be bound to a polynomial of its own weight."""
    report = Report("graded morphism")
    for name, w in target_weights.items():
        if name not in bindings:
            raise UnboundCoordinateError(f"target coordinate {name!r} is not bound")
        try:
            parts = weight_decompose(bindings[name], source_weights)
        except NonPolynomialError as exc:
            report.add("homogeneity", FAIL, name, str(exc))
            continue
        bad = {k: v for k, v in parts.items() if k != w}
        if not bad:
            report.add("homogeneity", PASS, name, f"homogeneous of weight {_fmt_weight(w)}")
            continue
        for k, part in bad.items():
            report.add(
                "homogeneity",
                FAIL,
                name,
                f"weight-{_fmt_weight(k)} component present, expected weight {_fmt_weight(w)}",
                format_expression(part, order),
            )
    return report


def check_linearity(bindings: Mapping[str, Expression], fiber: Sequence[str], order=None) -> Report:
    """Every bound expression must have degree <= 1 in the fiber coordinates."""
    report = Report("linearity")
    for name, e in bindings.items():
        parts = e.collect(fiber)
        high = Expression()
        for mono, c in parts.items():
            if sum(k for _, k in mono) > 1:
                high = high + c * Expression({(mono, ()): 1})
        if high:
            report.add(
                "linearity",
                FAIL,
                name,
                f"degree-{high.degree(fiber)} term in fiber coordinates",
                format_expression(high, order),
            )
        else:
            report.add("linearity", PASS, name)
    return report


def _fmt_weight(w: Weight) -> str:
    if isinstance(w, int):
        return str(w)
    return "(" + ",".join(str(x) for x in w) + ")"
