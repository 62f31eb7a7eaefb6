"""Higher tangent bundles, tangent lifts and cotangent weights.

Jet coordinates follow the derivative convention: ``x@a`` is the a-th
derivative of ``x(t)`` at ``t = 0`` (so ``x@2`` multiplies ``t^2/2`` in the
Taylor expansion), and the law of ``X@a`` is the a-th total time
derivative of the law of ``X``.

Dotted copies made by :func:`tangent_lift` are named ``d<n>_<name>`` where
``n`` is the index of the grading the lift adds.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .atlas import GradedBundleModel, GradedChart, TransitionMap
from .errors import ModelError, NameCollisionError
from .symcore import Derivation, Expression, apply_derivation, coord

_JET = re.compile(r"^(?P<base>.*?)(?:@(?P<order>[0-9]+))?$")


def jet_name(name: str, order: int) -> str:
    if "@" in name:
        raise ModelError(f"{name!r} already carries a derivative order")
    return name if order == 0 else f"{name}@{order}"


def split_jet(name: str) -> tuple[str, int]:
    m = _JET.match(name)
    return m.group("base"), int(m.group("order") or 0)


def dotted_name(name: str, index: int) -> str:
    return f"d{index}_{name}"


@dataclass(frozen=True)
class JetCoordinateFamily:
    base: str
    order: int

    @property
    def name(self) -> str:
        return jet_name(self.base, self.order)

    @property
    def weight(self) -> int:
        return self.order


def _jet_chart(c: GradedChart, k: int) -> GradedChart:
    coords = [(JetCoordinateFamily(n, a).name, (a,)) for a in range(k + 1) for n in c.names]
    return GradedChart(c.name, tuple(coords), 1)


def total_derivative(chart: GradedChart, k: int) -> Derivation:
    """``x@a -> x@(a+1)`` for ``a < k``; symbols by the chain rule."""
    return Derivation({jet_name(n, a): coord(jet_name(n, a + 1)) for n in chart.names for a in range(k)})


def higher_tangent(m: GradedBundleModel, k: int) -> GradedBundleModel:
    """The k-th order tangent bundle of a base (all weights zero) model."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return m
    if m.multiplicity != 1 or m.degree != 0:
        raise ModelError("higher_tangent expects a base model: one grading, all weights zero")
    charts = {c.name: _jet_chart(c, k) for c in m.charts}
    transitions = []
    for t in m.transitions:
        D = total_derivative(t.source, k)
        laws = []
        current = dict(t.laws)
        for a in range(k + 1):
            if a:
                current = {n: apply_derivation(D, e) for n, e in current.items()}
            laws.extend((jet_name(n, a), e) for n, e in current.items())
        transitions.append(TransitionMap(charts[t.source.name], charts[t.target.name], tuple(laws), t.inverse_of))
    return GradedBundleModel(tuple(charts.values()), tuple(transitions), m.symbols, 1)


def _lift_chart(c: GradedChart, index: int) -> GradedChart:
    coords = [(n, w + (0,)) for n, w in c.coordinates]
    existing = set(c.names)
    for n, w in c.coordinates:
        dn = dotted_name(n, index)
        if dn in existing:
            raise NameCollisionError(f"dotted name {dn!r} collides with a coordinate of chart {c.name}")
        coords.append((dn, w + (1,)))
    return GradedChart(c.name, tuple(coords), c.multiplicity + 1)


def tangent_lift(m: GradedBundleModel) -> GradedBundleModel:
    """Tangent bundle with the lifted gradings plus the linear one appended."""
    index = m.multiplicity
    charts = {c.name: _lift_chart(c, index) for c in m.charts}
    coords = {n for c in m.charts for n in c.names}
    for s in m.symbols:
        if any(dotted_name(n, index) == s.name for n in coords):
            raise NameCollisionError(f"dotted name collides with symbol {s.name!r}")
    transitions = []
    for t in m.transitions:
        D = Derivation({n: coord(dotted_name(n, index)) for n in t.source.names})
        laws = list(t.laws) + [(dotted_name(n, index), apply_derivation(D, e)) for n, e in t.laws]
        transitions.append(TransitionMap(charts[t.source.name], charts[t.target.name], tuple(laws), t.inverse_of))
    return GradedBundleModel(tuple(charts.values()), tuple(transitions), m.symbols, index + 1)


def dual_name(name: str) -> str:
    return f"p1_{name}"


def cotangent_weights(m: GradedBundleModel) -> dict[str, dict[str, tuple[int, int]]]:
    """Bi-weights (lifted, linear) of the cotangent bundle coordinates, per chart.

    Coordinates of ``F`` keep their weight with linear weight 0; the
    momentum dual to the velocity of a weight-``w`` coordinate gets
    lifted weight ``k - w`` and linear weight 1.
    """
    if m.multiplicity != 1:
        raise ModelError("cotangent_weights expects a single grading")
    k = m.degree
    table = {}
    for c in m.charts:
        entries = {n: (w[0], 0) for n, w in c.coordinates}
        for n, w in c.coordinates:
            if dual_name(n) in entries:
                raise NameCollisionError(f"dual name {dual_name(n)!r} collides with a coordinate of chart {c.name}")
            entries[dual_name(n)] = (k - w[0], 1)
        table[c.name] = entries
    return table


def cotangent_chart_model(m: GradedBundleModel, chart: str | None = None) -> GradedBundleModel:
    """A one-chart model carrying the cotangent weights (no transition laws)."""
    table = cotangent_weights(m)
    if not m.charts:
        return GradedBundleModel((), (), (), 2)
    name = chart or m.charts[0].name
    gc = GradedChart(name, tuple(table[name].items()), 2)
    return GradedBundleModel((gc,), (), (), 2)
