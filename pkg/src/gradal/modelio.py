"""Conversion between parsed documents and models, plus file helpers."""
from __future__ import annotations

from pathlib import Path

from .algebroid import AlgebroidStructure
from .atlas import GradedBundleModel, GradedChart, TransitionMap
from .dsl import (
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
    parse,
    print_document,
)
from .symcore import SymbolDecl


def document_to_model(doc: ModelDocument) -> GradedBundleModel:
    charts = {
        c.name: GradedChart(c.name, tuple((n.name, n.weight) for n in c.coordinates), doc.multiplicity)
        for c in doc.charts
    }
    transitions = tuple(
        TransitionMap(charts[t.source], charts[t.target], tuple((l.target, l.expr) for l in t.laws), t.inverse_of)
        for t in doc.transitions
    )
    symbols = tuple(SymbolDecl(s.name, s.args, s.definition) for s in doc.symbols)
    algebroids = tuple(
        AlgebroidStructure(
            a.name,
            charts[a.chart],
            {(n.fiber, n.base): n.expr for n in a.anchors},
            {(n.c, n.a, n.b): n.expr for n in a.structures},
            {n.name: n.weight for n in a.extras},
        )
        for a in doc.algebroids
    )
    return GradedBundleModel(tuple(charts.values()), transitions, symbols, doc.multiplicity, algebroids)


def model_to_document(m: GradedBundleModel) -> ModelDocument:
    return ModelDocument(
        multiplicity=m.multiplicity,
        symbols=tuple(SymbolNode(s.name, tuple(s.args), s.definition) for s in m.symbols),
        charts=tuple(
            ChartNode(c.name, tuple(CoordNode(n, w) for n, w in c.coordinates)) for c in m.charts
        ),
        transitions=tuple(
            TransitionNode(t.source.name, t.target.name, tuple(LawNode(n, e) for n, e in t.laws), t.inverse_of)
            for t in m.transitions
        ),
        algebroids=tuple(
            AlgebroidNode(
                a.name,
                a.chart.name,
                tuple(AnchorNode(f, b, e) for (f, b), e in a.anchor.items()),
                tuple(StructureNode(x, y, c, e) for (c, x, y), e in a.structure.items()),
                tuple(ExtraNode(n, w) for n, w in a.extra.items()),
            )
            for a in m.algebroids
        ),
    )


def load_model(text: str) -> GradedBundleModel:
    return document_to_model(parse(text))


def dump_model(m: GradedBundleModel) -> str:
    return print_document(model_to_document(m))


def read_model(path) -> GradedBundleModel:
    return load_model(Path(path).read_text(encoding="utf-8"))


def write_model(m: GradedBundleModel, path) -> None:
    Path(path).write_text(dump_model(m), encoding="utf-8")
