"""Whole-model validation: everything ``gradal validate`` runs."""
from __future__ import annotations

from .algebroid import check_lie_algebroid, check_weighted_algebroid
from .atlas import (
    OPAQUE_COMPOSITION,
    GradedBundleModel,
    check_affine_fibration,
    check_cocycle,
    check_connected,
    validate_transition,
)
from .multigraded import check_compatibility
from .report import INFO, Report


def validate_model(m: GradedBundleModel, subject: str = "model") -> Report:
    report = Report(subject)
    report.extend(check_connected(m))
    for t in m.transitions:
        report.extend(validate_transition(t, m))
    if not report.ok:
        return report
    if all(m.transition_is_explicit(t) for t in m.transitions):
        report.extend(check_cocycle(m))
    else:
        report.add("cocycle", INFO, "atlas", "skipped: opaque coefficients cannot be composed", reason=OPAQUE_COMPOSITION)
    gradings = [None] if m.multiplicity == 1 else list(range(m.multiplicity))
    for g in gradings:
        top = m.degree if g is None else m.grading_degree(g)
        for j in range(1, top + 1):
            report.extend(check_affine_fibration(m, j, g))
    if m.multiplicity >= 2:
        report.extend(check_compatibility(m))
    defs = m.definitions
    for a in m.algebroids:
        report.extend(check_lie_algebroid(a, defs))
        report.extend(check_weighted_algebroid(a, None, defs))
    return report
