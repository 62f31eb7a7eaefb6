"""n-fold graded bundles: compatibility of several homogeneity structures.

Compatibility of the dilations ``h^i`` is checked in two independent ways:
every transition law must be homogeneous in each grading separately, and
the weight vector fields of each pair of gradings must commute.
"""
from __future__ import annotations

import itertools

from .atlas import GradedBundleModel
from .dsl import format_expression
from .errors import ModelError
from .grading import PolynomialVectorField, check_graded_morphism, select_grading, weight_vector_field
from .report import FAIL, PASS, Report

__all__ = [
    "PolynomialVectorField",
    "bracket",
    "check_compatibility",
    "is_double_vector_bundle",
    "is_grl_bundle",
]


def bracket(X: PolynomialVectorField, Y: PolynomialVectorField) -> PolynomialVectorField:
    """Commutator ``[X, Y]``; coefficient of ``c`` is ``X(Y_c) - Y(X_c)``."""
    names = list(dict.fromkeys(list(X.coefficients) + list(Y.coefficients)))
    coeffs = {}
    for c in names:
        coeffs[c] = X(Y.coefficient(c)) - Y(X.coefficient(c))
    return PolynomialVectorField(coeffs)


def check_compatibility(m: GradedBundleModel) -> Report:
    report = Report("compatibility")
    n = m.multiplicity
    for t in m.transitions:
        sw, tw = t.source.weights, t.target.weights
        for i in range(n):
            sub = check_graded_morphism(t.bindings, select_grading(sw, i), select_grading(tw, i), t.source.names)
            bad = sub.failures()
            if bad:
                for e in bad:
                    report.add("multi-homogeneity", FAIL, f"{t}:{e.location}", f"grading {i}: {e.message}", e.offending)
            else:
                report.add("multi-homogeneity", PASS, f"{t}", f"grading {i}")
    for c in m.charts:
        fields = [weight_vector_field(c, i) for i in range(n)]
        for i, j in itertools.combinations(range(n), 2):
            br = bracket(fields[i], fields[j])
            if br.is_zero:
                report.add("bracket", PASS, f"{c.name}", f"[nabla^{i}, nabla^{j}] = 0")
            else:
                shown = "; ".join(f"{k}: {format_expression(v, c.names)}" for k, v in br.coefficients.items())
                report.add("bracket", FAIL, f"{c.name}", f"[nabla^{i}, nabla^{j}] != 0", shown)
    if not report.entries:
        report.add("compatibility", PASS, "model", "no transitions or pairs to check")
    return report


def is_double_vector_bundle(m: GradedBundleModel) -> bool:
    if m.multiplicity != 2:
        raise ModelError("a double vector bundle has exactly two gradings")
    return check_compatibility(m).ok and all(d <= 1 for d in m.grading_degrees)


def is_grl_bundle(m: GradedBundleModel) -> bool:
    """Double graded bundle one of whose gradings is linear."""
    if m.multiplicity != 2:
        raise ModelError("a GrL-bundle has exactly two gradings")
    return check_compatibility(m).ok and min(m.grading_degrees) <= 1
