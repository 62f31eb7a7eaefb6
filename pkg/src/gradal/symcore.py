"""Exact polynomial expressions with opaque coefficient functions.

An :class:`Expression` is a finite sum of terms ``q * monomial * symbols``
where ``q`` is a :class:`fractions.Fraction`, ``monomial`` is a product of
coordinate powers and ``symbols`` is a product of :class:`FunctionSymbol`
powers.  Function symbols stand for smooth functions of base coordinates
(``T(x)``, ``d(T, x, x)``); they are never expanded unless an explicit
polynomial definition is supplied.

Terms are stored in a dict keyed by ``(monomial, symbols)``, both sorted
tuples of ``(factor, exponent)`` pairs, so two expressions are equal iff
their dicts are equal.  Every value here is immutable.
"""
from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import MissingGeneratorError, OpaqueCompositionError, UndeclaredNameError

__all__ = [
    "FunctionSymbol",
    "SymbolDecl",
    "Expression",
    "Derivation",
    "Context",
    "const",
    "coord",
    "func",
    "normalize",
    "substitute",
    "partial",
    "apply_derivation",
    "equal",
    "rename",
    "expand",
]


@dataclass(frozen=True, order=True)
class FunctionSymbol:
    """Opaque function ``name(args)`` differentiated along ``derivs``.

    ``derivs`` is kept sorted, which makes mixed partials commute by
    construction.
    """

    name: str
    args: tuple[str, ...] = ()
    derivs: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "derivs", tuple(sorted(self.derivs)))

    def differentiate(self, v: str) -> FunctionSymbol | None:
        if v not in self.args:
            return None
        return FunctionSymbol(self.name, self.args, self.derivs + (v,))

    @property
    def underived(self) -> FunctionSymbol:
        return FunctionSymbol(self.name, self.args)


@dataclass(frozen=True)
class SymbolDecl:
    """Declaration of a coefficient symbol; ``definition`` makes it explicit."""

    name: str
    args: tuple[str, ...]
    definition: Expression | None = None

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    @property
    def explicit(self) -> bool:
        return self.definition is not None

    def symbol(self) -> FunctionSymbol:
        return FunctionSymbol(self.name, self.args)


def _merge(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items()))


def _lower(factors: tuple, target) -> tuple:
    """Decrease the exponent of ``target`` by one."""
    out = []
    for k, e in factors:
        if k == target:
            if e > 1:
                out.append((k, e - 1))
        else:
            out.append((k, e))
    return tuple(out)


_ONE_KEY = ((), ())


class Expression:
    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping | None = None):
        clean = {}
        if terms:
            for key, c in terms.items():
                if c:
                    clean[key] = c if isinstance(c, Fraction) else Fraction(c)
        self._terms = clean
        self._hash = None

    # construction helpers -------------------------------------------------

    @classmethod
    def _raw(cls, terms: dict) -> Expression:
        # terms already clean: Fraction values, no zeros
        e = cls.__new__(cls)
        e._terms = terms
        e._hash = None
        return e

    @classmethod
    def constant(cls, q) -> Expression:
        return cls({_ONE_KEY: Fraction(q)})

    @classmethod
    def coordinate(cls, name: str) -> Expression:
        return cls._raw({(((name, 1),), ()): Fraction(1)})

    @classmethod
    def function(cls, sym: FunctionSymbol) -> Expression:
        return cls._raw({((), ((sym, 1),)): Fraction(1)})

    # inspection -----------------------------------------------------------

    def items(self):
        """``((monomial, symbols), coefficient)`` pairs in storage order."""
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and _ONE_KEY in self._terms)

    @property
    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise ValueError("expression is not constant")
        return self._terms.get(_ONE_KEY, Fraction(0))

    def coordinates(self) -> frozenset[str]:
        """Coordinates occurring in monomials (symbol arguments excluded)."""
        return frozenset(name for (mono, _), _c in self._terms.items() for name, _e in mono)

    def symbols(self) -> frozenset[FunctionSymbol]:
        return frozenset(s for (_, syms), _c in self._terms.items() for s, _e in syms)

    def degree(self, variables: Iterable[str] | None = None) -> int:
        """Largest total degree in ``variables`` (all coordinates if None); -1 for zero."""
        vs = None if variables is None else set(variables)
        best = -1
        for (mono, _), _c in self._terms.items():
            d = sum(e for name, e in mono if vs is None or name in vs)
            best = max(best, d)
        return best

    def collect(self, variables: Iterable[str]) -> dict[tuple, Expression]:
        """Group terms by their monomial in ``variables``.

        Returns ``{monomial: coefficient}`` where the monomial is a sorted
        tuple of ``(name, exponent)`` and the coefficient is free of
        ``variables``.
        """
        vs = set(variables)
        groups: dict[tuple, dict] = {}
        for (mono, syms), c in self._terms.items():
            inside = tuple((n, e) for n, e in mono if n in vs)
            outside = tuple((n, e) for n, e in mono if n not in vs)
            groups.setdefault(inside, {})[(outside, syms)] = c
        return {k: Expression._raw(v) for k, v in groups.items()}

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for k, c in other._terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return Expression._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Expression._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Expression()
            return Expression._raw({k: c * other for k, c in self._terms.items()})
        other = _coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for (m1, s1), c1 in self._terms.items():
            for (m2, s2), c2 in other._terms.items():
                key = (_merge(m1, m2), _merge(s1, s2))
                v = out.get(key, 0) + c1 * c2
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        return Expression._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Expression):
            other = other.constant_value
        q = Fraction(other)
        if not q:
            raise ZeroDivisionError("division of an expression by zero")
        return self * (1 / q)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Expression.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # comparison -----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Expression):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant and self.constant_value == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        return f"Expression({self})"

    def __str__(self):
        from .dsl import format_expression

        return format_expression(self)


def _coerce(x):
    if isinstance(x, Expression):
        return x
    if isinstance(x, (int, Fraction)):
        return Expression.constant(x)
    return NotImplemented


def const(q) -> Expression:
    return Expression.constant(q)


def coord(name: str) -> Expression:
    return Expression.coordinate(name)


def func(name: str, args: Iterable[str], *derivs: str) -> Expression:
    return Expression.function(FunctionSymbol(name, tuple(args), derivs))


# ---------------------------------------------------------------------------
# declaration context


@dataclass(frozen=True)
class Context:
    """Declared coordinates (in declaration order) and coefficient symbols."""

    coordinates: tuple[str, ...] = ()
    symbols: Mapping[str, SymbolDecl] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(self.coordinates))

    def check(self, e: Expression) -> Expression:
        known = set(self.coordinates)
        for name in e.coordinates():
            if name not in known:
                raise UndeclaredNameError(name, "coordinate")
        for s in e.symbols():
            decl = self.symbols.get(s.name)
            if decl is None:
                raise UndeclaredNameError(s.name, "symbol")
            if tuple(decl.args) != s.args:
                raise UndeclaredNameError(s.name, f"symbol arguments {s.args} do not match declaration")
            for d in s.derivs:
                if d not in s.args:
                    raise UndeclaredNameError(d, f"derivative of {s.name}")
        return e

    def definitions(self) -> dict[str, Expression]:
        return {n: d.definition for n, d in self.symbols.items() if d.definition is not None}


def normalize(raw, ctx: Context | None = None) -> Expression:
    """Canonical :class:`Expression` from a raw term list.

    ``raw`` is an Expression or an iterable of ``(coefficient, coordinates,
    symbols)`` triples; ``coordinates`` is a mapping name -> exponent or a
    sequence of names (repeats multiply), ``symbols`` a sequence of
    :class:`FunctionSymbol`.
    """
    if isinstance(raw, Expression):
        e = raw
    else:
        out: dict = {}
        for coeff, coords, syms in raw:
            if isinstance(coords, Mapping):
                mono = {n: k for n, k in coords.items() if k}
            else:
                mono = {}
                for n in coords:
                    mono[n] = mono.get(n, 0) + 1
            sd: dict = {}
            for s in syms:
                sd[s] = sd.get(s, 0) + 1
            key = (tuple(sorted(mono.items())), tuple(sorted(sd.items())))
            out[key] = out.get(key, 0) + Fraction(coeff)
        e = Expression(out)
    if ctx is not None:
        ctx.check(e)
    return e


def equal(e1: Expression, e2: Expression, ctx: Context | None = None) -> bool:
    if ctx is not None:
        ctx.check(e1)
        ctx.check(e2)
    return e1 == e2


# ---------------------------------------------------------------------------
# differentiation


def partial(e: Expression, v: str, ctx: Context | None = None) -> Expression:
    """Formal partial derivative along coordinate ``v``."""
    if ctx is not None and v not in ctx.coordinates:
        raise UndeclaredNameError(v, "coordinate")
    out: dict = {}

    def put(key, c):
        val = out.get(key, 0) + c
        if val:
            out[key] = val
        else:
            out.pop(key, None)

    for (mono, syms), c in e.items():
        for name, k in mono:
            if name == v:
                put((_lower(mono, name), syms), c * k)
        for s, k in syms:
            ds = s.differentiate(v)
            if ds is not None:
                put((mono, _merge(_lower(syms, s), ((ds, 1),))), c * k)
    return Expression._raw(out)


@dataclass(frozen=True)
class Derivation:
    """Derivation given by its values on generators.

    ``coordinate_images`` must cover every coordinate the derivation meets.
    An underived symbol with an entry in ``symbol_images`` maps to that
    entry (its derivatives map to the matching partials of the entry);
    every other symbol follows the chain rule through its arguments.
    """

    coordinate_images: Mapping[str, Expression]
    symbol_images: Mapping[str, Expression] = field(default_factory=dict)

    def coordinate_image(self, name: str) -> Expression:
        try:
            return self.coordinate_images[name]
        except KeyError:
            raise MissingGeneratorError(f"derivation has no image for coordinate {name!r}") from None

    def symbol_image(self, s: FunctionSymbol) -> Expression:
        img = self.symbol_images.get(s.name)
        if img is not None:
            for d in s.derivs:
                img = partial(img, d)
            return img
        out = Expression()
        for a in s.args:
            da = self.coordinate_image(a)
            if da:
                out = out + Expression.function(s.differentiate(a)) * da
        return out


def apply_derivation(D: Derivation, e: Expression) -> Expression:
    """Leibniz extension of ``D`` applied to ``e``."""
    acc: dict = {}
    cache: dict = {}

    def image(kind, f):
        key = (kind, f)
        if key not in cache:
            cache[key] = D.coordinate_image(f) if kind == 0 else D.symbol_image(f)
        return cache[key]

    for (mono, syms), c in e.items():
        for name, k in mono:
            img = image(0, name)
            if img:
                rest = Expression._raw({(_lower(mono, name), syms): c * k})
                _accumulate(acc, rest * img)
        for s, k in syms:
            img = image(1, s)
            if img:
                rest = Expression._raw({(mono, _lower(syms, s)): c * k})
                _accumulate(acc, rest * img)
    return Expression._raw(acc)


def _accumulate(acc: dict, e: Expression) -> None:
    for key, c in e.items():
        v = acc.get(key, 0) + c
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)


# ---------------------------------------------------------------------------
# substitution


def expand(e: Expression, definitions: Mapping[str, Expression]) -> Expression:
    """Replace every explicitly defined symbol by (a partial of) its definition."""
    if not definitions or not any(s.name in definitions for s in e.symbols()):
        return e
    acc: dict = {}
    cache: dict = {}
    for (mono, syms), c in e.items():
        kept = []
        term = Expression._raw({(mono, ()): c})
        for s, k in syms:
            if s.name in definitions:
                if s not in cache:
                    body = definitions[s.name]
                    for d in s.derivs:
                        body = partial(body, d)
                    cache[s] = body
                term = term * cache[s] ** k
            else:
                kept.append((s, k))
        if kept:
            term = term * Expression._raw({((), tuple(kept)): Fraction(1)})
        _accumulate(acc, term)
    return Expression._raw(acc)


def substitute(
    e: Expression,
    bindings: Mapping[str, Expression],
    definitions: Mapping[str, Expression] | None = None,
    ctx: Context | None = None,
) -> Expression:
    """Simultaneously replace coordinates by expressions.

    Unbound coordinates map to themselves.  A binding that moves an
    argument of a coefficient symbol is only allowed when the symbol has an
    explicit definition (it is then expanded); otherwise
    :class:`OpaqueCompositionError` is raised.
    """
    binds = {}
    for name, value in bindings.items():
        value = _coerce(value)
        if value is NotImplemented:
            raise TypeError(f"binding for {name!r} is not an expression")
        if ctx is not None:
            ctx.check(value)
        binds[name] = value
    moved = {n for n, v in binds.items() if v != Expression.coordinate(n)}
    definitions = definitions or {}
    powers: dict = {}

    def power(name, k):
        key = (name, k)
        if key not in powers:
            if name in binds:
                powers[key] = binds[name] ** k
            else:
                powers[key] = Expression._raw({(((name, k),), ()): Fraction(1)})
        return powers[key]

    expanded: dict = {}
    acc: dict = {}
    for (mono, syms), c in e.items():
        term = Expression._raw({((), ()): c})
        for name, k in mono:
            term = term * power(name, k)
        kept = []
        for s, k in syms:
            if moved.intersection(s.args):
                if s.name not in definitions:
                    raise OpaqueCompositionError(
                        f"cannot substitute into the arguments of opaque symbol {s.name!r}"
                    )
                if s not in expanded:
                    body = definitions[s.name]
                    for d in s.derivs:
                        body = partial(body, d)
                    expanded[s] = substitute(body, binds, definitions)
                term = term * expanded[s] ** k
            else:
                kept.append((s, k))
        if kept:
            term = term * Expression._raw({((), tuple(kept)): Fraction(1)})
        _accumulate(acc, term)
    return Expression._raw(acc)


def rename(e: Expression, mapping: Mapping[str, str]) -> Expression:
    """Rename coordinates everywhere, including symbol arguments and derivative indices."""
    if not mapping:
        return e
    out: dict = {}
    for (mono, syms), c in e.items():
        m = tuple(sorted((mapping.get(n, n), k) for n, k in mono))
        s = tuple(
            sorted(
                (
                    FunctionSymbol(
                        f.name,
                        tuple(mapping.get(a, a) for a in f.args),
                        tuple(mapping.get(d, d) for d in f.derivs),
                    ),
                    k,
                )
                for f, k in syms
            )
        )
        key = (m, s)
        out[key] = out.get(key, 0) + c
    return Expression(out)
