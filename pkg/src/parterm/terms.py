"""Canonical terms, monomial ordering, and integer-polynomial arithmetic.

Data representation is deliberately plain: a monomial is a tuple of
``(symbol_id, exponent)`` pairs sorted by symbol id with every exponent >= 1
(the empty tuple is the unit monomial), a term is ``(coeff, monomial)`` with
an arbitrary-precision int coefficient, and an expression is a tuple of terms
sorted by the canonical monomial order with like terms combined and zero
coefficients removed.  Plain tuples keep the rewrite and sort hot paths cheap
and make structural equality a single ``==``.

The canonical order compares the dense exponent vectors (index = symbol id,
missing symbol = 0) lexicographically, with the greater vector sorting
*earlier*: the highest power of the first declared symbol comes first.
"""

from __future__ import annotations

import enum
from typing import Iterable, Iterator, Sequence

Factor = tuple[int, int]            # (symbol_id, exponent >= 1)
Monomial = tuple[Factor, ...]       # strictly increasing by symbol_id
Term = tuple[int, Monomial]         # (coefficient, monomial)
Expression = tuple[Term, ...]       # canonically sorted, combined, no zeros

UNIT: Monomial = ()
ONE: Expression = ((1, UNIT),)
ZERO: Expression = ()

# Sparse sort keys terminate with a pseudo-factor whose id exceeds any real
# symbol id so that a missing trailing factor (exponent 0) sorts later.
_KEY_SENTINEL = (1 << 62, 0)


class InvariantError(ValueError):
    """A term-level invariant was violated (e.g. a symbol id out of range)."""


class Ordering(enum.IntEnum):
    EARLIER = -1
    EQUAL = 0
    LATER = 1


class SymbolTable:
    """Bijective name <-> dense-id mapping; ids assigned in declaration order."""

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] = []
        self._ids: dict[str, int] = {}
        for name in names:
            self.declare(name)

    def declare(self, name: str) -> int:
        if name in self._ids:
            raise InvariantError(f"symbol {name!r} declared twice")
        sid = len(self._names)
        self._names.append(name)
        self._ids[name] = sid
        return sid

    def id_of(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise InvariantError(f"undeclared symbol {name!r}") from None

    def name_of(self, sid: int) -> str:
        return self._names[sid]

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def __len__(self) -> int:
        return len(self._names)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._names)


def monomial_cmp(a: Monomial, b: Monomial) -> int:
    """Three-way canonical comparison on sparse monomials; no id validation.

    Returns -1 if ``a`` sorts earlier, 0 if equal, 1 if later.  Walks both
    sparse factor lists in parallel: at the first symbol id where the dense
    exponent vectors differ, the larger exponent wins (sorts earlier).
    """
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        ida, ea = a[i]
        idb, eb = b[j]
        if ida == idb:
            if ea != eb:
                return -1 if ea > eb else 1
            i += 1
            j += 1
        elif ida < idb:
            return -1  # a has a positive exponent where b has zero
        else:
            return 1
    if i < na:
        return -1
    if j < nb:
        return 1
    return 0


def compare_monomials(a: Monomial, b: Monomial, nsymbols: int) -> Ordering:
    """Canonical total order with symbol-id validation against ``nsymbols``."""
    for sid, _ in a:
        if sid >= nsymbols:
            raise InvariantError(f"symbol id {sid} >= nsymbols {nsymbols}")
    for sid, _ in b:
        if sid >= nsymbols:
            raise InvariantError(f"symbol id {sid} >= nsymbols {nsymbols}")
    return Ordering(monomial_cmp(a, b))


def dense_key(mono: Monomial, nsymbols: int) -> tuple[int, ...]:
    """Sort key for the canonical order: the negated dense exponent vector."""
    vec = [0] * nsymbols
    for sid, exp in mono:
        vec[sid] = -exp
    return tuple(vec)


def sparse_key(mono: Monomial) -> tuple[Factor, ...]:
    """nsymbols-free sort key equivalent to :func:`dense_key` ordering."""
    return tuple((sid, -exp) for sid, exp in mono) + (_KEY_SENTINEL,)


def multiply_monomials(a: Monomial, b: Monomial) -> Monomial:
    """Exponent-wise sum, preserving the canonical sparse form."""
    if not a:
        return b
    if not b:
        return a
    out: list[Factor] = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        ida, ea = a[i]
        idb, eb = b[j]
        if ida == idb:
            out.append((ida, ea + eb))
            i += 1
            j += 1
        elif ida < idb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def multiply_terms(a: Term, b: Term) -> Term:
    return (a[0] * b[0], multiply_monomials(a[1], b[1]))


def normalize(raw: Iterable[Term], nsymbols: int) -> Expression:
    """Canonically sort raw terms, combine like monomials, drop zero sums."""
    buf = sorted(raw, key=lambda t: dense_key(t[1], nsymbols))
    out: list[Term] = []
    i = 0
    n = len(buf)
    while i < n:
        coeff, mono = buf[i]
        i += 1
        while i < n and buf[i][1] == mono:
            coeff += buf[i][0]
            i += 1
        if coeff:
            out.append((coeff, mono))
    return tuple(out)


def is_normalized(e: Sequence[Term]) -> bool:
    """Check the expression invariants: strict canonical order, no zeros."""
    for i, (coeff, _) in enumerate(e):
        if coeff == 0:
            return False
        if i and monomial_cmp(e[i - 1][1], e[i][1]) != -1:
            return False
    return True


def add_expressions(a: Expression, b: Expression) -> Expression:
    """Sum of two normalized expressions via a linear two-way merge."""
    if not a:
        return b
    if not b:
        return a
    out: list[Term] = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        c = monomial_cmp(a[i][1], b[j][1])
        if c < 0:
            out.append(a[i])
            i += 1
        elif c > 0:
            out.append(b[j])
            j += 1
        else:
            s = a[i][0] + b[j][0]
            if s:
                out.append((s, a[i][1]))
            i += 1
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def negate_expression(a: Expression) -> Expression:
    return tuple((-c, m) for c, m in a)


def multiply_expressions(a: Expression, b: Expression) -> Expression:
    """Distributive product; accumulates in a dict, then sorts canonically."""
    acc: dict[Monomial, int] = {}
    for ca, ma in a:
        for cb, mb in b:
            m = multiply_monomials(ma, mb)
            acc[m] = acc.get(m, 0) + ca * cb
    items = [(c, m) for m, c in acc.items() if c]
    items.sort(key=lambda t: sparse_key(t[1]))
    return tuple(items)


def pow_expression(a: Expression, n: int) -> Expression:
    """a**n by repeated multiplication; a**0 is the constant 1."""
    if n < 0:
        raise InvariantError(f"negative exponent {n}")
    result = ONE
    for _ in range(n):
        result = multiply_expressions(result, a)
    return result


def constant(c: int) -> Expression:
    return ((c, UNIT),) if c else ZERO


def symbol(sid: int, exp: int = 1) -> Expression:
    if exp < 1:
        raise InvariantError(f"exponent {exp} < 1")
    return ((1, ((sid, exp),)),)


def iter_factors(mono: Monomial) -> Iterator[Factor]:
    return iter(mono)
