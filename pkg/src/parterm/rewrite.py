"""Per-term rewriting: apply one module's statement pipeline to a single term.

This is the unit of work a worker performs.  Statements apply left to right;
each statement maps the full intermediate term multiset term by term, with no
sorting in between.  Output terms are raw (unsorted, duplicates and zero
coefficients allowed) until a sort boundary normalizes them.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Sequence

from . import terms
from .parser import Module, Multiply, Statement
from .terms import Expression, Term


@dataclass(frozen=True)
class GeneratedBatch:
    """Raw output terms traceable to exactly one input chunk."""

    terms: tuple[Term, ...]
    source_chunk: int


@functools.lru_cache(maxsize=256)
def _rhs_power(rhs: Expression, n: int) -> Expression:
    # Substitution hits the same rhs^n for every input term with x-degree n;
    # memoizing keeps substitution workloads near-linear in generated terms.
    return terms.pow_expression(rhs, n)


def apply_statement(t: Term, s: Statement) -> list[Term]:
    """One statement on one term; the result is a raw (unnormalized) batch."""
    if isinstance(s, Multiply):
        return [terms.multiply_terms(t, f) for f in s.factor]
    coeff, mono = t
    for i, (sid, exp) in enumerate(mono):
        if sid == s.target:
            rest: Term = (coeff, mono[:i] + mono[i + 1:])
            return [terms.multiply_terms(rest, rt) for rt in _rhs_power(s.rhs, exp)]
    return [t]


def apply_module_to_term(t: Term, m: Module) -> list[Term]:
    """Feed one term through the module pipeline; empty module is identity."""
    current = [t]
    for s in m.statements:
        nxt: list[Term] = []
        for u in current:
            nxt.extend(apply_statement(u, s))
        current = nxt
    return current


def apply_module_to_chunk(chunk_terms: Sequence[Term], m: Module,
                          source_chunk: int) -> GeneratedBatch:
    """Rewrite every term of one chunk, keeping chunk provenance."""
    out: list[Term] = []
    for t in chunk_terms:
        out.extend(apply_module_to_term(t, m))
    return GeneratedBatch(tuple(out), source_chunk)
