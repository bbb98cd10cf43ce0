import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parterm import terms
from parterm.terms import (
    Ordering,
    SymbolTable,
    add_expressions,
    compare_monomials,
    dense_key,
    is_normalized,
    multiply_expressions,
    multiply_terms,
    normalize,
    pow_expression,
    sparse_key,
)

from oracles import (
    brute_multiply,
    brute_power,
    oracle_normalize,
    random_expression,
    random_terms,
)

NSYM = 4

st_monomial = st.lists(st.integers(0, 5), min_size=0, max_size=NSYM).map(
    lambda exps: tuple((sid, e) for sid, e in enumerate(exps) if e >= 1))
st_term = st.tuples(st.integers(-9, 9), st_monomial)
st_raw = st.lists(st_term, max_size=10)
st_expression = st_raw.map(lambda raw: normalize(raw, NSYM))


# -- symbol table ------------------------------------------------------------

def test_symbol_table_dense_bijection():
    tab = SymbolTable(["x", "y"])
    assert tab.id_of("x") == 0 and tab.id_of("y") == 1
    assert tab.name_of(0) == "x" and tab.name_of(1) == "y"
    assert tab.declare("z") == 2
    assert len(tab) == 3 and tab.names == ("x", "y", "z")


def test_symbol_table_errors():
    tab = SymbolTable(["x"])
    with pytest.raises(terms.InvariantError, match="undeclared"):
        tab.id_of("q")
    with pytest.raises(terms.InvariantError, match="twice"):
        tab.declare("x")


# -- monomial order ----------------------------------------------------------

def test_compare_examples():
    x2y = ((0, 2), (1, 1))
    xy2 = ((0, 1), (1, 2))
    assert compare_monomials(x2y, xy2, 2) is Ordering.EARLIER
    assert compare_monomials(xy2, xy2, 2) is Ordering.EQUAL
    # unit vs x: the greater dense vector (1,) sorts earlier
    assert compare_monomials(((0, 1),), (), 1) is Ordering.EARLIER
    assert compare_monomials((), ((0, 1),), 1) is Ordering.LATER


def test_compare_rejects_out_of_range_ids():
    with pytest.raises(terms.InvariantError, match="symbol id"):
        compare_monomials(((3, 1),), (), 3)
    with pytest.raises(terms.InvariantError, match="symbol id"):
        compare_monomials((), ((7, 2),), 3)


@given(st_monomial, st_monomial)
def test_compare_antisymmetric(a, b):
    c = compare_monomials(a, b, NSYM)
    assert compare_monomials(b, a, NSYM) is Ordering(-int(c))
    assert (c is Ordering.EQUAL) == (a == b)


@given(st_monomial, st_monomial, st_monomial)
def test_compare_transitive(a, b, c):
    ordered = sorted([a, b, c], key=lambda m: dense_key(m, NSYM))
    for earlier, later in zip(ordered, ordered[1:]):
        assert compare_monomials(earlier, later, NSYM) in (Ordering.EARLIER, Ordering.EQUAL)


@given(st_monomial, st_monomial)
def test_sort_keys_agree_with_comparison(a, b):
    c = int(compare_monomials(a, b, NSYM))
    dense = (dense_key(a, NSYM) > dense_key(b, NSYM)) - (dense_key(a, NSYM) < dense_key(b, NSYM))
    sparse = (sparse_key(a) > sparse_key(b)) - (sparse_key(a) < sparse_key(b))
    assert dense == c
    assert sparse == c


# -- term arithmetic ---------------------------------------------------------

def test_multiply_terms_examples():
    x = ((0, 1),)
    xy = ((0, 1), (1, 1))
    assert multiply_terms((3, x), (2, xy)) == (6, ((0, 2), (1, 1)))
    assert multiply_terms((7, xy), (1, ())) == (7, xy)
    assert multiply_terms((-2, ((1, 2),)), (5, ((1, 1),))) == (-10, ((1, 3),))


# -- normalize ---------------------------------------------------------------

def test_normalize_examples():
    x = ((0, 1),)
    y = ((1, 1),)
    assert normalize([(3, x), (-3, x), (2, y)], 2) == ((2, y),)
    assert normalize([], 2) == ()
    raw = [(1, x), (1, y), (1, x)]
    assert normalize(raw, 2) == oracle_normalize(raw, 2)
    assert normalize(raw, 2) == ((2, x), (1, y))


def test_normalize_matches_oracle_on_random_input():
    rng = random.Random(11)
    for _ in range(200):
        raw = random_terms(rng, NSYM, rng.randint(0, 20))
        got = normalize(raw, NSYM)
        assert got == oracle_normalize(raw, NSYM)
        assert is_normalized(got)


@given(st_raw)
def test_normalize_idempotent(raw):
    once = normalize(raw, NSYM)
    assert normalize(once, NSYM) == once


@given(st_raw, st.randoms(use_true_random=False))
def test_normalize_permutation_invariant(raw, rng):
    shuffled = list(raw)
    rng.shuffle(shuffled)
    assert normalize(shuffled, NSYM) == normalize(raw, NSYM)


# -- expression ring ---------------------------------------------------------

def test_difference_of_squares():
    x, y = terms.symbol(0), terms.symbol(1)
    xpy = add_expressions(x, y)
    xmy = add_expressions(x, terms.negate_expression(y))
    got = multiply_expressions(xpy, xmy)
    assert got == ((1, ((0, 2),)), (-1, ((1, 2),)))


def test_pow_zero_is_one():
    e = add_expressions(terms.symbol(0), terms.symbol(1))
    assert pow_expression(e, 0) == ((1, ()),)


def test_pow_negative_rejected():
    with pytest.raises(terms.InvariantError):
        pow_expression(terms.symbol(0), -1)


def test_trinomial_eighth_power_term_count():
    e = add_expressions(add_expressions(terms.symbol(0), terms.symbol(1)), terms.symbol(2))
    got = pow_expression(e, 8)
    expected = brute_power(e, 8, 3)
    assert got == expected
    # stars and bars: (n+1)(n+2)/2 monomials for a trinomial power
    assert len(got) == (8 + 1) * (8 + 2) // 2 == 45


@given(st_expression, st_expression)
@settings(max_examples=50)
def test_add_commutes_and_matches_normalize_concat(a, b):
    assert add_expressions(a, b) == add_expressions(b, a)
    assert add_expressions(a, b) == normalize(a + b, NSYM)


@given(st_expression, st_expression, st_expression)
@settings(max_examples=30)
def test_ring_laws(a, b, c):
    assert multiply_expressions(a, b) == multiply_expressions(b, a)
    assert add_expressions(add_expressions(a, b), c) == add_expressions(a, add_expressions(b, c))
    assert multiply_expressions(multiply_expressions(a, b), c) == \
        multiply_expressions(a, multiply_expressions(b, c))
    left = multiply_expressions(a, add_expressions(b, c))
    right = add_expressions(multiply_expressions(a, b), multiply_expressions(a, c))
    assert left == right


@given(st_expression, st_expression)
@settings(max_examples=50)
def test_multiply_matches_brute_oracle(a, b):
    assert multiply_expressions(a, b) == brute_multiply(a, b, NSYM)


def test_results_are_normalized_random():
    rng = random.Random(3)
    for _ in range(50):
        a = random_expression(rng, NSYM, 6)
        b = random_expression(rng, NSYM, 6)
        assert is_normalized(add_expressions(a, b))
        assert is_normalized(multiply_expressions(a, b))
