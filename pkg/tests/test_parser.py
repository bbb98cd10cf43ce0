import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parterm.parser import (
    IdSubst,
    Multiply,
    ParseError,
    format_expression,
    parse_program,
)
from parterm.terms import SymbolTable, normalize

from oracles import random_expression


def test_binomial_square_program():
    program = parse_program("symbols x,y; local F = (x+y)^2; .sort .end")
    assert program.symtab.names == ("x", "y")
    assert len(program.modules) == 1
    assert program.modules[0].statements == ()
    (name, value), = program.initial
    assert name == "F"
    # x^2 + 2xy + y^2
    assert value == ((1, ((0, 2),)), (2, ((0, 1), (1, 1))), (1, ((1, 2),)))


def test_id_statement_structure():
    program = parse_program("symbols x; local F = x; id x = x + 1; .sort .end")
    assert len(program.modules) == 1
    stmt, = program.modules[0].statements
    assert isinstance(stmt, IdSubst)
    assert stmt.target == 0
    assert stmt.rhs == ((1, ((0, 1),)), (1, ()))


def test_multiply_statement_structure():
    program = parse_program("symbols x,y; multiply -2*x*y; .sort .end")
    stmt, = program.modules[0].statements
    assert isinstance(stmt, Multiply)
    assert stmt.factor == ((-2, ((0, 1), (1, 1))),)


def test_precedence_and_unary_minus():
    program = parse_program("symbols x,y; local F = -x^2 + 2*-3 - -y; .sort .end")
    (_, value), = program.initial
    expected = normalize([(-1, ((0, 2),)), (1, ((1, 1),)), (-6, ())], 2)
    assert value == expected


def test_power_of_parenthesized_and_integer_base():
    program = parse_program("symbols x; local F = (x+1)^2 + 2^3; .sort .end")
    (_, value), = program.initial
    assert value == normalize([(1, ((0, 2),)), (2, ((0, 1),)), (9, ())], 1)


def test_comment_and_whitespace_insensitivity():
    text = "* leading comment\nsymbols   x ,y;\n* another\nlocal F=x \n + y;\n.sort\n.end\n"
    program = parse_program(text)
    (_, value), = program.initial
    assert value == ((1, ((0, 1),)), (1, ((1, 1),)))


def test_multiple_modules_and_empty_module():
    program = parse_program("symbols x; multiply x; .sort .sort multiply x; .sort .end")
    assert [len(m.statements) for m in program.modules] == [1, 0, 1]


@pytest.mark.parametrize("text,fragment,line,col", [
    ("local F = x; .sort .end", "undeclared symbol 'x'", 1, 11),
    ("symbols x; local F = x^0; .sort .end", "must be positive", 1, 24),
    ("symbols x; local F = x^-1; .sort .end", "integer literal", 1, 24),
    ("symbols x; local F = x^y; .sort .end", "integer literal", 1, 24),
    ("symbols x; local F = x;", "missing '.end'", 1, 24),
    ("symbols x; local F = x; .end", "no module", 1, 29),
    ("symbols x; multiply x; .end", "not terminated by '.sort'", 1, 24),
    ("symbols x; local F = $;", "unexpected character '$'", 1, 22),
    ("symbols x, x; .sort .end", "declared twice", 1, 12),
    ("symbols x; local F = x; local F = x; .sort .end", "defined twice", 1, 31),
    ("symbols id; .sort .end", "keyword", 1, 9),
    ("symbols x;\nid y = x;\n.sort .end", "undeclared symbol 'y'", 2, 4),
    ("symbols x; local F = (x; .sort .end", "expected ')'", 1, 24),
    ("symbols x; .fold .end", "unknown directive", 1, 12),
])
def test_errors_carry_position(text, fragment, line, col):
    with pytest.raises(ParseError) as err:
        parse_program(text)
    assert fragment in str(err.value)
    assert err.value.line == line
    assert err.value.col == col


def test_format_examples():
    tab = SymbolTable(["x", "y"])
    assert format_expression(((2, ((0, 1), (1, 1))),), tab) == "2*x*y"
    assert format_expression((), tab) == "0"
    assert format_expression(((1, ()),), tab) == "1"
    assert format_expression(((-1, ((0, 1),)), (-7, ())), tab) == "-x-7"
    assert format_expression(((1, ((0, 2),)), (-3, ((1, 1),))), tab) == "x^2-3*y"


def test_parse_is_deterministic():
    text = "symbols x,y; local F = (x-y)^3; id x = y+1; .sort .end"
    a = parse_program(text)
    b = parse_program(text)
    assert a.symtab.names == b.symtab.names
    assert a.initial == b.initial
    assert a.modules == b.modules


NSYM = 4
_NAMES = "x,y,z,w"

st_expression = st.lists(
    st.tuples(st.integers(-9, 9),
              st.lists(st.integers(0, 5), min_size=NSYM, max_size=NSYM).map(
                  lambda exps: tuple((sid, e) for sid, e in enumerate(exps) if e))),
    max_size=8,
).map(lambda raw: normalize(raw, NSYM))


@given(st_expression)
@settings(max_examples=150)
def test_format_parse_round_trip(e):
    tab = SymbolTable(_NAMES.split(","))
    text = f"symbols {_NAMES}; local F = {format_expression(e, tab)}; .sort .end"
    program = parse_program(text)
    (_, value), = program.initial
    assert value == e


def test_round_trip_on_big_random_coefficients():
    rng = random.Random(5)
    tab = SymbolTable(_NAMES.split(","))
    for _ in range(20):
        e = random_expression(rng, NSYM, 10)
        e = tuple((c * rng.randint(10**15, 10**20), m) for c, m in e)
        text = f"symbols {_NAMES}; local F = {format_expression(e, tab)}; .sort .end"
        (_, value), = parse_program(text).initial
        assert value == e
