import pytest
from hypothesis import given, settings, strategies as st

from sheetlytics.address import CellAddress, CellRange, parse_address, parse_range
from sheetlytics.errors import FormulaSyntaxError
from sheetlytics.formula import (
    Binary,
    Bool,
    Call,
    Num,
    Range,
    Ref,
    Str,
    Unary,
    dependencies,
    parse_formula,
    print_formula,
)


def ref(t):
    return Ref(parse_address(t))


def test_precedence_and_associativity():
    assert parse_formula("=1+2*3") == Binary("+", Num(1), Binary("*", Num(2), Num(3)))
    assert parse_formula("=10-4-3") == Binary("-", Binary("-", Num(10), Num(4)), Num(3))
    assert parse_formula("=2^3^2") == Binary("^", Num(2), Binary("^", Num(3), Num(2)))
    # exponent binds tighter than unary minus
    assert parse_formula("=-2^2") == Unary("-", Binary("^", Num(2), Num(2)))
    assert parse_formula("=A1>=B1+1") == Binary(">=", ref("A1"), Binary("+", ref("B1"), Num(1)))


def test_calls_ranges_and_literals():
    e = parse_formula('=if(sum($C$10:F10)>0, "yes", FALSE)')
    assert e == Call(
        "IF",
        (
            Binary(">", Call("SUM", (Range(parse_range("C10:F10")),)), Num(0)),
            Str("yes"),
            Bool(False),
        ),
    )
    assert parse_formula('="say ""hi"""') == Str('say "hi"')
    assert parse_formula("=1.5e3") == Num(1500.0)


def test_function_name_lexes_as_identifier():
    assert parse_formula("=LOG10(A1)") == Call("LOG10", (ref("A1"),))


@pytest.mark.parametrize("bad", ["1+2", "=", "=1+", "=(1", "=1)", "=SUM(1,", "=A1:", "=#", "=A0"])
def test_syntax_errors(bad):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(bad)


def test_syntax_error_reports_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("=1+*2")
    assert info.value.position is not None


def test_printer_keeps_needed_parentheses():
    for text in ["=(1+2)*3", "=1-(2-3)", "=(-2)^2", "=-2^2", "=2^-1", "=A1>B1=TRUE", "=A1>(B1=TRUE)", "=$C$16*C7"]:
        assert print_formula(parse_formula(text)) == text


def test_dependencies_expand_ranges_and_drop_dollars():
    deps = dependencies(parse_formula("=C7*$C$16+SUM(C10:D11)"))
    assert {str(a) for a in deps} == {"C7", "C16", "C10", "D10", "C11", "D11"}


# -- round trip property -----------------------------------------------------

addresses = st.builds(
    CellAddress, st.integers(1, 60), st.integers(1, 500), st.booleans(), st.booleans()
)
leaves = st.one_of(
    st.builds(Num, st.floats(min_value=0, max_value=1e12, allow_nan=False, allow_infinity=False)),
    st.builds(Str, st.text(alphabet='ab "x', max_size=5)),
    st.builds(Bool, st.booleans()),
    st.builds(Ref, addresses),
    st.builds(lambda a, b: Range(CellRange(a, b)), addresses, addresses),
)


def _extend(children):
    ops = st.sampled_from(["+", "-", "*", "/", "^", "=", "<>", "<", "<=", ">", ">="])
    names = st.sampled_from(["SUM", "MAX", "IF", "ROUND", "NPV"])
    return st.one_of(
        st.builds(Unary, st.sampled_from(["-", "+"]), children),
        st.builds(Binary, ops, children, children),
        st.builds(Call, names, st.lists(children, min_size=1, max_size=3).map(tuple)),
    )


expressions = st.recursive(leaves, _extend, max_leaves=12)



@settings(max_examples=300)
@given(expressions)
def test_print_parse_round_trip(e):
    text = print_formula(e)
    back = parse_formula(text)
    assert back == e
    assert print_formula(back) == text


def test_lookup_formula_shapes():
    assert parse_formula("=G13-H13") == Binary("-", ref("G13"), ref("H13"))
    e = parse_formula("=INDEX(D27:D33,$C25)")
    assert e == Call("INDEX", (Range(parse_range("D27:D33")), ref("$C25")))
    assert {str(a) for a in dependencies(e)} == {f"D{r}" for r in range(27, 34)} | {"C25"}
    assert dependencies(parse_formula("=5")) == set()
