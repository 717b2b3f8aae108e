"""Parsers and printers for the three languages; round-trip properties."""

import pytest
from hypothesis import given, settings

from fcgrow import fc_model as fc
from fcgrow import lare_model as lm
from fcgrow.errors import ParseError
from fcgrow.parsing import parse_fc, parse_lare, parse_loop
from fcgrow.printing import print_fc, print_lare, print_loop_cmd
from test_lare_model import cmd_st, expr_st

FC_TEXT = """\
# the figure's loop
vars 2
entry A
exit F
arc a A B skip
arc c B C check
arc d C B copy x2 x2
arc e C F skip
loop L parent root bound x1 cut c arcs c d
"""


def test_parse_fc_figure():
    p = parse_fc(FC_TEXT)
    assert p.n == 2
    assert p.entries == {"A"} and p.exits == {"F"}
    assert p.arc("d").instr == fc.copy(2, 2)
    lp = p.loop("L")
    assert lp.bound == 1 and lp.cutset == {"c"} and lp.arcs == {"c", "d"}


def test_parse_fc_bare_operands_and_comments():
    p = parse_fc("vars 3\nentry A\nexit B\narc a A B add 1 2 3  # trailing\n")
    assert p.arc("a").instr == fc.add(1, 2, 3)


def test_parse_fc_round_trip():
    p = parse_fc(FC_TEXT)
    assert parse_fc(print_fc(p)) == p


@pytest.mark.parametrize("bad,frag", [
    ("entry A\nexit B\narc a A B skip\n", "vars"),
    ("vars 2\nentry A\nexit B\narc a A B jump\n", "jump"),
    ("vars 2\nentry A\nexit B\narc a A B copy x1\n", "operand"),
    ("vars 2\nentry A\nexit B\narc a A B skip\nloop L bound x1\n", "loop"),
    ("vars 0\n", "vars"),
])
def test_parse_fc_errors(bad, frag):
    with pytest.raises(ParseError) as ei:
        parse_fc(bad)
    assert frag in str(ei.value)


def test_parse_lare_forms():
    e = parse_lare("[x4 (# x3:=x1+x2 x2:=x3)*]")
    assert e == lm.Bracket(4, lm.Star(
        lm.Cat(lm.Cat(lm.Check(), lm.Atom(fc.add(3, 1, 2))),
               lm.Atom(fc.copy(2, 3)))))
    assert parse_lare("x1:=**") == lm.Atom(fc.huge(1))
    assert parse_lare("x1<=x2+x3") == lm.Atom(fc.wadd(1, 2, 3))
    assert parse_lare("eps") == lm.Eps()
    assert parse_lare("check") == lm.Atom(fc.check())


def test_lare_precedence():
    # star > concatenation > alternation
    e = parse_lare("skip skip | skip")
    assert isinstance(e, lm.Alt) and isinstance(e.left, lm.Cat)
    e = parse_lare("[x1 (skip #)*] skip")
    assert isinstance(e, lm.Cat) and isinstance(e.left, lm.Bracket)


def test_lare_greedy_rhs():
    # x1:=x2*x3 is one multiplication; star the group to get iteration
    e = parse_lare("x1:=x2*x3")
    assert e == lm.Atom(fc.mul(1, 2, 3))
    e = parse_lare("[x4 # ((x1:=x2)* x3:=x3)]")
    assert isinstance(e.body.right.left, lm.Star)


@pytest.mark.parametrize("bad", [
    "x1 := ", "[x1 skip", "(skip", "x1 x2", "loop", "|", "x1:=x2+",
])
def test_lare_errors(bad):
    with pytest.raises(ParseError):
        parse_lare(bad)


def test_parse_loop_forms():
    c = parse_loop("loop x2 { x1 := x1 + x1 }")
    assert c == lm.LoopCmd(2, lm.Assign(fc.add(1, 1, 1)))
    c = parse_loop("choose { x2:=x3; x3:=x1+x1 } or skip")
    assert c == lm.Choose(
        lm.Seq(lm.Assign(fc.copy(2, 3)), lm.Assign(fc.add(3, 1, 1))),
        lm.SkipCmd())
    c = parse_loop("x1:=x2; x2:=x3; skip")
    assert isinstance(c, lm.Seq) and isinstance(c.first, lm.Seq)
    c = parse_loop("x1 := x2 * x3 ;")  # trailing semicolon tolerated
    assert c == lm.Assign(fc.mul(1, 2, 3))


def test_parse_loop_errors():
    with pytest.raises(ParseError) as ei:
        parse_loop("loop { }")
    assert "variable" in str(ei.value)
    with pytest.raises(ParseError):
        parse_loop("choose skip skip")


@given(expr_st(3))
@settings(max_examples=300)
def test_lare_round_trip(e):
    assert parse_lare(print_lare(e)) == e


@given(cmd_st(3))
@settings(max_examples=300)
def test_loop_round_trip(c):
    assert parse_loop(print_loop_cmd(c)) == c


def test_error_positions():
    with pytest.raises(ParseError) as ei:
        parse_lare("skip\nskip )")
    assert ei.value.line == 2 and ei.value.col == 6
