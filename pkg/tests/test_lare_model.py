"""Well-formedness, the ✓-skipping predicate, and the embedding."""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from fcgrow import fc_model as fc
from fcgrow import lare_model as lm
from fcgrow.lare_model import (
    Alt, Atom, Bracket, Cat, Check, Eps, Star,
    assigned_vars, can_skip_check, embed_structured, wf_check,
)
from fcgrow.parsing import parse_lare, parse_loop

A = Atom(fc.copy(1, 1))
B = Atom(fc.copy(2, 2))
DBL = Atom(fc.add(1, 1, 1))


def kinds(e, n=4):
    return [v.kind for v in wf_check(e, n)]


def test_paper_invalid_star_nesting():
    # (a (✓ b)* d)* : the outer star body generates the ✓-free string ad
    e = Star(Cat(A, Cat(Star(Cat(Check(), B)), Atom(fc.copy(3, 3)))))
    ks = kinds(e)
    assert "StarBodyCheckFree" in ks and "StarOutsideBracket" in ks


def test_canonical_loop_is_wf():
    assert kinds(Bracket(1, Star(Cat(Check(), B)))) == []


def test_inner_bracket_check_does_not_count():
    # [1 ([2 ✓ a])*] : the inner bracket erases its ✓
    e = Bracket(1, Star(Bracket(2, Cat(Check(), Atom(fc.copy(3, 3))))))
    assert kinds(e) == ["StarBodyCheckFree"]


def test_bound_assignment_flagged():
    e = Bracket(1, Star(Cat(Check(), DBL)))
    assert kinds(e) == ["BracketBoundAssigned"]
    assert kinds(Bracket(1, Atom(fc.huge(1)))) == ["BracketBoundAssigned"]


def test_star_eps_is_flagged():
    assert kinds(Bracket(1, Star(Eps()))) == ["StarBodyCheckFree"]


@pytest.mark.parametrize("e,expected", [
    (Check(), False),
    (Cat(Check(), A), False),
    (Alt(Check(), A), True),
    (A, True),
    (Eps(), True),
    (Star(Check()), True),
    (Bracket(2, Check()), True),
    (Cat(A, Alt(Check(), Cat(Check(), Check()))), False),
])
def test_can_skip_check_cases(e, expected):
    assert can_skip_check(e) is expected


def test_assigned_vars():
    assert assigned_vars(Atom(fc.add(3, 1, 1))) == {3}
    assert assigned_vars(Check()) == frozenset()
    assert assigned_vars(Alt(Atom(fc.copy(2, 3)), Atom(fc.skip()))) == {2}
    assert assigned_vars(Bracket(1, Cat(DBL, Atom(fc.huge(4))))) == {1, 4}


def test_embedding_rules():
    assert embed_structured(parse_loop("skip")) == Atom(fc.skip())
    got = embed_structured(parse_loop("loop x2 { x1 := x1 + x1 }"))
    assert got == Bracket(2, Star(Cat(Check(), DBL)))
    got = embed_structured(parse_loop("choose { x2:=x3; x3:=x1+x1 } or skip"))
    assert got == Alt(Cat(Atom(fc.copy(2, 3)), Atom(fc.add(3, 1, 1))),
                      Atom(fc.skip()))


# --- strategies ----------------------------------------------------------------

def assign_st(n):
    idx = st.integers(1, n)
    return st.one_of(
        st.builds(fc.copy, idx, idx),
        st.builds(fc.add, idx, idx, idx),
        st.builds(fc.mul, idx, idx, idx),
        st.builds(fc.wcopy, idx, idx),
    )


def instr_st(n):
    return st.one_of(st.just(fc.skip()), assign_st(n))


def cmd_st(n, depth=3):
    base = st.one_of(st.just(lm.SkipCmd()), st.builds(lm.Assign, assign_st(n)))

    def extend(children):
        loops = st.integers(1, n).flatmap(
            lambda b: children.map(
                lambda c: lm.LoopCmd(b, _strip_assigns(c, b))))
        return st.one_of(st.builds(lm.Seq, children, children),
                         st.builds(lm.Choose, children, children),
                         loops)

    return st.recursive(base, extend, max_leaves=depth * 3)


def _strip_assigns(c, bound):
    """Make a command legal as the body of `loop x_bound`."""
    if isinstance(c, lm.Assign) and c.instr.target == bound:
        return lm.SkipCmd()
    if isinstance(c, lm.Seq):
        return lm.Seq(_strip_assigns(c.first, bound),
                      _strip_assigns(c.second, bound))
    if isinstance(c, lm.Choose):
        return lm.Choose(_strip_assigns(c.left, bound),
                         _strip_assigns(c.right, bound))
    if isinstance(c, lm.LoopCmd):
        return lm.LoopCmd(c.bound, _strip_assigns(c.body, bound))
    return c


def expr_st(n, with_brackets=True):
    base = st.one_of(st.just(Eps()), st.just(Check()),
                     st.builds(Atom, instr_st(n)))

    def extend(children):
        opts = [st.builds(Cat, children, children),
                st.builds(Alt, children, children),
                st.builds(Star, children)]
        if with_brackets:
            opts.append(st.builds(Bracket, st.integers(1, n), children))
        return st.one_of(*opts)

    return st.recursive(base, extend, max_leaves=8)


@given(cmd_st(4))
@settings(max_examples=200)
def test_embedding_always_well_formed(cmd):
    e = embed_structured(cmd)
    assert wf_check(e, 4) == []


@given(expr_st(3))
@settings(max_examples=200)
def test_wf_invariant_under_alt_commute_and_cat_reassoc(e):
    def commute(e):
        if isinstance(e, Alt):
            return Alt(commute(e.right), commute(e.left))
        if isinstance(e, Cat):
            return Cat(commute(e.left), commute(e.right))
        if isinstance(e, Star):
            return Star(commute(e.body))
        if isinstance(e, Bracket):
            return Bracket(e.bound, commute(e.body))
        return e

    def reassoc(e):
        if isinstance(e, Cat) and isinstance(e.left, Cat):
            return reassoc(Cat(e.left.left, Cat(e.left.right, e.right)))
        if isinstance(e, Cat):
            return Cat(reassoc(e.left), reassoc(e.right))
        if isinstance(e, Alt):
            return Alt(reassoc(e.left), reassoc(e.right))
        if isinstance(e, Star):
            return Star(reassoc(e.body))
        if isinstance(e, Bracket):
            return Bracket(e.bound, reassoc(e.body))
        return e

    base = sorted(v.kind for v in wf_check(e, 3))
    assert sorted(v.kind for v in wf_check(commute(e), 3)) == base
    assert sorted(v.kind for v in wf_check(reassoc(e), 3)) == base


def _words(e, fuel=2):
    """The scoped string language: inner-bracket ✓s erased, stars unrolled
    0..fuel times.  Zero unrollings suffice for the ✓-free-word question."""
    if isinstance(e, Atom):
        return {("a",)}
    if isinstance(e, Check):
        return {("c",)}
    if isinstance(e, Eps):
        return {()}
    if isinstance(e, Cat):
        return {l + r for l in _words(e.left, fuel) for r in _words(e.right, fuel)}
    if isinstance(e, Alt):
        return _words(e.left, fuel) | _words(e.right, fuel)
    if isinstance(e, Star):
        out = {()}
        for _ in range(fuel):
            out |= {w + v for w in out for v in _words(e.body, fuel)}
        return out
    if isinstance(e, Bracket):
        return {tuple(t for t in w if t != "c") for w in _words(e.body, fuel)}
    raise TypeError(repr(e))


@given(expr_st(3))
@settings(max_examples=300)
def test_can_skip_check_matches_brute_force_language(e):
    has_checkfree_word = any(all(t != "c" for t in w) for w in _words(e))
    assert can_skip_check(e) == has_checkfree_word
