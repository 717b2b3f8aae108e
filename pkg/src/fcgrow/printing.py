"""Canonical printers for the three input languages.

parse(print(ast)) is the identity on every AST; the printers emit the
canonical surface form (parentheses only where precedence needs them).
"""

from __future__ import annotations

from . import fc_model as fc
from . import lare_model as lm
from .fc_model import FlowchartProgram, Instr


def print_instr_assign(i: Instr) -> str:
    """LARE/structured assignment form, e.g. `x1:=x2+x3` or `x1<=x2`."""
    op = "<=" if i.is_weak else ":="
    k = i.strong().kind
    if k == fc.K_COPY:
        rhs = f"x{i.s}"
    elif k == fc.K_ADD:
        rhs = f"x{i.s}+x{i.t}"
    elif k == fc.K_MUL:
        rhs = f"x{i.s}*x{i.t}"
    elif k == fc.K_HUGE:
        rhs = "**"
    else:
        raise ValueError(f"{i.kind} is not an assignment")
    return f"x{i.r}{op}{rhs}"


def _atom_str(i: Instr) -> str:
    if i.kind == fc.K_SKIP:
        return "skip"
    if i.kind == fc.K_CHECK:
        return "check"
    return print_instr_assign(i)


# precedence: star > concatenation > alternation
_ALT, _CAT, _POST = 0, 1, 2


def print_lare(e: lm.LareExpr) -> str:
    def go(e: lm.LareExpr, ctx: int) -> str:
        if isinstance(e, lm.Atom):
            return _atom_str(e.instr)
        if isinstance(e, lm.Check):
            return "#"
        if isinstance(e, lm.Eps):
            return "eps"
        if isinstance(e, lm.Alt):
            s = f"{go(e.left, _ALT)} | {go(e.right, _ALT + 1)}"
            return f"({s})" if ctx > _ALT else s
        if isinstance(e, lm.Cat):
            s = f"{go(e.left, _CAT)} {go(e.right, _CAT + 1)}"
            return f"({s})" if ctx > _CAT else s
        if isinstance(e, lm.Star):
            body = go(e.body, _POST + 1)
            # a starred assignment atom needs parens (`x1:=x2* x3` would
            # reparse as a multiplication), and `**` would lex as huge
            if isinstance(e.body, lm.Star) or (
                    isinstance(e.body, lm.Atom)
                    and e.body.instr.kind not in (fc.K_SKIP, fc.K_CHECK)):
                body = f"({body})"
            return f"{body}*"
        if isinstance(e, lm.Bracket):
            return f"[x{e.bound} {go(e.body, _ALT)}]"
        raise TypeError(f"not a LareExpr: {e!r}")

    return go(e, _ALT)


def print_loop_cmd(c: lm.StructuredCmd) -> str:
    def go(c: lm.StructuredCmd, in_seq: bool) -> str:
        if isinstance(c, lm.SkipCmd):
            return "skip"
        if isinstance(c, lm.Assign):
            return print_instr_assign(c.instr)
        if isinstance(c, lm.Seq):
            # the surface form re-associates ';' to the left, so a
            # right-nested sequence keeps its braces
            second = go(c.second, True)
            if isinstance(c.second, lm.Seq):
                second = f"{{ {second} }}"
            return f"{go(c.first, True)}; {second}"
        if isinstance(c, lm.LoopCmd):
            return f"loop x{c.bound} {{ {go(c.body, True)} }}"
        if isinstance(c, lm.Choose):
            return f"choose {{ {go(c.left, True)} }} or {{ {go(c.right, True)} }}"
        raise TypeError(f"not a StructuredCmd: {c!r}")

    return go(c, False)


def _fc_instr_str(i: Instr) -> str:
    ops = {0: "", 1: f" x{i.r}", 2: f" x{i.r} x{i.s}", 3: f" x{i.r} x{i.s} x{i.t}"}
    arity = {fc.K_SKIP: 0, fc.K_CHECK: 0, fc.K_HUGE: 1,
             fc.K_COPY: 2, fc.K_WCOPY: 2,
             fc.K_ADD: 3, fc.K_MUL: 3, fc.K_WADD: 3, fc.K_WMUL: 3}[i.kind]
    return f"{i.kind}{ops[arity]}"


def print_fc(p: FlowchartProgram) -> str:
    lines = [f"vars {p.n}"]
    lines.append("entry " + " ".join(sorted(p.entries)))
    lines.append("exit " + " ".join(sorted(p.exits)))
    for a in p.arcs:
        lines.append(f"arc {a.id} {a.src} {a.dst} {_fc_instr_str(a.instr)}")
    for lp in p.loops:
        cut = " ".join(sorted(lp.cutset))
        arcs = " ".join(sorted(lp.arcs))
        lines.append(f"loop {lp.id} parent {lp.parent} bound x{lp.bound} "
                     f"cut {cut} arcs {arcs}")
    return "\n".join(lines) + "\n"
