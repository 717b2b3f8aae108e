"""Parsers for the three input languages: FC, LARE, and Loop.

FC is line oriented with `#` comments.  LARE and Loop use a shared
tokenizer and recursive descent.  In a LARE assignment the right-hand
side is consumed greedily, so `x1:=x2*x3` is a multiplication; write
`(x1:=x2)* x3` to star the copy.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import fc_model as fc
from . import lare_model as lm
from .errors import ParseError
from .fc_model import Arc, FlowchartProgram, Instr, Loop


# --- FC (line oriented) ---------------------------------------------------------

_INSTR_ARITY = {"skip": 0, "check": 0, "huge": 1, "copy": 2, "wcopy": 2,
                "add": 3, "mul": 3, "wadd": 3, "wmul": 3}


def _var_operand(tok: str, lineno: int, col: int) -> int:
    m = re.fullmatch(r"x?(\d+)", tok)
    if not m or int(m.group(1)) < 1:
        raise ParseError(f"bad variable operand {tok!r}", lineno, col, "x<k> or <k>")
    return int(m.group(1))


def parse_fc(text: str) -> FlowchartProgram:
    n = None
    entries: list[str] = []
    exits: list[str] = []
    arcs: list[Arc] = []
    loops: list[Loop] = []
    nodes: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        if head == "vars":
            if len(toks) != 2 or not toks[1].isdigit() or int(toks[1]) < 1:
                raise ParseError("vars needs one positive count", lineno, 1)
            n = int(toks[1])
        elif head == "entry":
            if len(toks) < 2:
                raise ParseError("entry needs at least one node", lineno, 1)
            entries.extend(toks[1:])
        elif head == "exit":
            if len(toks) < 2:
                raise ParseError("exit needs at least one node", lineno, 1)
            exits.extend(toks[1:])
        elif head == "arc":
            if len(toks) < 5:
                raise ParseError("arc needs ID SRC DST INSTR", lineno, 1)
            aid, src, dst, kind = toks[1], toks[2], toks[3], toks[4]
            if kind not in _INSTR_ARITY:
                raise ParseError(f"unknown instruction {kind!r}", lineno, 1,
                                 "|".join(sorted(_INSTR_ARITY)))
            ops = toks[5:]
            if len(ops) != _INSTR_ARITY[kind]:
                raise ParseError(f"{kind} takes {_INSTR_ARITY[kind]} operand(s)",
                                 lineno, 1)
            vals = [_var_operand(o, lineno, 1) for o in ops]
            vals += [0] * (3 - len(vals))
            try:
                instr = Instr(kind, *vals)
            except ValueError as exc:
                raise ParseError(str(exc), lineno, 1) from None
            arcs.append(Arc(aid, src, dst, instr))
            nodes |= {src, dst}
        elif head == "loop":
            # loop LID parent (LID|root) bound xk cut ID+ arcs ID+
            try:
                lid = toks[1]
                if toks[2] != "parent":
                    raise IndexError
                parent = toks[3]
                if toks[4] != "bound":
                    raise IndexError
                bound = _var_operand(toks[5], lineno, 1)
                if toks[6] != "cut":
                    raise IndexError
                split = toks.index("arcs")
                cut = toks[7:split]
                arc_ids = toks[split + 1:]
                if not arc_ids:
                    raise IndexError
            except (IndexError, ValueError):
                raise ParseError(
                    "loop syntax: loop LID parent P bound xk cut ID* arcs ID+",
                    lineno, 1) from None
            loops.append(Loop(lid, parent, bound,
                              frozenset(arc_ids), frozenset(cut)))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, 1,
                             "vars|entry|exit|arc|loop")
    if n is None:
        raise ParseError("missing vars declaration", 1, 1)
    nodes |= set(entries) | set(exits)
    try:
        return FlowchartProgram(n, frozenset(nodes), tuple(arcs),
                                frozenset(entries), frozenset(exits),
                                tuple(loops))
    except ValueError as exc:
        raise ParseError(str(exc), 1, 1) from None


# --- shared tokenizer for LARE and Loop ------------------------------------------

@dataclass(frozen=True)
class _Tok:
    kind: str  # var, num, op, word, eof
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<comment>\#\#[^\n]*)"          # ## to end of line (LARE uses bare #)
    r"|(?P<var>x\d+)"
    r"|(?P<op>:=|<=|\*\*|[()\[\]|*+;{}#])"
    r"|(?P<word>[A-Za-z_][A-Za-z_0-9]*)"
)


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise ParseError(f"stray character {text[i]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        i = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Cursor:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text:
            raise ParseError(f"unexpected {t.text or 'end of input'!r}",
                             t.line, t.col, repr(text))
        return self.next()

    def fail(self, what: str) -> ParseError:
        t = self.peek()
        return ParseError(f"unexpected {t.text or 'end of input'!r}",
                          t.line, t.col, what)


def _var(c: _Cursor) -> int:
    t = c.peek()
    if t.kind != "var":
        raise c.fail("a variable like x2")
    c.next()
    return int(t.text[1:])


def _assign_atom(c: _Cursor) -> Instr:
    """VAR (:=|<=) RHS with the RHS consumed greedily."""
    r = _var(c)
    opt = c.peek()
    if opt.text not in (":=", "<="):
        raise c.fail("':=' or '<='")
    weak = opt.text == "<="
    c.next()
    t = c.peek()
    if t.text == "**":
        c.next()
        if weak:
            raise ParseError("weak `**` assignment is not a form", t.line, t.col)
        return fc.huge(r)
    s = _var(c)
    t = c.peek()
    if t.text == "+" and c.toks[c.i + 1].kind == "var":
        c.next()
        u = _var(c)
        return fc.wadd(r, s, u) if weak else fc.add(r, s, u)
    if t.text == "*" and c.toks[c.i + 1].kind == "var":
        c.next()
        u = _var(c)
        return fc.wmul(r, s, u) if weak else fc.mul(r, s, u)
    return fc.wcopy(r, s) if weak else fc.copy(r, s)


# --- LARE -------------------------------------------------------------------------

def parse_lare(text: str) -> lm.LareExpr:
    c = _Cursor(_tokenize(text))
    e = _alt(c)
    if c.peek().kind != "eof":
        raise c.fail("end of input")
    return e


def _alt(c: _Cursor) -> lm.LareExpr:
    e = _cat(c)
    while c.peek().text == "|":
        c.next()
        e = lm.Alt(e, _cat(c))
    return e


_ATOM_STARTERS = {"(", "[", "#", "skip", "eps", "check"}


def _cat(c: _Cursor) -> lm.LareExpr:
    e = _postfix(c)
    while True:
        t = c.peek()
        if t.text in _ATOM_STARTERS or t.kind == "var":
            e = lm.Cat(e, _postfix(c))
        else:
            return e


def _postfix(c: _Cursor) -> lm.LareExpr:
    e = _primary(c)
    while c.peek().text == "*":
        c.next()
        e = lm.Star(e)
    return e


def _primary(c: _Cursor) -> lm.LareExpr:
    t = c.peek()
    if t.text == "(":
        c.next()
        e = _alt(c)
        c.expect(")")
        return e
    if t.text == "[":
        c.next()
        bound = _var(c)
        e = _alt(c)
        c.expect("]")
        return lm.Bracket(bound, e)
    if t.text == "#":
        c.next()
        return lm.Check()
    if t.text == "skip":
        c.next()
        return lm.Atom(fc.skip())
    if t.text == "check":
        c.next()
        return lm.Atom(fc.check())
    if t.text == "eps":
        c.next()
        return lm.Eps()
    if t.kind == "var":
        return lm.Atom(_assign_atom(c))
    raise c.fail("an atom, '(', or '['")


# --- Loop (structured core language) ----------------------------------------------

def parse_loop(text: str) -> lm.StructuredCmd:
    c = _Cursor(_tokenize(text))
    cmd = _seq(c)
    if c.peek().kind != "eof":
        raise c.fail("end of input")
    return cmd


def _seq(c: _Cursor) -> lm.StructuredCmd:
    cmd = _item(c)
    while c.peek().text == ";":
        c.next()
        if c.peek().text in ("}", "") or c.peek().kind == "eof":
            break  # tolerate a trailing semicolon
        cmd = lm.Seq(cmd, _item(c))
    return cmd


def _item(c: _Cursor) -> lm.StructuredCmd:
    t = c.peek()
    if t.text == "skip":
        c.next()
        return lm.SkipCmd()
    if t.text == "{":
        c.next()
        cmd = _seq(c)
        c.expect("}")
        return cmd
    if t.text == "loop":
        c.next()
        bound = _var(c)
        c.expect("{")
        body = _seq(c)
        c.expect("}")
        return lm.LoopCmd(bound, body)
    if t.text == "choose":
        c.next()
        left = _item(c)
        c.expect("or")
        right = _item(c)
        return lm.Choose(left, right)
    if t.kind == "var":
        return lm.Assign(_assign_atom(c))
    raise c.fail("skip, an assignment, loop, choose, or '{'")
