"""Loop-annotated regular expressions and the structured-language embedding.

A LARE term is a regular expression over atomic instructions plus the
cut symbol ✓ (written `#` in the DSL) and loop brackets `[l E]`.  Every
star must sit under some bracket, every iteration of a star body must
consume a ✓ visible at that bracket's level, and a bracket must not
enclose an assignment to its own bound variable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fc_model import Instr, K_HUGE, add, copy, mul, skip


class LareExpr:
    """Base class; concrete nodes are the frozen dataclasses below."""

    __slots__ = ()


@dataclass(frozen=True)
class Atom(LareExpr):
    instr: Instr


@dataclass(frozen=True)
class Check(LareExpr):
    """The cut symbol ✓; a no-op step counted by the enclosing bracket."""


@dataclass(frozen=True)
class Eps(LareExpr):
    pass


@dataclass(frozen=True)
class Cat(LareExpr):
    left: LareExpr
    right: LareExpr


@dataclass(frozen=True)
class Alt(LareExpr):
    left: LareExpr
    right: LareExpr


@dataclass(frozen=True)
class Star(LareExpr):
    body: LareExpr


@dataclass(frozen=True)
class Bracket(LareExpr):
    bound: int
    body: LareExpr


def cat_all(*parts: LareExpr) -> LareExpr:
    """Left-associative concatenation; empty input gives Eps."""
    if not parts:
        return Eps()
    out = parts[0]
    for p in parts[1:]:
        out = Cat(out, p)
    return out


def alt_all(*parts: LareExpr) -> LareExpr:
    if not parts:
        raise ValueError("alternation of nothing")
    out = parts[0]
    for p in parts[1:]:
        out = Alt(out, p)
    return out


# --- structured core language -------------------------------------------------

class StructuredCmd:
    __slots__ = ()


@dataclass(frozen=True)
class SkipCmd(StructuredCmd):
    pass


@dataclass(frozen=True)
class Assign(StructuredCmd):
    instr: Instr


@dataclass(frozen=True)
class Seq(StructuredCmd):
    first: StructuredCmd
    second: StructuredCmd


@dataclass(frozen=True)
class LoopCmd(StructuredCmd):
    bound: int
    body: StructuredCmd


@dataclass(frozen=True)
class Choose(StructuredCmd):
    left: StructuredCmd
    right: StructuredCmd


@dataclass(frozen=True)
class WfViolation:
    kind: str  # StarOutsideBracket | StarBodyCheckFree | BracketBoundAssigned
    where: str  # printed subexpression

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}"


def assigned_vars(e: LareExpr) -> frozenset[int]:
    """Assignment targets occurring anywhere in the expression."""
    if isinstance(e, Atom):
        t = e.instr.target
        return frozenset() if t is None else frozenset({t})
    if isinstance(e, (Check, Eps)):
        return frozenset()
    if isinstance(e, (Cat, Alt)):
        return assigned_vars(e.left) | assigned_vars(e.right)
    if isinstance(e, Star):
        return assigned_vars(e.body)
    if isinstance(e, Bracket):
        return assigned_vars(e.body)
    raise TypeError(f"not a LareExpr: {e!r}")


def can_skip_check(e: LareExpr) -> bool:
    """True iff e generates some string with no top-level ✓.

    ✓s under an inner bracket do not count: the bracket's trace
    semantics erases them, so they cannot pay for an outer star.
    """
    if isinstance(e, (Atom, Eps)):
        return True
    if isinstance(e, Check):
        return False
    if isinstance(e, Alt):
        return can_skip_check(e.left) or can_skip_check(e.right)
    if isinstance(e, Cat):
        return can_skip_check(e.left) and can_skip_check(e.right)
    if isinstance(e, Star):
        return True  # zero iterations
    if isinstance(e, Bracket):
        return True  # its ✓s are erased at this level
    raise TypeError(f"not a LareExpr: {e!r}")


def wf_check(e: LareExpr, n: int) -> list[WfViolation]:
    """Well-formedness: the three clauses, in discovery order.

    (a) every star under some bracket; (b) no star body can generate a
    string free of top-level ✓; (c) no bracket encloses an assignment
    to its own bound variable.
    """
    from .printing import print_lare  # local import to avoid a cycle

    out: list[WfViolation] = []

    def walk(e: LareExpr, under_bracket: bool) -> None:
        if isinstance(e, (Atom, Check, Eps)):
            return
        if isinstance(e, (Cat, Alt)):
            walk(e.left, under_bracket)
            walk(e.right, under_bracket)
            return
        if isinstance(e, Star):
            if not under_bracket:
                out.append(WfViolation("StarOutsideBracket", print_lare(e)))
            if can_skip_check(e.body):
                out.append(WfViolation("StarBodyCheckFree", print_lare(e)))
            walk(e.body, under_bracket)
            return
        if isinstance(e, Bracket):
            if not (1 <= e.bound <= n):
                raise ValueError(f"bracket bound x{e.bound} out of range")
            if e.bound in assigned_vars(e.body):
                out.append(WfViolation("BracketBoundAssigned", print_lare(e)))
            walk(e.body, True)
            return
        raise TypeError(f"not a LareExpr: {e!r}")

    walk(e, False)
    return out


def max_var(e: LareExpr) -> int:
    if isinstance(e, Atom):
        return e.instr.max_var()
    if isinstance(e, (Check, Eps)):
        return 0
    if isinstance(e, (Cat, Alt)):
        return max(max_var(e.left), max_var(e.right))
    if isinstance(e, Star):
        return max_var(e.body)
    if isinstance(e, Bracket):
        return max(e.bound, max_var(e.body))
    raise TypeError(f"not a LareExpr: {e!r}")


def embed_structured(c: StructuredCmd) -> LareExpr:
    """Translate a structured command; `loop xl {C}` becomes [l (✓ E)*]."""
    if isinstance(c, SkipCmd):
        return Atom(skip())
    if isinstance(c, Assign):
        return Atom(c.instr)
    if isinstance(c, Seq):
        return Cat(embed_structured(c.first), embed_structured(c.second))
    if isinstance(c, Choose):
        return Alt(embed_structured(c.left), embed_structured(c.right))
    if isinstance(c, LoopCmd):
        return Bracket(c.bound, Star(Cat(Check(), embed_structured(c.body))))
    raise TypeError(f"not a StructuredCmd: {c!r}")


def cmd_max_var(c: StructuredCmd) -> int:
    if isinstance(c, SkipCmd):
        return 0
    if isinstance(c, Assign):
        return c.instr.max_var()
    if isinstance(c, Seq):
        return max(cmd_max_var(c.first), cmd_max_var(c.second))
    if isinstance(c, Choose):
        return max(cmd_max_var(c.left), cmd_max_var(c.right))
    if isinstance(c, LoopCmd):
        return max(c.bound, cmd_max_var(c.body))
    raise TypeError(f"not a StructuredCmd: {c!r}")


def rewrite_huge(e: LareExpr, n: int) -> tuple[LareExpr, int, frozenset[int]]:
    """Replace every `x := **` by a copy from one shared HUGE variable.

    Returns (rewritten expression, effective variable count, huge vars).
    When no `**` occurs the expression is returned unchanged.
    """
    found = False

    def walk(e: LareExpr) -> LareExpr:
        nonlocal found
        if isinstance(e, Atom):
            if e.instr.kind == K_HUGE:
                found = True
                return Atom(copy(e.instr.r, n + 1))
            return e
        if isinstance(e, (Check, Eps)):
            return e
        if isinstance(e, Cat):
            return Cat(walk(e.left), walk(e.right))
        if isinstance(e, Alt):
            return Alt(walk(e.left), walk(e.right))
        if isinstance(e, Star):
            return Star(walk(e.body))
        if isinstance(e, Bracket):
            return Bracket(e.bound, walk(e.body))
        raise TypeError(f"not a LareExpr: {e!r}")

    rewritten = walk(e)
    if found:
        return rewritten, n + 1, frozenset({n + 1})
    return e, n, frozenset()
