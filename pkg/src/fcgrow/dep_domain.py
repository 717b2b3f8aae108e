"""The dependency-set abstract domain and the LARE abstract interpreter.

Abstract values are finite sets of facts about how final variable
magnitudes relate to initial ones:

  unary  (i, d, j)     x_j ends at least an identity / additive /
                       multiplicative / super-polynomial function of x_i,
                       for d = 1 / 1+ / 2 / 3;
  binary (i, j, k, l)  two simultaneous near-copy flows i->k and j->l,
                       the ingredient needed to detect doubling when two
                       copies of one value are re-summed.

Loops are handled compositionally through a reserved iteration variable
with index n+1: the loop-correction operator records that accumulating
variables grow with the iteration count, and the surrounding bracket
substitutes its bound variable for n+1.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from . import lare_model as lm
from .errors import AnalysisError, IllFormedLare
from .fc_model import (
    Instr,
    K_ADD, K_CHECK, K_COPY, K_HUGE, K_MUL, K_SKIP, K_WADD, K_WCOPY, K_WMUL,
)

# Dependency types, ordered 1 < 1+ < 2 < 3; join is max.
D1, D1P, D2, D3 = 1, 2, 3, 4
_TYPE_NAMES = {D1: "1", D1P: "1p", D2: "2", D3: "3"}
_TYPE_BY_NAME = {v: k for k, v in _TYPE_NAMES.items()}

Dep = tuple  # (i, d, j) unary, (i, j, k, l) binary
DepSet = frozenset


def type_name(d: int) -> str:
    return _TYPE_NAMES[d]


def type_of_name(s: str) -> int:
    return _TYPE_BY_NAME[s]


def is_approx_one(d: int) -> bool:
    """The predicate written d ~ 1: identity or additive."""
    return d in (D1, D1P)


def unary(i: int, d: int, j: int) -> Dep:
    return (i, d, j)


def binary(i: int, j: int, k: int, l: int) -> Dep:
    if i == j and k == l:
        raise ValueError("binary dependency needs i!=j or k!=l")
    return (i, j, k, l)


def is_unary(d: Dep) -> bool:
    return len(d) == 3


def swap(d: Dep) -> Dep:
    """The other orientation of a binary dependency (one semantic fact)."""
    i, j, k, l = d
    return (j, i, l, k)


def format_dep(d: Dep) -> str:
    if is_unary(d):
        i, t, j = d
        return f"{i} -{_TYPE_NAMES[t]}-> {j}"
    i, j, k, l = d
    return f"({i},{j}) -> ({k},{l})"


def format_depset(s: DepSet) -> str:
    return "\n".join(format_dep(d) for d in sorted(s, key=lambda d: (len(d), d)))


def universe_size(n: int) -> int:
    """Upper bound on distinct facts over indices 1..n+1."""
    m = n + 1
    return m * m * 4 + m ** 4


def check_depset(s: DepSet, n: int) -> None:
    """Assert the binary proviso and orientation-swap closure."""
    unaries: dict[tuple[int, int], set[int]] = {}
    for d in s:
        if is_unary(d):
            i, t, j = d
            if not (1 <= i <= n + 1 and 1 <= j <= n + 1 and t in _TYPE_NAMES):
                raise AnalysisError(f"malformed unary {d}")
            unaries.setdefault((i, j), set()).add(t)
    for d in s:
        if is_unary(d):
            continue
        i, j, k, l = d
        if i == j and k == l:
            raise AnalysisError(f"degenerate binary {d}")
        if swap(d) not in s:
            raise AnalysisError(f"missing swap orientation of {d}")
        ok_left = any(is_approx_one(t) for t in unaries.get((i, k), ()))
        ok_right = any(is_approx_one(t) for t in unaries.get((j, l), ()))
        if not (ok_left and ok_right):
            raise AnalysisError(f"binary {format_dep(d)} violates the proviso")


def addbdeps(s: DepSet) -> DepSet:
    """Close a set under justified binary dependencies."""
    near = [(i, j) for (i, t, j) in (d for d in s if is_unary(d))
            if is_approx_one(t)]
    out = set(s)
    for (i, k) in near:
        for (j, l) in near:
            if i != j or k != l:
                out.add((i, j, k, l))
    return frozenset(out)


def identity_set(n: int) -> DepSet:
    return addbdeps(frozenset((i, D1, i) for i in range(1, n + 2)))


def compose(d1: Dep, d2: Dep) -> Dep | None:
    """Product of two dependencies; None when undefined."""
    if is_unary(d1):
        i, a, j = d1
        if is_unary(d2):
            j2, b, k = d2
            if j2 != j:
                return None
            return (i, max(a, b), k)
        j1, j2, k, k2 = d2
        if j1 == j2 == j and is_approx_one(a):
            return (i, i, k, k2)
        return None
    i, i2, j, j2 = d1
    if is_unary(d2):
        j1, a, k = d2
        if j == j2 == j1 and is_approx_one(a):
            return (i, i2, k, k)
        return None
    m1, m2, k, k2 = d2
    if (m1, m2) != (j, j2):
        return None
    if i != i2 or k != k2:
        return (i, i2, k, k2)
    return (i, D2, k)


def compose_sets(s: DepSet, t: DepSet) -> DepSet:
    """Component-wise product {d1 . d2 | defined}, middle-indexed."""
    un_by_src: dict[int, list[tuple[int, int]]] = defaultdict(list)
    bn_by_src: dict[tuple[int, int], list[tuple[int, int]]] = defaultdict(list)
    for d in t:
        if is_unary(d):
            j, b, k = d
            un_by_src[j].append((b, k))
        else:
            j, j2, k, k2 = d
            bn_by_src[(j, j2)].append((k, k2))
    out = set()
    for d in s:
        if is_unary(d):
            i, a, j = d
            for b, k in un_by_src.get(j, ()):
                out.add((i, max(a, b), k))
            if is_approx_one(a):
                # the (j,j)-sourced binary already has k != k2
                for k, k2 in bn_by_src.get((j, j), ()):
                    out.add((i, i, k, k2))
        else:
            i, i2, j, j2 = d
            if j == j2:
                # here i != i2, by the proviso on d
                for b, k in un_by_src.get(j, ()):
                    if is_approx_one(b):
                        out.add((i, i2, k, k))
            for k, k2 in bn_by_src.get((j, j2), ()):
                if i != i2 or k != k2:
                    out.add((i, i2, k, k2))
                else:
                    out.add((i, D2, k))
    return frozenset(out)


def lfp(s: DepSet, n: int) -> DepSet:
    """Least fixpoint of f(X) = Id ∪ X ∪ X·s, by delta iteration."""
    bound = universe_size(n)
    acc = set(identity_set(n))
    frontier = frozenset(acc)
    rounds = 0
    while frontier:
        rounds += 1
        if rounds > bound + 1:
            raise AnalysisError("fixpoint iteration exceeded the universe size")
        grown = compose_sets(frontier, s)
        frontier = frozenset(d for d in grown if d not in acc)
        acc |= frontier
        if len(acc) > bound:
            raise AnalysisError("dependency set exceeded the universe size")
    return frozenset(acc)


def loop_correct(s: DepSet, n: int) -> DepSet:
    """Add the implicit dependence of accumulators on the iteration count.

    A self-dependency x_i -1+-> x_i yields x_{n+1} -2-> x_i; a self
    x_i -2-> x_i yields x_{n+1} -3-> x_i.  Everything else contributes
    nothing, and the input set is kept.
    """
    it = n + 1
    out = set(s)
    for d in s:
        if is_unary(d):
            i, t, j = d
            if i == j and i <= n:
                if t == D1P:
                    out.add((it, D2, i))
                elif t == D2:
                    out.add((it, D3, i))
    return frozenset(out)


def star_abs(s: DepSet, n: int) -> DepSet:
    """Abstract iteration: LC(F) · F with F the loop-body closure."""
    f = lfp(s, n)
    return compose_sets(loop_correct(f, n), f)


def bracket_subst(s: DepSet, bound: int, n: int) -> DepSet:
    """Substitute the bracket's bound variable for the iteration dummy.

    Unary facts sourced at n+1 (other than its identity) move to the
    bound variable; binary facts mentioning n+1 stay as they are — the
    only near-copy fact out of n+1 is its identity, so they remain
    justified.
    """
    it = n + 1
    out = set()
    for d in s:
        if is_unary(d) and d[0] == it and d[2] <= n:
            out.add((bound, d[1], d[2]))
        else:
            out.add(d)
    return frozenset(out)


def atomic_deps(instr: Instr, n: int) -> DepSet:
    """The dependency set of one instruction over indices 1..n+1.

    Weak assignments are abstracted exactly like the strong forms, and
    the iteration dummy always carries its identity.  `x := **` must be
    rewritten by the front end before analysis.
    """
    if instr.max_var() > n:
        raise ValueError(f"operand out of range in {instr} (n={n})")
    kind = instr.strong().kind
    if kind in (K_SKIP, K_CHECK):
        return identity_set(n)
    if kind == K_HUGE:
        raise ValueError("huge instruction reaches the abstract domain; "
                         "rewrite it to a copy from the HUGE variable first")
    r = instr.r
    ident_off = {(i, D1, i) for i in range(1, n + 2) if i != r}
    if kind == K_COPY:
        core = {(instr.s, D1, r)}
    elif kind == K_ADD:
        if instr.s == instr.t:
            core = {(instr.s, D2, r)}
        else:
            core = {(instr.s, D1P, r), (instr.t, D1P, r)}
    elif kind == K_MUL:
        core = {(instr.s, D2, r), (instr.t, D2, r)}
    else:  # pragma: no cover
        raise AssertionError(kind)
    return addbdeps(frozenset(core | ident_off))


def deps_of(e: lm.LareExpr, n: int) -> DepSet:
    """Structural dependency semantics (no well-formedness gate)."""
    if isinstance(e, lm.Atom):
        return atomic_deps(e.instr, n)
    if isinstance(e, lm.Check):
        return identity_set(n)
    if isinstance(e, lm.Eps):
        return identity_set(n)
    if isinstance(e, lm.Alt):
        return deps_of(e.left, n) | deps_of(e.right, n)
    if isinstance(e, lm.Cat):
        return compose_sets(deps_of(e.left, n), deps_of(e.right, n))
    if isinstance(e, lm.Star):
        return star_abs(deps_of(e.body, n), n)
    if isinstance(e, lm.Bracket):
        return bracket_subst(deps_of(e.body, n), e.bound, n)
    raise TypeError(f"not a LareExpr: {e!r}")


def analyze_lare(e: lm.LareExpr, n: int) -> DepSet:
    """Dependency set of a well-formed expression."""
    violations = lm.wf_check(e, n)
    if violations:
        raise IllFormedLare(violations)
    return deps_of(e, n)


# --- classification ------------------------------------------------------------

POLY = "polynomial"
SUPERPOLY = "superpolynomial"
UNBOUNDED = "unbounded"
_SEVERITY = {POLY: 0, SUPERPOLY: 1, UNBOUNDED: 2}


@dataclass(frozen=True)
class VarGrowth:
    var: int
    classification: str
    witnesses: tuple[Dep, ...] = ()


@dataclass(frozen=True)
class GrowthReport:
    per_var: tuple[VarGrowth, ...]

    def of(self, var: int) -> VarGrowth:
        for vg in self.per_var:
            if vg.var == var:
                return vg
        raise KeyError(var)

    def classification(self, var: int) -> str:
        return self.of(var).classification

    def all_polynomial(self) -> bool:
        return all(vg.classification == POLY for vg in self.per_var)


def classify(s: DepSet, n: int, huge_vars: frozenset[int] = frozenset()) -> GrowthReport:
    """Classify each reported variable from a top-level dependency set.

    A variable fed (at any type) from a HUGE variable is unbounded; one
    with an incoming type-3 fact is at least exponential in the worst
    case; otherwise a polynomial bound exists.
    """
    it = n + 1
    for d in s:
        if is_unary(d) and d[0] == it and d[2] <= n:
            raise AnalysisError(
                f"residual iteration-variable dependency {format_dep(d)}; "
                "a star escaped its bracket")
    rows = []
    for j in range(1, n + 1):
        if j in huge_vars:
            continue
        from_huge = tuple(sorted(
            d for d in s if is_unary(d) and d[0] in huge_vars and d[2] == j))
        if from_huge:
            rows.append(VarGrowth(j, UNBOUNDED, from_huge))
            continue
        exp = tuple(sorted(
            d for d in s if is_unary(d) and d[1] == D3 and d[2] == j))
        if exp:
            rows.append(VarGrowth(j, SUPERPOLY, exp))
        else:
            rows.append(VarGrowth(j, POLY))
    return GrowthReport(tuple(rows))


def worst_report(reports: list[GrowthReport]) -> GrowthReport:
    """Per-variable worst case across (entry, exit) pairs."""
    if not reports:
        return GrowthReport(())
    by_var: dict[int, VarGrowth] = {}
    for rep in reports:
        for vg in rep.per_var:
            cur = by_var.get(vg.var)
            if cur is None or _SEVERITY[vg.classification] > _SEVERITY[cur.classification]:
                by_var[vg.var] = vg
    return GrowthReport(tuple(by_var[v] for v in sorted(by_var)))
