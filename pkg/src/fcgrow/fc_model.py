"""Data model and validation for loop-annotated flowchart programs.

A program is a CFG with one instruction per arc, designated entry/exit
nodes, and a loop forest: each loop is a set of arcs (inclusive of its
descendants' arcs) with a bound variable and a cut set.  Executions may
traverse at most x_bound cut arcs per run of a loop; validation checks
the structural side of that contract so that conversion and analysis can
rely on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

ROOT = "root"

# Instruction kinds.  Weak forms assign a nondeterministic value in
# 0..rhs; `huge` has no bound at all; `check` never assigns.
K_SKIP = "skip"
K_COPY = "copy"
K_ADD = "add"
K_MUL = "mul"
K_HUGE = "huge"
K_WCOPY = "wcopy"
K_WADD = "wadd"
K_WMUL = "wmul"
K_CHECK = "check"

_ARITY = {
    K_SKIP: 0, K_CHECK: 0, K_HUGE: 1,
    K_COPY: 2, K_WCOPY: 2,
    K_ADD: 3, K_MUL: 3, K_WADD: 3, K_WMUL: 3,
}
_WEAK_TO_STRONG = {K_WCOPY: K_COPY, K_WADD: K_ADD, K_WMUL: K_MUL}


@dataclass(frozen=True, order=True)
class Instr:
    """One atomic instruction; operands are 1-based variable indices."""

    kind: str
    r: int = 0  # assignment target (0 when the kind never assigns)
    s: int = 0
    t: int = 0

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise ValueError(f"unknown instruction kind {self.kind!r}")
        ops = [self.r, self.s, self.t][: _ARITY[self.kind]]
        if any(o < 1 for o in ops):
            raise ValueError(f"bad operands for {self.kind}: {ops}")

    @property
    def target(self) -> int | None:
        """The assigned variable, or None for skip/check."""
        return self.r if _ARITY[self.kind] >= 1 else None

    @property
    def sources(self) -> tuple[int, ...]:
        if self.kind in (K_COPY, K_WCOPY):
            return (self.s,)
        if self.kind in (K_ADD, K_MUL, K_WADD, K_WMUL):
            return (self.s, self.t)
        return ()

    @property
    def is_weak(self) -> bool:
        return self.kind in _WEAK_TO_STRONG

    def strong(self) -> "Instr":
        """The deterministic instruction a weak form is abstracted as."""
        if self.is_weak:
            return replace(self, kind=_WEAK_TO_STRONG[self.kind])
        return self

    def max_var(self) -> int:
        return max([self.r, self.s, self.t][: _ARITY[self.kind]], default=0)

    def __str__(self) -> str:
        ops = " ".join(f"x{o}" for o in [self.r, self.s, self.t][: _ARITY[self.kind]])
        return f"{self.kind} {ops}".strip()


def skip() -> Instr:
    return Instr(K_SKIP)


def check() -> Instr:
    return Instr(K_CHECK)


def copy(r: int, s: int) -> Instr:
    return Instr(K_COPY, r, s)


def add(r: int, s: int, t: int) -> Instr:
    return Instr(K_ADD, r, s, t)


def mul(r: int, s: int, t: int) -> Instr:
    return Instr(K_MUL, r, s, t)


def huge(r: int) -> Instr:
    return Instr(K_HUGE, r)


def wcopy(r: int, s: int) -> Instr:
    return Instr(K_WCOPY, r, s)


def wadd(r: int, s: int, t: int) -> Instr:
    return Instr(K_WADD, r, s, t)


def wmul(r: int, s: int, t: int) -> Instr:
    return Instr(K_WMUL, r, s, t)


@dataclass(frozen=True)
class Arc:
    id: str
    src: str
    dst: str
    instr: Instr


@dataclass(frozen=True)
class Loop:
    """A non-root loop: an arc set (inclusive of descendants) with a bound.

    parent is another loop id or ROOT.  The cut set must lie in this
    loop's own arcs, outside every descendant.
    """

    id: str
    parent: str
    bound: int
    arcs: frozenset[str]
    cutset: frozenset[str]


@dataclass(frozen=True)
class FlowchartProgram:
    n: int
    nodes: frozenset[str]
    arcs: tuple[Arc, ...]
    entries: frozenset[str]
    exits: frozenset[str]
    loops: tuple[Loop, ...] = ()

    def __post_init__(self):
        # Structural pre-condition: every id must resolve.
        by_id: dict[str, Arc] = {}
        for a in self.arcs:
            if a.id in by_id:
                raise ValueError(f"duplicate arc id {a.id}")
            if a.src not in self.nodes or a.dst not in self.nodes:
                raise ValueError(f"arc {a.id} references unknown node")
            by_id[a.id] = a
        loop_ids = {lp.id for lp in self.loops}
        if len(loop_ids) != len(self.loops):
            raise ValueError("duplicate loop id")
        if ROOT in loop_ids:
            raise ValueError(f"loop id {ROOT!r} is reserved")
        for lp in self.loops:
            if lp.parent != ROOT and lp.parent not in loop_ids:
                raise ValueError(f"loop {lp.id}: unknown parent {lp.parent}")
            for aid in lp.arcs | lp.cutset:
                if aid not in by_id:
                    raise ValueError(f"loop {lp.id}: unknown arc {aid}")
            if not (1 <= lp.bound <= self.n):
                raise ValueError(f"loop {lp.id}: bound x{lp.bound} out of range")
        for e in self.entries | self.exits:
            if e not in self.nodes:
                raise ValueError(f"unknown entry/exit node {e}")
        if not self.entries or not self.exits:
            raise ValueError("entry and exit sets must be nonempty")
        for a in self.arcs:
            if a.instr.max_var() > self.n:
                raise ValueError(f"arc {a.id}: operand beyond x{self.n}")

    def arc(self, aid: str) -> Arc:
        for a in self.arcs:
            if a.id == aid:
                return a
        raise KeyError(aid)

    def loop(self, lid: str) -> Loop:
        for lp in self.loops:
            if lp.id == lid:
                return lp
        raise KeyError(lid)

    def children(self, lid: str) -> list[Loop]:
        return [lp for lp in self.loops if lp.parent == lid]

    def roots(self) -> list[Loop]:
        return self.children(ROOT)

    def uses_huge(self) -> bool:
        return any(a.instr.kind == K_HUGE for a in self.arcs)


@dataclass(frozen=True)
class Violation:
    kind: str  # NestingOverlap | CutArcMutates | BoundMutated | UncutCycle | RootCycle | EntryHasPred | ExitHasSucc
    subject: tuple[str, ...]
    detail: str = ""

    def __str__(self) -> str:
        what = ",".join(self.subject)
        return f"{self.kind}({what})" + (f": {self.detail}" if self.detail else "")


def innermost_loop(p: FlowchartProgram, arc_id: str) -> str:
    """The deepest loop whose arc set contains the arc, else ROOT."""
    p.arc(arc_id)  # raises on unknown id
    best = ROOT
    best_depth = -1
    for lp in p.loops:
        if arc_id in lp.arcs:
            d = loop_depth(p, lp.id)
            if d > best_depth:
                best, best_depth = lp.id, d
    return best


def loop_depth(p: FlowchartProgram, lid: str) -> int:
    d = 0
    while lid != ROOT:
        lid = p.loop(lid).parent
        d += 1
    return d


def loop_chain(p: FlowchartProgram, arc_id: str) -> list[str]:
    """Loops containing the arc, outermost first (excludes ROOT)."""
    lid = innermost_loop(p, arc_id)
    chain: list[str] = []
    while lid != ROOT:
        chain.append(lid)
        lid = p.loop(lid).parent
    chain.reverse()
    return chain


def own_arcs(p: FlowchartProgram, lid: str) -> frozenset[str]:
    """Arcs of the loop minus all descendant loops' arcs (L-degree-zero)."""
    if lid == ROOT:
        arcs = {a.id for a in p.arcs}
        for lp in p.roots():
            arcs -= lp.arcs
        return frozenset(arcs)
    lp = p.loop(lid)
    arcs = set(lp.arcs)
    for c in p.children(lid):
        arcs -= c.arcs
    return frozenset(arcs)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _sccs(nodes: set[str], edges: list[tuple[str, str]]) -> list[set[str]]:
    """Tarjan, iterative; returns the strongly connected components."""
    succ: dict[str, list[str]] = {v: [] for v in nodes}
    for u, v in edges:
        succ[u].append(v)
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    out: list[set[str]] = []
    counter = 0
    for start in sorted(nodes):
        if start in index:
            continue
        work = [(start, iter(succ[start]))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                low[pv] = min(low[pv], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def _has_cycle(nodes: set, edges: list[tuple]) -> bool:
    indeg = {v: 0 for v in nodes}
    succ: dict = {v: [] for v in nodes}
    for u, v in edges:
        if u == v:
            return True
        succ[u].append(v)
        indeg[v] += 1
    queue = [v for v in nodes if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return seen != len(nodes)


def validate_program(p: FlowchartProgram) -> list[Violation]:
    """All invariant violations, deterministically ordered.

    The cycle-cut check contracts, per loop, each child loop's strongly
    connected components to single nodes (merging components that share
    a node), deletes child arcs and the loop's cut arcs, and requires
    the residual to be acyclic.  The root is checked the same way with
    an empty cut set, so root-level cycles are rejected.
    """
    out: list[Violation] = []
    arcs = {a.id: a for a in p.arcs}

    for e in sorted(p.entries):
        preds = sorted(a.id for a in p.arcs if a.dst == e)
        if preds:
            out.append(Violation("EntryHasPred", (e, *preds)))
    for x in sorted(p.exits):
        succs = sorted(a.id for a in p.arcs if a.src == x)
        if succs:
            out.append(Violation("ExitHasSucc", (x, *succs)))

    # Nesting: children are strict subsets of the parent, pairwise disjoint,
    # and the cut set avoids descendant arcs.
    for lp in sorted(p.loops, key=lambda l: l.id):
        parent_arcs = (
            frozenset(arcs) if lp.parent == ROOT else p.loop(lp.parent).arcs
        )
        if not lp.arcs < parent_arcs:
            out.append(Violation("NestingOverlap", (lp.id, lp.parent),
                                 "not a strict subset of the parent's arcs"))
        kids = sorted(p.children(lp.id), key=lambda l: l.id)
        for i, c1 in enumerate(kids):
            for c2 in kids[i + 1:]:
                if c1.arcs & c2.arcs:
                    out.append(Violation("NestingOverlap", (c1.id, c2.id),
                                         "sibling loops share arcs"))
        descendant = set()
        for c in kids:
            descendant |= c.arcs
        bad_cut = sorted((lp.cutset - lp.arcs) | (lp.cutset & descendant))
        if bad_cut:
            out.append(Violation("NestingOverlap", (lp.id, *bad_cut),
                                 "cut arcs must lie in the loop but outside descendants"))
    root_kids = sorted(p.roots(), key=lambda l: l.id)
    for i, c1 in enumerate(root_kids):
        for c2 in root_kids[i + 1:]:
            if c1.arcs & c2.arcs:
                out.append(Violation("NestingOverlap", (c1.id, c2.id),
                                     "sibling loops share arcs"))

    for lp in sorted(p.loops, key=lambda l: l.id):
        for aid in sorted(lp.cutset):
            if aid in arcs and arcs[aid].instr.kind != K_CHECK:
                out.append(Violation("CutArcMutates", (lp.id, aid)))
        for aid in sorted(lp.arcs):
            if aid in arcs and arcs[aid].instr.target == lp.bound:
                out.append(Violation("BoundMutated", (lp.id, aid)))

    # Cycle-cut condition per loop, root included (with empty cut set).
    for lid in sorted([lp.id for lp in p.loops]) + [ROOT]:
        loop_arcs = (
            frozenset(arcs) if lid == ROOT else p.loop(lid).arcs
        )
        kids = p.children(lid)
        uf = _UnionFind()
        child_arc_ids: set[str] = set()
        for c in kids:
            child_arc_ids |= c.arcs
            cnodes = set()
            cedges = []
            for aid in c.arcs:
                if aid not in arcs:
                    continue
                a = arcs[aid]
                cnodes |= {a.src, a.dst}
                cedges.append((a.src, a.dst))
            for comp in _sccs(cnodes, cedges):
                comp = sorted(comp)
                for v in comp[1:]:
                    uf.union(comp[0], v)
        cut = frozenset() if lid == ROOT else p.loop(lid).cutset
        residual_edges = []
        residual_nodes: set[str] = set()
        for aid in sorted(loop_arcs - child_arc_ids - cut):
            if aid not in arcs:
                continue
            a = arcs[aid]
            u, v = uf.find(a.src), uf.find(a.dst)
            residual_nodes |= {u, v}
            residual_edges.append((u, v))
        if _has_cycle(residual_nodes, residual_edges):
            kind = "RootCycle" if lid == ROOT else "UncutCycle"
            out.append(Violation(kind, (lid,)))

    out.sort(key=lambda v: (v.kind, v.subject))
    return out
