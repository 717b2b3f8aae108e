"""Flowchart-to-expression conversion by node ripping, and its fusion.

The driver manipulates a graph whose arcs carry labels from a pluggable
algebra: the explicit instance builds LARE expressions, the fused
instance computes dependency sets directly, so the analysis runs in
polynomial time without ever materialising the (worst-case exponential)
expression.

Loops are contracted bottom-up.  A boundary node v of a loop is split
into v_in / v_out / v_L / v_nl so the loop gets private entry and exit
points; arcs incident to v are duplicated onto the copies according to
which side of the loop they serve.  After ripping, every surviving arc
label is wrapped in the loop's bracket and the loop collapses to
in->out arcs in the enclosing graph.

The driver tracks, per label, whether the labelled language can produce
a string without a top-level ✓.  Starring such a label would let the
program cycle without spending any loop budget, which the bracket
algebra cannot bound, so it is rejected in both instances; this is the
fused counterpart of the expression-level well-formedness check.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import dep_domain as dd
from . import fc_model as fc
from . import lare_model as lm
from .errors import ConversionError, InvalidProgram
from .fc_model import FlowchartProgram, ROOT

log = logging.getLogger("fcgrow")

DEFAULT_BUDGET = 10 ** 5


class LareAlgebra:
    """Labels are LARE expressions; `size` meters the AST node budget."""

    def lift(self, instr, is_cut: bool):
        return lm.Check() if is_cut else lm.Atom(instr)

    def alt(self, a, b):
        return lm.Alt(a, b)

    def cat(self, a, b):
        return lm.Cat(a, b)

    def star(self, a):
        return lm.Star(a)

    def bracket(self, bound, a):
        return lm.Bracket(bound, a)

    def size(self, a) -> int:
        if isinstance(a, (lm.Atom, lm.Check, lm.Eps)):
            return 1
        if isinstance(a, (lm.Cat, lm.Alt)):
            return 1 + self.size(a.left) + self.size(a.right)
        if isinstance(a, (lm.Star, lm.Bracket)):
            return 1 + self.size(a.body)
        raise TypeError(repr(a))


class DepsAlgebra:
    """Labels are dependency sets over a fixed variable count."""

    def __init__(self, n: int):
        self.n = n

    def lift(self, instr, is_cut: bool):
        if is_cut:
            return dd.identity_set(self.n)
        return dd.atomic_deps(instr, self.n)

    def alt(self, a, b):
        return a | b

    def cat(self, a, b):
        return dd.compose_sets(a, b)

    def star(self, a):
        return dd.star_abs(a, self.n)

    def bracket(self, bound, a):
        return dd.bracket_subst(a, bound, self.n)

    def size(self, a) -> int:
        return 0  # never budgeted


@dataclass
class Label:
    """An algebra value plus the top-level-✓ bookkeeping and budget meter."""

    val: object
    can_skip: bool  # some generated string has no top-level ✓


@dataclass
class GArc:
    src: object
    dst: object
    label: Label
    seq: int  # creation order, for deterministic folds


@dataclass
class LabeledGraph:
    arcs: list[GArc] = field(default_factory=list)
    entries: set = field(default_factory=set)
    exits: set = field(default_factory=set)
    next_seq: int = 0

    def add(self, src, dst, label: Label) -> None:
        self.arcs.append(GArc(src, dst, label, self.next_seq))
        self.next_seq += 1

    def nodes(self) -> set:
        out = set(self.entries) | set(self.exits)
        for a in self.arcs:
            out.add(a.src)
            out.add(a.dst)
        return out


def _node_key(v) -> str:
    return v if isinstance(v, str) else "/".join(map(str, v))


def merge_parallel(g: LabeledGraph, alg) -> LabeledGraph:
    """Combine arcs with equal endpoints via the alternation operator."""
    merged: dict[tuple, GArc] = {}
    order: list[tuple] = []
    for a in sorted(g.arcs, key=lambda a: a.seq):
        key = (a.src, a.dst)
        if key in merged:
            prev = merged[key]
            lbl = Label(alg.alt(prev.label.val, a.label.val),
                        prev.label.can_skip or a.label.can_skip)
            merged[key] = GArc(a.src, a.dst, lbl, prev.seq)
        else:
            merged[key] = a
            order.append(key)
    g.arcs = [merged[k] for k in order]
    return g


class _Budget:
    def __init__(self, alg, limit: int | None):
        self.alg = alg
        self.limit = limit

    def charge(self, label: Label) -> Label:
        if self.limit is not None and self.alg.size(label.val) > self.limit:
            raise ConversionError(
                "SizeBudgetExceeded",
                f"expression grew past {self.limit} nodes; use the fused mode")
        return label


def rip_one(g: LabeledGraph, v, alg, budget: _Budget | None = None,
            allow_star: bool = True) -> LabeledGraph:
    """Remove an internal node, composing labels around it.

    Every u -> v -> w path gains a direct arc labelled
    cat(l_uv, cat(star(l_vv), l_vw)) when v carries a self-loop, else
    cat(l_uv, l_vw).  The node must have both incoming and outgoing
    arcs and must not be an entry or exit.
    """
    if v in g.entries or v in g.exits:
        raise ValueError(f"cannot rip entry/exit node {v}")
    merge_parallel(g, alg)
    into = [a for a in g.arcs if a.dst == v and a.src != v]
    outof = [a for a in g.arcs if a.src == v and a.dst != v]
    selfloops = [a for a in g.arcs if a.src == v and a.dst == v]
    if not into or not outof:
        if not into and not outof and not selfloops:
            raise ValueError(f"cannot rip isolated node {v}")
        raise ValueError(f"node {v} is not internal (one-sided)")
    mid: Label | None = None
    if selfloops:
        (sl,) = selfloops
        if not allow_star:
            raise ConversionError(
                "StarAtRoot",
                f"self-loop at {_node_key(v)} while ripping the root; "
                "a rejected program slipped validation")
        if sl.label.can_skip:
            raise ConversionError(
                "StarBodyCheckFree",
                f"cycle at {_node_key(v)} can repeat without spending a ✓")
        mid = Label(alg.star(sl.label.val), True)
    new_arcs = []
    budget = budget or _Budget(alg, None)
    for ain in sorted(into, key=lambda a: a.seq):
        for aout in sorted(outof, key=lambda a: a.seq):
            if mid is None:
                lbl = Label(alg.cat(ain.label.val, aout.label.val),
                            ain.label.can_skip and aout.label.can_skip)
            else:
                tail = alg.cat(mid.val, aout.label.val)
                lbl = Label(alg.cat(ain.label.val, tail),
                            ain.label.can_skip and aout.label.can_skip)
            new_arcs.append((ain.src, aout.dst, budget.charge(lbl)))
    g.arcs = [a for a in g.arcs if v not in (a.src, a.dst)]
    for src, dst, lbl in new_arcs:
        g.add(src, dst, lbl)
    merge_parallel(g, alg)
    return g


def _drop_one_sided(g: LabeledGraph, keep: set) -> list[str]:
    """Delete nodes that cannot lie on any entry-to-exit path.

    Dead split copies are a normal byproduct and vanish silently; only
    original program nodes are worth a warning.
    """
    warnings = []
    changed = True
    while changed:
        changed = False
        for v in sorted(g.nodes() - keep, key=_node_key):
            has_in = any(a.dst == v and a.src != v for a in g.arcs)
            has_out = any(a.src == v and a.dst != v for a in g.arcs)
            if not (has_in and has_out):
                g.arcs = [a for a in g.arcs if v not in (a.src, a.dst)]
                if isinstance(v, str):
                    warnings.append(f"unreachable fragment at {v} dropped")
                changed = True
    return warnings


def contract_simple(g: LabeledGraph, bound: int | None, alg,
                    budget: _Budget | None = None,
                    rng=None) -> list[str]:
    """Rip all internal nodes, then wrap surviving labels in the bracket.

    bound None means the root: no bracket, and stars are forbidden.
    Nodes rip in ascending name order for determinism (an rng shuffles
    the order instead; the outcome is order-independent, the goldens
    are not).  Returns warnings for dropped unreachable fragments.
    """
    warnings = _drop_one_sided(g, set(g.entries) | set(g.exits))
    internal = sorted(g.nodes() - g.entries - g.exits, key=_node_key)
    if rng is not None:
        rng.shuffle(internal)
    for v in internal:
        if not any(v in (a.src, a.dst) for a in g.arcs):
            continue  # already dropped
        rip_one(g, v, alg, budget, allow_star=bound is not None)
        warnings += _drop_one_sided(g, set(g.entries) | set(g.exits))
    merge_parallel(g, alg)
    for a in g.arcs:
        if a.src == a.dst:
            raise ConversionError(
                "StarAtRoot" if bound is None else "StarBodyCheckFree",
                f"residual self-loop at kept node {_node_key(a.src)}")
    if bound is not None:
        for a in g.arcs:
            a.label = Label(alg.bracket(bound, a.label.val), True)
            if budget is not None:
                budget.charge(a.label)
    return warnings


def _subtree(p: FlowchartProgram, lid: str) -> set[str]:
    out = {lid}
    for c in p.children(lid):
        out |= _subtree(p, c.id)
    return out


@dataclass
class _Work:
    """Mutable conversion state shared by both label algebras."""

    graph: LabeledGraph
    arc_loop: dict[int, str]          # GArc.seq -> owning loop id
    entry_origin: dict[object, str]   # derived entry node -> original id
    exit_origin: dict[object, str]
    warnings: list[str] = field(default_factory=list)
    created_nodes: int = 0
    boundary_total: int = 0


def _initial_work(p: FlowchartProgram, alg, lift) -> _Work:
    g = LabeledGraph()
    g.entries = set(p.entries)
    g.exits = set(p.exits)
    arc_loop: dict[int, str] = {}
    for a in p.arcs:
        inner = fc.innermost_loop(p, a.id)
        is_cut = inner != ROOT and a.id in p.loop(inner).cutset
        g.add(a.src, a.dst, lift(a, is_cut))
        arc_loop[g.arcs[-1].seq] = inner
    return _Work(g, arc_loop, {e: e for e in p.entries}, {x: x for x in p.exits})


def contract_loop(work: _Work, p: FlowchartProgram, lid: str, alg,
                  budget: _Budget, rng=None) -> None:
    """Split the loop's boundary nodes, contract it, splice the results.

    Pre: all child loops are already contracted (their arcs appear as
    bracketed through arcs tagged with the child id).
    """
    g = work.graph
    sub = _subtree(p, lid)
    inside = [a for a in g.arcs if work.arc_loop[a.seq] in sub]
    outside = [a for a in g.arcs if work.arc_loop[a.seq] not in sub]
    loop_nodes = set()
    for a in inside:
        loop_nodes.add(a.src)
        loop_nodes.add(a.dst)
    touched_outside = set()
    for a in outside:
        touched_outside.add(a.src)
        touched_outside.add(a.dst)
    boundary = sorted(
        (loop_nodes & (touched_outside | g.entries | g.exits)), key=_node_key)
    work.boundary_total += len(boundary)
    bset = set(boundary)

    def vin(v):
        return (v, "in")

    def vout(v):
        return (v, "out")

    def vbody(v):
        return (v, "body")

    def vnl(v):
        return (v, "nl")

    created: set = set()
    sub_g = LabeledGraph()
    sub_g.entries = {vin(v) for v in boundary}
    sub_g.exits = {vout(v) for v in boundary}
    for a in sorted(inside, key=lambda a: a.seq):
        srcs = [vin(a.src), vbody(a.src)] if a.src in bset else [a.src]
        dsts = [vout(a.dst), vbody(a.dst)] if a.dst in bset else [a.dst]
        for s in srcs:
            for d in dsts:
                sub_g.add(s, d, Label(a.label.val, a.label.can_skip))
        created.update(x for x in srcs + dsts if isinstance(x, tuple) and x[0] in bset)

    # Rewire the enclosing graph: the loop's arcs disappear, outside arcs
    # incident to a boundary node are duplicated to bypass and interface
    # copies, and the node itself is retired.
    new_outside: list[tuple] = []
    for a in sorted(outside, key=lambda a: a.seq):
        srcs = [vnl(a.src), vout(a.src)] if a.src in bset else [a.src]
        dsts = [vnl(a.dst), vin(a.dst)] if a.dst in bset else [a.dst]
        for s in srcs:
            for d in dsts:
                new_outside.append((s, d, Label(a.label.val, a.label.can_skip),
                                    work.arc_loop[a.seq]))
        created.update(x for x in srcs + dsts if isinstance(x, tuple) and x[0] in bset)
    work.created_nodes += len(created)
    g.arcs = []
    for s, d, lbl, owner in new_outside:
        g.add(s, d, lbl)
        work.arc_loop[g.arcs[-1].seq] = owner

    for v in boundary:
        if v in g.entries:
            g.entries.discard(v)
            g.entries |= {vnl(v), vin(v)}
            origin = work.entry_origin.pop(v)
            work.entry_origin[vnl(v)] = origin
            work.entry_origin[vin(v)] = origin
        if v in g.exits:
            g.exits.discard(v)
            g.exits |= {vnl(v), vout(v)}
            origin = work.exit_origin.pop(v)
            work.exit_origin[vnl(v)] = origin
            work.exit_origin[vout(v)] = origin

    bound = p.loop(lid).bound
    work.warnings += [f"loop {lid}: {w}"
                      for w in contract_simple(sub_g, bound, alg, budget, rng)]
    through = [a for a in sub_g.arcs]
    if not through:
        work.warnings.append(f"loop {lid} is vacuous and was dropped")
    for a in sorted(through, key=lambda a: a.seq):
        g.add(a.src, a.dst, a.label)
        work.arc_loop[g.arcs[-1].seq] = lid


@dataclass
class ConversionResult:
    labels: dict[tuple[str, str], object]
    warnings: list[str]
    nodes_created: int
    boundary_total: int


def _convert(p: FlowchartProgram, alg, lift, budget_limit: int | None,
             rip_seed: int | None = None, stage_hook=None) -> ConversionResult:
    violations = fc.validate_program(p)
    if violations:
        raise InvalidProgram(violations)
    work = _initial_work(p, alg, lift)
    budget = _Budget(alg, budget_limit)
    import random as _random

    def rng_for(tag: str):
        if rip_seed is None:
            return None
        return _random.Random(_seed_mix(rip_seed, tag))

    def post_order(lid: str) -> None:
        for c in sorted(p.children(lid), key=lambda l: l.id):
            post_order(c.id)
        if lid != ROOT:
            contract_loop(work, p, lid, alg, budget, rng_for(lid))
            if stage_hook:
                stage_hook(f"after-{lid}", work.graph)

    post_order(ROOT)

    g = work.graph
    work.warnings += contract_simple(g, None, alg, budget, rng_for(ROOT))
    if stage_hook:
        stage_hook("final", g)

    assert work.created_nodes <= 4 * work.boundary_total, \
        "node-splitting growth bound violated"

    labels: dict[tuple[str, str], object] = {}
    for a in sorted(g.arcs, key=lambda a: a.seq):
        if a.src in work.entry_origin and a.dst in work.exit_origin:
            pair = (work.entry_origin[a.src], work.exit_origin[a.dst])
            if pair in labels:
                labels[pair] = alg.alt(labels[pair], a.label.val)
            else:
                labels[pair] = a.label.val
    return ConversionResult(labels, work.warnings,
                            work.created_nodes, work.boundary_total)


def _seed_mix(seed: int, tag: str) -> int:
    import hashlib

    h = hashlib.blake2s(f"{seed}:{tag}".encode()).digest()[:8]
    return int.from_bytes(h, "big")


def convert_fc_explicit(p: FlowchartProgram, budget: int | None = DEFAULT_BUDGET,
                        rip_seed: int | None = None,
                        stage_hook=None) -> ConversionResult:
    """Per (entry, exit) pair, a LARE expression with the same trace set.

    Worst-case exponential output, so metered by an AST-node budget;
    the fused mode is the scalable path.
    """
    alg = LareAlgebra()

    def lift(arc: fc.Arc, is_cut: bool) -> Label:
        return Label(alg.lift(arc.instr, is_cut), not is_cut)

    res = _convert(p, alg, lift, budget, rip_seed, stage_hook)
    for pair, e in res.labels.items():
        bad = lm.wf_check(e, p.n)
        if bad:  # pragma: no cover - guarded by construction
            raise ConversionError("StarBodyCheckFree",
                                  f"ill-formed output for {pair}: {bad[0]}")
    return res


@dataclass
class FusedResult:
    deps: dict[tuple[str, str], dd.DepSet]
    reports: dict[tuple[str, str], dd.GrowthReport]
    combined: dd.GrowthReport
    warnings: list[str]
    n_eff: int
    huge_vars: frozenset[int]


def rewrite_huge_program(p: FlowchartProgram) -> tuple[FlowchartProgram, int, frozenset[int]]:
    """Route `x := **` through one shared HUGE variable (index n+1)."""
    if not p.uses_huge():
        return p, p.n, frozenset()
    h = p.n + 1
    arcs = tuple(
        fc.Arc(a.id, a.src, a.dst,
               fc.copy(a.instr.r, h) if a.instr.kind == fc.K_HUGE else a.instr)
        for a in p.arcs)
    p2 = FlowchartProgram(h, p.nodes, arcs, p.entries, p.exits, p.loops)
    return p2, h, frozenset({h})


def analyze_fc_fused(p: FlowchartProgram, rip_seed: int | None = None,
                     stage_hook=None) -> FusedResult:
    """Abstract semantics computed directly on the graph labels.

    Same control flow as the explicit conversion, over the dependency
    algebra, so it runs in time polynomial in the program size.
    """
    p2, n_eff, huge_vars = rewrite_huge_program(p)
    alg = DepsAlgebra(n_eff)

    def lift(arc: fc.Arc, is_cut: bool) -> Label:
        return Label(alg.lift(arc.instr, is_cut), not is_cut)

    res = _convert(p2, alg, lift, None, rip_seed, stage_hook)
    reports = {pair: dd.classify(s, n_eff, huge_vars)
               for pair, s in res.labels.items()}
    combined = dd.worst_report([reports[k] for k in sorted(reports)])
    if not reports:
        combined = dd.GrowthReport(tuple(
            dd.VarGrowth(j, dd.POLY) for j in range(1, n_eff + 1)
            if j not in huge_vars))
    return FusedResult(res.labels, reports, combined, res.warnings,
                       n_eff, huge_vars)
