"""Concrete trace semantics for flowcharts and LARE, used as an oracle.

Everything here is brute force on purpose: enumeration of properly
bounded flowchart traces, structural enumeration of LARE traces, trace
set equivalence, worst-case value search, and a growth probe.  The
analyzer is validated against these at desk scale; nothing here feeds
back into the analysis.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

from . import fc_model as fc
from . import lare_model as lm
from .errors import IllFormedLare, InvalidProgram
from .fc_model import FlowchartProgram, Instr, K_CHECK, K_HUGE, ROOT

State = tuple[int, ...]


@dataclass(frozen=True)
class EnumCaps:
    """Budgets for enumeration; every field must be positive."""

    max_len: int = 200          # steps per trace
    max_branch: int = 64        # branches per nondeterministic point
    huge_val: int = 8           # probe value for `x := **`
    seed: int | None = None     # enables sampling mode
    budget: int | None = None   # traces emitted before giving up

    def __post_init__(self):
        if self.max_len <= 0 or self.max_branch <= 0 or self.huge_val < 0:
            raise ValueError("caps must be positive")
        if self.budget is not None and self.budget <= 0:
            raise ValueError("caps must be positive")


@dataclass(frozen=True)
class Trace:
    """A finished execution: ✓ steps keep the state unchanged.

    arcs is the location path for flowchart traces (None for LARE);
    cuts counts the ✓ steps that survived erasure bookkeeping.
    """

    init: State
    steps: tuple[tuple[Instr | None, State], ...]  # instr None marks a ✓ step
    cuts: int = 0
    arcs: tuple[str, ...] | None = None
    entry: str | None = None
    exit: str | None = None

    @property
    def final(self) -> State:
        return self.steps[-1][1] if self.steps else self.init

    def erased_string(self) -> tuple[Instr, ...]:
        """Instruction word with ✓ steps removed."""
        return tuple(i for i, _ in self.steps if i is not None)


@dataclass
class Enumeration:
    traces: list[Trace]
    truncated: bool = False


def step(s: State, instr: Instr, huge_val: int = 8) -> list[State]:
    """All successor states of one instruction (weak forms branch)."""
    k = instr.kind
    vals = list(s)
    if k in (fc.K_SKIP, K_CHECK):
        return [s]
    if k == fc.K_COPY:
        vals[instr.r - 1] = s[instr.s - 1]
        return [tuple(vals)]
    if k == fc.K_ADD:
        vals[instr.r - 1] = s[instr.s - 1] + s[instr.t - 1]
        return [tuple(vals)]
    if k == fc.K_MUL:
        vals[instr.r - 1] = s[instr.s - 1] * s[instr.t - 1]
        return [tuple(vals)]
    if k == K_HUGE:
        vals[instr.r - 1] = huge_val
        return [tuple(vals)]
    if k in (fc.K_WCOPY, fc.K_WADD, fc.K_WMUL):
        rhs = step(s, instr.strong(), huge_val)[0][instr.r - 1]
        out = []
        for v in range(rhs + 1):
            vals[instr.r - 1] = v
            out.append(tuple(vals))
        return out
    raise ValueError(f"unknown instruction {instr}")


def _branch_limit(states: list[State], caps: EnumCaps) -> tuple[list[State], bool]:
    """Apply the branching cap, always keeping the maximal choice."""
    if len(states) <= caps.max_branch:
        return states, False
    kept = states[: caps.max_branch - 1] + [states[-1]]
    return kept, True


def _mix(*parts) -> int:
    """Process-stable seed derivation (str hashing is randomized)."""
    import hashlib

    h = hashlib.blake2s(repr(parts).encode()).digest()[:8]
    return int.from_bytes(h, "big")


# --- flowchart side -------------------------------------------------------------


def fc_enumerate(p: FlowchartProgram, init: State, caps: EnumCaps) -> Enumeration:
    """All complete properly-bounded traces from the given initial values.

    Proper boundedness is enforced operationally: entering a loop's
    arcs from outside opens a run whose budget is the current value of
    the bound variable; each cut arc spends one unit; overdrawn budgets
    prune the branch; root-level arcs are each taken at most once.
    """
    violations = fc.validate_program(p)
    if violations:
        raise InvalidProgram(violations)
    if len(init) != p.n:
        raise ValueError(f"initial state has {len(init)} components, need {p.n}")
    out = Enumeration([])
    arcs_from: dict[str, list[fc.Arc]] = {}
    for a in sorted(p.arcs, key=lambda a: a.id):
        arcs_from.setdefault(a.src, []).append(a)
    chains = {a.id: tuple(fc.loop_chain(p, a.id)) for a in p.arcs}
    cut_of = {a.id: bool(chains[a.id]) and a.id in p.loop(chains[a.id][-1]).cutset
              for a in p.arcs}

    def go(node: str, state: State, active: tuple[tuple[str, int], ...],
           used_root: frozenset[str], steps, arc_path, entry: str) -> None:
        if caps.budget is not None and len(out.traces) >= caps.budget:
            out.truncated = True
            return
        if node in p.exits:
            out.traces.append(Trace(init, tuple(steps), 0, tuple(arc_path),
                                    entry, node))
            return
        if len(steps) >= caps.max_len:
            if arcs_from.get(node):
                out.truncated = True
            return
        candidates = arcs_from.get(node, [])
        if caps.seed is not None and len(candidates) > 1:
            candidates = list(candidates)
            random.Random(_mix(caps.seed, len(steps), node)).shuffle(candidates)
        for a in candidates:
            chain = chains[a.id]
            if not chain:
                # root-level arc: usable once per trace
                if a.id in used_root:
                    continue
                used2: frozenset[str] = used_root | {a.id}
                active2: tuple[tuple[str, int], ...] = ()
            else:
                used2 = used_root
                # runs of loops no longer enclosing this arc are closed;
                # newly entered loops open a run with the current bound
                keep = 0
                for (lid, _), want in zip(active, chain):
                    if lid != want:
                        break
                    keep += 1
                stack = list(active[:keep])
                for lid in chain[keep:]:
                    stack.append((lid, state[p.loop(lid).bound - 1]))
                if cut_of[a.id]:
                    lid, budget = stack[-1]
                    if budget == 0:
                        continue  # this run's ✓ allowance is spent
                    stack[-1] = (lid, budget - 1)
                active2 = tuple(stack)
            nexts = step(state, a.instr, caps.huge_val)
            nexts, clipped = _branch_limit(nexts, caps)
            if clipped:
                out.truncated = True
            for s2 in nexts:
                steps.append((None if cut_of[a.id] else a.instr, s2))
                arc_path.append(a.id)
                go(a.dst, s2, active2, used2, steps, arc_path, entry)
                steps.pop()
                arc_path.pop()

    for entry in sorted(p.entries):
        go(entry, init, (), frozenset(), [], [], entry)
    return out


# --- LARE side -------------------------------------------------------------------


def properly_bounded(p: FlowchartProgram, trace: Trace) -> bool:
    """Declarative re-check of proper boundedness on a finished trace.

    Examines every contiguous subsequence: within the smallest loop
    containing it, cut arcs may occur at most the bound's value; at the
    root, loop-free arcs occur at most once.  Kept independent of the
    operational counter discipline so the two can cross-check.
    """
    arcs = trace.arcs or ()
    chains = {aid: tuple(fc.loop_chain(p, aid)) for aid in set(arcs)}
    states = [trace.init] + [s for _, s in trace.steps]
    root_own = fc.own_arcs(p, ROOT)
    for lo in range(len(arcs)):
        for hi in range(lo + 1, len(arcs) + 1):
            sub = arcs[lo:hi]
            # smallest loop containing every arc of the subsequence
            common: tuple[str, ...] | None = None
            for aid in sub:
                ch = chains[aid]
                if common is None:
                    common = ch
                else:
                    keep = 0
                    for a, b in zip(common, ch):
                        if a != b:
                            break
                        keep += 1
                    common = common[:keep]
            if common:
                lid = common[-1]
                lp = p.loop(lid)
                ncuts = sum(1 for aid in sub if aid in lp.cutset)
                if ncuts > states[lo][lp.bound - 1]:
                    return False
            else:
                seen: dict[str, int] = {}
                for aid in sub:
                    if aid in root_own:
                        seen[aid] = seen.get(aid, 0) + 1
                if any(c > 1 for c in seen.values()):
                    return False
    return True


def lare_enumerate(e: lm.LareExpr, init: State, caps: EnumCaps,
                   n: int | None = None) -> Enumeration:
    """All traces of a well-formed expression from one initial state.

    Stars unroll lazily; each iteration consumes at least one ✓ visible
    to the governing bracket, whose budget is the bound variable's value
    at bracket entry, so every branch is finite.  Brackets erase their ✓
    steps from the emitted traces.
    """
    if n is None:
        n = max(lm.max_var(e), len(init))
    violations = lm.wf_check(e, n)
    if violations:
        raise IllFormedLare(violations)
    if len(init) < lm.max_var(e):
        raise ValueError("initial state too short for the expression")
    out = Enumeration([])
    INF = None  # top level: ✓ steps are unconstrained

    def emit_guard() -> bool:
        if caps.budget is not None and len(out.traces) >= caps.budget:
            out.truncated = True
            return False
        return True

    def walk(e: lm.LareExpr, state: State, budget: int | None, nsteps: int):
        """Yield (steps, final state, cuts used) triples."""
        if nsteps >= caps.max_len:
            out.truncated = True
            return
        if isinstance(e, lm.Atom):
            nexts, clipped = _branch_limit(step(state, e.instr, caps.huge_val), caps)
            if clipped:
                out.truncated = True
            for s2 in nexts:
                yield [(e.instr, s2)], s2, 0
            return
        if isinstance(e, lm.Check):
            if budget is not None and budget < 1:
                return
            yield [(None, state)], state, 1
            return
        if isinstance(e, lm.Eps):
            yield [], state, 0
            return
        if isinstance(e, lm.Alt):
            order = [e.left, e.right]
            if caps.seed is not None:
                random.Random(_mix(caps.seed, nsteps, "alt")).shuffle(order)
            for branch in order:
                yield from walk(branch, state, budget, nsteps)
            return
        if isinstance(e, lm.Cat):
            for st1, s1, c1 in walk(e.left, state, budget, nsteps):
                rem = None if budget is None else budget - c1
                for st2, s2, c2 in walk(e.right, s1, rem, nsteps + len(st1)):
                    yield st1 + st2, s2, c1 + c2
            return
        if isinstance(e, lm.Star):
            yield [], state, 0
            for st1, s1, c1 in walk(e.body, state, budget, nsteps):
                if c1 == 0:
                    raise IllFormedLare([lm.WfViolation("StarBodyCheckFree",
                                                        "star body consumed no ✓")])
                rem = None if budget is None else budget - c1
                if rem is not None and rem < 0:
                    continue
                for st2, s2, c2 in walk(e, s1, rem, nsteps + len(st1)):
                    yield st1 + st2, s2, c1 + c2
            return
        if isinstance(e, lm.Bracket):
            inner = state[e.bound - 1]
            for st, s2, c in walk(e.body, state, inner, nsteps):
                if c <= inner:
                    erased = [(i, s) for (i, s) in st if i is not None]
                    yield erased, s2, 0
            return
        raise TypeError(f"not a LareExpr: {e!r}")

    for st, s2, c in walk(e, init, INF, 0):
        if not emit_guard():
            break
        out.traces.append(Trace(init, tuple(st), c))
    return out


@dataclass(frozen=True)
class EquivResult:
    verdict: str  # "equal" | "unequal" | "truncated"
    counterexample: tuple | None = None

    def __bool__(self) -> bool:
        return self.verdict == "equal"


def _word_set(traces: list[Trace]) -> frozenset[tuple]:
    return frozenset((t.erased_string(), t.final) for t in traces)


def equiv_traces(p: FlowchartProgram,
                 exprs: dict[tuple[str, str], lm.LareExpr],
                 init: State, caps: EnumCaps) -> EquivResult:
    """Compare flowchart and expression semantics per (entry, exit) pair.

    Equal means: for every pair, the sets of (✓-erased instruction word,
    final state) coincide.  A cap hit withholds the verdict.
    """
    fcr = fc_enumerate(p, init, caps)
    if fcr.truncated:
        return EquivResult("truncated")
    by_pair: dict[tuple[str, str], set] = {}
    for t in fcr.traces:
        by_pair.setdefault((t.entry, t.exit), set()).add(
            (t.erased_string(), t.final))
    pairs = sorted(set(by_pair) | set(exprs))
    for pair in pairs:
        fc_words = frozenset(by_pair.get(pair, ()))
        if pair in exprs:
            lr = lare_enumerate(exprs[pair], init, caps)
            if lr.truncated:
                return EquivResult("truncated")
            lare_words = _word_set(lr.traces)
        else:
            lare_words = frozenset()
        if fc_words != lare_words:
            diff = sorted(fc_words ^ lare_words)[0]
            missing_in = "expression" if diff in fc_words else "flowchart"
            return EquivResult("unequal", (pair, diff, missing_in))
    return EquivResult("equal")


@dataclass(frozen=True)
class MaxResult:
    value: int
    witness: Trace | None
    truncated: bool


def max_final(prog, j: int, init: State, caps: EnumCaps) -> MaxResult:
    """Worst-case final value of x_j over all enumerated traces."""
    if isinstance(prog, FlowchartProgram):
        res = fc_enumerate(prog, init, caps)
    else:
        res = lare_enumerate(prog, init, caps)
    best: Trace | None = None
    for t in res.traces:
        if best is None or t.final[j - 1] > best.final[j - 1]:
            best = t
    value = best.final[j - 1] if best is not None else 0
    return MaxResult(value, best, res.truncated)


@dataclass(frozen=True)
class ProbeReport:
    var: int
    scales: tuple[int, ...]
    values: tuple[int, ...]
    verdict: str  # "LooksPoly" | "LooksExp" | "Inconclusive"
    truncated: bool
    exp_signature: tuple[float, ...]   # log2(v)/N per scale
    poly_signature: tuple[float, ...]  # log(v)/log(N) per scale (N >= 2)
    fitted_exponent: float
    witness: Trace | None = None

    def to_json_dict(self) -> dict:
        w = None
        if self.witness is not None:
            w = [list(s) for _, s in self.witness.steps]
        return {
            "var": self.var,
            "scales": list(self.scales),
            "values": [int(v) for v in self.values],
            "verdict": self.verdict,
            "truncated": self.truncated,
            "exp_signature": [round(x, 6) for x in self.exp_signature],
            "poly_signature": [round(x, 6) for x in self.poly_signature],
            "fitted_exponent": round(self.fitted_exponent, 6),
            "witness": w,
        }


def local_exponents(scales, values) -> list[float]:
    """Slopes log(v'/v)/log(N'/N) between consecutive scales."""
    out = []
    for (n1, v1), (n2, v2) in zip(zip(scales, values), zip(scales[1:], values[1:])):
        v1, v2 = max(v1, 1), max(v2, 1)
        out.append(math.log(v2 / v1) / math.log(n2 / n1))
    return out


def _fit_line(xs: list[float], ys: list[float]) -> tuple[float, float]:
    """Least-squares slope and the largest absolute residual."""
    k = len(xs)
    mx, my = sum(xs) / k, sum(ys) / k
    var = sum((x - mx) ** 2 for x in xs)
    slope = 0.0 if var == 0 else sum(
        (x - mx) * (y - my) for x, y in zip(xs, ys)) / var
    resid = max(abs(y - (my + slope * (x - mx))) for x, y in zip(xs, ys))
    return slope, resid


def growth_probe(prog, j: int, scales: list[int], caps: EnumCaps) -> ProbeReport:
    """Heuristic growth label from worst-case values at several scales.

    LooksExp: tail value ratios at least 1.5 with a clearly rising local
    exponent.  LooksPoly: a stable bounded local exponent.  Anything
    else, or any truncation, is Inconclusive.  The label never overrides
    the analyzer; it is a desk-scale plausibility check.
    """
    if len(scales) < 3:
        raise ValueError("need at least 3 scales")
    if sorted(scales) != list(scales) or len(set(scales)) != len(scales):
        raise ValueError("scales must be strictly increasing")
    nvars = prog.n if isinstance(prog, FlowchartProgram) else lm.max_var(prog)
    values: list[int] = []
    truncated = False
    witness = None
    for N in scales:
        res = max_final(prog, j, tuple([N] * nvars), caps)
        truncated |= res.truncated
        values.append(res.value)
        witness = res.witness
    exp_sig = tuple(math.log2(max(v, 1)) / N for N, v in zip(scales, values))
    poly_sig = tuple(math.log(max(v, 1)) / math.log(N)
                     for N, v in zip(scales, values) if N >= 2)
    exps = local_exponents(scales, values)
    big = [(N, v) for N, v in zip(scales, values) if N >= 2]
    fit_d, fit_resid = _fit_line([math.log(N) for N, _ in big],
                                 [math.log(max(v, 1)) for _, v in big])
    fitted = fit_d
    if truncated:
        verdict = "Inconclusive"
    elif max(values) <= 1:
        verdict = "LooksPoly"
    else:
        ratios = [max(v2, 1) / max(v1, 1) for v1, v2 in zip(values, values[1:])]
        # exponentials steepen on a log-log plot without flattening out;
        # polynomials converge onto a line (their slope increments decay)
        incs = [b - a for a, b in zip(exps, exps[1:])]
        steepening = (len(exps) >= 3
                      and all(b > a for a, b in zip(exps, exps[1:]))
                      and all(r >= 1.5 for r in ratios[-2:])
                      and (len(incs) < 2 or incs[-1] >= 0.8 * incs[-2]))
        if steepening:
            verdict = "LooksExp"
        elif fit_resid <= 0.35:
            verdict = "LooksPoly"
        else:
            verdict = "Inconclusive"
    return ProbeReport(j, tuple(scales), tuple(values), verdict, truncated,
                       exp_sig, poly_sig, fitted, witness)
