"""Set-of-matrices abstraction: a diagnostic cross-check for small n.

A dependency set is aggregated into (n+1)x(n+1) matrices over
{0, 1, 1+, 2, 3}.  Entries record unary facts; the co-existence of two
near-copy entries in one matrix additionally requires the matching
binary fact (condition M2).  An admissible matrix pins the iteration
diagonal to 1 and allows at most one nonzero entry in any column
holding a 1.  This module consumes analysis results; it never feeds
classification.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import dep_domain as dd
from . import lare_model as lm
from .dep_domain import D1, D1P, D2, D3, DepSet, is_approx_one, is_unary

Z = 0  # bottom: no dependence
_ENTRY_NAMES = {Z: "0", D1: "1", D1P: "1+", D2: "2", D3: "3"}

Matrix = tuple  # row-major (n+1) x (n+1), entries in {Z, D1, D1P, D2, D3}

SOM_MAX_N = 4  # enumeration is exponential in (n+1)^2


def plus_type(a: int, b: int) -> int:
    """The matrix 'sum': 1+ + 1+ = 2, otherwise the join."""
    if a == D1P and b == D1P:
        return D2
    return max(a, b)


def _entry_mul(a: int, b: int) -> int:
    return Z if a == Z or b == Z else max(a, b)


def identity_matrix(n: int) -> Matrix:
    m = n + 1
    return tuple(tuple(D1 if i == j else Z for j in range(m)) for i in range(m))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if len(a) != len(b):
        raise ValueError("dimension mismatch")
    m = len(a)
    out = []
    for i in range(m):
        row = []
        for j in range(m):
            acc = Z
            for k in range(m):
                acc = plus_type(acc, _entry_mul(a[i][k], b[k][j]))
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_le(a: Matrix, b: Matrix) -> bool:
    return all(x <= y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def set_le(s: frozenset, t: frozenset) -> bool:
    """S <= T iff every matrix of S is dominated by some matrix of T."""
    return all(any(mat_le(a, b) for b in t) for a in s)


def is_admissible(a: Matrix) -> bool:
    m = len(a)
    if a[m - 1][m - 1] != D1:
        return False
    for j in range(m):
        ones = [i for i in range(m) if a[i][j] == D1]
        if ones:
            nonzero = [i for i in range(m) if a[i][j] != Z]
            if len(ones) > 1 or len(nonzero) > 1:
                return False
    return True


def _satisfies(a: Matrix, s: DepSet) -> bool:
    """Conditions M1 and M2 (M2 modulo the orientation-swap closure)."""
    m = len(a)
    for i in range(m):
        for j in range(m):
            if a[i][j] != Z and (i + 1, a[i][j], j + 1) not in s:
                return False
    near = [(i, j) for i in range(m) for j in range(m)
            if a[i][j] in (D1, D1P)]
    for (i, k) in near:
        for (j, l) in near:
            if i == j and k == l:
                continue
            if (i + 1, j + 1, k + 1, l + 1) not in s:
                return False
    return True


def _maxima(mats: set[Matrix]) -> frozenset:
    out = []
    for a in mats:
        if not any(a != b and mat_le(a, b) for b in mats):
            out.append(a)
    return frozenset(out)


def som_brute(s: DepSet, n: int) -> frozenset:
    """Reference implementation: enumerate every matrix (tiny n only)."""
    if n > 2:
        raise ValueError("brute-force som is for n <= 2")
    m = n + 1
    allowed = [[sorted({Z} | {d[1] for d in s if is_unary(d)
                              and d[0] == i + 1 and d[2] == j + 1})
                for j in range(m)] for i in range(m)]
    valid = set()
    for flat in itertools.product(*[allowed[i][j]
                                    for i in range(m) for j in range(m)]):
        a = tuple(tuple(flat[i * m + j] for j in range(m)) for i in range(m))
        if is_admissible(a) and _satisfies(a, s):
            valid.add(a)
    return _maxima(valid)


def som(s: DepSet, n: int) -> frozenset:
    """Maxima of the admissible matrices justified by the set.

    Positions whose strongest unary type is 2 or 3 carry it freely (no
    side conditions), so maxima always take it; near-copy entries are
    enumerated as maximal mutually-M2-compatible selections, with a 1
    claiming its whole column.  The bound on n keeps this desk-scale.
    """
    if n > SOM_MAX_N:
        raise ValueError(f"som supports n <= {SOM_MAX_N}")
    m = n + 1
    it = m  # 1-based index of the iteration variable
    if (it, D1, it) not in s:
        return frozenset()
    best: dict[tuple[int, int], int] = {}
    for d in s:
        if is_unary(d):
            i, t, j = d
            key = (i, j)
            best[key] = max(best.get(key, Z), t)

    def pair_ok(p: tuple[int, int], q: tuple[int, int]) -> bool:
        # positions are (source, target); M2 wants the binary fact,
        # taken modulo the orientation swap
        (i, k), (j, l) = p, q
        if i == j and k == l:
            return True
        return (i, j, k, l) in s or (j, i, l, k) in s

    # One node per position, at the strongest justified value: maxima
    # never use a weaker value where a stronger one carries no extra
    # side condition (2/3 beat 1+, 1+ beats a column-claiming 1).
    pinned = (it, it)
    nodes: list[tuple[int, int, int]] = []  # (source, target, value)
    for (i, j), v in sorted(best.items()):
        if (i, j) == pinned or j == it:
            continue  # the pinned 1 owns column n+1
        if v < D2 and not pair_ok((i, j), pinned):
            continue  # M2 against the pinned iteration identity
        nodes.append((i, j, v))

    def compatible(a, b) -> bool:
        (i1, j1, v1), (i2, j2, v2) = a, b
        if j1 == j2 and D1 in (v1, v2):
            return False  # a 1 owns its column
        if v1 >= D2 or v2 >= D2:
            return True
        return pair_ok((i1, j1), (i2, j2)) and pair_ok((i2, j2), (i1, j1))

    adj = {x: set() for x in range(len(nodes))}
    for x in range(len(nodes)):
        for y in range(x + 1, len(nodes)):
            if compatible(nodes[x], nodes[y]):
                adj[x].add(y)
                adj[y].add(x)

    cliques: list[frozenset[int]] = []

    def bron(r: set[int], p: set[int], x: set[int]) -> None:
        if not p and not x:
            cliques.append(frozenset(r))
            return
        pivot = max(p | x, key=lambda v: len(adj[v]))
        for v in sorted(p - adj[pivot]):
            bron(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    bron(set(), set(range(len(nodes))), set())
    if not cliques:
        cliques = [frozenset()]

    mats = set()
    for clique in cliques:
        a = [[Z] * m for _ in range(m)]
        a[it - 1][it - 1] = D1
        for idx in clique:
            i, j, v = nodes[idx]
            a[i - 1][j - 1] = v
        mats.add(tuple(tuple(row) for row in a))
    out = _maxima(mats)
    for a in out:
        if not (is_admissible(a) and _satisfies(a, s)):  # pragma: no cover
            raise AssertionError("som produced a non-justified matrix")
    return out


def format_matrix(a: Matrix) -> str:
    return "\n".join(" ".join(f"{_ENTRY_NAMES[v]:>2}" for v in row) for row in a)


# --- lemma checks ----------------------------------------------------------------


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    failures: tuple[str, ...] = ()


def lemma11_check(e1: lm.LareExpr, e2: lm.LareExpr, n: int) -> CheckReport:
    """Semantic sanity of the matrix abstraction on a pair of programs.

    Verifies the alternation and concatenation inequalities, and the
    two star facts for the canonical loop built from the pair.  Any
    failed instance points at the dependency domain, not at this
    module.
    """
    if n > 3:
        raise ValueError("lemma check supports n <= 3")
    fails = []
    s1, s2 = dd.deps_of(e1, n), dd.deps_of(e2, n)
    m1, m2 = som(s1, n), som(s2, n)
    alt = som(s1 | s2, n)
    if not set_le(m1 | m2, alt):
        fails.append("som(E1|E2) does not dominate som(E1) u som(E2)")
    cat = som(dd.compose_sets(s1, s2), n)
    prod = frozenset(mat_mul(a, b) for a in m1 for b in m2)
    if not set_le(prod, cat):
        fails.append("som(E1 E2) does not dominate som(E1) . som(E2)")
    star = lm.Star(lm.Cat(lm.Check(), lm.Alt(e1, e2)))
    ms = som(dd.deps_of(star, n), n)
    ident = identity_matrix(n)
    if not set_le(frozenset({ident}), ms):
        fails.append("som(E*) does not dominate {I}")
    closure = frozenset(mat_mul(a, b) for a in ms for b in (ms | {ident}))
    if not set_le(closure, ms):
        fails.append("som(E*) is not closed under product with itself")
    return CheckReport(not fails, tuple(fails))


# --- size-relation graph ----------------------------------------------------------


@dataclass(frozen=True)
class Srg:
    n: int
    arcs: tuple[tuple[int, int, int], ...]  # (i, j, strongest type)

    def label(self, i: int, j: int) -> int | None:
        for (a, b, t) in self.arcs:
            if (a, b) == (i, j):
                return t
        return None


def build_srg(s: DepSet, n: int) -> Srg:
    """One arc per (i, j), labelled with the strongest unary type."""
    best: dict[tuple[int, int], int] = {}
    for d in s:
        if is_unary(d):
            i, t, j = d
            best[(i, j)] = max(best.get((i, j), Z), t)
    arcs = tuple((i, j, t) for (i, j), t in sorted(best.items()))
    return Srg(n, arcs)


def srg_dot(g: Srg) -> str:
    lines = ["digraph srg {"]
    for i in range(1, g.n + 2):
        name = f"x{i}" if i <= g.n else "iter"
        lines.append(f'  n{i} [label="{name}"];')
    for (i, j, t) in g.arcs:
        lines.append(f'  n{i} -> n{j} [label="{_ENTRY_NAMES[t]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
