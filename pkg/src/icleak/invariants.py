"""Exact graph invariants and zero-error broadcast-rate brackets.

Independence number and clique number use a bitset branch-and-bound with a
greedy-coloring bound.  The chromatic number is found by DSATUR
backtracking for each k between a lower bound (clique size, ``|V|/alpha``)
and the DSATUR greedy upper bound.
"""

from __future__ import annotations

import csv
import io
import sys
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import BudgetExceeded, CapExceeded, InvariantViolation, ValidationError
from .graph import Graph, build_confusion_graph, check_vertex_transitive, iter_bits, DEFAULT_VERTEX_CAP
from .logexpr import Bits
from .model import Instance, KnownRate, as_scope

DEFAULT_NODE_BUDGET = 10**7
LP_VERTEX_CAP = 2**10
MAIS_CAP = 20


def _ordering(graph: Graph) -> list[int]:
    """Descending degree, ties by vertex index."""
    return sorted(range(graph.n_vertices), key=lambda v: (-graph.degree(v), v))


def _relabel(graph: Graph, order: Sequence[int]) -> list[int]:
    rank = {v: r for r, v in enumerate(order)}
    rows = []
    for v in order:
        m = 0
        for u in iter_bits(graph.adjacency[v]):
            m |= 1 << rank[u]
        rows.append(m)
    return rows


def _max_clique(graph: Graph, budget: int) -> list[int]:
    order = _ordering(graph)
    adj = _relabel(graph, order)
    best: list[int] = []
    nodes = 0

    def color_bounds(P: int) -> list[tuple[int, int]]:
        # greedy sequential coloring of P; returns (vertex, color number) by color
        out = []
        uncolored = P
        color = 0
        while uncolored:
            color += 1
            avail = uncolored
            while avail:
                low = avail & -avail
                v = low.bit_length() - 1
                uncolored &= ~low
                avail &= ~low & ~adj[v]
                out.append((v, color))
        return out

    def expand(R: list[int], P: int):
        nonlocal best, nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"clique search exceeded node budget {budget}")
        for v, bound in reversed(color_bounds(P)):
            if len(R) + bound <= len(best):
                return
            R.append(v)
            newP = P & adj[v]
            if newP:
                expand(R, newP)
            elif len(R) > len(best):
                best = list(R)
            R.pop()
            P &= ~(1 << v)

    if graph.n_vertices:
        _with_depth(graph.n_vertices, expand, [], (1 << graph.n_vertices) - 1)
    return sorted(order[r] for r in best)


def _with_depth(depth: int, fn, *args):
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, depth + 1000))
    try:
        return fn(*args)
    finally:
        sys.setrecursionlimit(old)


@dataclass(frozen=True)
class IndependenceResult:
    alpha: int
    witness: tuple[int, ...]

    def __int__(self):
        return self.alpha


def independence_number(graph: Graph, budget: int = DEFAULT_NODE_BUDGET) -> IndependenceResult:
    """Exact alpha with one maximum independent set as witness."""
    if graph.n_vertices == 0:
        return IndependenceResult(0, ())
    witness = _max_clique(graph.complement(), budget)
    return IndependenceResult(len(witness), tuple(witness))


def clique_number(graph: Graph, budget: int = DEFAULT_NODE_BUDGET) -> tuple[int, tuple[int, ...]]:
    w = _max_clique(graph, budget)
    return len(w), tuple(w)


@dataclass(frozen=True)
class ColoringResult:
    chi: int
    coloring: tuple[int, ...]

    def __int__(self):
        return self.chi

    def classes(self) -> list[list[int]]:
        out = [[] for _ in range(self.chi)]
        for v, c in enumerate(self.coloring):
            out[c].append(v)
        return out


def _dsatur(graph: Graph, k: int | None, budget: int | None) -> list[int] | None:
    """DSATUR greedy (k=None) or exact k-colorability backtracking."""
    n = graph.n_vertices
    adj = graph.adjacency
    colors = [-1] * n
    seen = [0] * n  # bitmask of neighbour colours
    deg = graph.degrees()
    nodes = 0

    def pick() -> int:
        best, key = -1, None
        for v in range(n):
            if colors[v] < 0:
                kv = (seen[v].bit_count(), deg[v], -v)
                if key is None or kv > key:
                    best, key = v, kv
        return best

    def assign(v, c):
        colors[v] = c
        changed = []
        bit = 1 << c
        for u in iter_bits(adj[v]):
            if not seen[u] & bit:
                seen[u] |= bit
                changed.append(u)
        return changed

    def unassign(v, c, changed):
        colors[v] = -1
        bit = 1 << c
        for u in changed:
            seen[u] &= ~bit

    if k is None:
        for _ in range(n):
            v = pick()
            c = 0
            while seen[v] >> c & 1:
                c += 1
            assign(v, c)
        return colors

    def search(done: int, used: int) -> bool:
        nonlocal nodes
        if done == n:
            return True
        nodes += 1
        if budget is not None and nodes > budget:
            raise BudgetExceeded(f"coloring search exceeded node budget {budget}")
        v = pick()
        for c in range(min(k, used + 1)):
            if seen[v] >> c & 1:
                continue
            changed = assign(v, c)
            if search(done + 1, max(used, c + 1)):
                return True
            unassign(v, c, changed)
        return False

    return list(colors) if _with_depth(n, search, 0, 0) else None


def chromatic_number(graph: Graph, budget: int = DEFAULT_NODE_BUDGET,
                     alpha: int | None = None) -> ColoringResult:
    """Exact chi with a proper coloring witness (colors 0..chi-1)."""
    n = graph.n_vertices
    if n == 0:
        return ColoringResult(0, ())
    greedy = _dsatur(graph, None, None)
    ub = max(greedy) + 1
    omega, _ = clique_number(graph, budget)
    if alpha is None:
        alpha = independence_number(graph, budget).alpha
    lb = max(omega, -(-n // alpha))
    best = greedy
    for k in range(lb, ub):
        found = _dsatur(graph, k, budget)
        if found is not None:
            best = found
            break
    chi = max(best) + 1
    return ColoringResult(chi, tuple(best))


def maximal_independent_sets(graph: Graph) -> list[int]:
    """All maximal independent sets as bitmasks (Bron-Kerbosch with pivoting on the complement)."""
    comp = graph.complement().adjacency
    out: list[int] = []

    def bk(R: int, P: int, X: int):
        if not P and not X:
            out.append(R)
            return
        pivot = max(iter_bits(P | X), key=lambda u: (comp[u] & P).bit_count())
        for v in list(iter_bits(P & ~comp[pivot])):
            bk(R | (1 << v), P & comp[v], X & comp[v])
            P &= ~(1 << v)
            X |= 1 << v

    if graph.n_vertices:
        _with_depth(graph.n_vertices, bk, 0, graph.full_mask, 0)
    return sorted(out)


def _simplex_max(A: list[list[Fraction]], b: list[Fraction], c: list[Fraction]) -> Fraction:
    """max c.x s.t. A x <= b, x >= 0, with b >= 0; exact, Bland's rule."""
    m, n = len(A), len(c)
    T = [list(A[i]) + [Fraction(int(i == j)) for j in range(m)] + [b[i]] for i in range(m)]
    obj = [-ci for ci in c] + [Fraction(0)] * m + [Fraction(0)]
    basis = [n + i for i in range(m)]
    while True:
        enter = next((j for j in range(n + m) if obj[j] < 0), None)
        if enter is None:
            return obj[-1]
        rows = [(T[i][-1] / T[i][enter], basis[i], i) for i in range(m) if T[i][enter] > 0]
        if not rows:
            raise ValidationError("unbounded linear program")
        _, _, r = min(rows)
        piv = T[r][enter]
        T[r] = [v / piv for v in T[r]]
        for i in range(m):
            if i != r and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * p for a, p in zip(T[i], T[r])]
        f = obj[enter]
        obj = [a - f * p for a, p in zip(obj, T[r])]
        basis[r] = enter


def fractional_chromatic_lp(graph: Graph, cap: int = LP_VERTEX_CAP) -> Fraction:
    """chi_f as the LP optimum over maximal independent sets (dual: fractional clique)."""
    n = graph.n_vertices
    if n > cap:
        raise CapExceeded(f"LP fallback limited to {cap} vertices")
    if n == 0:
        return Fraction(0)
    sets = maximal_independent_sets(graph)
    A = [[Fraction(s >> v & 1) for v in range(n)] for s in sets]
    return _simplex_max(A, [Fraction(1)] * len(sets), [Fraction(1)] * n)


def fractional_chromatic_number(graph: Graph, method: str = "auto", alpha: int | None = None,
                                budget: int = DEFAULT_NODE_BUDGET) -> Fraction:
    """Exact chi_f: ``|V|/alpha`` on vertex-transitive graphs, else the exact LP."""
    if method not in ("auto", "lp", "transitive"):
        raise ValueError(f"unknown method {method!r}")
    if method == "lp":
        return fractional_chromatic_lp(graph)
    if check_vertex_transitive(graph):
        if alpha is None:
            alpha = independence_number(graph, budget).alpha
        return Fraction(graph.n_vertices, alpha) if graph.n_vertices else Fraction(0)
    if method == "transitive":
        raise ValidationError("graph is not vertex-transitive")
    return fractional_chromatic_lp(graph)


def _acyclic(nodes: int, out_arcs: dict[int, int]) -> bool:
    remaining = nodes
    while remaining:
        sinks = 0
        for v in iter_bits(remaining):
            if not out_arcs[v] & remaining:
                sinks |= 1 << v
        if not sinks:
            return False
        remaining &= ~sinks
    return True


def mais(instance: Instance, S: Iterable[int] | None = None, cap: int = MAIS_CAP) -> tuple[int, ...]:
    """Maximum acyclic induced subgraph of the side-information digraph on S.

    Arc i -> j whenever receiver i knows message j.
    """
    S = instance.messages if S is None else as_scope(S)
    if len(S) > cap:
        raise CapExceeded(f"MAIS enumeration limited to {cap} messages")
    arcs = {i: sum(1 << j for j in instance.side(i, S)) for i in S}
    for size in range(len(S), 0, -1):
        for sub in combinations(S, size):
            if _acyclic(sum(1 << i for i in sub), arcs):
                return sub
    return ()


def mais_lower_bound(instance: Instance, S: Iterable[int] | None = None, cap: int = MAIS_CAP) -> Bits:
    return len(mais(instance, S, cap)) * Bits.log2(instance.q)


@dataclass(frozen=True)
class SurrogateRow:
    t: int
    n_vertices: int
    alpha: int
    chi: int
    chi_f: Fraction

    @property
    def log_chi_rate(self) -> Bits:
        return Bits.log2(self.chi) / self.t

    @property
    def log_chi_f_rate(self) -> Bits:
        return Bits.log2(self.chi_f) / self.t


@dataclass(frozen=True)
class RateBracket:
    subset: tuple[int, ...]
    rows: tuple[SurrogateRow, ...]
    certified_lower: Bits
    certified_upper: Bits
    known_value: KnownRate | None = None
    mais_set: tuple[int, ...] = ()

    @property
    def pinned(self) -> bool:
        return self.certified_lower == self.certified_upper

    @property
    def exact(self) -> Bits | None:
        """The zero-error rate, only when the bracket has collapsed."""
        return self.certified_upper if self.pinned else None

    def to_csv(self) -> str:
        return surrogate_csv(self.rows)


def surrogate_csv(rows: Iterable[SurrogateRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "V", "alpha", "chi", "chi_f", "log_chi_over_t", "log_chi_f_over_t"])
    for r in rows:
        w.writerow([r.t, r.n_vertices, r.alpha, r.chi, str(r.chi_f),
                    f"{float(r.log_chi_rate):.12f}", f"{float(r.log_chi_f_rate):.12f}"])
    return buf.getvalue()


def graph_row(graph: Graph, t: int, budget: int = DEFAULT_NODE_BUDGET) -> SurrogateRow:
    alpha = independence_number(graph, budget).alpha
    chi = chromatic_number(graph, budget, alpha=alpha).chi
    chi_f = fractional_chromatic_number(graph, alpha=alpha, budget=budget)
    omega, _ = clique_number(graph, budget)
    if graph.n_vertices and not (omega <= chi_f <= chi):
        raise InvariantViolation(f"omega={omega} <= chi_f={chi_f} <= chi={chi} fails")
    return SurrogateRow(t, graph.n_vertices, alpha, chi, chi_f)


def rate_bracket(instance: Instance, S: Iterable[int] | None = None, t_max: int = 1,
                 known: KnownRate | None = None, vertex_cap: int = DEFAULT_VERTEX_CAP,
                 budget: int = DEFAULT_NODE_BUDGET) -> RateBracket:
    """Certified bracket on the zero-error rate of the subproblem induced by S."""
    S = instance.messages if S is None else as_scope(S)
    if t_max < 1:
        raise ValidationError("t_max must be at least 1")
    rows = []
    for t in range(1, t_max + 1):
        g = build_confusion_graph(instance, S, t, cap=vertex_cap)
        rows.append(graph_row(g, t, budget))
    upper = rows[0].log_chi_rate
    for r in rows[1:]:
        if r.log_chi_rate < upper:
            upper = r.log_chi_rate
    m = mais(instance, S)
    lower = max(len(m) * Bits.log2(instance.q), Bits(0))
    if lower > upper:
        raise InvariantViolation(f"certified lower {lower} exceeds upper {upper}")
    return RateBracket(S, tuple(rows), lower, upper, known, m)
