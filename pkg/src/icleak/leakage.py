"""Guessing-adversary success probabilities and leakage of index codes.

The adversary knows ``X_P`` and lists up to c(t) guesses for ``X_Q``.  All
quantities are exact; ``leakage_bits`` is the only float and is derived from
the retained rational ratio.
"""

from __future__ import annotations

import heapq
import math
import sys
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .codes import DeterministicCode, _Frame, _align
from .errors import BudgetExceeded, InvariantViolation, ValidationError
from .graph import Graph, build_confusion_graph
from .invariants import DEFAULT_NODE_BUDGET, chromatic_number, independence_number
from .model import AdversarySpec, Distribution, Instance

DEFAULT_SEARCH_BUDGET = 2 * 10**6
DEFAULT_EXTRA_CODEWORDS = 2


def top_c_mass(values: Distribution | Iterable, c: int) -> Fraction:
    """Sum of the c largest probabilities (all of them if there are fewer)."""
    if c < 1:
        raise ValidationError("guess budget must be at least 1")
    if isinstance(values, Distribution):
        return Fraction(sum(heapq.nlargest(c, values.weights)), values.denom)
    return sum(heapq.nlargest(c, values), Fraction(0))


def _check_full_scope(scope: Sequence[int], adversary: AdversarySpec):
    if tuple(scope) != tuple(range(1, adversary.n + 1)):
        raise ValidationError(f"expected a code over all {adversary.n} messages, got scope {tuple(scope)}")


def effective_capability(adversary: AdversarySpec, t: int, instance: Instance | None = None,
                         strict: bool = False) -> int:
    """c(t), checked against alpha of the target subproblem's confusion graph.

    A value above alpha is clamped with a warning (or rejected when
    ``strict``).  c(t) = 1 never needs alpha.
    """
    c = adversary.c(t)
    if c == 1 or instance is None:
        return c
    alpha = independence_number(build_confusion_graph(instance, adversary.Q, t)).alpha
    if c > alpha:
        msg = f"c({t}) = {c} exceeds alpha(Gamma_{t}(Q)) = {alpha}"
        if strict:
            raise InvariantViolation(msg)
        warnings.warn(msg + f"; clamping to {alpha}", stacklevel=2)
        return alpha
    return c


def ps_prior(dist: Distribution, adversary: AdversarySpec, t: int = 1, c: int | None = None) -> Fraction:
    """Expected success of the best c(t)-guess list before observing the codeword."""
    c = adversary.c(t) if c is None else c
    scope = tuple(range(1, adversary.n + 1))
    d = _align(dist, scope, t)
    to_p = d.layout.projector(adversary.P)
    groups: dict[int, list[int]] = defaultdict(list)
    for x, w in enumerate(d.weights):
        groups[to_p(x)].append(w)
    return Fraction(sum(sum(heapq.nlargest(c, ws)) for ws in groups.values()), d.denom)


def _posterior_groups(code, dist: Distribution, adversary: AdversarySpec, instance: Instance | None):
    _check_full_scope(code.scope, adversary)
    if instance is None:
        instance = _free_instance(code)
    frame = _Frame(code, instance, dist)
    to_p = frame.layout.projector(adversary.P)
    to_q = frame.layout.projector(adversary.Q)
    groups: dict[tuple[int, int], dict[int, int]] = defaultdict(lambda: defaultdict(int))
    for x, y, w in frame.entries:
        groups[(y, to_p(x))][to_q(x)] += w
    return groups, frame.denom


def _free_instance(code) -> Instance:
    # success probabilities do not depend on side information
    n = len(code.scope)
    return Instance(n, code.q, tuple(frozenset() for _ in range(n)))


def ps_posterior(code, dist: Distribution, adversary: AdversarySpec, t: int | None = None,
                 c: int | None = None, instance: Instance | None = None) -> Fraction:
    """Expected success of the best c(t)-guess list after observing the codeword."""
    t = code.t if t is None else t
    if t != code.t:
        raise ValidationError(f"code has length {code.t}, asked for t={t}")
    c = adversary.c(t) if c is None else c
    groups, denom = _posterior_groups(code, dist, adversary, instance)
    return Fraction(sum(sum(heapq.nlargest(c, g.values())) for g in groups.values()), denom)


def guess_lists(code, dist: Distribution, adversary: AdversarySpec, c: int | None = None,
                instance: Instance | None = None) -> dict[tuple[int, int], tuple[int, ...]]:
    """The adversary's guess list for every observation ``(y, x_P)``.

    Ties are broken by the smaller ``x_Q`` index.
    """
    c = adversary.c(code.t) if c is None else c
    groups, _ = _posterior_groups(code, dist, adversary, instance)
    out = {}
    for key in sorted(groups):
        ranked = sorted(groups[key].items(), key=lambda kv: (-kv[1], kv[0]))
        out[key] = tuple(xq for xq, _ in ranked[:c])
    return out


@dataclass(frozen=True)
class LeakageReport:
    ps_prior: Fraction
    ps_posterior: Fraction
    t: int
    c_used: int
    code: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not 0 < self.ps_prior <= self.ps_posterior <= 1:
            raise InvariantViolation(
                f"expected 0 < ps_prior <= ps_posterior <= 1, got {self.ps_prior}, {self.ps_posterior}")

    @property
    def ratio(self) -> Fraction:
        return self.ps_posterior / self.ps_prior

    @property
    def bits(self) -> float:
        r = self.ratio
        return math.log2(r.numerator) - math.log2(r.denominator)

    @property
    def rate(self) -> float:
        return self.bits / self.t


def leakage(code, dist: Distribution, adversary: AdversarySpec, t: int | None = None,
            instance: Instance | None = None, strict: bool = False) -> LeakageReport:
    """Leakage ``log2(ps_posterior / ps_prior)`` of a code."""
    t = code.t if t is None else t
    c = effective_capability(adversary, t, instance, strict)
    prior = ps_prior(dist, adversary, t, c)
    post = ps_posterior(code, dist, adversary, t, c, instance)
    return LeakageReport(prior, post, t, c, code)


def enumerate_zero_error_codes(graph: Graph, max_codewords: int | None = None,
                               budget: int | None = None) -> Iterator[tuple[int, ...]]:
    """Every partition of the vertices into independent sets, as canonical labels.

    Labels are restricted-growth strings (vertex 0 gets label 0, each new
    class takes the next label), so each partition appears exactly once.
    """
    n = graph.n_vertices
    adj = graph.adjacency
    K = n if max_codewords is None else max_codewords
    labels = [0] * n
    masks: list[int] = []
    nodes = 0

    def rec(v: int) -> Iterator[tuple[int, ...]]:
        nonlocal nodes
        nodes += 1
        if budget is not None and nodes > budget:
            raise BudgetExceeded(f"codebook enumeration exceeded budget {budget}")
        if v == n:
            yield tuple(labels)
            return
        for b in range(len(masks)):
            if not masks[b] & adj[v]:
                masks[b] |= 1 << v
                labels[v] = b
                yield from rec(v + 1)
                masks[b] &= ~(1 << v)
        if len(masks) < K:
            masks.append(1 << v)
            labels[v] = len(masks) - 1
            yield from rec(v + 1)
            masks.pop()

    yield from rec(0)


@dataclass(frozen=True)
class SearchResult:
    report: LeakageReport
    code: DeterministicCode
    chi: int
    max_codewords: int
    best_within_chi: Fraction
    larger_M_helped: bool
    nodes: int

    @property
    def bits(self) -> float:
        return self.report.bits


def _min_posterior(graph: Graph, weights: Sequence[int], xp: Sequence[int], c: int, K: int,
                   budget: int, counter: list[int]) -> tuple[int, tuple[int, ...]] | None:
    """Branch and bound over canonical labelings for the smallest posterior numerator.

    The partial posterior never decreases as vertices are placed, so a branch
    is cut once it reaches the incumbent; the first optimum found is the
    lexicographically smallest labeling.
    """
    n = graph.n_vertices
    adj = graph.adjacency
    labels = [0] * n
    masks: list[int] = []
    tops: dict[tuple[int, int], list[int]] = {}
    best: list = [None, None]

    def rec(v: int, post: int):
        counter[0] += 1
        if counter[0] > budget:
            raise BudgetExceeded(f"leakage search exceeded budget {budget}")
        if best[0] is not None and post >= best[0]:
            return
        if v == n:
            best[0], best[1] = post, tuple(labels)
            return
        w = weights[v]
        choices = [b for b in range(len(masks)) if not masks[b] & adj[v]]
        if len(masks) < K:
            choices.append(len(masks))
        for b in choices:
            if b == len(masks):
                masks.append(0)
            masks[b] |= 1 << v
            labels[v] = b
            key = (b, xp[v])
            top = tops.get(key)
            if top is None:
                tops[key] = [w]
                rec(v + 1, post + w)
                del tops[key]
            elif len(top) < c:
                top.append(w)
                rec(v + 1, post + w)
                top.pop()
            else:
                low = min(top)
                if w > low:
                    k = top.index(low)
                    top[k] = w
                    rec(v + 1, post + w - low)
                    top[k] = low
                else:
                    rec(v + 1, post)
            masks[b] &= ~(1 << v)
            if masks[b] == 0:
                masks.pop()

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, n + 1000))
    try:
        rec(0, 0)
    finally:
        sys.setrecursionlimit(old)
    return None if best[0] is None else (best[0], best[1])


def optimal_zero_error_leakage(instance: Instance, dist: Distribution, adversary: AdversarySpec,
                               t: int = 1, extra_codewords: int = DEFAULT_EXTRA_CODEWORDS,
                               budget: int = DEFAULT_SEARCH_BUDGET, strict: bool = False,
                               node_budget: int = DEFAULT_NODE_BUDGET) -> SearchResult:
    """Minimum leakage over deterministic zero-error codes of length t.

    Codebook sizes from chi(Gamma_t) to chi + ``extra_codewords`` are
    searched.  Leakage depends only on the partition into codeword classes,
    so each partition is visited once.  The result records whether allowing
    more than chi codewords ever lowered the optimum.
    """
    graph = build_confusion_graph(instance, None, t)
    chi = chromatic_number(graph, node_budget).chi
    K = chi + extra_codewords
    c = effective_capability(adversary, t, instance, strict)
    d = _align(dist, instance.messages, t)
    xp = d.layout.projector(adversary.P).table()
    counter = [0]
    best_all = _min_posterior(graph, d.weights, xp, c, K, budget, counter)
    best_chi = _min_posterior(graph, d.weights, xp, c, chi, budget, counter)
    post_num, labels = best_all
    code = DeterministicCode(instance.q, instance.messages, t, max(labels) + 1, tuple(b + 1 for b in labels))
    report = LeakageReport(ps_prior(d, adversary, t, c), Fraction(post_num, d.denom), t, c, code)
    return SearchResult(report, code, chi, K, Fraction(best_chi[0], d.denom),
                        post_num < best_chi[0], counter[0])
