"""End-to-end self-checks: bundled examples, per-code converse checks and a
randomized sweep over small instances."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from itertools import product
from typing import Iterable

from .bounds import converse_inequality_check, product_identity_check, rate_bounds
from .codes import (DeterministicCode, StochasticCode, code_from_coloring, composite_code, determinize,
                    error_probability, identity_code, is_zero_error_valid, parse_code)
from .graph import build_confusion_graph
from .invariants import chromatic_number, fractional_chromatic_number, independence_number, rate_bracket
from .leakage import leakage, ps_posterior
from .logexpr import Bits
from .model import AdversarySpec, Distribution, Instance, load_instance


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


def fixture_text(name: str) -> str:
    return resources.files("icleak").joinpath("data", name).read_text()


def load_fixture(name: str):
    return load_instance(fixture_text(name))


def _check(name: str, cond: bool, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(cond), detail)


def disjoint_splits(messages: Iterable[int]):
    """All ordered pairs (A, B) of disjoint subsets."""
    ms = tuple(messages)
    for labels in product((0, 1, 2), repeat=len(ms)):
        yield (tuple(i for i, l in zip(ms, labels) if l == 1), tuple(i for i, l in zip(ms, labels) if l == 2))


def code_checks(instance: Instance, dist: Distribution, adversary: AdversarySpec, code, tag: str = "code",
                alpha_Q: int | None = None) -> list[CheckResult]:
    out = []
    chk = converse_inequality_check(code, instance, dist, adversary, alpha_Q=alpha_Q)
    out.append(_check(f"{tag}: good-set mass equals 1 - P_e", chk.good_mass_holds, f"{chk.good_mass} vs {1 - chk.P_e}"))
    out.append(_check(f"{tag}: good sets bounded by alpha", chk.set_size_holds, f"max {chk.max_good_set} vs alpha {chk.alpha_Q}"))
    out.append(_check(f"{tag}: posterior >= c(1-P_e)/alpha", chk.posterior_holds, f"{chk.ps_posterior} vs {chk.posterior_bound}"))
    if chk.composite_holds is not None:
        out.append(_check(f"{tag}: composite leakage <= log2 M2", chk.composite_holds,
                          f"{chk.composite_bits:.12f} vs {chk.composite_cap_bits:.12f}"))
    return out


def fixture_suite() -> list[CheckResult]:
    out = []
    inst, dist, adv, _ = load_fixture("three_message.json")
    g = build_confusion_graph(inst)
    a = independence_number(g).alpha
    chi = chromatic_number(g).chi
    chif = fractional_chromatic_number(g)
    out.append(_check("three-message graph invariants", (a, chi, chif) == (2, 4, 4), f"alpha={a} chi={chi} chi_f={chif}"))
    coloring = parse_code(fixture_text("three_message_coloring.code"), inst)
    out.append(_check("three-message coloring is zero-error", is_zero_error_valid(coloring, g)))
    lr = leakage(coloring, dist, adv)
    out.append(_check("three-message coloring leaks 2 bits", lr.ratio == 4, f"ratio {lr.ratio}"))
    out += code_checks(inst, dist, adv, coloring, "three-message coloring")

    inst, dist, adv, _ = load_fixture("correlated_pair.json")
    xor = parse_code(fixture_text("xor.code"), inst)
    lr = leakage(xor, dist, adv)
    out.append(_check("correlated pair XOR leakage", (lr.ps_prior, lr.ps_posterior) == (Fraction(2, 5), Fraction(7, 10)),
                      f"prior {lr.ps_prior} posterior {lr.ps_posterior}"))
    out += code_checks(inst, dist, adv, xor, "correlated pair XOR")
    bad = [(A, B, t) for A, B in disjoint_splits(inst.messages) for t in (1, 2)
           if not product_identity_check(dist, A, B, t).holds]
    out.append(_check("product identity on correlated pair", not bad, f"fails at {bad[:3]}" if bad else ""))

    inst, dist, adv, known = load_fixture("four_message_biased.json")
    br = rate_bracket(inst, adv.Q, 1, known.get("R_Q"))
    b = rate_bounds(inst, dist, adv, br)
    expect = 3 - Bits.log2(3)
    out.append(_check("four-message lower bound is 3 - log2 3", b.lower_zero.pinned and b.lower_zero.lo == expect, str(b.lower_zero.lo)))
    out.append(_check("four-message zero-error upper bound is 2", b.upper_zero.pinned and b.upper_zero.hi == 2, str(b.upper_zero.hi)))
    gq = build_confusion_graph(inst, adv.Q)
    part_q = code_from_coloring(gq, chromatic_number(gq).coloring)
    part_p = identity_code(inst.q, adv.P)
    comp = composite_code(part_p, part_q)
    out.append(_check("four-message composite is zero-error", is_zero_error_valid(comp, build_confusion_graph(inst))))
    out += code_checks(inst, dist, adv, comp, "four-message composite")
    return out


def random_distribution(rng: random.Random, q: int, scope, max_weight: int = 12) -> Distribution:
    size = q ** len(scope)
    w = [rng.randint(1, max_weight) for _ in range(size)]
    return Distribution(q, scope, w, sum(w))


def random_instance(rng: random.Random, n: int, q: int = 2) -> Instance:
    side = []
    for i in range(1, n + 1):
        others = [j for j in range(1, n + 1) if j != i]
        side.append(frozenset(j for j in others if rng.random() < 0.5))
    return Instance(n, q, tuple(side))


def random_code(rng: random.Random, q: int, scope, t: int, M: int) -> DeterministicCode:
    size = q ** (len(scope) * t)
    return DeterministicCode(q, scope, t, M, tuple(rng.randint(1, M) for _ in range(size)))


def random_stochastic_code(rng: random.Random, q: int, scope, t: int, M: int) -> StochasticCode:
    size = q ** (len(scope) * t)
    rows = []
    for _ in range(size):
        w = [rng.randint(0, 3) for _ in range(M)]
        if not any(w):
            w[rng.randrange(M)] = 1
        s = sum(w)
        rows.append(tuple(Fraction(v, s) for v in w))
    return StochasticCode(q, scope, t, M, tuple(rows))


def brute_force_chromatic(graph, limit: int = 8) -> int:
    """Smallest k admitting a proper coloring, by plain backtracking over assignments."""
    n = graph.n_vertices
    earlier = [[u for u in range(v) if graph.has_edge(u, v)] for v in range(n)]

    def fits(k, colors, v):
        if v == n:
            return True
        for c in range(k):
            if all(colors[u] != c for u in earlier[v]):
                colors[v] = c
                if fits(k, colors, v + 1):
                    return True
        return False

    for k in range(1, limit + 1):
        if fits(k, [0] * n, 0):
            return k
    raise ValueError("no coloring within limit")


def random_suite(count: int, seed: int) -> list[CheckResult]:
    rng = random.Random(seed)
    out = []
    for k in range(count):
        n = rng.randint(1, 3)
        inst = random_instance(rng, n)
        dist = random_distribution(rng, inst.q, inst.messages)
        known = frozenset(i for i in inst.messages if rng.random() < 0.4)
        if len(known) == n:
            known = frozenset()
        adv = AdversarySpec(n, known)
        tag = f"random[{k}] {inst.describe()} P={sorted(known)}"
        bad = [(A, B, t) for A, B in disjoint_splits(inst.messages) for t in (1, 2)
               if not product_identity_check(dist, A, B, t).holds]
        out.append(_check(f"{tag}: product identity", not bad, f"fails at {bad[:3]}" if bad else ""))
        g = build_confusion_graph(inst)
        if g.n_vertices <= 8:
            chi = chromatic_number(g).chi
            bf = brute_force_chromatic(g)
            out.append(_check(f"{tag}: chi matches brute force", chi == bf, f"{chi} vs {bf}"))
        alpha_Q = independence_number(build_confusion_graph(inst, adv.Q)).alpha
        code = random_code(rng, inst.q, inst.messages, 1, rng.randint(1, 4))
        out += code_checks(inst, dist, adv, code, tag, alpha_Q=alpha_Q)
        zero = error_probability(code, inst, dist).zero_error
        out.append(_check(f"{tag}: zero-error iff classes independent", zero == is_zero_error_valid(code, g)))
        lr = leakage(code, dist, adv)
        out.append(_check(f"{tag}: leakage non-negative", lr.ratio >= 1, str(lr.ratio)))
        # refining a class never lowers the single-guess posterior
        refined = DeterministicCode(code.q, code.scope, 1, code.M + 1,
                                    tuple(code.M + 1 if (y == code.table[0] and rng.random() < 0.5) else y
                                          for y in code.table))
        p0 = ps_posterior(code, dist, adv, c=1)
        p1 = ps_posterior(refined, dist, adv, c=1)
        out.append(_check(f"{tag}: refinement monotone", p1 >= p0, f"{p1} vs {p0}"))
        sc = random_stochastic_code(rng, inst.q, inst.messages, 1, rng.randint(1, 4))
        det = determinize(sc, inst, dist)
        pe_s = error_probability(sc, inst, dist).P_e
        pe_d = error_probability(det, inst, dist).P_e
        out.append(_check(f"{tag}: determinize keeps M, does not raise P_e",
                          det.M == sc.M and pe_d <= pe_s, f"{pe_d} vs {pe_s}"))
    return out
