"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line with its runtime; the lines are printed
in the terminal summary (see conftest.py) and by running this file directly.
"""

import math
import random
import sys
import time
from contextlib import redirect_stdout
from fractions import Fraction
from io import StringIO
from pathlib import Path

import oracles
from icleak.bounds import converse_inequality_check, product_identity_check
from icleak.cli import main
from icleak.codes import (DeterministicCode, code_from_coloring, composite_code, determinize, error_probability,
                          identity_code, is_zero_error_valid, parse_code)
from icleak.graph import build_confusion_graph
from icleak.invariants import chromatic_number, fractional_chromatic_number, independence_number
from icleak.leakage import guess_lists, leakage, optimal_zero_error_leakage, ps_posterior
from icleak.model import AdversarySpec, Distribution, Instance, Layout
from icleak.simulate import estimate_ps
from icleak.verify import disjoint_splits, fixture_text, load_fixture, random_distribution, random_stochastic_code

DATA = Path(__file__).resolve().parent.parent / "src" / "icleak" / "data"
RESULTS: list[str] = []


def record(number, title, passed, detail, started, limit=None):
    elapsed = time.perf_counter() - started
    ok = passed and (limit is None or elapsed < limit)
    timing = f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit else "")
    RESULTS.append(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} [{timing}] {detail}")
    return ok


def test_criterion_1_three_message_invariants():
    t0 = time.perf_counter()
    inst = Instance.from_lists(2, [[], [3], [2]])
    g = build_confusion_graph(inst)
    a, chi, chif = independence_number(g).alpha, chromatic_number(g).chi, fractional_chromatic_number(g)
    ok = (a, chi, chif) == (2, 4, Fraction(4))
    assert record(1, "three-message graph invariants", ok, f"alpha={a} chi={chi} chi_f={chif}", t0, 1)


def test_criterion_2_four_message_bounds():
    t0 = time.perf_counter()
    buf = StringIO()
    with redirect_stdout(buf):
        rc = main(["bounds", "--instance", str(DATA / "four_message_biased.json")])
    v = dict(line.split(" = ", 1) for line in buf.getvalue().splitlines() if " = " in line)
    exact_lower = 3 - math.log2(3)
    checks = {
        "exit code 0": rc == 0,
        "correction is log2(16/3)": v["correction_arg"] == "16/3" and v["correction"] == "4 - log2(3)",
        "lower is 3 - log2(3)": v["lower_vanishing"] == v["lower_zero_error"] == "3 - log2(3)",
        "lower float within 1e-9": abs(float(v["lower_zero_error_bits"]) - exact_lower) < 1e-9,
        "zero-error upper is 2, certified": v["upper_zero_error"] == "2" and v["rho_Q_source"] == "certified",
        "certified bracket": v["upper_zero_error_source"] == "certified",
        "vanishing upper 3 - 3/4 log2 3": v["upper_vanishing"] == "3 - 3/4*log2(3)"
        and abs(float(v["upper_vanishing_bits"]) - 1.811278124459) < 1e-9,
    }
    bad = [k for k, ok in checks.items() if not ok]
    detail = (f"lower={v['lower_zero_error_bits']} upper={v['upper_zero_error_bits']} "
              f"R-upper={v['upper_vanishing_bits']}" + (f" failing: {bad}" if bad else ""))
    assert record(2, "four-message bound reproduction", not bad, detail, t0, 5)


def test_criterion_3_correlated_pair_leakage():
    t0 = time.perf_counter()
    inst, dist, adv, _ = load_fixture("correlated_pair.json")
    code = parse_code(fixture_text("xor.code"), inst)
    rep = leakage(code, dist, adv)
    lay = Layout(2, (1, 2))
    guesses = {y: lay.digits(g[0]) for (y, _), g in guess_lists(code, dist, adv).items()}
    # codeword 1 carries x_1 xor x_2 = 0, codeword 2 carries 1
    ok = (rep.ps_prior == Fraction(2, 5) and rep.ps_posterior == Fraction(7, 10) and rep.ratio == Fraction(7, 4)
          and guesses == {1: (1, 1), 2: (1, 0)})
    detail = f"prior={rep.ps_prior} posterior={rep.ps_posterior} L=log2({rep.ratio}) guesses={guesses}"
    assert record(3, "correlated-pair XOR leakage", ok, detail, t0, 1)


def _all_codebooks():
    """(instance, codes) for every binary instance with n <= 3, codes from the partition oracle."""
    out = []
    for inst in oracles.all_instances():
        codes = []
        for part in oracles.proper_partitions(inst):
            lay = Layout(2, inst.messages)
            table = [0] * lay.size
            for k, cls in enumerate(part):
                for x in cls:
                    table[lay.index(x)] = k + 1
            codes.append(DeterministicCode(2, inst.messages, 1, len(part), tuple(table)))
        out.append((inst, codes))
    return out


def test_criterion_4_uniform_search_equals_log_chi():
    t0 = time.perf_counter()
    bad = []
    count = 0
    for inst, codes in _all_codebooks():
        dist = Distribution.uniform(2, inst.messages)
        adv = AdversarySpec(inst.n)
        joint = {x: Fraction(1, 2**inst.n) for x in oracles.tuples(2, inst.n)}
        prior = oracles.ps(joint, [], 1)
        best = min(oracles.ps(joint, [], 1, {Layout(2, inst.messages).digits(x): y for x, y in enumerate(c.table)})
                   for c in codes) / prior
        count += len(codes)
        chi = chromatic_number(build_confusion_graph(inst)).chi
        found = optimal_zero_error_leakage(inst, dist, adv).report.ratio
        if not (best == found == chi == oracles.chi_by_backtracking(build_confusion_graph(inst))):
            bad.append((inst.describe(), best, found, chi))
    detail = f"69 instances, {count} codebooks, mismatches={bad[:3]}"
    assert record(4, "uniform optimal leakage equals log2 chi", not bad, detail, t0, 60)


def test_criterion_5_converse_on_all_codebooks():
    t0 = time.perf_counter()
    violations = []
    count = 0
    for inst, codes in _all_codebooks():
        dist = Distribution.uniform(2, inst.messages)
        adv = AdversarySpec(inst.n)
        alpha = oracles.alpha_by_subsets(build_confusion_graph(inst))
        for code in codes:
            count += 1
            chk = converse_inequality_check(code, inst, dist, adv)
            if chk.alpha_Q != alpha or not (chk.good_mass_holds and chk.set_size_holds and chk.posterior_holds):
                violations.append((inst.describe(), code.table, chk.violations))
    detail = f"{count} codes checked, violations={len(violations)}"
    assert record(5, "converse chain on every codebook", not violations, detail, t0)


def test_criterion_6_product_identity():
    t0 = time.perf_counter()
    rng = random.Random(2024)
    bad = []
    checks = 0
    for _ in range(100):
        n = rng.randint(1, 3)
        dist = random_distribution(rng, 2, range(1, n + 1), max_weight=50)
        for A, B in disjoint_splits(dist.scope):
            for t in (1, 2, 3):
                checks += 1
                r = product_identity_check(dist, A, B, t)
                if not r.holds:
                    bad.append((A, B, t, r.lhs, r.rhs))
    detail = f"100 distributions, {checks} checks, violations={len(bad)}"
    assert record(6, "product identity", not bad, detail, t0, 30)


def test_criterion_7_determinization():
    t0 = time.perf_counter()
    rng = random.Random(77)
    insts = list(oracles.all_instances())
    bad = []
    for _ in range(100):
        inst = rng.choice(insts)
        dist = random_distribution(rng, 2, inst.messages)
        sc = random_stochastic_code(rng, 2, inst.messages, 1, rng.randint(1, 5))
        det = determinize(sc, inst, dist)
        pe_s = error_probability(sc, inst, dist).P_e
        lay = Layout(2, inst.messages)
        enc = {lay.digits(x): {y: p for y, p in enumerate(row, 1) if p} for x, row in enumerate(sc.rows)}
        joint = {lay.digits(x): p for x, p in dist.items()}
        pe_d = error_probability(det, inst, dist).P_e
        if not (pe_s == oracles.ml_error_probability(inst, joint, enc) and pe_d <= pe_s and det.M == sc.M):
            bad.append((inst.describe(), pe_s, pe_d))
    detail = f"100 stochastic codes, violations={len(bad)}"
    assert record(7, "determinization keeps M and does not raise P_e", not bad, detail, t0)


def test_criterion_8_composite_scheme():
    t0 = time.perf_counter()
    inst, dist, adv, _ = load_fixture("four_message_biased.json")
    gq = build_confusion_graph(inst, adv.Q)
    code_q = code_from_coloring(gq, chromatic_number(gq).coloring)
    comp = composite_code(identity_code(2, adv.P), code_q)
    valid = is_zero_error_valid(comp, build_confusion_graph(inst))
    rep = leakage(comp, dist, adv)
    ok = valid and comp.M1 == 2 and comp.M2 == 4 and rep.ratio <= comp.M2
    detail = f"zero-error={valid} M1={comp.M1} M2={comp.M2} L={rep.bits:.12f} ratio={rep.ratio} <= {comp.M2}"
    assert record(8, "composite code leakage at most log2 M2", ok, detail, t0)


def test_criterion_9_monte_carlo_coverage():
    t0 = time.perf_counter()
    inst, dist, adv, _ = load_fixture("correlated_pair.json")
    code = parse_code(fixture_text("xor.code"), inst)
    exact = ps_posterior(code, dist, adv)
    hits = sum(estimate_ps(code, dist, adv, samples=100_000, seed=s).covers(exact) for s in range(100))
    assert record(9, "Monte Carlo interval coverage", hits >= 94, f"{hits}/100 intervals contain {exact}", t0)


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    print("\n".join(RESULTS))
    sys.exit(1 if failed else 0)
