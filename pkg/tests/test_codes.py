import random
from fractions import Fraction
from itertools import product

import pytest

import oracles
from icleak.codes import (CompositeCode, DeterministicCode, StochasticCode, code_from_coloring, code_from_function,
                          composite_code, constant_code, determinize, error_probability, format_code, good_set,
                          good_sets, identity_code, is_zero_error_valid, parse_code, part_decoders, recover_parts,
                          synthesize_decoders)
from icleak.errors import ValidationError
from icleak.graph import build_confusion_graph
from icleak.invariants import chromatic_number, independence_number
from icleak.model import Distribution, Instance, Layout, marginal
from icleak.verify import fixture_text, random_distribution, random_stochastic_code


def xor_code():
    return code_from_function(2, (1, 2), 1, lambda x: (x[0] ^ x[1]) + 1)


def joint_of(dist):
    lay = dist.layout
    return {lay.digits(x): p for x, p in dist.items()}


# decoders

def test_xor_decoder_adds_side_information(pair, correlated):
    g = synthesize_decoders(xor_code(), pair, correlated)
    for y, x2 in product((1, 2), (0, 1)):
        assert g.decode(1, y, x2) == (y - 1) ^ x2
        assert g.decode(2, y, x2) == (y - 1) ^ x2


def test_constant_code_decodes_to_most_likely_value():
    inst = Instance.from_lists(2, [[2], [1]])
    dist = Distribution.product(2, [[Fraction(1, 3), Fraction(2, 3)], [Fraction(3, 4), Fraction(1, 4)]])
    g = synthesize_decoders(constant_code(2, (1, 2)), inst, dist)
    assert {g.decode(1, 1, s) for s in (0, 1)} == {1}
    assert {g.decode(2, 1, s) for s in (0, 1)} == {0}


def test_coloring_codes_decode_exactly():
    rng = random.Random(5)
    for inst in oracles.all_instances():
        g = build_confusion_graph(inst)
        code = code_from_coloring(g, chromatic_number(g).coloring)
        dist = random_distribution(rng, 2, inst.messages)
        assert error_probability(code, inst, dist).P_e == 0


# zero-error validity

def test_drawn_coloring_is_valid(three_message):
    code = parse_code(fixture_text("three_message_coloring.code"), three_message)
    assert code.M == 4
    assert is_zero_error_valid(code, build_confusion_graph(three_message))


def test_constant_code_invalid(three_message):
    assert not is_zero_error_valid(constant_code(2, (1, 2, 3)), build_confusion_graph(three_message))


def test_xor_valid(pair):
    assert is_zero_error_valid(xor_code(), build_confusion_graph(pair))


def test_validity_dimension_mismatch(pair, three_message):
    with pytest.raises(ValidationError):
        is_zero_error_valid(xor_code(), build_confusion_graph(three_message))


def test_zero_error_iff_independent_classes():
    rng = random.Random(11)
    for inst in oracles.all_instances():
        g = build_confusion_graph(inst)
        dist = random_distribution(rng, 2, inst.messages)
        for _ in range(6):
            M = rng.randint(1, g.n_vertices)
            code = DeterministicCode(2, inst.messages, 1, M, tuple(rng.randint(1, M) for _ in range(g.n_vertices)))
            rep = error_probability(code, inst, dist)
            assert rep.zero_error == (rep.P_e == 0) == is_zero_error_valid(code, g)


# error probability

def test_constant_code_error_matches_oracle(pair, correlated):
    rep = error_probability(constant_code(2, (1, 2)), pair, correlated)
    enc = {x: {1: Fraction(1)} for x in joint_of(correlated)}
    assert rep.P_e == oracles.ml_error_probability(pair, joint_of(correlated), enc)
    # both receivers always guess 1, so only (1,1) decodes correctly
    assert rep.P_e == Fraction(3, 5)
    assert not rep.zero_error and rep.n_errors == 3


def test_error_probability_matches_oracle_on_random_codes():
    rng = random.Random(2)
    for _ in range(60):
        inst = Instance.from_lists(2, rng.choice(list(oracles.all_instances(n_max=3))).side_info)
        dist = random_distribution(rng, 2, inst.messages)
        M = rng.randint(1, 4)
        if rng.random() < 0.5:
            code = DeterministicCode(2, inst.messages, 1, M, tuple(rng.randint(1, M) for _ in range(2**inst.n)))
            enc = {code.layout.digits(x): {y: Fraction(1)} for x, y in enumerate(code.table)}
        else:
            code = random_stochastic_code(rng, 2, inst.messages, 1, M)
            enc = {code.layout.digits(x): {y: p for y, p in enumerate(row, 1) if p} for x, row in enumerate(code.rows)}
        assert error_probability(code, inst, dist).P_e == oracles.ml_error_probability(inst, joint_of(dist), enc)


# determinize

def test_determinize_keeps_deterministic_codes(pair, correlated):
    assert determinize(xor_code(), pair, correlated) == xor_code()


def test_mixture_of_colorings_determinizes_to_zero_error(three_message):
    g = build_confusion_graph(three_message)
    a = chromatic_number(g).coloring
    # second coloring: vertex 0 moves to a fresh color; every codeword's
    # preimage under either coloring stays inside one class of the first
    b = [4 if x == 0 else a[x] for x in range(8)]
    assert g.is_proper_coloring(b)
    rows = []
    for x in range(8):
        row = [Fraction(0)] * 5
        row[a[x]] += Fraction(1, 2)
        row[b[x]] += Fraction(1, 2)
        rows.append(tuple(row))
    sc = StochasticCode(2, (1, 2, 3), 1, 5, tuple(rows))
    dist = Distribution.uniform(2, (1, 2, 3))
    assert error_probability(sc, three_message, dist).P_e == 0
    det = determinize(sc, three_message, dist)
    assert det.M == 5 and is_zero_error_valid(det, g)
    assert error_probability(det, three_message, dist).P_e == 0


def test_determinize_never_hurts_on_two_message_instances():
    rng = random.Random(9)
    for k in range(80):
        inst = Instance.from_lists(2, [[2] if rng.random() < .5 else [], [1] if rng.random() < .5 else []])
        dist = random_distribution(rng, 2, (1, 2))
        sc = random_stochastic_code(rng, 2, (1, 2), 1, rng.randint(1, 4))
        det = determinize(sc, inst, dist)
        enc = {det.layout.digits(x): {y: p for y, p in enumerate(row, 1) if p} for x, row in enumerate(sc.rows)}
        pe_s = oracles.ml_error_probability(inst, joint_of(dist), enc)
        assert error_probability(det, inst, dist).P_e <= pe_s
        assert det.M == sc.M


def test_stochastic_row_validation():
    with pytest.raises(ValidationError):
        StochasticCode(2, (1,), 1, 2, ((Fraction(1, 2), Fraction(1, 3)), (1, 0)))


# composite

@pytest.fixture
def four_composite(four_message):
    inst, dist, adv, _ = four_message
    gq = build_confusion_graph(inst, adv.Q)
    return composite_code(identity_code(2, adv.P), code_from_coloring(gq, chromatic_number(gq).coloring))


def test_composite_four_message(four_message, four_composite):
    inst, dist, adv, _ = four_message
    c = four_composite
    assert (c.M1, c.M2, c.M) == (2, 4, 8)
    assert is_zero_error_valid(c, build_confusion_graph(inst))
    assert c.rate == 3
    assert error_probability(c, inst, dist).P_e == 0


def test_composite_with_empty_known_part(three_message):
    g = build_confusion_graph(three_message)
    cq = code_from_coloring(g, chromatic_number(g).coloring)
    c = composite_code(constant_code(2, ()), cq)
    assert c.table == cq.table and c.M == cq.M


def test_composite_with_empty_target_part(three_message):
    cp = identity_code(2, (1, 2, 3))
    c = composite_code(cp, constant_code(2, ()))
    assert c.table == cp.table and c.M == cp.M


def test_composite_rejects_length_mismatch():
    with pytest.raises(ValidationError):
        composite_code(identity_code(2, (1,), 2), identity_code(2, (2,), 1))


def test_composite_error_bounded_by_target_part():
    rng = random.Random(4)
    for inst in oracles.all_instances():
        if inst.n < 2:
            continue
        P = (inst.n,)
        Q = inst.messages[:-1]
        gp = build_confusion_graph(inst, P)
        cp = code_from_coloring(gp, chromatic_number(gp).coloring)
        M2 = rng.randint(1, 2 ** len(Q))
        cq = DeterministicCode(2, Q, 1, M2, tuple(rng.randint(1, M2) for _ in range(2 ** len(Q))))
        dist = random_distribution(rng, 2, inst.messages)
        comp = composite_code(cp, cq)
        eps = error_probability(cq, inst, marginal(dist, Q)).P_e
        assert error_probability(comp, inst, dist, decoders=part_decoders(comp, inst, dist)).P_e <= eps


# good sets

def test_good_set_of_zero_error_code_is_class_slice(three_message):
    g = build_confusion_graph(three_message)
    code = code_from_coloring(g, chromatic_number(g).coloring)
    dist = Distribution.uniform(2, (1, 2, 3))
    lq = Layout(2, (2, 3))
    for y, mask in code.classes().items():
        for x1 in (0, 1):
            expect = {lq.index(g.vertex(v)[1:]) for v in range(8) if mask >> v & 1 and g.vertex(v)[0] == x1}
            if expect:
                assert good_set(code, y, (x1,), (1,), three_message, dist) == expect


def test_good_set_can_be_empty(pair, correlated):
    sets = good_sets(constant_code(2, (1, 2)), (), pair, correlated)
    # only the most likely tuple decodes correctly
    assert sets == {(1, 0): frozenset({3})}
    assert good_set(constant_code(2, (1, 2)), 1, (0,), (1,), pair, correlated) == frozenset()


def test_good_sets_bounded_by_alpha():
    rng = random.Random(8)
    for inst in oracles.all_instances():
        dist = random_distribution(rng, 2, inst.messages)
        for P in [(), inst.messages[:1]] if inst.n > 1 else [()]:
            Q = tuple(i for i in inst.messages if i not in P)
            alpha = independence_number(build_confusion_graph(inst, Q)).alpha
            M = rng.randint(1, 2 ** inst.n)
            code = DeterministicCode(2, inst.messages, 1, M, tuple(rng.randint(1, M) for _ in range(2**inst.n)))
            assert all(len(s) <= alpha for s in good_sets(code, P, inst, dist).values())


# serialization

def test_round_trip(three_message):
    code = parse_code(fixture_text("three_message_coloring.code"), three_message)
    assert parse_code(format_code(code), three_message) == code
    assert format_code(code).splitlines()[:3] == ["# q=2 scope=1,2,3 t=1 M=4", "000 1", "001 2"]


def test_composite_round_trip(four_message, four_composite):
    inst = four_message[0]
    text = format_code(four_composite)
    assert text.splitlines()[1] == "0000 (1,1)"
    back = parse_code(text, inst)
    assert isinstance(back, CompositeCode) and back == four_composite and back.sizes == (2, 4)
    assert recover_parts(back, (4,)) == four_composite.parts


def test_recover_parts_rejects_mixed_pairs(four_message):
    lay = Layout(2, (1, 2, 3, 4))
    # y1 depends on x_1, which is not in the known part {4}
    table = tuple((lay.digits(x)[0]) * 4 + 1 for x in range(16))
    c = CompositeCode(2, (1, 2, 3, 4), 1, 8, table, sizes=(2, 4))
    assert recover_parts(c, (4,)) is None


@pytest.mark.parametrize("text, msg", [
    ("00 1\n01 2\n10 2\n", "not total"),
    ("00 1\n00 2\n01 1\n10 1\n11 1\n", "twice"),
    ("00 1\n01 x\n10 1\n11 1\n", "bad codeword"),
    ("00 1 2\n", "expected"),
    ("", "empty"),
])
def test_bad_code_files(pair, text, msg):
    with pytest.raises(ValidationError, match=msg):
        parse_code(text, pair)
