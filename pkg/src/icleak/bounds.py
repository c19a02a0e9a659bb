"""Leakage-rate bounds in terms of subproblem broadcast rates, and exact
checkers for the inequalities and identities behind them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .codes import CompositeCode, _Frame, _align, decoders_for, error_probability, good_sets, recover_parts
from .errors import ValidationError
from .graph import build_confusion_graph
from .invariants import RateBracket, chromatic_number, independence_number, rate_bracket
from .leakage import effective_capability, leakage, optimal_zero_error_leakage, ps_posterior
from .logexpr import Bits
from .model import AdversarySpec, Distribution, Instance, KnownRate, as_scope, marginal


@dataclass(frozen=True)
class Interval:
    """Closed interval of bit values; an open end is ``None``."""

    lo: Bits | None
    hi: Bits | None
    provenance: str = ""

    @property
    def pinned(self) -> bool:
        return self.lo is not None and self.hi is not None and self.lo == self.hi

    def shift(self, delta: Bits) -> "Interval":
        return Interval(None if self.lo is None else self.lo + delta,
                        None if self.hi is None else self.hi + delta, self.provenance)

    def contains(self, value) -> bool:
        return (self.lo is None or self.lo <= value) and (self.hi is None or value <= self.hi)

    def render(self, digits: int = 12) -> str:
        def one(b):
            return "?" if b is None else f"{float(b):.{digits}f}"
        if self.pinned:
            return one(self.lo)
        return f"[{one(self.lo)}, {one(self.hi)}]"


def max_mass_sum(dist: Distribution, known: Iterable[int]) -> Fraction:
    """``sum over x_P of max over x_Q of P(x_P, x_Q)`` at t = 1."""
    P = as_scope(known)
    to_p = dist.layout.projector(P)
    best: dict[int, int] = {}
    for x, w in enumerate(dist.weights):
        k = to_p(x)
        if w > best.get(k, 0):
            best[k] = w
    return Fraction(sum(best.values()), dist.denom)


@dataclass(frozen=True)
class BoundReport:
    rho_Q: Interval
    correction_sum: Fraction
    lower_vanishing: Interval
    upper_vanishing: Interval
    lower_zero: Interval
    upper_zero: Interval
    q: int
    Q: tuple[int, ...]
    notes: tuple[str, ...] = ()

    @property
    def correction_term(self) -> Bits:
        """``log2(1 / correction_sum)``, kept as a rational-log pair."""
        return Bits.log2(1 / self.correction_sum)

    @property
    def correction_arg(self) -> Fraction:
        return 1 / self.correction_sum


def rate_bounds(instance: Instance, dist: Distribution, adversary: AdversarySpec,
                    bracket: RateBracket, known_R_Q: KnownRate | None = None) -> BoundReport:
    """Lower and upper bounds on the vanishing-error and zero-error leakage rates.

    Lower: ``rho(Q) - |Q| log2 q + log2(1 / sum_{x_P} max_{x_Q} P)``.
    Upper: ``R(Q)`` (vanishing error) and ``rho(Q)`` (zero error).  Whenever a
    rate is only bracketed the bound is an interval.
    """
    Q = adversary.Q
    if tuple(bracket.subset) != Q:
        raise ValidationError(f"rate bracket is for {bracket.subset}, adversary targets {Q}")
    if dist.t != 1:
        raise ValidationError("bounds use the single-letter distribution")
    d = _align(dist, instance.messages, 1)
    s = max_mass_sum(d, adversary.P)
    corr = Bits.log2(1 / s)
    notes = []
    rho = Interval(bracket.certified_lower, bracket.certified_upper,
                   "certified" if bracket.pinned else "bracket: MAIS lower, coloring upper")
    if not bracket.pinned:
        notes.append("rho(Q) is only bracketed; leakage bounds are intervals")
    shift = corr - len(Q) * Bits.log2(instance.q)
    lower = rho.shift(shift)
    lower = Interval(lower.lo, lower.hi, "rho(Q) - |Q| log2 q + correction")
    known = known_R_Q or bracket.known_value
    if known is not None:
        R = known.value
        upper_vanishing = Interval(R, R, f"supplied R(Q): {known.expression}" + (f" [{known.citation}]" if known.citation else ""))
        if R > bracket.certified_upper:
            notes.append("supplied R(Q) exceeds the certified zero-error upper bound")
    else:
        upper_vanishing = Interval(None, bracket.certified_upper, "R(Q) unknown; R(Q) <= rho(Q)")
        notes.append("no R(Q) supplied; vanishing-error upper bound reported as R(Q) <= rho(Q)")
    if instance.q > 2:
        notes.append("|Q| term taken as |Q|*log2(q) bits")
    return BoundReport(rho, s, lower, upper_vanishing, lower, rho, instance.q, Q, tuple(notes))


@dataclass(frozen=True)
class UniformRow:
    t: int
    lambda_surrogate: float
    leakage_ratio: Fraction
    chi_Q: int
    log_chi_rate: Bits
    agrees: bool


@dataclass(frozen=True)
class UniformReport:
    correction_matches: bool
    rows: tuple[UniformRow, ...]
    bracket: RateBracket
    bounds: BoundReport


def uniform_report(instance: Instance, adversary: AdversarySpec, t_max: int = 1,
                      dist: Distribution | None = None, **search_kw) -> UniformReport:
    """Uniform-message check: finite-t optimal leakage against log2 chi(Gamma_t(Q)) / t."""
    dist = dist or Distribution.uniform(instance.q, instance.messages)
    if not dist.is_uniform:
        raise ValidationError("the uniform-message report needs a uniform distribution")
    bracket = rate_bracket(instance, adversary.Q, t_max)
    bounds = rate_bounds(instance, dist, adversary, bracket)
    matches = bounds.correction_term == len(adversary.Q) * Bits.log2(instance.q)
    rows = []
    for t in range(1, t_max + 1):
        res = optimal_zero_error_leakage(instance, dist, adversary, t, **search_kw)
        chi_Q = chromatic_number(build_confusion_graph(instance, adversary.Q, t)).chi
        lam = Bits.log2(res.report.ratio) / t
        target = Bits.log2(chi_Q) / t
        rows.append(UniformRow(t, float(lam), res.report.ratio, chi_Q, target, lam == target))
    return UniformReport(matches, tuple(rows), bracket, bounds)


@dataclass(frozen=True)
class IdentityCheck:
    holds: bool
    lhs: Fraction
    rhs: Fraction


def product_identity_check(dist: Distribution, A: Iterable[int], B: Iterable[int], t: int) -> IdentityCheck:
    """Compare ``sum_{x_A^t} max_{x_B^t} prod_j P(x_Aj, x_Bj)`` with ``(sum_{x_A} max_{x_B} P)^t``.

    The left side is enumerated over sequences directly, without using the
    single-letter factorization.
    """
    A, B = as_scope(A), as_scope(B)
    if set(A) & set(B):
        raise ValidationError(f"A={A} and B={B} overlap")
    if dist.t != 1:
        raise ValidationError("identity check takes a single-letter distribution")
    d = marginal(dist, A + B) if A + B else marginal(dist, ())
    S = d.scope
    k = len(S)
    a_axes = [S.index(i) for i in A]
    b_axes = [S.index(i) for i in B]
    base = np.array(d.weights, dtype=object).reshape((d.q,) * k) if k else np.array(d.weights[0], dtype=object)
    # sequence axes ordered (time 1: S..., time 2: S..., ...)
    seq = base
    for _ in range(t - 1):
        seq = np.multiply.outer(seq, base)
    if k:
        a_all = [j * k + a for j in range(t) for a in a_axes]
        b_all = [j * k + b for j in range(t) for b in b_axes]
        seq = np.transpose(seq, a_all + b_all).reshape(d.q ** (len(A) * t), d.q ** (len(B) * t))
        lhs_num = sum(max(row) for row in seq)
    else:
        lhs_num = seq.item() if hasattr(seq, "item") else seq
    lhs = Fraction(int(lhs_num), d.denom**t)
    rhs = max_mass_sum(d, A) ** t
    return IdentityCheck(lhs == rhs, lhs, rhs)


@dataclass(frozen=True)
class ConverseCheck:
    P_e: Fraction
    good_mass: Fraction
    good_mass_holds: bool
    max_good_set: int
    alpha_Q: int
    set_size_holds: bool
    ps_posterior: Fraction
    posterior_bound: Fraction
    posterior_holds: bool
    composite_bits: float | None = None
    composite_cap_bits: float | None = None
    composite_holds: bool | None = None
    violations: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations


def converse_inequality_check(code, instance: Instance, dist: Distribution, adversary: AdversarySpec,
                              alpha_Q: int | None = None, strict: bool = False) -> ConverseCheck:
    """Exact check of the converse chain for one code.

    * correct-decoding mass over all good sets equals ``1 - P_e``;
    * every good set has at most ``alpha(Gamma_t(Q))`` elements;
    * ``ps_posterior >= c(t) (1 - P_e) / alpha(Gamma_t(Q))``;
    * for composite codes, ``L <= log2 M2``.

    ``alpha_Q`` may be supplied to reuse a known value.
    """
    t = code.t
    frame = _Frame(code, instance, dist)
    g = decoders_for(code, instance, dist, frame)
    validity = error_probability(code, instance, dist, decoders=g)
    P, Q = adversary.P, adversary.Q
    sets = good_sets(code, P, instance, dist, decoders=g)
    to_p = frame.layout.projector(P)
    to_q = frame.layout.projector(Q)
    good_w = 0
    for x, y, w in frame.entries:
        if to_q(x) in sets[(y, to_p(x))]:
            good_w += w
    good_mass = Fraction(good_w, frame.denom)
    mass_ok = good_mass == 1 - validity.P_e
    if alpha_Q is None:
        alpha_Q = independence_number(build_confusion_graph(instance, Q, t)).alpha
    biggest = max((len(s) for s in sets.values()), default=0)
    size_ok = biggest <= alpha_Q
    c = adversary.c(t)
    if c > alpha_Q:
        c = effective_capability(adversary, t, instance, strict)
    post = ps_posterior(code, dist, adversary, t, c)
    bound = Fraction(c) * (1 - validity.P_e) / alpha_Q
    posterior_ok = post >= bound
    violations = []
    if not mass_ok:
        violations.append(f"good-set mass {good_mass} != 1 - P_e = {1 - validity.P_e}")
    if not size_ok:
        violations.append(f"good set of size {biggest} exceeds alpha(Gamma_t(Q)) = {alpha_Q}")
    if not posterior_ok:
        violations.append(f"ps_posterior {post} < c(1-P_e)/alpha = {bound}")
    comp = dict()
    if isinstance(code, CompositeCode) and recover_parts(code, P) is not None:
        rep = leakage(code, dist, adversary, instance=instance)
        # L <= log2 M2  <=>  ratio <= M2
        holds = rep.ratio <= code.M2
        comp = dict(composite_bits=rep.bits, composite_cap_bits=math.log2(code.M2), composite_holds=holds)
        if not holds:
            violations.append(f"composite leakage ratio {rep.ratio} exceeds M2 = {code.M2}")
    return ConverseCheck(validity.P_e, good_mass, mass_ok, biggest, alpha_Q, size_ok, post, bound, posterior_ok,
                         violations=tuple(violations), **comp)
