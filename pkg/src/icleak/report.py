"""Text and CSV rendering of results.

Reports are ``key = value`` lines grouped under ``[section]`` headers.
Rationals are written as ``num/den``; logarithms as decimals with 12 digits,
next to their exact expression where one exists.
"""

from __future__ import annotations

import csv
import io
from fractions import Fraction

from .bounds import BoundReport, UniformReport, Interval
from .invariants import RateBracket
from .leakage import LeakageReport, SearchResult
from .logexpr import Bits
from .simulate import MonteCarloEstimate


def rat(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def dec(x) -> str:
    return f"{float(x):.12f}"


def ids(S) -> str:
    return ",".join(map(str, S)) or "-"


class Report:
    def __init__(self):
        self._lines: list[str] = []

    def section(self, name: str):
        if self._lines:
            self._lines.append("")
        self._lines.append(f"[{name}]")

    def put(self, key: str, value):
        self._lines.append(f"{key} = {value}")

    def bits(self, key: str, value: Bits):
        self.put(key, f"{value}")
        self.put(key + "_bits", dec(value))

    def interval(self, key: str, iv: Interval):
        if iv.pinned:
            self.bits(key, iv.lo)
        else:
            lo = "-inf" if iv.lo is None else str(iv.lo)
            hi = "+inf" if iv.hi is None else str(iv.hi)
            self.put(key, f"[{lo}, {hi}]")
            self.put(key + "_bits", iv.render())
        if iv.provenance:
            self.put(key + "_source", iv.provenance)

    def text(self) -> str:
        return "\n".join(self._lines) + "\n"


def leakage_section(rep: Report, lr: LeakageReport, name: str = "leakage"):
    rep.section(name)
    rep.put("t", lr.t)
    rep.put("c", lr.c_used)
    if lr.code is not None:
        rep.put("M", lr.code.M)
        rep.put("codewords_used", lr.code.used)
    rep.put("ps_prior", rat(lr.ps_prior))
    rep.put("ps_posterior", rat(lr.ps_posterior))
    rep.put("leakage_ratio", rat(lr.ratio))
    rep.put("leakage_bits", dec(lr.bits))
    rep.put("leakage_rate", dec(lr.rate))


def search_section(rep: Report, res: SearchResult):
    leakage_section(rep, res.report, "optimal_zero_error_leakage")
    rep.put("chi", res.chi)
    rep.put("max_codewords_searched", res.max_codewords)
    rep.put("best_posterior_with_chi_codewords", rat(res.best_within_chi))
    rep.put("larger_M_helped", str(res.larger_M_helped).lower())
    rep.put("search_nodes", res.nodes)
    rep.put("scope_note", "deterministic zero-error codes only")


def simulation_section(rep: Report, est: MonteCarloEstimate, exact=None):
    rep.section("monte_carlo")
    rep.put("samples", est.samples)
    rep.put("seed", est.seed)
    rep.put("shards", est.shards)
    rep.put("estimate", dec(est.mean))
    rep.put("stderr", dec(est.stderr))
    rep.put("ci95_low", dec(est.lo))
    rep.put("ci95_high", dec(est.hi))
    if exact is not None:
        rep.put("exact", rat(exact))
        rep.put("covers_exact", str(est.covers(exact)).lower())


def bracket_section(rep: Report, br: RateBracket, name: str = "zero_error_rate"):
    rep.section(name)
    rep.put("subset", ids(br.subset))
    rep.put("mais", ids(br.mais_set))
    rep.bits("certified_lower", br.certified_lower)
    rep.bits("certified_upper", br.certified_upper)
    rep.put("certified", str(br.pinned).lower())
    for r in br.rows:
        rep.put(f"t{r.t}", f"V={r.n_vertices} alpha={r.alpha} chi={r.chi} chi_f={rat(r.chi_f)} "
                           f"log_chi_over_t={dec(r.log_chi_rate)} log_chi_f_over_t={dec(r.log_chi_f_rate)}")
    if br.known_value is not None:
        rep.put("known_R", br.known_value.expression)
        if br.known_value.citation:
            rep.put("known_R_citation", br.known_value.citation)


def bounds_section(rep: Report, b: BoundReport):
    rep.section("bounds")
    rep.put("Q", ids(b.Q))
    rep.put("q", b.q)
    rep.put("max_mass_sum", rat(b.correction_sum))
    rep.put("correction_arg", rat(b.correction_arg))
    rep.bits("correction", b.correction_term)
    rep.interval("rho_Q", b.rho_Q)
    rep.interval("lower_vanishing", b.lower_vanishing)
    rep.interval("upper_vanishing", b.upper_vanishing)
    rep.interval("lower_zero_error", b.lower_zero)
    rep.interval("upper_zero_error", b.upper_zero)
    for k, note in enumerate(b.notes, start=1):
        rep.put(f"note{k}", note)


def uniform_section(rep: Report, cr: UniformReport):
    rep.section("uniform_messages")
    rep.put("correction_equals_Q_log_q", str(cr.correction_matches).lower())
    for r in cr.rows:
        rep.put(f"t{r.t}", f"lambda_surrogate={dec(r.lambda_surrogate)} log_chi_Q_over_t={dec(r.log_chi_rate)} "
                           f"chi_Q={r.chi_Q} agrees={str(r.agrees).lower()}")


def bounds_csv(rows) -> str:
    """Rows of ``(t, L*, lower_bound, upper_bound)`` for plotting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "L_star_over_t", "lower_bound", "upper_bound"])
    for t, lstar, lo, hi in rows:
        w.writerow([t, "" if lstar is None else dec(lstar), "" if lo is None else dec(lo), "" if hi is None else dec(hi)])
    return buf.getvalue()
