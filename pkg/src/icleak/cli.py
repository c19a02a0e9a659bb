"""Command-line front end.

Exit codes: 0 success, 2 validation error, 3 budget or cap exceeded,
4 invariant violation found by ``verify``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import report as rp
from .bounds import uniform_report, rate_bounds
from .codes import parse_code, format_code
from .errors import IcleakError, ValidationError
from .graph import DEFAULT_VERTEX_CAP, build_confusion_graph, to_adjacency_csv, to_dot
from .invariants import DEFAULT_NODE_BUDGET, graph_row, rate_bracket, surrogate_csv
from .leakage import DEFAULT_SEARCH_BUDGET, leakage, optimal_zero_error_leakage, ps_posterior
from .model import AdversarySpec, GuessBudget, KnownRate, load_instance
from .simulate import estimate_ps
from .verify import code_checks, fixture_suite, random_suite


@dataclass
class RunConfig:
    command: str
    instance: Path | None = None
    t: int | None = 1
    t_max: int = 1
    subset: tuple[int, ...] | None = None
    known: tuple[int, ...] | None = None
    capability: str | None = None
    code: Path | None = None
    search: bool = False
    simulate: bool = False
    samples: int = 100_000
    seed: int = 0
    out: Path | None = None
    fmt: str | None = None
    vertex_cap: int = DEFAULT_VERTEX_CAP
    node_budget: int = DEFAULT_NODE_BUDGET
    search_budget: int = DEFAULT_SEARCH_BUDGET
    known_R_Q: str | None = None
    citation: str = ""
    random: int = 0
    code_out: Path | None = None
    assume_alpha: int | None = None

    def __post_init__(self):
        if (self.t is not None and self.t < 1) or self.t_max < 1:
            raise ValidationError("t and t-max must be at least 1")
        for name in ("vertex_cap", "node_budget", "search_budget", "samples"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name.replace('_', '-')} must be positive")


def _id_list(text: str) -> tuple[int, ...]:
    text = text.strip()
    if text in ("", "-"):
        return ()
    try:
        return tuple(sorted({int(p) for p in text.split(",")}))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of message ids, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="icleak", description="Exact leakage analysis for index codes.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, instance_required=True):
        sp.add_argument("--instance", type=Path, required=instance_required, help="instance document (JSON)")
        sp.add_argument("--out", type=Path, help="write the main output here instead of stdout")
        sp.add_argument("--vertex-cap", type=int, default=DEFAULT_VERTEX_CAP)
        sp.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
        sp.add_argument("--search-budget", type=int, default=DEFAULT_SEARCH_BUDGET)

    def adversary(sp):
        sp.add_argument("--adversary-known", type=_id_list, dest="known", help="messages known to the adversary, e.g. 4 or 1,3")
        sp.add_argument("--capability", help="guess budget: an integer or a JSON file mapping t to c(t)")

    sp = sub.add_parser("graph", help="export a confusion graph")
    common(sp)
    sp.add_argument("--t", type=int, default=1)
    sp.add_argument("--subset", type=_id_list)
    sp.add_argument("--format", dest="fmt", choices=["dot", "csv"], default="dot")

    sp = sub.add_parser("invariants", help="alpha, chi, chi_f and rate surrogates per t")
    common(sp)
    sp.add_argument("--t-max", type=int, default=1)
    sp.add_argument("--subset", type=_id_list)
    sp.add_argument("--format", dest="fmt", choices=["csv", "report"], default="csv")

    sp = sub.add_parser("leakage", help="leakage of a code, optimal zero-error leakage, or Monte Carlo")
    common(sp)
    adversary(sp)
    sp.add_argument("--t", type=int, default=None)
    sp.add_argument("--code", type=Path)
    sp.add_argument("--search", action="store_true")
    sp.add_argument("--simulate", action="store_true")
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--code-out", type=Path, help="with --search, write the optimal code table here")
    sp.add_argument("--format", dest="fmt", choices=["report"], default="report")

    sp = sub.add_parser("bounds", help="leakage-rate bounds from subproblem broadcast rates")
    common(sp)
    adversary(sp)
    sp.add_argument("--t-max", type=int, default=1)
    sp.add_argument("--known-R-Q", dest="known_R_Q", help='known vanishing-error rate of Q, e.g. "3 - 0.75*log2(3)"')
    sp.add_argument("--citation", default="")
    sp.add_argument("--format", dest="fmt", choices=["report", "csv"], default="report")

    sp = sub.add_parser("verify", help="run identity and inequality checks")
    common(sp, instance_required=False)
    adversary(sp)
    sp.add_argument("--code", type=Path)
    sp.add_argument("--random", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--assume-alpha", type=int, dest="assume_alpha",
                    help="check good-set sizes against this value instead of the computed alpha (negative testing)")
    return p


def _load(cfg: RunConfig):
    try:
        text = cfg.instance.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read instance: {exc}") from exc
    inst, dist, adv, known = load_instance(text)
    if cfg.known is not None or cfg.capability is not None:
        cap = adv.capability
        if cfg.capability is not None:
            if cfg.capability.strip().isdigit():
                cap = GuessBudget(int(cfg.capability))
            else:
                try:
                    cap = GuessBudget.from_mapping(json.loads(Path(cfg.capability).read_text()))
                except (OSError, json.JSONDecodeError) as exc:
                    raise ValidationError(f"cannot read capability table: {exc}") from exc
        adv = AdversarySpec(inst.n, frozenset(cfg.known) if cfg.known is not None else adv.known, cap)
    return inst, dist, adv, known


def _emit(cfg: RunConfig, text: str):
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.write_text(text)


def _read_code(cfg: RunConfig, inst):
    try:
        return parse_code(cfg.code.read_text(), inst)
    except OSError as exc:
        raise ValidationError(f"cannot read code file: {exc}") from exc


def cmd_graph(cfg: RunConfig) -> int:
    inst, *_ = _load(cfg)
    g = build_confusion_graph(inst, cfg.subset, cfg.t, cap=cfg.vertex_cap)
    _emit(cfg, to_dot(g) if cfg.fmt == "dot" else to_adjacency_csv(g))
    print(f"|V| = {g.n_vertices}, |E| = {g.n_edges}", file=sys.stderr if cfg.out is None else sys.stdout)
    return 0


def cmd_invariants(cfg: RunConfig) -> int:
    inst, *_ = _load(cfg)
    if cfg.fmt == "report":
        br = rate_bracket(inst, cfg.subset, cfg.t_max, vertex_cap=cfg.vertex_cap, budget=cfg.node_budget)
        rep = rp.Report()
        rp.bracket_section(rep, br)
        _emit(cfg, rep.text())
        return 0
    rows = []
    for t in range(1, cfg.t_max + 1):
        g = build_confusion_graph(inst, cfg.subset, t, cap=cfg.vertex_cap)
        rows.append(graph_row(g, t, cfg.node_budget))
    _emit(cfg, surrogate_csv(rows))
    return 0


def _header(rep: rp.Report, inst, adv):
    rep.section("instance")
    rep.put("receivers", inst.describe())
    rep.put("q", inst.q)
    rep.put("adversary_known", rp.ids(adv.P))
    rep.put("adversary_target", rp.ids(adv.Q))


def cmd_leakage(cfg: RunConfig) -> int:
    inst, dist, adv, _ = _load(cfg)
    if not (cfg.code or cfg.search):
        raise ValidationError("leakage needs --code PATH or --search")
    rep = rp.Report()
    _header(rep, inst, adv)
    code = None
    if cfg.code:
        code = _read_code(cfg, inst)
        if cfg.t is not None and cfg.t != code.t:
            raise ValidationError(f"code has length {code.t}, --t is {cfg.t}")
        rp.leakage_section(rep, leakage(code, dist, adv, instance=inst))
    if cfg.search:
        res = optimal_zero_error_leakage(inst, dist, adv, cfg.t or 1, budget=cfg.search_budget,
                                         node_budget=cfg.node_budget)
        rp.search_section(rep, res)
        if cfg.code_out:
            cfg.code_out.write_text(format_code(res.code))
        code = code or res.code
    if cfg.simulate:
        est = estimate_ps(code, dist, adv, samples=cfg.samples, seed=cfg.seed)
        exact = ps_posterior(code, dist, adv) if len(code.table) <= 2**16 else None
        rp.simulation_section(rep, est, exact)
    _emit(cfg, rep.text())
    return 0


def cmd_bounds(cfg: RunConfig) -> int:
    inst, dist, adv, known = _load(cfg)
    kr = KnownRate(cfg.known_R_Q, cfg.citation) if cfg.known_R_Q else known.get("R_Q")
    br = rate_bracket(inst, adv.Q, cfg.t_max, kr, vertex_cap=cfg.vertex_cap, budget=cfg.node_budget)
    b = rate_bounds(inst, dist, adv, br)
    if cfg.fmt == "csv":
        rows = []
        for t in range(1, cfg.t_max + 1):
            try:
                res = optimal_zero_error_leakage(inst, dist, adv, t, budget=cfg.search_budget,
                                                 node_budget=cfg.node_budget)
                lstar = res.report.rate
            except IcleakError:
                lstar = None
            rows.append((t, lstar, b.lower_zero.lo, b.upper_zero.hi))
        _emit(cfg, rp.bounds_csv(rows))
        return 0
    rep = rp.Report()
    _header(rep, inst, adv)
    rp.bracket_section(rep, br, "zero_error_rate_Q")
    rp.bounds_section(rep, b)
    if dist.is_uniform:
        rp.uniform_section(rep, uniform_report(inst, adv, cfg.t_max, dist, budget=cfg.search_budget))
    _emit(cfg, rep.text())
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    results = fixture_suite()
    if cfg.instance is not None:
        inst, dist, adv, _ = _load(cfg)
        if cfg.code is not None:
            code, tag = _read_code(cfg, inst), str(cfg.code.name)
        else:
            code, tag = optimal_zero_error_leakage(inst, dist, adv, 1, budget=cfg.search_budget).code, "optimal code"
        results += code_checks(inst, dist, adv, code, tag, alpha_Q=cfg.assume_alpha)
    if cfg.random:
        results += random_suite(cfg.random, cfg.seed)
    lines = [r.line() for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed} passed, {failed} failed")
    _emit(cfg, "\n".join(lines) + "\n")
    return 4 if failed else 0


COMMANDS = {"graph": cmd_graph, "invariants": cmd_invariants, "leakage": cmd_leakage,
            "bounds": cmd_bounds, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    try:
        cfg = RunConfig(**fields)
        return COMMANDS[cfg.command](cfg)
    except IcleakError as exc:
        print(f"icleak: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
