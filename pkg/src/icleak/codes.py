"""Index codes: deterministic and stochastic encoders, ML decoders, validity.

Codewords are the integers 1..M.  A code lives on ``X_S^t`` for a scope S
(the full message set for an ordinary code, a subproblem for the parts of a
composite code); receivers are the members of S with side information
restricted to S.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import ValidationError
from .graph import ConfusionGraph, Graph
from .model import Distribution, Instance, Layout, as_scope, marginal, product_extend

ERROR_SET_LIMIT = 32


@dataclass(frozen=True)
class DecoderSet:
    """Per-receiver lookup ``(y, side-information index) -> estimate of x_i^t``.

    Estimates are sequence indices in base q (length t).
    """

    scope: tuple[int, ...]
    rules: dict[int, dict[tuple[int, int], int]] = field(hash=False)

    def decode(self, i: int, y: int, side: int) -> int | None:
        return self.rules[i].get((y, side))


@dataclass(frozen=True)
class DeterministicCode:
    q: int
    scope: tuple[int, ...]
    t: int
    M: int
    table: tuple[int, ...]
    decoders: DecoderSet | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "scope", as_scope(self.scope))
        object.__setattr__(self, "table", tuple(int(y) for y in self.table))
        if len(self.table) != self.layout.size:
            raise ValidationError(f"code table has {len(self.table)} entries, expected {self.layout.size}")
        bad = [y for y in self.table if not 1 <= y <= self.M]
        if bad:
            raise ValidationError(f"codewords {sorted(set(bad))[:5]} outside 1..{self.M}")

    @property
    def layout(self) -> Layout:
        return Layout(self.q, self.scope, self.t)

    def encode(self, x: int) -> int:
        return self.table[x]

    def channel(self, x: int):
        yield self.table[x], 1

    def classes(self) -> dict[int, int]:
        """Codeword -> bitmask of its preimage (only used codewords)."""
        out: dict[int, int] = {}
        for x, y in enumerate(self.table):
            out[y] = out.get(y, 0) | (1 << x)
        return out

    @property
    def used(self) -> int:
        return len(set(self.table))

    @property
    def rate(self) -> float:
        return math.log2(self.M) / self.t

    def with_decoders(self, decoders: DecoderSet | None) -> "DeterministicCode":
        return DeterministicCode(self.q, self.scope, self.t, self.M, self.table, decoders)


@dataclass(frozen=True)
class CompositeCode(DeterministicCode):
    """Pair code ``(f1(x_P), f2(x_Q))``; codeword ``(y1 - 1) * M2 + y2``.

    ``parts`` is None when the code was read back from a file; see
    :func:`recover_parts`.
    """

    parts: tuple[DeterministicCode, DeterministicCode] | None = field(default=None, compare=False, repr=False)
    sizes: tuple[int, int] = field(default=(0, 0), compare=False)

    def __post_init__(self):
        super().__post_init__()
        if self.parts is not None:
            object.__setattr__(self, "sizes", (self.parts[0].M, self.parts[1].M))
        if self.sizes[0] * self.sizes[1] != self.M:
            raise ValidationError(f"M = {self.M} is not M1*M2 for (M1, M2) = {self.sizes}")

    @property
    def M1(self) -> int:
        return self.sizes[0]

    @property
    def M2(self) -> int:
        return self.sizes[1]

    def pair_of(self, y: int) -> tuple[int, int]:
        a, b = divmod(y - 1, self.M2)
        return a + 1, b + 1

    def with_decoders(self, decoders):
        return CompositeCode(self.q, self.scope, self.t, self.M, self.table, decoders, self.parts, self.sizes)


@dataclass(frozen=True)
class StochasticCode:
    q: int
    scope: tuple[int, ...]
    t: int
    M: int
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "scope", as_scope(self.scope))
        rows = tuple(tuple(Fraction(p) for p in row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) != self.layout.size:
            raise ValidationError(f"encoder has {len(rows)} rows, expected {self.layout.size}")
        for x, row in enumerate(rows):
            if len(row) != self.M or any(p < 0 for p in row) or sum(row) != 1:
                raise ValidationError(f"encoder row for {self.layout.format(x)} is not a distribution on 1..{self.M}")

    @property
    def layout(self) -> Layout:
        return Layout(self.q, self.scope, self.t)

    decoders = None

    def channel(self, x: int):
        for y, p in enumerate(self.rows[x], start=1):
            if p:
                yield y, p


def code_from_function(q: int, scope: Iterable[int], t: int, fn: Callable[[tuple[int, ...]], int],
                       M: int | None = None) -> DeterministicCode:
    layout = Layout(q, as_scope(scope), t)
    table = [fn(layout.digits(x)) for x in range(layout.size)]
    return DeterministicCode(q, layout.scope, t, M or max(table), tuple(table))


def code_from_coloring(graph: ConfusionGraph, coloring: Sequence[int]) -> DeterministicCode:
    """Codeword = color + 1."""
    table = tuple(c + 1 for c in coloring)
    return DeterministicCode(graph.q, graph.scope, graph.t, max(table), table)


def constant_code(q: int, scope: Iterable[int], t: int = 1, M: int = 1) -> DeterministicCode:
    size = Layout(q, as_scope(scope), t).size
    return DeterministicCode(q, scope, t, M, (1,) * size)


def identity_code(q: int, scope: Iterable[int], t: int = 1) -> DeterministicCode:
    size = Layout(q, as_scope(scope), t).size
    return DeterministicCode(q, scope, t, size, tuple(range(1, size + 1)))


class _Frame:
    """Joint ``P(x, y)`` over a code's domain as integer weights over one denominator."""

    def __init__(self, code, instance: Instance, dist: Distribution):
        if code.q != instance.q:
            raise ValidationError("code alphabet does not match the instance")
        if not set(code.scope) <= set(instance.messages):
            raise ValidationError("code scope outside the instance")
        self.code = code
        self.instance = instance
        self.layout = code.layout
        d = _align(dist, code.scope, code.t)
        self.dist = d
        if isinstance(code, StochasticCode):
            cden = math.lcm(*(p.denominator for row in code.rows for p in row if p))
            entries = []
            for x, w in enumerate(d.weights):
                for y, p in enumerate(code.rows[x], start=1):
                    if p:
                        entries.append((x, y, w * int(p * cden)))
            self.denom = d.denom * cden
        else:
            entries = [(x, y, w) for x, (y, w) in enumerate(zip(code.table, d.weights))]
            self.denom = d.denom
        self.entries = entries
        scope = code.scope
        self.pos = {i: k for k, i in enumerate(scope)}
        self.sides = {i: instance.side(i, scope) for i in scope}
        self._blocks = [self.layout.blocks(x) for x in range(self.layout.size)]
        radix = self.layout.radix
        self._side_idx = {}
        for i in scope:
            cols = [self.pos[j] for j in self.sides[i]]
            row = []
            for b in self._blocks:
                s = 0
                for c in cols:
                    s = s * radix + b[c]
                row.append(s)
            self._side_idx[i] = row

    def block(self, x: int, i: int) -> int:
        return self._blocks[x][self.pos[i]]

    def side(self, x: int, i: int) -> int:
        return self._side_idx[i][x]

    def frac(self, w: int) -> Fraction:
        return Fraction(w, self.denom)

    def correct(self, decoders: DecoderSet, x: int, y: int) -> bool:
        for i in self.code.scope:
            if decoders.rules[i].get((y, self._side_idx[i][x])) != self._blocks[x][self.pos[i]]:
                return False
        return True


def _align(dist: Distribution, scope: tuple[int, ...], t: int) -> Distribution:
    if dist.scope != scope:
        dist = marginal(dist, scope)
    if dist.t != t:
        dist = product_extend(dist, t, lazy=False)
    return dist


def _ml_decoders(frame: _Frame) -> DecoderSet:
    rules = {}
    for i in frame.code.scope:
        acc: dict[tuple[int, int], dict[int, int]] = defaultdict(lambda: defaultdict(int))
        for x, y, w in frame.entries:
            acc[(y, frame.side(x, i))][frame.block(x, i)] += w
        # maximum likelihood; ties go to the smallest sequence index
        rules[i] = {key: min(cand.items(), key=lambda kv: (-kv[1], kv[0]))[0] for key, cand in acc.items()}
    return DecoderSet(frame.code.scope, rules)


def synthesize_decoders(code, instance: Instance, dist: Distribution) -> DecoderSet:
    """Maximum-likelihood decoder for every receiver of the code's scope."""
    return _ml_decoders(_Frame(code, instance, dist))


def decoders_for(code, instance: Instance, dist: Distribution, frame: _Frame | None = None) -> DecoderSet:
    """The decoders a code is evaluated with: attached ones if present, else ML."""
    if code.decoders is not None:
        return code.decoders
    return _ml_decoders(frame or _Frame(code, instance, dist))


@dataclass(frozen=True)
class ValidityReport:
    P_e: Fraction
    zero_error: bool
    error_set: tuple[tuple[str, int], ...]
    n_errors: int

    def __post_init__(self):
        if self.zero_error != (self.P_e == 0):
            raise ValueError("zero_error must agree with P_e == 0")


def error_probability(code, instance: Instance, dist: Distribution,
                      decoders: DecoderSet | None = None) -> ValidityReport:
    """Exact average error probability of the code with its decoders."""
    frame = _Frame(code, instance, dist)
    g = decoders or decoders_for(code, instance, dist, frame)
    bad_w = 0
    errors = []
    n_err = 0
    for x, y, w in frame.entries:
        if not frame.correct(g, x, y):
            bad_w += w
            n_err += 1
            if len(errors) < ERROR_SET_LIMIT:
                errors.append((frame.layout.format(x), y))
    pe = Fraction(bad_w, frame.denom)
    return ValidityReport(pe, pe == 0, tuple(errors), n_err)


def is_zero_error_valid(code: DeterministicCode, graph: Graph) -> bool:
    """Every codeword's preimage is an independent set of the confusion graph."""
    if graph.n_vertices != len(code.table):
        raise ValidationError(f"graph has {graph.n_vertices} vertices, code covers {len(code.table)} tuples")
    if isinstance(graph, ConfusionGraph) and (graph.scope != code.scope or graph.t != code.t):
        raise ValidationError("graph and code disagree on scope or sequence length")
    return all(graph.is_independent(mask) for mask in code.classes().values())


def determinize(code, instance: Instance, dist: Distribution) -> DeterministicCode:
    """Deterministic code with the same M and no larger error probability.

    Each tuple keeps the positive-probability codeword whose use is error
    free under the stochastic code's decoders when such a codeword exists
    (smallest codeword on ties).  The result is evaluated with fresh ML
    decoders unless the inherited decoders do strictly better, in which case
    they stay attached.
    """
    if isinstance(code, DeterministicCode):
        return code
    frame = _Frame(code, instance, dist)
    g = decoders_for(code, instance, dist, frame)
    table = []
    for x in range(frame.layout.size):
        options = [y for y, _ in code.channel(x)]
        good = [y for y in options if frame.correct(g, x, y)]
        table.append(min(good) if good else min(options))
    det = DeterministicCode(code.q, code.scope, code.t, code.M, tuple(table))
    fresh = error_probability(det, instance, dist).P_e
    inherited = error_probability(det, instance, dist, decoders=g).P_e
    if inherited < fresh:
        det = det.with_decoders(_restrict(g, det, frame))
    return det


def _restrict(g: DecoderSet, det: DeterministicCode, frame: _Frame) -> DecoderSet:
    rules = {}
    for i in det.scope:
        keys = {(det.table[x], frame.side(x, i)) for x in range(len(det.table))}
        rules[i] = {k: v for k, v in g.rules[i].items() if k in keys}
    return DecoderSet(det.scope, rules)


def composite_code(code_P: DeterministicCode, code_Q: DeterministicCode) -> CompositeCode:
    """Encode the two message groups separately and send the pair of codewords."""
    if code_P.t != code_Q.t:
        raise ValidationError(f"sequence lengths differ: {code_P.t} vs {code_Q.t}")
    if code_P.q != code_Q.q:
        raise ValidationError("alphabet sizes differ")
    if set(code_P.scope) & set(code_Q.scope):
        raise ValidationError("the two parts must cover disjoint message sets")
    layout = Layout(code_P.q, as_scope(code_P.scope + code_Q.scope), code_P.t)
    to_p = layout.projector(code_P.scope)
    to_q = layout.projector(code_Q.scope)
    M2 = code_Q.M
    table = tuple((code_P.table[to_p(x)] - 1) * M2 + code_Q.table[to_q(x)] for x in range(layout.size))
    return CompositeCode(layout.q, layout.scope, layout.t, code_P.M * M2, table, None, (code_P, code_Q))


def recover_parts(code: CompositeCode, known: Iterable[int]) -> tuple[DeterministicCode, DeterministicCode] | None:
    """Split a pair code into its P and Q encoders, or None if y1 does not depend on x_P alone
    (or y2 on x_Q alone)."""
    if code.parts is not None and tuple(code.parts[0].scope) == as_scope(known):
        return code.parts
    P = as_scope(known)
    Q = tuple(i for i in code.scope if i not in P)
    to_p, to_q = code.layout.projector(P), code.layout.projector(Q)
    f1: dict[int, int] = {}
    f2: dict[int, int] = {}
    for x, y in enumerate(code.table):
        y1, y2 = code.pair_of(y)
        if f1.setdefault(to_p(x), y1) != y1 or f2.setdefault(to_q(x), y2) != y2:
            return None
    mk = lambda S, f, M: DeterministicCode(code.q, S, code.t, M, tuple(f[k] for k in range(len(f))))
    return mk(P, f1, code.M1), mk(Q, f2, code.M2)


def part_decoders(code: CompositeCode, instance: Instance, dist: Distribution) -> DecoderSet:
    """Decoders that read only their own half of the pair.

    Receiver i in the P part decodes from ``y1`` and ``x_{A_i} restricted to P``
    with the part's ML decoder, likewise for Q.  This is the decoding used in
    the achievability argument; its error is at most the sum of the parts' errors.
    """
    if code.parts is None:
        raise ValidationError("part decoders need the composite's parts")
    frame = _Frame(code, instance, dist)
    rules: dict[int, dict[tuple[int, int], int]] = {i: {} for i in code.scope}
    for k, part in enumerate(code.parts):
        if not part.scope:
            continue
        pf = _Frame(part, instance, dist)
        g = decoders_for(part, instance, dist, pf)
        proj = code.layout.projector(part.scope)
        for x, y, w in frame.entries:
            yk = code.pair_of(y)[k]
            xs = proj(x)
            for i in part.scope:
                est = g.decode(i, yk, pf.side(xs, i))
                if est is not None:
                    rules[i][(y, frame.side(x, i))] = est
    return DecoderSet(code.scope, rules)


def good_sets(code, known: Iterable[int], instance: Instance, dist: Distribution,
              decoders: DecoderSet | None = None) -> dict[tuple[int, int], frozenset[int]]:
    """``(y, x_P index) -> set of x_Q indices`` decoded correctly by every receiver.

    Only pairs with at least one positive-probability tuple appear; the sets
    may be empty.
    """
    frame = _Frame(code, instance, dist)
    g = decoders or decoders_for(code, instance, dist, frame)
    P = as_scope(known)
    Q = tuple(i for i in code.scope if i not in P)
    to_p = frame.layout.projector(P)
    to_q = frame.layout.projector(Q)
    out: dict[tuple[int, int], set[int]] = defaultdict(set)
    for x, y, w in frame.entries:
        key = (y, to_p(x))
        s = out[key]
        if frame.correct(g, x, y):
            s.add(to_q(x))
    return {k: frozenset(v) for k, v in out.items()}


def good_set(code, y: int, x_P: int | Sequence[int], known: Iterable[int], instance: Instance,
             dist: Distribution, decoders: DecoderSet | None = None) -> frozenset[int]:
    P = as_scope(known)
    if not isinstance(x_P, int):
        x_P = Layout(code.q, P, code.t).index(tuple(x_P))
    return good_sets(code, P, instance, dist, decoders).get((y, x_P), frozenset())


def format_code(code: DeterministicCode) -> str:
    """Text table ``tuple codeword`` one per line; composite codes show ``(y1,y2)``."""
    head = f"# q={code.q} scope={','.join(map(str, code.scope))} t={code.t} M={code.M}"
    if isinstance(code, CompositeCode):
        head += f" M1={code.M1} M2={code.M2}"
    lines = [head]
    for x, y in enumerate(code.table):
        label = code.layout.format(x)
        if isinstance(code, CompositeCode):
            y1, y2 = code.pair_of(y)
            lines.append(f"{label} ({y1},{y2})")
        else:
            lines.append(f"{label} {y}")
    return "\n".join(lines) + "\n"


def parse_code(text: str, instance: Instance, scope: Iterable[int] | None = None) -> DeterministicCode:
    """Read a code table; the header line is optional."""
    header: dict[str, str] = {}
    pairs: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    header[k] = v
            continue
        parts = line.replace("->", " ").split()
        if len(parts) != 2:
            raise ValidationError(f"line {lineno}: expected 'tuple codeword', got {raw!r}")
        pairs.append((parts[0], parts[1]))
    if not pairs:
        raise ValidationError("empty code file")
    if scope is None:
        scope = tuple(int(s) for s in header["scope"].split(",") if s) if "scope" in header else instance.messages
    scope = as_scope(scope)
    width = len(pairs[0][0].replace(",", "")) if instance.q <= 10 else len(pairs[0][0].split(","))
    if scope and width % len(scope):
        raise ValidationError("tuple width is not a multiple of the scope size")
    t = int(header.get("t", width // len(scope) if scope else 1))
    layout = Layout(instance.q, scope, t)
    composite = pairs[0][1].startswith("(")
    table: list[int | None] = [None] * layout.size
    raw_pairs = []
    for label, ytxt in pairs:
        x = layout.parse(label)
        if table[x] is not None:
            raise ValidationError(f"tuple {label} listed twice")
        try:
            if composite:
                y1, y2 = (int(v) for v in ytxt.strip("()").split(","))
                raw_pairs.append((y1, y2))
                table[x] = (y1, y2)
            else:
                table[x] = int(ytxt)
        except ValueError as exc:
            raise ValidationError(f"bad codeword {ytxt!r} for tuple {label}") from exc
    missing = [layout.format(x) for x, y in enumerate(table) if y is None]
    if missing:
        raise ValidationError(f"code is not total: no codeword for {missing[:4]}")
    if composite:
        M2 = int(header.get("M2", max(b for _, b in raw_pairs)))
        M1 = int(header.get("M1", max(a for a, _ in raw_pairs)))
        if any(not (1 <= a <= M1 and 1 <= b <= M2) for a, b in raw_pairs):
            raise ValidationError(f"codeword pair outside 1..{M1} x 1..{M2}")
        flat = tuple((a - 1) * M2 + b for a, b in table)
        return CompositeCode(instance.q, scope, t, M1 * M2, flat, sizes=(M1, M2))
    return DeterministicCode(instance.q, scope, t, int(header.get("M", max(table))), tuple(table))
