"""Index-coding instances, exact message distributions and the adversary.

Messages are numbered 1..n.  A tuple over ``X_S^t`` (S a sorted tuple of
message ids) is stored as an integer index: each message contributes one
base-``q**t`` digit (message order, first message most significant) and the
digit itself is that message's length-t sequence in base q (first symbol most
significant).  Projecting onto a sub-scope is then digit extraction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapExceeded, ValidationError

DEFAULT_TUPLE_CAP = 2**20


def as_scope(S: Iterable[int] | None) -> tuple[int, ...]:
    return tuple(sorted(set(S or ())))


@dataclass(frozen=True)
class Instance:
    n: int
    q: int
    side_info: tuple[frozenset[int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be a positive integer")
        if self.q < 2:
            raise ValidationError("alphabet size q must be at least 2")
        if len(self.side_info) != self.n:
            raise ValidationError(f"expected {self.n} side-information sets, got {len(self.side_info)}")
        side = tuple(frozenset(a) for a in self.side_info)
        object.__setattr__(self, "side_info", side)
        for i, A in enumerate(side, start=1):
            if i in A:
                raise ValidationError(f"receiver {i} lists its own message as side information")
            bad = [j for j in A if not 1 <= j <= self.n]
            if bad:
                raise ValidationError(f"side information of receiver {i} outside [n]: {bad}")

    @classmethod
    def from_lists(cls, q: int, side_info: Sequence[Iterable[int]]) -> "Instance":
        return cls(len(side_info), q, tuple(frozenset(a) for a in side_info))

    @property
    def messages(self) -> tuple[int, ...]:
        return tuple(range(1, self.n + 1))

    def side(self, i: int, S: Iterable[int] | None = None) -> tuple[int, ...]:
        """Side information of receiver i, restricted to S when given."""
        A = self.side_info[i - 1]
        if S is not None:
            A = A & set(S)
        return tuple(sorted(A))

    def subproblem(self, S: Iterable[int]) -> dict[int, tuple[int, ...]]:
        """Receivers of the subproblem induced by S with their restricted side information."""
        S = as_scope(S)
        return {i: self.side(i, S) for i in S}

    def describe(self) -> str:
        return ", ".join(
            f"({i}|{','.join(map(str, self.side(i))) or '-'})" for i in self.messages
        )


@dataclass(frozen=True)
class Layout:
    """Canonical numbering of ``X_S^t``."""

    q: int
    scope: tuple[int, ...]
    t: int = 1

    @property
    def radix(self) -> int:
        return self.q**self.t

    @property
    def size(self) -> int:
        return self.radix ** len(self.scope)

    @property
    def width(self) -> int:
        return len(self.scope) * self.t

    def position(self, i: int) -> int:
        return self.scope.index(i)

    def blocks(self, idx: int) -> tuple[int, ...]:
        """Per-message sequence indices of a tuple."""
        out = []
        R = self.radix
        for _ in self.scope:
            idx, d = divmod(idx, R)
            out.append(d)
        return tuple(reversed(out))

    def from_blocks(self, blocks: Sequence[int]) -> int:
        idx = 0
        for b in blocks:
            idx = idx * self.radix + b
        return idx

    def digits(self, idx: int) -> tuple[int, ...]:
        """Flat symbol tuple, message-major."""
        out = []
        for _ in range(self.width):
            idx, d = divmod(idx, self.q)
            out.append(d)
        return tuple(reversed(out))

    def index(self, digits: Sequence[int]) -> int:
        if len(digits) != self.width:
            raise ValidationError(f"tuple of length {len(digits)} does not match width {self.width}")
        idx = 0
        for d in digits:
            if not 0 <= d < self.q:
                raise ValidationError(f"symbol {d} outside alphabet of size {self.q}")
            idx = idx * self.q + d
        return idx

    def time_slices(self, idx: int) -> list[int]:
        """Indices in the t=1 layout of ``x_{S,1}, ..., x_{S,t}``."""
        base = Layout(self.q, self.scope, 1)
        seqs = [_seq_digits(b, self.q, self.t) for b in self.blocks(idx)]
        return [base.from_blocks([s[j] for s in seqs]) for j in range(self.t)]

    def projector(self, sub: Sequence[int]) -> "Projector":
        return Projector(self, as_scope(sub))

    def format(self, idx: int) -> str:
        return format_tuple(self.digits(idx), self.q)

    def parse(self, text: str) -> int:
        return self.index(parse_tuple(text, self.q, self.width))


def _seq_digits(b: int, q: int, t: int) -> list[int]:
    out = []
    for _ in range(t):
        b, d = divmod(b, q)
        out.append(d)
    return out[::-1]


class Projector:
    """Maps indices of ``X_S^t`` to indices of ``X_{S'}^t`` for S' a subset of S."""

    def __init__(self, layout: Layout, sub: tuple[int, ...]):
        missing = set(sub) - set(layout.scope)
        if missing:
            raise ValidationError(f"{sorted(missing)} not in scope {layout.scope}")
        self.source = layout
        self.target = Layout(layout.q, sub, layout.t)
        k = len(layout.scope)
        R = layout.radix
        self._shifts = [R ** (k - 1 - layout.position(i)) for i in sub]

    def __call__(self, idx: int) -> int:
        R = self.source.radix
        out = 0
        for s in self._shifts:
            out = out * R + (idx // s) % R
        return out

    def table(self) -> list[int]:
        return [self(x) for x in range(self.source.size)]


def format_tuple(digits: Sequence[int], q: int) -> str:
    if q <= 10:
        return "".join(str(d) for d in digits)
    return ",".join(str(d) for d in digits)


def parse_tuple(text: str, q: int, width: int | None = None) -> tuple[int, ...]:
    text = text.strip()
    if "," in text or q > 10:
        digits = tuple(int(p) for p in text.split(",") if p != "")
    else:
        if not text.isdigit() and text != "":
            raise ValidationError(f"bad tuple string {text!r}")
        digits = tuple(int(ch) for ch in text)
    if width is not None and len(digits) != width:
        raise ValidationError(f"tuple {text!r} has {len(digits)} symbols, expected {width}")
    if any(not 0 <= d < q for d in digits):
        raise ValidationError(f"tuple {text!r} has a symbol outside [0, {q})")
    return digits


class Distribution:
    """Exact full-support distribution on ``X_S^t``.

    Stored as integer weights over a common denominator; ``prob(idx)``
    returns a :class:`Fraction`.
    """

    def __init__(self, q: int, scope: Iterable[int], weights: Sequence[int], denom: int, t: int = 1):
        self.layout = Layout(q, as_scope(scope), t)
        weights = tuple(int(w) for w in weights)
        if len(weights) != self.layout.size:
            raise ValidationError(f"expected {self.layout.size} probabilities, got {len(weights)}")
        if any(w <= 0 for w in weights):
            bad = next(i for i, w in enumerate(weights) if w <= 0)
            raise ValidationError(f"full support violated at tuple {self.layout.format(bad)!r}")
        if sum(weights) != denom:
            raise ValidationError(f"probabilities sum to {Fraction(sum(weights), denom)}, not 1")
        g = math.gcd(denom, *weights)
        self.weights = tuple(w // g for w in weights)
        self.denom = denom // g

    @classmethod
    def from_probs(cls, q: int, scope: Iterable[int], probs: Sequence, t: int = 1) -> "Distribution":
        probs = [Fraction(p) for p in probs]
        den = math.lcm(*(p.denominator for p in probs)) if probs else 1
        return cls(q, scope, [p * den for p in probs], den, t)

    @classmethod
    def uniform(cls, q: int, scope: Iterable[int], t: int = 1) -> "Distribution":
        size = Layout(q, as_scope(scope), t).size
        return cls(q, scope, [1] * size, size, t)

    @classmethod
    def product(cls, q: int, marginals: Sequence[Sequence], scope: Iterable[int] | None = None) -> "Distribution":
        """Independent messages with the given per-message symbol distributions."""
        scope = as_scope(scope) if scope is not None else tuple(range(1, len(marginals) + 1))
        if len(scope) != len(marginals):
            raise ValidationError("one marginal vector per message required")
        table = np.array([1], dtype=object)
        den = 1
        for vec in marginals:
            vec = [Fraction(p) for p in vec]
            if len(vec) != q:
                raise ValidationError(f"marginal vector must have {q} entries")
            if sum(vec) != 1:
                raise ValidationError(f"marginal {[str(v) for v in vec]} does not sum to 1")
            d = math.lcm(*(p.denominator for p in vec))
            table = np.multiply.outer(table, np.array([int(p * d) for p in vec], dtype=object)).ravel()
            den *= d
        return cls(q, scope, list(table), den)

    @property
    def q(self) -> int:
        return self.layout.q

    @property
    def scope(self) -> tuple[int, ...]:
        return self.layout.scope

    @property
    def t(self) -> int:
        return self.layout.t

    @property
    def size(self) -> int:
        return self.layout.size

    def prob(self, idx: int) -> Fraction:
        return Fraction(self.weights[idx], self.denom)

    @property
    def probs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(w, self.denom) for w in self.weights)

    def items(self) -> Iterator[tuple[int, Fraction]]:
        for i, w in enumerate(self.weights):
            yield i, Fraction(w, self.denom)

    def table(self) -> dict[str, Fraction]:
        return {self.layout.format(i): p for i, p in self.items()}

    @cached_property
    def is_uniform(self) -> bool:
        return len(set(self.weights)) == 1

    def _array(self) -> np.ndarray:
        k = len(self.scope)
        return np.array(self.weights, dtype=object).reshape((self.layout.radix,) * k) if k else np.array(self.weights[0], dtype=object)

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return (self.layout == other.layout and self.weights == other.weights and self.denom == other.denom)

    def __hash__(self):
        return hash((self.layout, self.weights, self.denom))

    def __repr__(self):
        return f"Distribution(q={self.q}, scope={self.scope}, t={self.t}, size={self.size})"


class LazyProduct:
    """t-fold product of a single-letter distribution, evaluated per tuple."""

    def __init__(self, base: Distribution, t: int):
        if base.t != 1:
            raise ValueError("lazy product needs a single-letter base distribution")
        self.base = base
        self.layout = Layout(base.q, base.scope, t)
        self.denom = base.denom**t

    q = property(lambda self: self.layout.q)
    scope = property(lambda self: self.layout.scope)
    t = property(lambda self: self.layout.t)
    size = property(lambda self: self.layout.size)

    def weight(self, idx: int) -> int:
        w = 1
        for s in self.layout.time_slices(idx):
            w *= self.base.weights[s]
        return w

    def prob(self, idx: int) -> Fraction:
        return Fraction(self.weight(idx), self.denom)

    def items(self) -> Iterator[tuple[int, Fraction]]:
        for i in range(self.size):
            yield i, self.prob(i)

    def materialize(self, cap: int = DEFAULT_TUPLE_CAP) -> Distribution:
        return product_extend(self.base, self.t, cap=cap, lazy=False)


def product_extend(dist: Distribution, t: int, cap: int = DEFAULT_TUPLE_CAP, lazy: bool | None = None):
    """Memoryless extension of a single-letter distribution to length-t sequences.

    Returns a :class:`LazyProduct` when the sequence space exceeds ``cap`` (or
    when ``lazy=True``); ``lazy=False`` forces materialization and raises
    :class:`CapExceeded` instead.
    """
    if t < 1:
        raise ValidationError("sequence length t must be at least 1")
    if dist.t == t:
        return dist
    if dist.t != 1:
        raise ValidationError("product_extend expects a single-letter distribution")
    size = Layout(dist.q, dist.scope, t).size
    if lazy or (lazy is None and size > cap):
        return LazyProduct(dist, t)
    if size > cap:
        raise CapExceeded(f"{size} sequence tuples exceed the materialization cap {cap}")
    k = len(dist.scope)
    if k == 0:
        return Distribution(dist.q, (), [1], 1, t)
    base = dist._array()
    arr = base
    for _ in range(t - 1):
        arr = np.multiply.outer(arr, base)
    # axes are time-major (time j, message a) -> reorder to message-major
    perm = [j * k + a for a in range(k) for j in range(t)]
    arr = np.transpose(arr, perm).ravel()
    return Distribution(dist.q, dist.scope, list(arr), dist.denom**t, t)


def marginal(dist: Distribution, S: Iterable[int]) -> Distribution:
    S = as_scope(S)
    if not set(S) <= set(dist.scope):
        raise ValidationError(f"{S} is not a subset of scope {dist.scope}")
    if S == dist.scope:
        return dist
    if not S:
        return Distribution(dist.q, (), [1], 1, dist.t)
    drop = tuple(a for a, i in enumerate(dist.scope) if i not in S)
    arr = dist._array().sum(axis=drop)
    return Distribution(dist.q, S, list(np.asarray(arr, dtype=object).ravel()), dist.denom, dist.t)


def conditional(dist: Distribution, given: Iterable[int], values: Sequence[int] | int) -> Distribution:
    """Distribution of the remaining messages given ``X_given = values``.

    ``values`` is either a flat symbol tuple or an index in the layout of
    ``given``.
    """
    A = as_scope(given)
    B = tuple(i for i in dist.scope if i not in A)
    if not set(A) <= set(dist.scope):
        raise ValidationError(f"{A} is not a subset of scope {dist.scope}")
    la = Layout(dist.q, A, dist.t)
    a_idx = values if isinstance(values, int) else la.index(tuple(values))
    proj_a = dist.layout.projector(A)
    proj_b = dist.layout.projector(B)
    weights = [0] * Layout(dist.q, B, dist.t).size
    for x, w in enumerate(dist.weights):
        if proj_a(x) == a_idx:
            weights[proj_b(x)] = w
    total = sum(weights)
    if total == 0:
        raise ValidationError("conditioning event has zero probability")
    return Distribution(dist.q, B, weights, total, dist.t)


@dataclass(frozen=True)
class GuessBudget:
    """Guessing capability c(t): a constant or a table t -> c(t).

    Past the end of a table the last entry is used.
    """

    constant: int | None = 1
    table: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.table:
            object.__setattr__(self, "constant", None)
            ts = [t for t, _ in self.table]
            if ts != sorted(ts) or len(set(ts)) != len(ts) or ts[0] != 1:
                raise ValidationError("capability table must start at t=1 with increasing t")
            cs = [c for _, c in self.table]
            if any(c < 1 for c in cs):
                raise ValidationError("capability values must be positive")
            if cs != sorted(cs):
                raise ValidationError("capability c(t) must be non-decreasing in t")
        elif self.constant is None or self.constant < 1:
            raise ValidationError("capability must be a positive integer")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "GuessBudget":
        return cls(None, tuple(sorted((int(k), int(v)) for k, v in mapping.items())))

    def __call__(self, t: int) -> int:
        if self.constant is not None:
            return self.constant
        c = self.table[0][1]
        for tt, cc in self.table:
            if tt <= t:
                c = cc
        return c


@dataclass(frozen=True)
class AdversarySpec:
    n: int
    known: frozenset[int] = frozenset()
    capability: GuessBudget = field(default_factory=GuessBudget)

    def __post_init__(self):
        object.__setattr__(self, "known", frozenset(self.known))
        if not all(1 <= i <= self.n for i in self.known):
            raise ValidationError(f"adversary knows messages outside [n]: {sorted(self.known)}")
        if len(self.known) == self.n:
            raise ValidationError("adversary must have at least one message to guess")

    @property
    def P(self) -> tuple[int, ...]:
        return tuple(sorted(self.known))

    @property
    def Q(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.n + 1) if i not in self.known)

    def c(self, t: int) -> int:
        return self.capability(t)


@dataclass(frozen=True)
class KnownRate:
    """Externally supplied rate value, carried verbatim with its citation."""

    expression: str
    citation: str = ""

    @property
    def value(self):
        from .logexpr import parse_bits

        return parse_bits(self.expression)


class LoadedInstance(tuple):
    """``(instance, distribution, adversary, known_rates)``, also by attribute."""

    __slots__ = ()

    def __new__(cls, instance, distribution, adversary, known_rates=None):
        return super().__new__(cls, (instance, distribution, adversary, dict(known_rates or {})))

    instance = property(lambda self: self[0])
    distribution = property(lambda self: self[1])
    adversary = property(lambda self: self[2])
    known_rates = property(lambda self: self[3])


def parse_rational(value) -> Fraction:
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {value!r}") from exc
    raise ValidationError(f"probabilities must be integers or 'num/den' strings, got {value!r}")


def load_instance(text: str | dict) -> LoadedInstance:
    """Parse and validate an instance document (JSON text or an already-decoded mapping)."""
    if isinstance(text, str):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed instance document: {exc}") from exc
    else:
        doc = text
    if not isinstance(doc, dict):
        raise ValidationError("instance document must be a mapping")
    try:
        n, q, side = int(doc["n"]), int(doc["q"]), doc["side_info"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"instance document needs integer n, q and side_info: {exc}") from exc
    if not isinstance(side, list) or not all(isinstance(a, list) for a in side):
        raise ValidationError("side_info must be a list of lists")
    instance = Instance(n, q, tuple(frozenset(int(j) for j in a) for a in side))
    dist = _load_distribution(doc.get("distribution", "uniform"), instance)

    adv = doc.get("adversary", {}) or {}
    cap = adv.get("capability", 1)
    if isinstance(cap, dict):
        budget = GuessBudget.from_mapping(cap)
    elif isinstance(cap, int) and not isinstance(cap, bool):
        budget = GuessBudget(cap)
    else:
        raise ValidationError(f"capability must be an integer or a table, got {cap!r}")
    adversary = AdversarySpec(n, frozenset(int(i) for i in adv.get("known", [])), budget)

    known = {}
    for key, value in doc.items():
        if key.startswith("known_") and not key.endswith("_citation"):
            name = key[len("known_"):]
            known[name] = KnownRate(str(value), str(doc.get(key + "_citation", "")))
            known[name].value  # fail early on malformed expressions
    return LoadedInstance(instance, dist, adversary, known)


def _load_distribution(spec, instance: Instance) -> Distribution:
    q, scope = instance.q, instance.messages
    if spec == "uniform":
        return Distribution.uniform(q, scope)
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValidationError("distribution must be 'uniform', {'product': ...} or {'joint': ...}")
    (kind, body), = spec.items()
    if kind == "product":
        if not isinstance(body, list) or len(body) != instance.n:
            raise ValidationError("product distribution needs one vector per message")
        return Distribution.product(q, [[parse_rational(p) for p in vec] for vec in body], scope)
    if kind == "joint":
        if not isinstance(body, dict):
            raise ValidationError("joint distribution must map tuple strings to probabilities")
        layout = Layout(q, scope)
        probs = [None] * layout.size
        for key, p in body.items():
            idx = layout.parse(str(key))
            if probs[idx] is not None:
                raise ValidationError(f"duplicate tuple {key!r}")
            probs[idx] = parse_rational(p)
        missing = [layout.format(i) for i, p in enumerate(probs) if p is None]
        if missing:
            raise ValidationError(f"full support violated: no probability for {missing[:4]}")
        return Distribution.from_probs(q, scope, probs)
    raise ValidationError(f"unknown distribution kind {kind!r}")
