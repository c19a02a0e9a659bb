"""Exact arithmetic on sums of base-2 logarithms of rationals.

A :class:`Bits` value is ``const + sum(coef_k * log2(arg_k))`` with rational
``const``, ``coef_k`` and ``arg_k``.  Powers of two are folded into ``const``
so ``log2(16/3)`` is stored as ``4 - log2(3)``.  Comparisons are exact: the
sign of a difference is decided by comparing an integer power of a rational
against one.
"""

from __future__ import annotations

import ast
import math
from fractions import Fraction
from numbers import Rational

from .errors import ValidationError


def _split_two(x: Fraction) -> tuple[int, Fraction]:
    """Return ``(k, r)`` with ``x = 2**k * r`` and r having odd numerator and denominator."""
    num, den = x.numerator, x.denominator
    k = 0
    while num % 2 == 0:
        num //= 2
        k += 1
    while den % 2 == 0:
        den //= 2
        k -= 1
    return k, Fraction(num, den)


def _frac(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


class Bits:
    __slots__ = ("const", "terms")
    __hash__ = None  # equality is exact-by-comparison, not structural

    def __init__(self, const=0, terms=None):
        const = _frac(const)
        merged: dict[Fraction, Fraction] = {}
        for arg, coef in (terms or {}).items():
            arg, coef = _frac(arg), _frac(coef)
            if arg <= 0:
                raise ValueError(f"log2 of non-positive value {arg}")
            k, odd = _split_two(arg)
            const += coef * k
            if odd != 1 and coef != 0:
                merged[odd] = merged.get(odd, Fraction(0)) + coef
        self.const = const
        self.terms = {a: c for a, c in sorted(merged.items()) if c != 0}

    @classmethod
    def log2(cls, x) -> "Bits":
        return cls(0, {x: 1})

    @classmethod
    def of(cls, value) -> "Bits":
        if isinstance(value, Bits):
            return value
        return cls(value)

    def __add__(self, other):
        other = Bits.of(other)
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, Fraction(0)) + c
        return Bits(self.const + other.const, terms)

    __radd__ = __add__

    def __neg__(self):
        return Bits(-self.const, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-Bits.of(other))

    def __rsub__(self, other):
        return Bits.of(other) - self

    def __mul__(self, k):
        if not isinstance(k, (int, Rational)):
            return NotImplemented
        k = Fraction(k)
        return Bits(self.const * k, {a: c * k for a, c in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, k):
        if not isinstance(k, (int, Rational)):
            return NotImplemented
        return self * (1 / Fraction(k))

    def sign(self) -> int:
        """Exact sign of the value."""
        coefs = [self.const] + list(self.terms.values())
        den = math.lcm(*(c.denominator for c in coefs))
        # 2**(const*den) * prod(arg**(coef*den)) compared against 1
        value = Fraction(2) ** int(self.const * den)
        for a, c in self.terms.items():
            value *= a ** int(c * den)
        return (value > 1) - (value < 1)

    def _cmp(self, other) -> int:
        if not isinstance(other, (Bits, int, Rational)):
            return NotImplemented
        return (self - other).sign()

    def __eq__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __float__(self):
        total = float(self.const)
        for a, c in self.terms.items():
            total += float(c) * (math.log2(a.numerator) - math.log2(a.denominator))
        return total

    @property
    def is_rational(self) -> bool:
        return not self.terms

    def __str__(self):
        parts = []
        if self.const != 0 or not self.terms:
            parts.append(str(self.const))
        for a, c in self.terms.items():
            if a < 1:
                a, c = 1 / a, -c
            mag = abs(c)
            body = f"log2({a})" if mag == 1 else f"{mag}*log2({a})"
            if parts:
                parts.append(("- " if c < 0 else "+ ") + body)
            else:
                parts.append(("-" if c < 0 else "") + body)
        return " ".join(parts)

    def __repr__(self):
        return f"Bits({str(self)!r})"


def parse_bits(text: str) -> Bits:
    """Parse expressions such as ``"3 - 0.75*log2(3)"`` or ``"log2(16/3)"``.

    Only rational literals, ``+ - * /`` and ``log2(...)`` of a rational are
    accepted; the product of two logarithms is rejected.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValidationError(f"cannot parse rate expression {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return _frac(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "log2":
            if len(node.args) != 1:
                raise ValidationError("log2 takes one argument")
            arg = ev(node.args[0])
            if isinstance(arg, Bits):
                raise ValidationError("nested logarithms are not supported")
            if arg <= 0:
                raise ValidationError(f"log2 of non-positive value {arg}")
            return Bits.log2(arg)
        if isinstance(node, ast.BinOp):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                if isinstance(a, Bits) and isinstance(b, Bits):
                    raise ValidationError("product of logarithms is not supported")
                return a * b
            if isinstance(node.op, ast.Div):
                if isinstance(b, Bits):
                    raise ValidationError("division by a logarithm is not supported")
                return a / b
        raise ValidationError(f"unsupported token in rate expression {text!r}")

    return Bits.of(ev(tree))
