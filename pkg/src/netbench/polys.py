"""Sparse multivariate polynomials and rational functions over rationals.

These back the symbolic solver and the parametric coefficients of the
constraint IR. Polynomials are kept over a fixed, ordered parameter tuple
with terms stored as exponent-vector -> Fraction; the zero polynomial has
no terms. Term ordering throughout is graded lexicographic.

There is deliberately no full multivariate GCD: rational functions are
normalized only by content extraction and sign, and equality testing is
done probabilistically (see symbolic.rf_equivalent).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, Iterable, Mapping, Tuple

from .errors import NetbenchError

Exponents = Tuple[int, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class PolyError(NetbenchError):
    """Malformed polynomial operation (mismatched contexts, inexact division)."""


def _grlex(item: Tuple[Exponents, Fraction]) -> Tuple[int, Exponents]:
    exps = item[0]
    return (sum(exps), exps)


@dataclass(frozen=True)
class MultivarPoly:
    """Polynomial in `params` with Fraction coefficients, sparse representation."""

    params: Tuple[str, ...]
    terms: Mapping[Exponents, Fraction]

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(params: Tuple[str, ...]) -> "MultivarPoly":
        return MultivarPoly(tuple(params), {})

    @staticmethod
    def const(params: Tuple[str, ...], value) -> "MultivarPoly":
        value = Fraction(value)
        params = tuple(params)
        if value == 0:
            return MultivarPoly(params, {})
        return MultivarPoly(params, {(0,) * len(params): value})

    @staticmethod
    def var(params: Tuple[str, ...], name: str) -> "MultivarPoly":
        params = tuple(params)
        if name not in params:
            raise PolyError(f"unknown parameter {name!r}; context is {params}")
        exps = tuple(1 if p == name else 0 for p in params)
        return MultivarPoly(params, {exps: _ONE})

    # -- predicates --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> Fraction:
        if self.is_zero:
            return _ZERO
        if not self.is_constant:
            raise PolyError(f"{self.render()} is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        if self.is_zero:
            return 0
        return max(sum(e) for e in self.terms)

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "MultivarPoly") -> None:
        if self.params != other.params:
            raise PolyError(
                f"parameter contexts differ: {self.params} vs {other.params}"
            )

    def _coerce(self, other) -> "MultivarPoly":
        if isinstance(other, MultivarPoly):
            self._check(other)
            return other
        return MultivarPoly.const(self.params, other)

    def __add__(self, other) -> "MultivarPoly":
        other = self._coerce(other)
        out: Dict[Exponents, Fraction] = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, _ZERO) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return MultivarPoly(self.params, out)

    __radd__ = __add__

    def __neg__(self) -> "MultivarPoly":
        return MultivarPoly(self.params, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MultivarPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultivarPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "MultivarPoly":
        if not isinstance(other, MultivarPoly):
            c = Fraction(other)
            if c == 0:
                return MultivarPoly.zero(self.params)
            return MultivarPoly(
                self.params, {e: v * c for e, v in self.terms.items()}
            )
        self._check(other)
        out: Dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, _ZERO) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return MultivarPoly(self.params, out)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "MultivarPoly":
        c = Fraction(scalar)
        if c == 0:
            raise ZeroDivisionError("polynomial divided by zero scalar")
        return self * (1 / c)

    def __eq__(self, other) -> bool:
        if isinstance(other, MultivarPoly):
            return self.params == other.params and dict(self.terms) == dict(
                other.terms
            )
        if isinstance(other, (int, Fraction)):
            return self.is_constant and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        return hash((self.params, tuple(sorted(self.terms.items()))))

    # -- structure ---------------------------------------------------------

    def leading(self) -> Tuple[Exponents, Fraction]:
        """Leading (exponents, coefficient) in graded lexicographic order."""
        if self.is_zero:
            raise PolyError("zero polynomial has no leading term")
        return max(self.terms.items(), key=_grlex)

    def content(self) -> Fraction:
        """Positive rational content: gcd of numerators over lcm of denominators."""
        if self.is_zero:
            return _ONE
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, abs(c.numerator))
            den = lcm(den, c.denominator)
        return Fraction(num, den)

    def exact_div(self, divisor: "MultivarPoly") -> "MultivarPoly":
        """Exact polynomial division; raises PolyError on a nonzero remainder."""
        self._check(divisor)
        if divisor.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero:
            return self
        lt_e, lt_c = divisor.leading()
        rem: Dict[Exponents, Fraction] = dict(self.terms)
        out: Dict[Exponents, Fraction] = {}
        while rem:
            e, c = max(rem.items(), key=_grlex)
            q_e = tuple(a - b for a, b in zip(e, lt_e))
            if any(x < 0 for x in q_e):
                raise PolyError("inexact polynomial division")
            q_c = c / lt_c
            out[q_e] = q_c
            # rem -= q_term * divisor
            for de, dc in divisor.terms.items():
                te = tuple(a + b for a, b in zip(q_e, de))
                s = rem.get(te, _ZERO) - q_c * dc
                if s == 0:
                    rem.pop(te, None)
                else:
                    rem[te] = s
        return MultivarPoly(self.params, out)

    # -- evaluation --------------------------------------------------------

    def substitute(self, name: str, value) -> "MultivarPoly":
        """Replace one parameter by a rational constant."""
        if name not in self.params:
            return self
        idx = self.params.index(name)
        value = Fraction(value)
        out: Dict[Exponents, Fraction] = {}
        for e, c in self.terms.items():
            ne = e[:idx] + (0,) + e[idx + 1 :]
            s = out.get(ne, _ZERO) + c * value ** e[idx]
            if s == 0:
                out.pop(ne, None)
            else:
                out[ne] = s
        return MultivarPoly(self.params, out)

    def eval(self, point: Mapping[str, Fraction]) -> Fraction:
        missing = [p for p in self.params if p not in point and self._uses(p)]
        if missing:
            raise PolyError(f"no value given for parameter(s) {missing}")
        total = _ZERO
        for e, c in self.terms.items():
            v = c
            for p, k in zip(self.params, e):
                if k:
                    v *= Fraction(point[p]) ** k
            total += v
        return total

    def _uses(self, name: str) -> bool:
        idx = self.params.index(name)
        return any(e[idx] for e in self.terms)

    def used_params(self) -> Tuple[str, ...]:
        return tuple(p for p in self.params if self._uses(p))

    # -- rendering ---------------------------------------------------------

    def render(self) -> str:
        """Human-readable text; adjacent single-symbol factors like R1R3 are
        juxtaposed to mirror the conventional network-formula notation."""
        if self.is_zero:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), key=_grlex, reverse=True):
            mono = _render_monomial(self.params, e)
            if mono == "1":
                body = _render_fraction(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{_render_fraction(abs(c))}*{mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"MultivarPoly({self.render()!r})"


def _render_fraction(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _is_short_symbol(name: str) -> bool:
    return len(name) >= 1 and name[0].isupper() and name[1:].isdigit()


def _render_monomial(params: Tuple[str, ...], exps: Exponents) -> str:
    factors = []
    for name, k in zip(params, exps):
        if k == 0:
            continue
        factors.append((name, k))
    if not factors:
        return "1"
    pieces = []
    run = ""
    for name, k in factors:
        if k == 1 and _is_short_symbol(name):
            run += name
        else:
            if run:
                pieces.append(run)
                run = ""
            pieces.append(name if k == 1 else f"{name}^{k}")
    if run:
        pieces.append(run)
    return "*".join(pieces)


@dataclass(frozen=True)
class RationalFunction:
    """Quotient of two polynomials, content-reduced, positive leading denominator.

    No multivariate GCD is attempted; numerator and denominator may share
    polynomial factors. Use symbolic.rf_equivalent for equality testing.
    """

    num: MultivarPoly
    den: MultivarPoly

    @staticmethod
    def of(num: MultivarPoly, den: MultivarPoly) -> "RationalFunction":
        num._check(den)
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero:
            return RationalFunction(num, MultivarPoly.const(num.params, 1))
        c_num = num.content()
        c_den = den.content()
        common = Fraction(
            gcd(c_num.numerator, c_den.numerator),
            lcm(c_num.denominator, c_den.denominator),
        )
        if common != 1:
            num = num * (1 / common)
            den = den * (1 / common)
        if den.leading()[1] < 0:
            num = -num
            den = -den
        return RationalFunction(num, den)

    @staticmethod
    def const(params: Tuple[str, ...], value) -> "RationalFunction":
        return RationalFunction.of(
            MultivarPoly.const(params, value), MultivarPoly.const(params, 1)
        )

    @staticmethod
    def var(params: Tuple[str, ...], name: str) -> "RationalFunction":
        return RationalFunction.of(
            MultivarPoly.var(params, name), MultivarPoly.const(params, 1)
        )

    @property
    def params(self) -> Tuple[str, ...]:
        return self.num.params

    def __add__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if dict(self.den.terms) == dict(other.den.terms):
            return RationalFunction.of(self.num + other.num, self.den)
        return RationalFunction.of(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalFunction":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        return RationalFunction.of(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if other.num.is_zero:
            raise ZeroDivisionError("rational function division by zero")
        return RationalFunction.of(self.num * other.den, self.den * other.num)

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, MultivarPoly):
            return RationalFunction.of(
                other, MultivarPoly.const(other.params, 1)
            )
        return RationalFunction.const(self.params, other)

    def render(self) -> str:
        if self.den.is_constant and self.den.constant_value() == 1:
            return self.num.render()
        return f"({self.num.render()}) / ({self.den.render()})"

    def __repr__(self) -> str:
        return f"RationalFunction({self.render()!r})"
