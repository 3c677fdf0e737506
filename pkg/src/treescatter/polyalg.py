"""Exact univariate polynomial and rational-function arithmetic over Q.

Coefficients are `fractions.Fraction` throughout; nothing here ever rounds.
The shape-recovery algorithm reads vertex degrees off leading-coefficient
ratios, so a single floating-point coefficient would corrupt it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence, Union

Rational = Fraction

CoeffLike = Union[Rational, int, str]


def _coerce(x: CoeffLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


@dataclass(frozen=True)
class Poly:
    """Polynomial with ascending rational coefficients.

    The zero polynomial is the empty coefficient tuple; otherwise the last
    coefficient is nonzero.
    """

    coeffs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.coeffs and self.coeffs[-1] == 0:
            raise ValueError("trailing zero coefficient; use Poly.make")

    @staticmethod
    def make(values: Iterable[CoeffLike]) -> "Poly":
        cs = [_coerce(v) for v in values]
        while cs and cs[-1] == 0:
            cs.pop()
        return Poly(tuple(cs))

    @staticmethod
    def zero() -> "Poly":
        return Poly(())

    @staticmethod
    def one() -> "Poly":
        return Poly((Fraction(1),))

    @staticmethod
    def x() -> "Poly":
        return Poly((Fraction(0), Fraction(1)))

    @staticmethod
    def constant(c: CoeffLike) -> "Poly":
        return Poly.make([c])

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial at -1."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __bool__(self) -> bool:
        return not self.is_zero

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly.make(out)

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if self.is_zero or other.is_zero:
            return Poly.zero()
        a, b = self.coeffs, other.coeffs
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
        return Poly.make(out)

    def scale(self, c: CoeffLike) -> "Poly":
        c = _coerce(c)
        if c == 0:
            return Poly.zero()
        return Poly(tuple(c * a for a in self.coeffs))

    def shift_up(self, n: int) -> "Poly":
        """Multiply by x**n."""
        if self.is_zero:
            return self
        return Poly((Fraction(0),) * n + self.coeffs)

    def __divmod__(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        if self.degree < other.degree:
            return Poly.zero(), self
        rem = list(self.coeffs)
        q = [Fraction(0)] * (self.degree - other.degree + 1)
        d = other.coeffs
        lead = d[-1]
        for k in range(len(q) - 1, -1, -1):
            c = rem[k + len(d) - 1] / lead
            q[k] = c
            if c:
                for j, dj in enumerate(d):
                    rem[k + j] -= c * dj
        return Poly.make(q), Poly.make(rem)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = divmod(self, other)
        if not r.is_zero:
            raise ValueError(f"inexact polynomial division: remainder {r}")
        return q

    def monic(self) -> "Poly":
        if self.is_zero:
            return self
        return self.scale(1 / self.leading)

    def content(self) -> Fraction:
        """Signed content: the polynomial divided by it is integer-primitive
        with positive leading coefficient."""
        if self.is_zero:
            return Fraction(1)
        num = gcd(*(abs(c.numerator) for c in self.coeffs))
        den = lcm(*(c.denominator for c in self.coeffs))
        c = Fraction(num, den)
        return c if self.leading > 0 else -c

    def primitive(self) -> "Poly":
        return self.scale(1 / self.content())

    def eval(self, x: complex) -> complex:
        """Horner evaluation in floating point."""
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    def eval_exact(self, x: CoeffLike) -> Fraction:
        x = _coerce(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_array(self, xs):
        """Vectorised Horner evaluation on a numpy array."""
        import numpy as np

        acc = np.zeros_like(xs, dtype=complex)
        for c in reversed(self.coeffs):
            acc = acc * xs + float(c)
        return acc

    def derivative(self) -> "Poly":
        return Poly.make(i * c for i, c in enumerate(self.coeffs) if i)

    def eval_any(self, x):
        """Horner evaluation preserving the arithmetic of x (e.g. mpmath)."""
        zero = 0 * x
        acc = zero
        for c in reversed(self.coeffs):
            acc = acc * x + (zero + c.numerator) / c.denominator
        return acc

    def to_json(self) -> dict:
        return {"coeffs": [_fraction_str(c) for c in self.coeffs]}

    @staticmethod
    def from_json(obj: dict) -> "Poly":
        return Poly.make(obj["coeffs"])

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else ("+" if parts else "")
            mag = abs(c)
            if i == 0:
                body = str(mag)
            else:
                var = "z" if i == 1 else f"z^{i}"
                body = var if mag == 1 else f"{mag}{var}"
            parts.append(sign + body)
        return "".join(parts)


def _fraction_str(c: Fraction) -> Union[int, str]:
    return c.numerator if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic greatest common divisor by the Euclidean algorithm."""
    if a.is_zero and b.is_zero:
        raise ValueError("gcd of two zero polynomials")
    while not b.is_zero:
        a, b = b, a % b
    return a.monic()


def det_polymatrix(m: Sequence[Sequence[Poly]]) -> Poly:
    """Exact determinant of a square polynomial matrix.

    Fraction-free (Bareiss) elimination: every intermediate entry is a minor
    of the input, and the divisions are exact, so integer inputs never leave
    the integers.  Row swaps are tracked by sign.
    """
    n = len(m)
    if n == 0:
        return Poly.one()
    for row in m:
        if len(row) != n:
            raise ValueError("matrix is not square")
    a = [[entry for entry in row] for row in m]
    if all(c.denominator == 1 for row in a for e in row for c in e.coeffs):
        return _det_bareiss_int(a)
    return _det_bareiss_generic(a)


def _det_bareiss_generic(a: list[list[Poly]]) -> Poly:
    n = len(a)
    sign = 1
    prev = Poly.one()
    for k in range(n - 1):
        if a[k][k].is_zero:
            for i in range(k + 1, n):
                if not a[i][k].is_zero:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Poly.zero()
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (pivot * a[i][j] - a[i][k] * a[k][j]).exact_div(prev)
            a[i][k] = Poly.zero()
        prev = pivot
    d = a[n - 1][n - 1]
    return -d if sign < 0 else d


# Integer fast path.  Polynomials are plain ascending int lists; the Bareiss
# divisions stay exact in Z[z].

def _imul(a: list[int], b: list[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
    while out and out[-1] == 0:
        out.pop()
    return out


def _isub(a: list[int], b: list[int]) -> list[int]:
    out = list(a) + [0] * (len(b) - len(a))
    for i, cb in enumerate(b):
        out[i] -= cb
    while out and out[-1] == 0:
        out.pop()
    return out


def _iexact_div(a: list[int], b: list[int]) -> list[int]:
    if not b:
        raise ZeroDivisionError
    if not a:
        return []
    rem = list(a)
    q = [0] * (len(a) - len(b) + 1)
    lead = b[-1]
    for k in range(len(q) - 1, -1, -1):
        c, r = divmod(rem[k + len(b) - 1], lead)
        if r:
            raise ValueError("inexact integer polynomial division")
        q[k] = c
        if c:
            for j, bj in enumerate(b):
                rem[k + j] -= c * bj
    if any(rem):
        raise ValueError("inexact integer polynomial division")
    while q and q[-1] == 0:
        q.pop()
    return q


def _det_bareiss_int(m: list[list[Poly]]) -> Poly:
    n = len(m)
    a = [[[c.numerator for c in e.coeffs] for e in row] for row in m]
    sign = 1
    prev = [1]
    for k in range(n - 1):
        if not a[k][k]:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return Poly.zero()
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = _iexact_div(
                    _isub(_imul(pivot, a[i][j]), _imul(a[i][k], a[k][j])), prev
                )
            a[i][k] = []
        prev = pivot
    d = a[n - 1][n - 1]
    if sign < 0:
        d = [-c for c in d]
    return Poly.make(d)


@dataclass(frozen=True)
class RatFunc:
    """Reduced rational function in one variable.

    Canonical form: gcd(num, den) = 1 and the denominator is an
    integer-primitive polynomial with positive leading coefficient, so two
    equal rational functions compare equal as values.
    """

    num: Poly
    den: Poly

    @staticmethod
    def make(num: Poly, den: Poly) -> "RatFunc":
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero:
            return RatFunc(Poly.zero(), Poly.one())
        g = poly_gcd(num, den)
        if g.degree > 0:
            num = num.exact_div(g)
            den = den.exact_div(g)
        c = den.content()
        return RatFunc(num.scale(1 / c), den.scale(1 / c))

    @staticmethod
    def from_poly(p: Poly) -> "RatFunc":
        return RatFunc.make(p, Poly.one())

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __add__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc.make(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return self + (-other)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc.make(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        if other.is_zero:
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc.make(self.num * other.den, self.den * other.num)

    def reciprocal(self) -> "RatFunc":
        if self.is_zero:
            raise ZeroDivisionError("reciprocal of zero")
        return RatFunc.make(self.den, self.num)

    def scale(self, c: CoeffLike) -> "RatFunc":
        return RatFunc.make(self.num.scale(c), self.den)

    def eval(self, x: complex) -> complex:
        return self.num.eval(x) / self.den.eval(x)

    def eval_exact(self, x: CoeffLike) -> Fraction:
        d = self.den.eval_exact(x)
        if d == 0:
            raise ZeroDivisionError(f"pole at {x}")
        return self.num.eval_exact(x) / d

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @staticmethod
    def from_json(obj: dict) -> "RatFunc":
        return RatFunc.make(Poly.from_json(obj["num"]), Poly.from_json(obj["den"]))

    def __str__(self) -> str:
        return f"({self.num})/({self.den})"


RATFUNC_ZERO = RatFunc(Poly.zero(), Poly.one())


def ratfunc_x(scale: CoeffLike = 1) -> RatFunc:
    """The rational function c*z."""
    return RatFunc.make(Poly.x().scale(scale), Poly.one())
