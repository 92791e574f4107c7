"""Exact arithmetic in the cyclotomic fields Q(zeta_N).

Values are stored as integer numerators over a positive common denominator,
in the power basis 1, z, ..., z^(phi(N)-1) obtained by reducing modulo the
N-th cyclotomic polynomial.  Two values of the same order are equal iff their
stored forms are identical; values of different orders are compared after
lifting both to the lcm of the orders.
"""
from __future__ import annotations

import enum
import math
import os
from contextlib import contextmanager
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np
from mpmath import iv

from .errors import PrecisionExhausted

DEFAULT_PRECISION_CAP = 1024


class Sign(enum.IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


def _polydiv_exact(num, den):
    """Quotient of integer polynomials (low degree first), den monic."""
    num = list(num)
    dd = len(den) - 1
    out = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        out[i - dd] = c
        if c:
            for j, dj in enumerate(den):
                num[i - dd + j] -= c * dj
    assert not any(num[:dd]), "inexact cyclotomic division"
    return out


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _polydiv_exact(poly, cyclotomic_polynomial(d))
    return tuple(poly)


@lru_cache(maxsize=None)
def totient(n: int) -> int:
    return len(cyclotomic_polynomial(n)) - 1


@lru_cache(maxsize=None)
def _mobius(n: int) -> int:
    res, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            res = -res
        p += 1
    return -res if m > 1 else res


@lru_cache(maxsize=None)
def reduction_table(n: int) -> np.ndarray:
    """Row k holds the reduction of z^k, k < n, as an int64 array."""
    phi = cyclotomic_polynomial(n)
    d = len(phi) - 1
    rows = np.zeros((n, d), dtype=np.int64)
    cur = [0] * d
    cur[0] = 1
    for k in range(n):
        rows[k] = cur
        # multiply by z and reduce
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * p for c, p in zip(cur, phi[:-1])]
    return rows


@lru_cache(maxsize=None)
def _reduction_lists(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(v) for v in row) for row in reduction_table(n))


@lru_cache(maxsize=None)
def _trace_weights(n: int) -> tuple[Fraction, ...]:
    """Normalized traces Tr(z^k)/phi(n) for k < phi(n)."""
    out = []
    for k in range(totient(n)):
        g = math.gcd(k, n)
        m = n // g
        out.append(Fraction(_mobius(m), totient(m)))
    return tuple(out)


@lru_cache(maxsize=None)
def _roots(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(totient(n)) / n)


@contextmanager
def _interval_precision(prec: int):
    saved = iv.prec
    iv.prec = prec
    try:
        yield
    finally:
        iv.prec = saved


@lru_cache(maxsize=64)
def _cos_intervals(n: int, prec: int):
    with _interval_precision(prec):
        return tuple(iv.cos(2 * iv.pi * k / n) for k in range(totient(n)))


def _reduce_full(vec, n):
    """Reduce a length-n integer vector indexed by exponent mod n."""
    table = _reduction_lists(n)
    d = len(table[0])
    out = [0] * d
    for k, c in enumerate(vec):
        if c:
            if k < d:
                out[k] += c
            else:
                for m, r in enumerate(table[k]):
                    if r:
                        out[m] += c * r
    return out


def precision_cap() -> int:
    raw = os.environ.get("NLSYM_PRECISION_BITS")
    return int(raw) if raw else DEFAULT_PRECISION_CAP


class Cyclotomic:
    """An element of Q(zeta_N) in canonical reduced power-basis form."""

    __slots__ = ("order", "num", "den", "_approx")

    def __init__(self, order: int, num, den: int = 1, *, _reduced: bool = False):
        if order < 1:
            raise ValueError("order must be positive")
        num = [int(c) for c in num]
        if not _reduced:
            full = [0] * order
            for k, c in enumerate(num):
                full[k % order] += c
            num = _reduce_full(full, order)
        den = int(den)
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            den, num = -den, [-c for c in num]
        g = den
        for c in num:
            g = math.gcd(g, c)
            if g == 1:
                break
        if g > 1:
            num = [c // g for c in num]
            den //= g
        if not any(num):
            den = 1
        self.order = order
        self.num = tuple(num)
        self.den = den
        self._approx = None

    # construction helpers
    @classmethod
    def root(cls, order: int, k: int = 1) -> "Cyclotomic":
        vec = [0] * order
        vec[k % order] = 1
        return cls(order, vec)

    @classmethod
    def rational(cls, q, order: int = 1) -> "Cyclotomic":
        q = Fraction(q)
        vec = [0] * totient(order)
        vec[0] = q.numerator
        return cls(order, vec, q.denominator, _reduced=True)

    @classmethod
    def from_fractions(cls, coeffs, order: int) -> "Cyclotomic":
        """Build from rational coefficients on z^0, z^1, ... (any length)."""
        fr = [Fraction(c) for c in coeffs]
        den = 1
        for f in fr:
            den = den * f.denominator // math.gcd(den, f.denominator)
        return cls(order, [f.numerator * (den // f.denominator) for f in fr], den)

    @classmethod
    def coerce(cls, x, order: int = 1) -> "Cyclotomic":
        if isinstance(x, Cyclotomic):
            return x
        if isinstance(x, (int, Rational)):
            return cls.rational(x, order)
        raise TypeError(f"cannot coerce {type(x).__name__} to Cyclotomic")

    # structure
    @property
    def degree(self) -> int:
        return len(self.num)

    def coefficients(self) -> list[Fraction]:
        return [Fraction(c, self.den) for c in self.num]

    def is_zero(self) -> bool:
        return not any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("value is irrational")
        return Fraction(self.num[0], self.den)

    def lift(self, order: int) -> "Cyclotomic":
        if order == self.order:
            return self
        if order % self.order:
            raise ValueError(f"cannot lift order {self.order} to {order}")
        step = order // self.order
        vec = [0] * order
        for k, c in enumerate(self.num):
            vec[k * step] = c
        return Cyclotomic(order, vec, self.den)

    def _common(self, other):
        if not isinstance(other, Cyclotomic):
            if isinstance(other, (int, Rational)):
                other = Cyclotomic.rational(other, self.order)
            else:
                return None, None
        if other.order == self.order:
            return self, other
        n = self.order * other.order // math.gcd(self.order, other.order)
        return self.lift(n), other.lift(n)

    # arithmetic
    def __add__(self, other):
        a, b = self._common(other)
        if a is None:
            return NotImplemented
        den = a.den * b.den // math.gcd(a.den, b.den)
        fa, fb = den // a.den, den // b.den
        num = [x * fa + y * fb for x, y in zip(a.num, b.num)]
        return Cyclotomic(a.order, num, den, _reduced=True)

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.order, [-c for c in self.num], self.den, _reduced=True)

    def __pos__(self):
        return self

    def __sub__(self, other):
        a, b = self._common(other)
        if a is None:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        a, b = self._common(other)
        if a is None:
            return NotImplemented
        return b + (-a)

    def __mul__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, Cyclotomic):
            q = Fraction(other)
            return Cyclotomic(self.order, [c * q.numerator for c in self.num],
                              self.den * q.denominator, _reduced=True)
        a, b = self._common(other)
        if a is None:
            return NotImplemented
        n = a.order
        prod = [0] * n
        for i, x in enumerate(a.num):
            if x:
                for j, y in enumerate(b.num):
                    if y:
                        prod[(i + j) % n] += x * y
        return Cyclotomic(n, _reduce_full(prod, n), a.den * b.den, _reduced=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, Cyclotomic):
            q = Fraction(other)
            if q == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / q)
        if isinstance(other, Cyclotomic):
            if other.is_rational():
                return self / other.to_fraction()
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Rational)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = Cyclotomic.rational(1, self.order)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def galois(self, k: int) -> "Cyclotomic":
        """Apply z -> z^k (k coprime to the order)."""
        n = self.order
        vec = [0] * n
        for j, c in enumerate(self.num):
            vec[(j * k) % n] += c
        return Cyclotomic(n, vec, self.den)

    def conj(self) -> "Cyclotomic":
        return self.galois(-1)

    def norm(self) -> Fraction:
        """Field norm to Q; nonzero iff self is nonzero."""
        n = self.order
        out = Cyclotomic.rational(1, n)
        for k in range(1, n):
            if math.gcd(k, n) == 1:
                out = out * self.galois(k)
        return out.to_fraction()

    def inverse(self) -> "Cyclotomic":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        n = self.order
        rest = Cyclotomic.rational(1, n)
        for k in range(2, n):
            if math.gcd(k, n) == 1:
                rest = rest * self.galois(k)
        return rest / (self * rest).to_fraction()

    # comparisons
    def __eq__(self, other):
        a, b = self._common(other)
        if a is None:
            return NotImplemented
        return a.den == b.den and a.num == b.num

    def __hash__(self):
        tr = sum((w * c for w, c in zip(_trace_weights(self.order), self.num)), Fraction(0))
        return hash(tr / self.den)

    def is_real(self) -> bool:
        return self == self.conj()

    def trace(self) -> Fraction:
        """Normalized trace Tr(x)/[Q(z):Q]; invariant under lifting."""
        tr = sum((w * c for w, c in zip(_trace_weights(self.order), self.num)), Fraction(0))
        return tr / self.den

    # numerics
    @property
    def approx(self) -> complex:
        if self._approx is None:
            z = complex(np.dot(np.array(self.num, dtype=float), _roots(self.order))) if self.num else 0j
            self._approx = z / self.den
        return self._approx

    @property
    def real(self) -> float:
        return self.approx.real

    def __complex__(self):
        return self.approx

    def __float__(self):
        if not self.is_real():
            raise ValueError("value is not real")
        return self.approx.real

    def real_interval(self, prec: int):
        cos = _cos_intervals(self.order, prec)
        with _interval_precision(prec):
            acc = iv.mpf(0)
            for c, w in zip(self.num, cos):
                if c:
                    acc += c * w
            return acc / self.den

    # display and serialization
    def __repr__(self):
        return f"Cyclotomic({self.order}, {list(self.num)}, {self.den})"

    def __str__(self):
        if self.is_rational():
            return str(Fraction(self.num[0], self.den))
        z = f"z{self.order}"
        terms = []
        for k, c in enumerate(self.num):
            if not c:
                continue
            mono = "" if k == 0 else (z if k == 1 else f"{z}^{k}")
            if not mono:
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            terms.append(("-" if c < 0 else "+", body))
        s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sgn, body in terms[1:]:
            s += f" {sgn} {body}"
        if self.den != 1:
            s = f"({s})/{self.den}"
        return s

    def to_json(self) -> dict:
        z = self.approx
        approx = z.real if abs(z.imag) < 1e-12 else [z.real, z.imag]
        return {"order": self.order,
                "coeffs": [str(Fraction(c, self.den)) for c in self.num],
                "approx": approx}

    @classmethod
    def from_json(cls, data: dict) -> "Cyclotomic":
        return cls.from_fractions([Fraction(c) for c in data["coeffs"]], int(data["order"]))


class RealCycloValue(Cyclotomic):
    """A cyclotomic value known to be real, with a float shadow."""

    __slots__ = ("shadow",)

    def __init__(self, x: Cyclotomic):
        if not x.is_real():
            raise ValueError(f"{x} is not real")
        super().__init__(x.order, x.num, x.den, _reduced=True)
        self.shadow = self.approx.real

    def __float__(self):
        return self.shadow


def canonicalize(coeffs, order: int) -> Cyclotomic:
    """Canonical form of sum_k coeffs[k] * z^k with z a primitive order-th root."""
    return Cyclotomic.from_fractions(coeffs, order)


def abs_squared(x) -> RealCycloValue:
    x = Cyclotomic.coerce(x)
    return RealCycloValue(x * x.conj())


def real_sign(x) -> Sign:
    """Sign of a real cyclotomic (or rational) value, decided exactly."""
    if not isinstance(x, Cyclotomic):
        q = Fraction(x)
        return Sign(int(q > 0) - int(q < 0))
    if x.is_zero():
        return Sign.ZERO
    if x.is_rational():
        return Sign.POSITIVE if x.num[0] > 0 else Sign.NEGATIVE
    if not x.is_real():
        raise ValueError(f"{x} is not real")
    cap = precision_cap()
    prec = 64
    while prec <= cap:
        box = x.real_interval(prec)
        if box.a > 0:
            return Sign.POSITIVE
        if box.b < 0:
            return Sign.NEGATIVE
        prec *= 2
    raise PrecisionExhausted(f"sign of {x} undecided at {cap} bits")


def exact_value(x):
    """Normalize ints/Fractions/rational Cyclotomics to Fraction, else keep."""
    if isinstance(x, Cyclotomic):
        return x.to_fraction() if x.is_rational() else x
    return Fraction(x)


def to_float(x) -> float:
    if isinstance(x, Cyclotomic):
        return x.approx.real
    return float(x)


def format_exact(x) -> str:
    """Exact form plus 6-significant-digit float."""
    return f"{x} ~ {to_float(x):.6g}"


def sqrt5() -> Cyclotomic:
    """sqrt(5) = 1 + 2(z5 + z5^4) as an element of Q(zeta_5)."""
    z = Cyclotomic.root(5)
    return 1 + 2 * (z + z ** 4)


def golden_ratio() -> Cyclotomic:
    return (1 + sqrt5()) / 2
