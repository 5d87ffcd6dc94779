"""Exact p-adic scalar arithmetic with per-value guaranteed precision.

A nonzero value is stored in canonical form p^v * u where v is an exact
integer valuation and u is a unit (u % p != 0) known modulo p^prec.  The
norm |x|_p = p^(-v) is derived, never stored.  Addition accounts for digit
cancellation explicitly: a sum whose tracked digits all cancel becomes a
distinct "exhausted" state carrying a certified valuation lower bound,
never a silent zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class PadicError(Exception):
    """Base error for p-adic arithmetic."""


class MixedPrimeError(PadicError):
    """Operands built over different primes."""


class PrecisionExhaustedError(PadicError):
    """A quantity indistinguishable from zero at its tracked precision
    was used where a determined valuation is required."""

    def __init__(self, message: str, valuation_bound: int | None = None):
        super().__init__(message)
        self.valuation_bound = valuation_bound


class DomainError(PadicError):
    """Argument outside the convergence/validity ball of an operation."""


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3 * 10^24."""
    if n < 2:
        return False
    for b in _MR_BASES:
        if n == b:
            return True
        if n % b == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for b in _MR_BASES:
        x = pow(b, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def int_valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is undefined")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True, order=False)
class PadicNorm:
    """The exact value p^(-e), or zero.  Multiplication adds exponents."""

    p: int
    e: int | None  # None encodes the zero norm

    @classmethod
    def zero(cls, p: int) -> "PadicNorm":
        return cls(p, None)

    @classmethod
    def of_valuation(cls, p: int, v: int) -> "PadicNorm":
        return cls(p, v)

    @property
    def is_zero(self) -> bool:
        return self.e is None

    def as_fraction(self) -> Fraction:
        if self.e is None:
            return Fraction(0)
        if self.e >= 0:
            return Fraction(1, self.p**self.e)
        return Fraction(self.p ** (-self.e))

    def __mul__(self, other: "PadicNorm") -> "PadicNorm":
        if not isinstance(other, PadicNorm):
            return NotImplemented
        if self.p != other.p:
            raise MixedPrimeError("norms over different primes")
        if self.e is None or other.e is None:
            return PadicNorm.zero(self.p)
        return PadicNorm(self.p, self.e + other.e)

    def _key(self, other) -> tuple[Fraction, Fraction]:
        mine = self.as_fraction()
        if isinstance(other, PadicNorm):
            if self.p != other.p:
                raise MixedPrimeError("norms over different primes")
            return mine, other.as_fraction()
        if isinstance(other, (int, Fraction)):
            return mine, Fraction(other)
        raise TypeError(f"cannot compare PadicNorm with {type(other)!r}")

    def __lt__(self, other):
        a, b = self._key(other)
        return a < b

    def __le__(self, other):
        a, b = self._key(other)
        return a <= b

    def __gt__(self, other):
        a, b = self._key(other)
        return a > b

    def __ge__(self, other):
        a, b = self._key(other)
        return a >= b

    def __eq__(self, other):
        if isinstance(other, (PadicNorm, int, Fraction)):
            a, b = self._key(other)
            return a == b
        return NotImplemented

    def __hash__(self):
        return hash(self.as_fraction())

    def __str__(self) -> str:
        if self.e is None:
            return "0"
        if self.e == 0:
            return "1"
        return f"{self.p}^{-self.e}"

    __repr__ = __str__


@dataclass(frozen=True)
class PadicNumber:
    """Element of Q_p as (valuation, unit mod p^prec).

    States:
      * normal      -- v exact, 0 < unit < p^prec, unit % p != 0;
      * zero        -- the exact zero (``zero`` flag);
      * exhausted   -- indistinguishable from zero at tracked precision
                       (``exhausted`` flag); ``v`` then holds the certified
                       lower bound on the valuation, i.e. |x|_p <= p^(-v).
    """

    p: int
    v: int
    unit: int
    prec: int
    zero: bool = False
    exhausted: bool = False

    def __post_init__(self):
        if not is_prime(self.p):
            raise PadicError(f"{self.p} is not prime")
        if self.zero or self.exhausted:
            if self.unit != 0:
                raise PadicError("zero/exhausted values carry no unit")
            return
        if self.prec < 1:
            raise PadicError("precision must be >= 1")
        if not (0 < self.unit < self.p**self.prec) or self.unit % self.p == 0:
            raise PadicError("unit out of canonical range")

    # ---- constructors -------------------------------------------------

    @classmethod
    def from_rational(cls, num: int, den: int, p: int, prec: int = 32) -> "PadicNumber":
        """Canonical form of num/den: exact valuation, unit mod p^prec."""
        if den == 0:
            raise PadicError("zero denominator")
        if prec < 1:
            raise PadicError("precision must be >= 1")
        if not is_prime(p):
            raise PadicError(f"{p} is not prime")
        if num == 0:
            return cls.make_zero(p, prec)
        v = int_valuation(num, p) - int_valuation(den, p)
        nu = num // p ** int_valuation(num, p)
        du = den // p ** int_valuation(den, p)
        mod = p**prec
        unit = nu * pow(du, -1, mod) % mod
        return cls(p, v, unit, prec)

    @classmethod
    def from_int(cls, n: int, p: int, prec: int = 32) -> "PadicNumber":
        return cls.from_rational(n, 1, p, prec)

    @classmethod
    def make_zero(cls, p: int, prec: int = 32) -> "PadicNumber":
        return cls(p, 0, 0, prec, zero=True)

    @classmethod
    def one(cls, p: int, prec: int = 32) -> "PadicNumber":
        return cls(p, 0, 1, prec)

    @classmethod
    def make_exhausted(cls, p: int, valuation_bound: int) -> "PadicNumber":
        return cls(p, valuation_bound, 0, 0, exhausted=True)

    # ---- state queries -------------------------------------------------

    @property
    def is_zeroish(self) -> bool:
        """Exact zero or indistinguishable from it."""
        return self.zero or self.exhausted

    @property
    def valuation(self) -> int:
        if self.zero:
            raise PadicError("exact zero has no finite valuation")
        if self.exhausted:
            raise PrecisionExhaustedError(
                f"valuation undetermined, only |x|_p <= {self.p}^{-self.v} is certified",
                valuation_bound=self.v,
            )
        return self.v

    @property
    def abs_prec(self) -> int:
        """The value is known modulo p^abs_prec."""
        if self.zero:
            raise PadicError("exact zero is known to infinite precision")
        if self.exhausted:
            return self.v
        return self.v + self.prec

    def norm(self) -> PadicNorm:
        if self.zero:
            return PadicNorm.zero(self.p)
        return PadicNorm(self.p, self.valuation)

    def norm_upper_bound(self) -> PadicNorm:
        """Exact norm for determined values, certified bound otherwise."""
        if self.zero:
            return PadicNorm.zero(self.p)
        return PadicNorm(self.p, self.v)

    def digits(self, count: int) -> list[int]:
        """Canonical unit digits x_0..x_{count-1}; x_0 > 0 when nonzero."""
        if self.exhausted:
            raise PrecisionExhaustedError("digits undetermined", valuation_bound=self.v)
        if self.zero:
            return [0] * count
        if count > self.prec:
            raise PrecisionExhaustedError(
                f"only {self.prec} digits are guaranteed, {count} requested"
            )
        u, out = self.unit, []
        for _ in range(count):
            out.append(u % self.p)
            u //= self.p
        return out

    # ---- arithmetic ----------------------------------------------------

    def _check_prime(self, other: "PadicNumber"):
        if self.p != other.p:
            raise MixedPrimeError(f"mixed primes {self.p} and {other.p}")

    def __add__(self, other: "PadicNumber") -> "PadicNumber":
        if not isinstance(other, PadicNumber):
            return NotImplemented
        self._check_prime(other)
        p = self.p
        if self.zero:
            return other
        if other.zero:
            return self
        if self.exhausted or other.exhausted:
            bound = min(self.abs_prec, other.abs_prec)
            known = self if other.exhausted else other
            if known.exhausted or known.v >= bound:
                return PadicNumber.make_exhausted(p, bound)
            rel = bound - known.v
            return PadicNumber(p, known.v, known.unit % p**rel, rel)
        m = min(self.v, other.v)
        bound = min(self.abs_prec, other.abs_prec)
        rel = bound - m
        s = (self.unit * p ** (self.v - m) + other.unit * p ** (other.v - m)) % p**rel
        if s == 0:
            return PadicNumber.make_exhausted(p, bound)
        t = int_valuation(s, p)
        return PadicNumber(p, m + t, s // p**t, rel - t)

    def __neg__(self) -> "PadicNumber":
        if self.is_zeroish:
            return self
        mod = self.p**self.prec
        return PadicNumber(self.p, self.v, (mod - self.unit) % mod, self.prec)

    def __sub__(self, other: "PadicNumber") -> "PadicNumber":
        if not isinstance(other, PadicNumber):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: "PadicNumber") -> "PadicNumber":
        if not isinstance(other, PadicNumber):
            return NotImplemented
        self._check_prime(other)
        if self.zero or other.zero:
            return PadicNumber.make_zero(self.p, max(self.prec, other.prec, 1))
        if self.exhausted or other.exhausted:
            return PadicNumber.make_exhausted(self.p, self.v + other.v)
        prec = min(self.prec, other.prec)
        unit = self.unit * other.unit % self.p**prec
        return PadicNumber(self.p, self.v + other.v, unit, prec)

    def __truediv__(self, other: "PadicNumber") -> "PadicNumber":
        if not isinstance(other, PadicNumber):
            return NotImplemented
        self._check_prime(other)
        if other.zero:
            raise PadicError("division by exact zero")
        if other.exhausted:
            raise PrecisionExhaustedError(
                "division by a value indistinguishable from zero",
                valuation_bound=other.v,
            )
        if self.zero:
            return self
        if self.exhausted:
            return PadicNumber.make_exhausted(self.p, self.v - other.v)
        prec = min(self.prec, other.prec)
        mod = self.p**prec
        unit = self.unit * pow(other.unit, -1, mod) % mod
        return PadicNumber(self.p, self.v - other.v, unit, prec)

    def __pow__(self, n: int) -> "PadicNumber":
        if not isinstance(n, int):
            return NotImplemented
        if n == 0:
            return PadicNumber.one(self.p, max(self.prec, 1))
        if self.zero:
            if n < 0:
                raise PadicError("negative power of exact zero")
            return self
        if self.exhausted:
            if n < 0:
                raise PrecisionExhaustedError(
                    "negative power of an exhausted value", valuation_bound=self.v
                )
            return PadicNumber.make_exhausted(self.p, self.v * n)
        if n < 0:
            return PadicNumber.one(self.p, self.prec) / self**(-n)
        mod = self.p**self.prec
        return PadicNumber(self.p, self.v * n, pow(self.unit, n, mod), self.prec)

    def with_abs_prec(self, bound: int) -> "PadicNumber":
        """Forget digits beyond p^bound; may demote to exhausted."""
        if self.zero:
            return self
        if self.exhausted:
            return PadicNumber.make_exhausted(self.p, min(self.v, bound))
        rel = bound - self.v
        if rel <= 0:
            return PadicNumber.make_exhausted(self.p, bound)
        if rel >= self.prec:
            return self
        return PadicNumber(self.p, self.v, self.unit % self.p**rel, rel)

    # ---- rendering -----------------------------------------------------

    def digit_str(self, count: int | None = None) -> str:
        """Compact low-to-high digit rendering, e.g. '2 1 0 0'."""
        if self.zero:
            return "0"
        if self.exhausted:
            return f"O({self.p}^{self.v})"
        count = self.prec if count is None else count
        return " ".join(str(d) for d in self.digits(count))

    def __str__(self) -> str:
        if self.zero:
            return "0 (exact)"
        if self.exhausted:
            return f"O({self.p}^{self.v})"
        terms = []
        for i, d in enumerate(self.digits(self.prec)):
            if d == 0 and i > 0:
                continue
            if i == 0:
                terms.append(str(d))
            elif i == 1:
                terms.append(f"{d}*{self.p}")
            else:
                terms.append(f"{d}*{self.p}^{i}")
        body = " + ".join(terms)
        return f"{self.p}^{self.v} * ({body}) [prec {self.prec}]"

    def to_json_dict(self) -> dict:
        if self.zero:
            return {"p": self.p, "v": None, "digits": [], "precision": self.prec, "zero": True}
        if self.exhausted:
            return {
                "p": self.p,
                "v": None,
                "digits": [],
                "precision": 0,
                "zero": False,
                "exhausted": True,
                "valuation_bound": self.v,
            }
        return {
            "p": self.p,
            "v": self.v,
            "digits": self.digits(self.prec),
            "precision": self.prec,
            "zero": False,
        }


def equal_to_precision(x: PadicNumber, y: PadicNumber, m: int) -> bool:
    """True iff |x - y|_p <= p^(-(v_min + m)), v_min = min known valuation.

    The certificate is one-sided: True is only returned when the bound is
    guaranteed at tracked precision.
    """
    if x.p != y.p:
        raise MixedPrimeError("mixed primes")
    vals = [t.v for t in (x, y) if not t.zero]
    if not vals:
        return True
    v_min = min(vals)
    d = x - y
    if d.zero:
        return True
    return d.v >= v_min + m  # for exhausted d, v is the certified bound


def parse_rational(text: str) -> tuple[int, int]:
    """Parse 'a' or 'a/b' into an integer pair."""
    text = text.strip()
    if "/" in text:
        a, b = text.split("/", 1)
        num, den = int(a), int(b)
    else:
        num, den = int(text), 1
    if den == 0:
        raise PadicError("zero denominator")
    return num, den
