"""p-adic exponential, logarithm and square roots with exact domain guards.

The series are summed with integer-only inner loops: term valuations are
exact, unit digits are carried modulo a power of p, and the truncation
index comes from a provable tail bound, not from a term-smallness test.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

from .padic import (
    DomainError,
    PadicError,
    PadicNumber,
    PrecisionExhaustedError,
    int_valuation,
)


def exp_domain_min_valuation(p: int) -> int:
    # |x|_p < p^(-1/(p-1)) collapses to an integer valuation threshold
    return 2 if p == 2 else 1


@dataclass(frozen=True)
class DomainBall:
    """Convergence ball membership as a pure valuation comparison."""

    kind: Literal["exp", "log-unit"]
    p: int

    def min_valuation(self) -> int:
        if self.kind == "exp":
            return exp_domain_min_valuation(self.p)
        return 1  # B(1, 1): |x - 1|_p < 1

    def contains(self, x: PadicNumber) -> bool:
        t = x if self.kind == "exp" else x - PadicNumber.one(x.p, max(x.prec, 1))
        if t.zero:
            return True
        return t.v >= self.min_valuation()  # exhausted: v is the certified bound


def _exp_truncation_index(w: int, vx: int, p: int) -> int:
    # all terms n >= T have valuation n*vx - v_p(n!) >= n*vx - (n-1)/(p-1) >= w
    num = w * (p - 1) - 1
    den = vx * (p - 1) - 1
    return max(1, -(-num // den))


@lru_cache(maxsize=65536)
def _small_inverse(m: int, p: int, prec: int) -> int:
    # series denominators repeat heavily across calls
    return pow(m, -1, p**prec)


def exp_m1(x: PadicNumber) -> PadicNumber:
    """exp_p(x) - 1 summed directly (no cancelling subtraction), so an
    exact zero argument yields an exact zero and |result|_p = |x|_p holds
    on the nose."""
    p = x.p
    min_v = exp_domain_min_valuation(p)
    if x.zero:
        return PadicNumber.make_zero(p, x.prec)
    if x.exhausted:
        if x.v < min_v:
            raise DomainError("argument ball membership cannot be certified")
        return PadicNumber.make_exhausted(p, x.v)
    if x.v < min_v:
        raise DomainError(
            f"|x|_{p} = {p}^{-x.v} is outside the exponential ball (need v >= {min_v})"
        )
    vx, ux, nx = x.v, x.unit, x.prec
    w = vx + nx
    mod_full = p**w
    mod_unit = p**nx
    acc = 0
    tv, tu = vx, ux  # n = 1 term
    top = _exp_truncation_index(w, vx, p)
    for n in range(1, top + 1):
        if tv < w:
            acc = (acc + tu * p**tv) % mod_full
        m = n + 1
        mv = int_valuation(m, p)
        tv += vx - mv
        tu = tu * ux % mod_unit
        tu = tu * _small_inverse(m // p**mv, p, nx) % mod_unit
    assert int_valuation(acc, p) == vx, "leading term of exp - 1 must dominate"
    return PadicNumber(p, vx, acc // p**vx % p**nx, nx)


def exp_p(x: PadicNumber) -> PadicNumber:
    """Truncated series sum x^n/n!; requires x in the exponential ball.

    The result is a unit with |exp(x) - 1|_p = |x|_p; both facts hold by
    construction from the directly-summed tail.
    """
    if x.zero:
        return PadicNumber.one(x.p, x.prec)
    m = exp_m1(x)
    if m.exhausted:
        return PadicNumber(x.p, 0, 1, m.v)
    return PadicNumber.one(x.p, m.v + m.prec) + m


def _log_truncation_index(w: int, vt: int, p: int) -> int:
    # first T with T*vt - log_p(T) >= w; increasing beyond it
    top = 1
    while True:
        e = top * vt - w
        if e >= 0 and p**min(e, 64) > top:
            return top
        top += 1


def log1p(t: PadicNumber) -> PadicNumber:
    """Series log(1 + t) taking the deviation t = y - 1 directly, with
    |t|_p < p^(-1/(p-1)).

    The guard is deliberately the round-trip ball (where exp_p inverts it),
    not the full convergence disc of the logarithm.
    """
    p = t.p
    min_v = exp_domain_min_valuation(p)
    if t.zero:
        return PadicNumber.make_zero(p, t.prec)
    if t.exhausted:
        if t.v < min_v:
            raise DomainError("argument ball membership cannot be certified")
        return PadicNumber.make_exhausted(p, t.v)
    if t.v < min_v:
        raise DomainError(
            f"|y-1|_{p} = {p}^{-t.v} is outside the round-trip ball (need v >= {min_v})"
        )
    vt, ut, nt = t.v, t.unit, t.prec
    w = vt + nt
    mod_full = p**w
    mod_unit = p**nt
    acc = 0
    pw_v, pw_u = vt, ut  # t^n state
    top = _log_truncation_index(w, vt, p)
    for n in range(1, top + 1):
        nv = int_valuation(n, p)
        term_v = pw_v - nv
        if term_v < w:
            tu = pw_u * _small_inverse(n // p**nv, p, nt) % mod_unit
            if n % 2 == 0:
                tu = mod_unit - tu
            acc = (acc + tu * p**term_v) % mod_full
        pw_v += vt
        pw_u = pw_u * ut % mod_unit
    val = int_valuation(acc, p)
    assert val == vt, "leading term of the logarithm must dominate"
    return PadicNumber(p, val, acc // p**val % p ** (w - val), w - val)


def log_p(y: PadicNumber) -> PadicNumber:
    """Series log(y) on the round-trip ball |y - 1|_p < p^(-1/(p-1))."""
    return log1p(y - PadicNumber.one(y.p, max(y.prec, 1)))


def is_quadratic_residue(a0: int, p: int) -> bool:
    """Euler's criterion for x^2 = a0 (mod p), 1 <= a0 <= p-1."""
    if a0 % p == 0:
        raise PadicError("a0 divisible by p is rejected")
    if not 1 <= a0 <= p - 1:
        raise PadicError("a0 must be a reduced nonzero residue")
    if p == 2:
        return True
    return pow(a0, (p - 1) // 2, p) == 1


@dataclass(frozen=True)
class SqrtResult:
    """Both square roots when they exist, else the failed condition."""

    roots: tuple[PadicNumber, PadicNumber] | None
    failure: str | None
    conditions: dict

    @property
    def exists(self) -> bool:
        return self.roots is not None


def _digit_lex_key(unit: int, p: int, count: int) -> tuple[int, ...]:
    out = []
    for _ in range(count):
        out.append(unit % p)
        unit //= p
    return tuple(out)


def _sqrt_unit_odd(u: int, p: int, prec: int) -> int:
    """Hensel: brute root mod p, then Newton doubling.  p odd, u a QR unit."""
    r = next(x for x in range(1, p) if x * x % p == u % p)
    k = 1
    inv2 = None
    while k < prec:
        k = min(2 * k, prec)
        mod = p**k
        inv2 = pow(2, -1, mod)
        r = (r + u * pow(r, -1, mod)) * inv2 % mod
    assert r * r % p**prec == u % p**prec
    return r


def _sqrt_unit_two(u: int, prec: int) -> int:
    """Digit-by-digit lift of x^2 = u (mod 2^k), u = 1 (mod 8)."""
    r = 1
    for k in range(3, prec):
        if (r * r - u) % 2 ** (k + 1):
            r += 2 ** (k - 1)
    assert (r * r - u) % 2**prec == 0
    return r


def sqrt(a: PadicNumber) -> SqrtResult:
    """Square roots of a nonzero value, gated by the two classical
    conditions: even valuation, and a residue unit digit (p odd) or a
    unit congruent to 1 mod 8 (p = 2).  Non-existence is an outcome, not
    an error."""
    p = a.p
    if a.zero:
        raise PadicError("sqrt of exact zero is excluded (trivially ±0)")
    if a.exhausted:
        raise PrecisionExhaustedError(
            "square-root conditions undecidable at exhausted precision",
            valuation_bound=a.v,
        )
    conditions: dict = {"even_valuation": a.v % 2 == 0}
    if a.v % 2:
        conditions["unit_condition"] = None
        return SqrtResult(None, "odd-valuation", conditions)
    if p == 2:
        if a.prec < 3:
            raise PrecisionExhaustedError("need at least 3 digits to test the unit mod 8")
        ok = a.unit % 8 == 1
        conditions["unit_condition"] = ok
        if not ok:
            return SqrtResult(None, "unit-not-1-mod-8", conditions)
        prec_r = a.prec - 1  # one binary digit is spent dividing du by 2r
        r = _sqrt_unit_two(a.unit, a.prec) % 2**prec_r
    else:
        a0 = a.unit % p
        ok = is_quadratic_residue(a0, p)
        conditions["unit_condition"] = ok
        if not ok:
            return SqrtResult(None, "nonresidue-unit", conditions)
        prec_r = a.prec
        r = _sqrt_unit_odd(a.unit, p, prec_r)
    neg = p**prec_r - r
    first, second = sorted((r, neg), key=lambda t: _digit_lex_key(t, p, prec_r))
    half_v = a.v // 2
    return SqrtResult(
        (PadicNumber(p, half_v, first, prec_r), PadicNumber(p, half_v, second, prec_r)),
        None,
        conditions,
    )


@dataclass(frozen=True)
class QuadraticSolution:
    """Roots of z^2 + b z + c, or the condition that blocked them."""

    roots: tuple[PadicNumber, PadicNumber] | None
    failure: str | None
    discriminant: PadicNumber
    sqrt_outcome: SqrtResult | None
    double_root: bool = False

    @property
    def solvable(self) -> bool:
        return self.roots is not None


def solve_quadratic_monic(b: PadicNumber, c: PadicNumber) -> QuadraticSolution:
    """Solve z^2 + b z + c = 0 over Q_p.

    Existence is decided by the square root of b^2 - 4c.  For p = 2 the
    root extraction is the digit-by-digit lift of w^2 = b^2 - 4c (the
    completed square w = 2z + b); recovering z = (w - b)/2 is an exact
    valuation shift, so no precision is lost to division inside the lift.
    """
    p = b.p
    prec = max(b.prec if not b.is_zeroish else 1, c.prec if not c.is_zeroish else 1)
    four = PadicNumber.from_int(4, p, prec + 4)
    two = PadicNumber.from_int(2, p, prec + 4)
    disc = b * b - four * c
    if disc.is_zeroish:
        # double root at the precision the vanishing discriminant certifies
        bound = disc.v if disc.exhausted else None
        z = -(b / two)
        if bound is not None:
            cap = -(-bound // 2) - (1 if p == 2 else 0)
            z = z.with_abs_prec(cap)
        return QuadraticSolution((z, z), None, disc, None, double_root=True)
    outcome = sqrt(disc)
    if not outcome.exists:
        return QuadraticSolution(None, outcome.failure, disc, outcome)
    w1, w2 = outcome.roots
    z1 = (w1 - b) / two
    z2 = (w2 - b) / two
    return QuadraticSolution((z1, z2), None, disc, outcome)
