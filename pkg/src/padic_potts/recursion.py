"""Boundary-field recursion for the p-adic Potts model on a Cayley tree.

The recursion acts on vectors h in Q_p^(q-1) through per-spin Boltzmann
ratios

    K_i(h) = ((t-1) e^{h_i} + sum_j e^{h_j} + 1) / (sum_j e^{h_j} + t),

with t = exp_p(J): a parent field is the componentwise log of the product
of K_i over its children.  Translation-invariant fixed points reduce to
the scalar equation z = (A/B)^k with A = t z + q - 1, B = z + t + q - 2.

Two coordinate systems coexist.  The solver works in the ratio coordinates
above; the coordinates that enter the finite-volume measure's boundary sum
differ by an invertible linear map (for q != 2), exposed here as
``boundary_field_from_recursion`` and its inverse.  The classical "primed"
change of variables h'_i = sum_{j != i} h_j is provided alongside.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .analytic import (
    DomainBall,
    QuadraticSolution,
    exp_domain_min_valuation,
    exp_m1,
    exp_p,
    is_quadratic_residue,
    log1p,
    log_p,
    solve_quadratic_monic,
    sqrt,
)
from .padic import (
    DomainError,
    PadicError,
    PadicNorm,
    PadicNumber,
    PrecisionExhaustedError,
    int_valuation,
)


class MixedParamsError(PadicError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Model point (p, q, k, J); theta = exp_p(J) is derived lazily."""

    p: int
    q: int
    k: int
    J: PadicNumber

    def __post_init__(self):
        if self.q < 2:
            raise PadicError("need at least two spin values")
        if self.k < 1:
            raise PadicError("tree order must be >= 1")
        if self.J.p != self.p:
            raise MixedParamsError(f"J lives over {self.J.p}, params over {self.p}")
        if self.J.is_zeroish:
            raise DomainError("coupling J must be nonzero")
        if not DomainBall("exp", self.p).contains(self.J):
            need = exp_domain_min_valuation(self.p)
            raise DomainError(
                f"|J|_{self.p} must be < {self.p}^(-1/(p-1)), i.e. at most "
                f"{self.p}^-{need}; got valuation {self.J.v}, need >= {need}"
            )

    @cached_property
    def theta(self) -> PadicNumber:
        return exp_p(self.J)

    @property
    def q_in_pn(self) -> bool:
        return self.q % self.p == 0

    def const(self, n: int) -> PadicNumber:
        """Exact integer constant at comfortable working precision."""
        return PadicNumber.from_int(n, self.p, self.theta.prec + 8)

    @property
    def one(self) -> PadicNumber:
        return self.const(1)


@dataclass(frozen=True)
class FieldVector:
    """Element of Q_p^(q-1) under the max norm, constrained to the
    exponential ball componentwise."""

    p: int
    components: tuple[PadicNumber, ...]

    def __post_init__(self):
        if not self.components:
            raise PadicError("a field needs at least one component")
        min_v = exp_domain_min_valuation(self.p)
        for c in self.components:
            if c.p != self.p:
                raise MixedParamsError("component prime mismatch")
            if not c.zero and c.v < min_v:
                raise DomainError(
                    f"component valuation {c.v} leaves the exponential ball"
                )

    @classmethod
    def zero(cls, p: int, q: int, prec: int = 32) -> "FieldVector":
        return cls(p, tuple(PadicNumber.make_zero(p, prec) for _ in range(q - 1)))

    @property
    def q(self) -> int:
        return len(self.components) + 1

    @property
    def is_zero(self) -> bool:
        return all(c.zero for c in self.components)

    @property
    def is_negligible(self) -> bool:
        """Exactly zero or indistinguishable from it at tracked precision."""
        return all(c.is_zeroish for c in self.components)

    def norm_upper_bound(self) -> PadicNorm:
        best = PadicNorm.zero(self.p)
        for c in self.components:
            n = c.norm_upper_bound()
            if n > best:
                best = n
        return best

    def norm(self) -> PadicNorm:
        """Exact max norm; raises if an exhausted component could dominate."""
        exact = PadicNorm.zero(self.p)
        for c in self.components:
            if not c.is_zeroish:
                n = c.norm()
                if n > exact:
                    exact = n
        for c in self.components:
            if c.exhausted and c.norm_upper_bound() > exact:
                raise PrecisionExhaustedError(
                    "max norm undetermined: exhausted component may dominate",
                    valuation_bound=c.v,
                )
        return exact

    def __sub__(self, other: "FieldVector") -> "FieldVector":
        if self.p != other.p or len(self.components) != len(other.components):
            raise MixedParamsError("field shape mismatch")
        return FieldVector(
            self.p, tuple(a - b for a, b in zip(self.components, other.components))
        )

    def spin_action(self, i: int) -> PadicNumber:
        """Pairing with spin label i: h_i for i <= q-1, sum of all
        components for i = q."""
        if 1 <= i <= self.q - 1:
            return self.components[i - 1]
        if i == self.q:
            total = self.components[0]
            for c in self.components[1:]:
                total = total + c
            return total
        raise PadicError(f"spin label {i} out of range 1..{self.q}")


# ---- coordinate transforms ----------------------------------------------


def primed_coordinates(h: FieldVector) -> FieldVector:
    """h'_i = sum_{j != i} h_j.  Inverse exists for q != 2."""
    total = h.spin_action(h.q)
    return FieldVector(h.p, tuple(total - c for c in h.components))


def from_primed_coordinates(hp: FieldVector) -> FieldVector:
    """h_i = S'/(q-2) - h'_i where S' is the component sum of h'."""
    q = hp.q
    if q == 2:
        raise PadicError("the primed map is not invertible for q = 2")
    total = hp.spin_action(q)
    scale = total / PadicNumber.from_int(q - 2, hp.p, max(c.prec for c in hp.components) + 8)
    return FieldVector(hp.p, tuple(scale - c for c in hp.components))


def boundary_field_from_recursion(h: FieldVector) -> FieldVector:
    """Map a recursion-coordinate field to the coordinates that enter the
    measure's boundary sum: c = h - (S_h/(q-2)) * (1,...,1).

    For q = 2 the measure does not depend on the field (both spin labels
    pair to the same scalar), so the field is passed through unchanged.
    When p divides q - 2 the shift can leave the exponential ball, in
    which case no measure exists for this field and a DomainError
    propagates from the FieldVector guard.
    """
    q = h.q
    if q == 2:
        return h
    total = h.spin_action(q)
    shift = total / PadicNumber.from_int(q - 2, h.p, max(c.prec for c in h.components) + 8)
    return FieldVector(h.p, tuple(c - shift for c in h.components))


def recursion_field_from_boundary(c: FieldVector) -> FieldVector:
    """Inverse of ``boundary_field_from_recursion``: h = c - S_c * (1,...,1)."""
    if c.q == 2:
        return c
    total = c.spin_action(c.q)
    return FieldVector(c.p, tuple(comp - total for comp in c.components))


# ---- the recursion -------------------------------------------------------


def _ratio_deviations(h: FieldVector, params: ModelParams):
    """All q-1 deviations K_i - 1 = (t-1)(e^{h_i} - 1)/den and the shared
    denominator den = sum_j e^{h_j} + t = q + (t-1) + sum_j (e^{h_j} - 1).

    Built from directly-summed exp tails, so zero components contribute
    exact zeros instead of cancellation residue.
    """
    tails = [exp_m1(c) for c in h.components]
    tm1 = params.theta - params.one
    den = params.const(params.q) + tm1
    for m in tails:
        den = den + m
    if den.is_zeroish:
        raise PrecisionExhaustedError(
            "ratio denominator indistinguishable from zero",
            valuation_bound=den.v if den.exhausted else None,
        )
    return [tm1 * m / den for m in tails], den


def boltzmann_ratio(h: FieldVector, i: int, params: ModelParams) -> PadicNumber:
    """((t-1) e^{h_i} + sum_j e^{h_j} + 1) / (sum_j e^{h_j} + t).

    The denominator norm is computed, never presumed; an exhausted
    denominator raises rather than guessing a valuation.
    """
    if not 1 <= i <= params.q - 1:
        raise PadicError(f"spin index {i} out of range 1..{params.q - 1}")
    devs, _ = _ratio_deviations(h, params)
    d = devs[i - 1]
    if d.zero:
        return params.one
    return PadicNumber.one(params.p, max(d.prec + d.v, 1)) + d


def recursion_step(children: Sequence[FieldVector], params: ModelParams) -> FieldVector:
    """Parent field: componentwise log of the product over children of the
    Boltzmann ratios, i.e. exp(parent_i) = prod_y K_i(h_y).

    Whenever each factor lies in the logarithm ball this equals the sum of
    per-child logarithms; taking the log after the full product also covers
    the q in pN fixed points, where a single ratio sits at distance 1 from
    1 but an even product returns to the ball.  Accepts k children
    (interior vertex) or k+1 (root).
    """
    if len(children) not in (params.k, params.k + 1):
        raise PadicError(
            f"expected {params.k} (or {params.k + 1}) children, got {len(children)}"
        )
    # track prod(1 + d_y) - 1 without ever subtracting 1 from a computed unit
    prods = [PadicNumber.make_zero(params.p, params.theta.prec) for _ in range(params.q - 1)]
    dev_cache: dict[int, list[PadicNumber]] = {}
    for child in children:
        devs = dev_cache.get(id(child))
        if devs is None:
            devs, _ = _ratio_deviations(child, params)
            dev_cache[id(child)] = devs
        for i, d in enumerate(devs):
            prods[i] = prods[i] + prods[i] * d + d
    return FieldVector(params.p, tuple(log1p(d) for d in prods))


@dataclass(frozen=True)
class TIReduction:
    """Scalar data of the translation-invariant reduction at a point z."""

    z: PadicNumber
    A: PadicNumber  # theta z + q - 1
    B: PadicNumber  # z + theta + q - 2
    discriminant: PadicNumber  # (theta-1)^2 + 4(1-q)


def ti_reduction(z: PadicNumber, params: ModelParams) -> TIReduction:
    theta = params.theta
    tm1 = theta - params.one
    a = theta * z + params.const(params.q - 1)
    b = z + theta + params.const(params.q - 2)
    disc = tm1 * tm1 + params.const(4 * (1 - params.q))
    return TIReduction(z, a, b, disc)


def ti_residual(z: PadicNumber, params: ModelParams) -> PadicNumber:
    """z - (A/B)^k; its norm is the fixed-point certificate."""
    if z.is_zeroish:
        raise PadicError("z must be a determined nonzero value")
    red = ti_reduction(z, params)
    if red.B.is_zeroish:
        raise PrecisionExhaustedError(
            "B indistinguishable from zero", valuation_bound=red.B.v if red.B.exhausted else None
        )
    return z - (red.A / red.B) ** params.k


def is_admissible(z: PadicNumber, params: ModelParams) -> bool:
    """|z - 1|_p < p^(-1/(p-1)), certified at tracked precision."""
    d = z - params.one
    if d.zero:
        return True
    return d.v >= exp_domain_min_valuation(params.p)


def ti_quadratic_coefficients(params: ModelParams) -> tuple[PadicNumber, PadicNumber]:
    """Monic coefficients of the k = 2 reduction:
    z^2 + (2t - t^2 + 2q - 3) z + (q-1)^2."""
    theta = params.theta
    b = params.const(2) * theta - theta * theta + params.const(2 * params.q - 3)
    c = params.const((params.q - 1) ** 2)
    return b, c


@dataclass(frozen=True)
class TIRoot:
    z: PadicNumber
    admissible: bool
    residual_bound: PadicNorm


@dataclass(frozen=True)
class TISolveResult:
    admissible: tuple[TIRoot, ...]
    inadmissible: tuple[TIRoot, ...]
    failure: str | None
    quadratic: QuadraticSolution
    double_root: bool

    @property
    def has_two_distinct_admissible(self) -> bool:
        return len(self.admissible) >= 2 and not self.double_root


def solve_ti_k2(params: ModelParams) -> TISolveResult:
    """Roots of the k = 2 translation-invariant equation with
    admissibility and residual certificates."""
    if params.k != 2:
        raise PadicError("closed-form solving is wired for k = 2 only")
    b, c = ti_quadratic_coefficients(params)
    quad = solve_quadratic_monic(b, c)
    if quad.roots is None:
        return TISolveResult((), (), quad.failure, quad, False)
    roots = quad.roots[:1] if quad.double_root else quad.roots
    good, bad = [], []
    for z in roots:
        res = ti_residual(z, params)
        entry = TIRoot(z, is_admissible(z, params), res.norm_upper_bound())
        (good if entry.admissible else bad).append(entry)
    return TISolveResult(tuple(good), tuple(bad), None, quad, quad.double_root)


def solve_ti_k1(params: ModelParams) -> TIRoot:
    """k = 1 degenerates to B = theta - 1, i.e. z = 1 - q, solved exactly."""
    z = params.const(1 - params.q)
    red = ti_reduction(z, params)
    res = z - red.A / red.B
    return TIRoot(z, is_admissible(z, params), res.norm_upper_bound())


def ti_root_search_mod(params: ModelParams, m: int) -> list[int]:
    """Exhaustive admissible solutions of z B^k = A^k modulo p^m.

    For k >= 3 no closed form is attempted: this scans the residues with
    |z - 1| in the admissible ball and reports every solution mod p^m,
    z = 1 included.  Desk-scale only (m <= 8).
    """
    if not 1 <= m <= 8:
        raise PadicError("modulus exponent must be between 1 and 8")
    p = params.p
    if params.theta.prec < m:
        raise PrecisionExhaustedError("theta carries fewer digits than the scan modulus")
    mod = p**m
    t = params.theta.unit % mod
    min_v = exp_domain_min_valuation(p)
    qm1 = (params.q - 1) % mod
    qm2 = (params.q - 2) % mod
    out = []
    for step in range(p ** (m - min_v)):
        z = (1 + p**min_v * step) % mod
        a = (t * z + qm1) % mod
        b = (z + t + qm2) % mod
        if (z * pow(b, params.k, mod) - pow(a, params.k, mod)) % mod == 0:
            out.append(z)
    return out


# ---- norm case analysis --------------------------------------------------

CASE_UNSOLVABLE_HALF = 1  # p = 2, q = 2 mod 4
CASE_UNSOLVABLE_UNIT = 2  # |A| = |B| = 1
CASE_POSSIBLY_SOLVABLE = 3


@dataclass(frozen=True)
class NormReport:
    a_norm_class: str
    b_norm_class: str
    case: int
    solvable_class: str
    clash: str | None
    samples: tuple[tuple[str, str, str], ...]  # (z, |A|, |B|) rendered


def _norm_class_for(params: ModelParams) -> tuple[str, int, str | None]:
    p, q, k = params.p, params.q, params.k
    if p >= 3:
        if q % p == 0:
            return f"<=1/{p}", CASE_POSSIBLY_SOLVABLE, None
        return "=1", CASE_UNSOLVABLE_UNIT, None
    if q % 2 == 1:
        return "=1", CASE_UNSOLVABLE_UNIT, None
    if q % 4 == 2:
        clash = (
            f"|B|^k = 2^-{k} exceeds |t-1| * |A^(k-1)+...+B^(k-1)| <= 2^-{k + 1}"
        )
        return "=1/2", CASE_UNSOLVABLE_HALF, clash
    return "<=1/4", CASE_POSSIBLY_SOLVABLE, None


def _sample_admissible_points(params: ModelParams) -> list[PadicNumber]:
    p = params.p
    prec = params.theta.prec
    min_v = exp_domain_min_valuation(p)
    step = p**min_v
    return [
        PadicNumber.from_int(1 + step, p, prec),
        PadicNumber.from_int(1 + step + step * p, p, prec),
        PadicNumber.from_int(1 - step, p, prec),
    ]


def _norm_matches(norm: PadicNorm, cls: str, p: int) -> bool:
    if cls == "=1":
        return norm == 1
    if cls == "=1/2":
        return norm == Fraction(1, 2)
    if cls == f"<=1/{p}":
        return norm <= Fraction(1, p)
    if cls == "<=1/4":
        return norm <= Fraction(1, 4)
    raise PadicError(f"unknown norm class {cls}")


def norm_case_analysis(params: ModelParams) -> NormReport:
    """Classify |A|_p and |B|_p over admissible z and the resulting
    solvability of the reduced equation; the classes are cross-checked
    against direct norm computation at sampled points."""
    cls, case, clash = _norm_class_for(params)
    samples = []
    for z in _sample_admissible_points(params):
        red = ti_reduction(z, params)
        an, bn = red.A.norm_upper_bound(), red.B.norm_upper_bound()
        if not (_norm_matches(an, cls, params.p) and _norm_matches(bn, cls, params.p)):
            raise PadicError(
                f"norm table violated at z={z}: |A|={an}, |B|={bn}, class {cls}"
            )
        samples.append((str(z), str(an), str(bn)))
    solvable = "possibly-solvable" if case == CASE_POSSIBLY_SOLVABLE else "unsolvable"
    return NormReport(cls, cls, case, solvable, clash, tuple(samples))


# ---- discriminant analysis ------------------------------------------------


@dataclass(frozen=True)
class DiscriminantReport:
    discriminant: PadicNumber
    valuation: int
    leading_digits: tuple[int, int, int]
    even_valuation: bool
    unit_condition: bool
    sqrt_exists: bool
    failed_condition: str | None
    rule_prediction: bool | None
    rule_agrees: bool | None
    notes: tuple[str, ...]


def discriminant_analysis(params: ModelParams) -> DiscriminantReport:
    """Digit-level existence analysis of sqrt((t-1)^2 + 4(1-q)) for the
    possibly-solvable divisibility class.

    For p = 2 the closed-form shortcut in terms of m (q = 2^(2+m) s) and
    gamma = v(t-1) is evaluated as a cross-check; a disagreement with the
    digit computation is reported, never resolved silently.
    """
    p, q = params.p, params.q
    if p >= 3 and q % p != 0:
        raise PadicError("outside the solvable divisibility class; see norm_case_analysis")
    if p == 2 and q % 4 != 0:
        raise PadicError("outside the solvable divisibility class; see norm_case_analysis")
    red = ti_reduction(params.one, params)
    disc = red.discriminant
    gamma_d = disc.valuation
    a0, a1, a2 = disc.digits(3)
    even = gamma_d % 2 == 0
    notes: list[str] = []
    rule_prediction: bool | None = None
    rule_agrees: bool | None = None
    if p == 2:
        unit_ok = a1 == 0 and a2 == 0
        m = int_valuation(q, 2) - 2
        gamma_j = (params.theta - params.one).valuation
        rule_prediction = (m == 0 and gamma_j == 2) or (m > 1 and gamma_j > 2)
        sqrt_ok = even and unit_ok
        rule_agrees = rule_prediction == sqrt_ok
        if not rule_agrees:
            notes.append(
                f"m/gamma shortcut predicts {rule_prediction} but digits give "
                f"{sqrt_ok} (m={m}, gamma={gamma_j}, a1={a1}, a2={a2})"
            )
    else:
        unit_ok = is_quadratic_residue(a0, p)
        expected_a0 = 1 if p == 3 else 4 % p
        if a0 != expected_a0:
            notes.append(f"leading digit {a0} differs from the expansion's {expected_a0}")
        sqrt_ok = even and unit_ok
    failed = None
    if not even:
        failed = "odd-valuation"
    elif not unit_ok:
        failed = "unit-not-1-mod-8" if p == 2 else "nonresidue-unit"
    outcome = sqrt(disc)
    if outcome.exists != sqrt_ok:
        raise PadicError("digit conditions disagree with the root extractor")
    return DiscriminantReport(
        disc, gamma_d, (a0, a1, a2), even, unit_ok, sqrt_ok, failed,
        rule_prediction, rule_agrees, tuple(notes),
    )


# ---- root lifting and contraction -----------------------------------------


def lift_root_to_field(z: PadicNumber, params: ModelParams) -> FieldVector:
    """Fixed-point field (log z, 0, ..., 0) in recursion coordinates."""
    if not is_admissible(z, params):
        raise DomainError(f"z = {z} is not admissible: |z-1| too large")
    w = log_p(z)
    zero = PadicNumber.make_zero(params.p, w.prec if not w.is_zeroish else params.theta.prec)
    comps = [w] + [zero] * (params.q - 2)
    return FieldVector(params.p, tuple(comps))


def contraction_trace(
    params: ModelParams, h0: FieldVector, iterations: int
) -> list[PadicNorm]:
    """Norm sequence of the translation-invariant iteration.

    When q is prime to p the geometric decay s_{t+1} <= s_t / p is
    asserted on the computed norms (the uniqueness witness); otherwise
    the trace is reported without the assertion.
    """
    hypothesis = params.q % params.p != 0
    norms = [h0.norm_upper_bound()]
    h = h0
    for _ in range(iterations):
        h = recursion_step([h] * params.k, params)
        norms.append(h.norm_upper_bound())
        if hypothesis:
            prev, cur = norms[-2], norms[-1]
            if not cur.as_fraction() * params.p <= prev.as_fraction():
                raise PadicError(
                    f"contraction violated: {prev} -> {cur} at q prime to p"
                )
    return norms


def sample_domain_field(params: ModelParams, rng: random.Random) -> FieldVector:
    """Random field with every component of norm exactly p^(-1) (p odd,
    drawn as p * unit) or 2^(-2) (p = 2, where the ball starts deeper)."""
    p = params.p
    min_v = exp_domain_min_valuation(p)
    prec = max(params.theta.prec - min_v, 4)
    comps = []
    for _ in range(params.q - 1):
        u = 0
        while u % p == 0:
            u = rng.randrange(1, p**prec)
        comps.append(PadicNumber(p, min_v, u, prec))
    return FieldVector(p, tuple(comps))
