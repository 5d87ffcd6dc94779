"""Phase-transition decision procedure with machine-checkable witnesses.

The classifier is computation-driven: verdicts come from solved roots,
residual certificates, contraction traces and digit conditions, not from
quoting parameter tables.  ``cross_check`` compares against the published
closed-form conditions and surfaces any disagreement as a finding instead
of resolving it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

from .gibbs import (
    BoundaryFieldAssignment,
    build_volume,
    check_compatibility,
    marginal_path_norms,
    partition_and_measures,
)
from .padic import PadicError, PadicNorm, PadicNumber
from .recursion import (
    DiscriminantReport,
    FieldVector,
    ModelParams,
    NormReport,
    contraction_trace,
    discriminant_analysis,
    lift_root_to_field,
    norm_case_analysis,
    sample_domain_field,
    solve_ti_k1,
    solve_ti_k2,
)


class Outcome(str, Enum):
    PHASE_TRANSITION = "PhaseTransition"
    NO_PHASE_TRANSITION = "NoPhaseTransition"
    NO_SECOND_TI_SOLUTION = "NoSecondTISolution"
    UNRESOLVED_CONJECTURE = "UnresolvedConjecture"


@dataclass(frozen=True)
class Witnesses:
    roots: tuple[PadicNumber, ...] = ()
    residual_norms: tuple[PadicNorm, ...] = ()
    contraction: tuple[PadicNorm, ...] = ()
    boundedness: str | None = None
    discriminant: DiscriminantReport | None = None
    norm_report: NormReport | None = None


@dataclass(frozen=True)
class Verdict:
    params: ModelParams
    outcome: Outcome
    basis: tuple[str, ...]
    witnesses: Witnesses
    seed: int = 0

    def __post_init__(self):
        if not self.basis:
            raise PadicError("every verdict must name its basis")
        if self.outcome is Outcome.PHASE_TRANSITION and len(self.witnesses.roots) < 2:
            raise PadicError("a transition verdict must carry two distinct roots")
        if self.outcome is Outcome.NO_PHASE_TRANSITION:
            if not self.witnesses.contraction and "ising-reduction" not in self.basis:
                raise PadicError("uniqueness verdicts need a contraction trace")


def _in_solvable_class(p: int, q: int) -> bool:
    return q % p == 0 if p >= 3 else q % 4 == 0


def classify(params: ModelParams, seed: int = 0) -> Verdict:
    """Decision tree over (p, q, k, J).

    * q = 2: the two-state model never branches, any k.
    * q prime to p (q odd for p = 2): contraction of the recursion forces
      the zero field; witness: a strictly decaying norm trace.
    * p = 2, q = 2 mod 4: the norm case analysis rules out a second
      translation-invariant solution.
    * solvable divisibility class, k = 2: solve the quadratic; two
      distinct admissible roots give a transition, otherwise the failed
      root-existence condition is named.
    * same class, k = 1: the reduction is linear and solved exactly;
      k >= 3: deliberately left unresolved.
    """
    p, q, k = params.p, params.q, params.k
    if q == 2:
        return Verdict(params, Outcome.NO_PHASE_TRANSITION, ("ising-reduction",), Witnesses(), seed)
    if (p >= 3 and q % p != 0) or (p == 2 and q % 2 == 1):
        rng = random.Random(seed)
        h0 = sample_domain_field(params, rng)
        trace = contraction_trace(params, h0, 10)
        return Verdict(
            params,
            Outcome.NO_PHASE_TRANSITION,
            ("contraction-uniqueness",),
            Witnesses(contraction=tuple(trace)),
            seed,
        )
    if p == 2 and q % 4 == 2:
        report = norm_case_analysis(params)
        return Verdict(
            params,
            Outcome.NO_SECOND_TI_SOLUTION,
            ("norm-case-obstruction",),
            Witnesses(norm_report=report),
            seed,
        )
    # solvable divisibility class from here on
    if k == 2:
        disc = discriminant_analysis(params)
        sol = solve_ti_k2(params)
        if sol.has_two_distinct_admissible:
            roots = tuple(r.z for r in sol.admissible)
            residuals = tuple(r.residual_bound for r in sol.admissible)
            return Verdict(
                params,
                Outcome.PHASE_TRANSITION,
                ("ti-quadratic-pair",),
                Witnesses(
                    roots=roots,
                    residual_norms=residuals,
                    boundedness="unbounded-regime",
                    discriminant=disc,
                ),
                seed,
            )
        reason = sol.failure or ("double-root" if sol.double_root else "inadmissible-roots")
        return Verdict(
            params,
            Outcome.NO_SECOND_TI_SOLUTION,
            (f"root-existence-failed:{reason}",),
            Witnesses(discriminant=disc),
            seed,
        )
    if k == 1:
        root = solve_ti_k1(params)
        if root.admissible:
            trivial = params.one
            return Verdict(
                params,
                Outcome.PHASE_TRANSITION,
                ("ti-linear-solution",),
                Witnesses(
                    roots=(trivial, root.z),
                    residual_norms=(PadicNorm.zero(p), root.residual_bound),
                    boundedness="unbounded-regime",
                ),
                seed,
            )
        return Verdict(
            params,
            Outcome.NO_SECOND_TI_SOLUTION,
            ("ti-linear-inadmissible",),
            Witnesses(roots=()),
            seed,
        )
    return Verdict(
        params,
        Outcome.UNRESOLVED_CONJECTURE,
        ("higher-order-tree-open",),
        Witnesses(discriminant=discriminant_analysis(params)),
        seed,
    )


@dataclass(frozen=True)
class BoundednessReport:
    outcome: str  # "Bounded" | "Unbounded"
    measure_norms: tuple[str, ...]  # per-radius common measure norm
    path_norms: tuple[str, ...]
    basis: str


def boundedness_verdict(params: ModelParams, h: FieldVector) -> BoundednessReport:
    """Bounded iff q is prime to p, witnessed on desk-scale volumes.

    ``h`` must be a fixed point (the zero field or a solved-root lift);
    evidence combines common measure norms at radius 1 and the worst-case
    marginal path norms for n = 0..5.
    """
    fields = BoundaryFieldAssignment.constant(h).transformed()
    tab = partition_and_measures(build_volume(params.k, 1), fields, params)
    path = marginal_path_norms(params, h, 5)
    measure_norms = (str(tab.measure_norm()),)
    path_strs = tuple(str(x) for x in path)
    if params.q_in_pn:
        if not tab.measure_norm() >= params.p:
            raise PadicError("expected a measure norm >= p in the q in pN regime")
        growth_ok = all(
            path[i + 1].as_fraction() >= path[i].as_fraction() * params.p
            for i in range(len(path) - 1)
        )
        if not growth_ok:
            raise PadicError("path norms failed to grow geometrically")
        return BoundednessReport("Unbounded", measure_norms, path_strs, "norm-growth")
    if not tab.measure_norm() == 1:
        raise PadicError("expected unit measure norms when q is prime to p")
    if any(x != 1 for x in path):
        raise PadicError("expected flat path norms when q is prime to p")
    return BoundednessReport("Bounded", measure_norms, path_strs, "unit-norms")


@dataclass(frozen=True)
class CrossCheckReport:
    condition_table_outcome: Outcome | None  # None: the closed forms make no firm claim
    computed_outcome: Outcome
    agreement: str  # "agree" | "mismatch" | "not-comparable"
    findings: tuple[str, ...]
    compatibility_probe: str | None


def condition_table_verdict(params: ModelParams) -> Outcome | None:
    """Verdict read off the published closed-form parameter conditions
    alone (no computation).  Returns None where those conditions make no
    firm claim (k not in {2} within the solvable class)."""
    p, q, k = params.p, params.q, params.k
    if q == 2:
        return Outcome.NO_PHASE_TRANSITION
    if (p >= 3 and q % p != 0) or (p == 2 and q % 2 == 1):
        return Outcome.NO_PHASE_TRANSITION
    if p == 2 and q % 4 == 2:
        return Outcome.NO_SECOND_TI_SOLUTION
    if k != 2:
        return None
    if p >= 3:
        return Outcome.PHASE_TRANSITION  # 0 < |J|_p <= 1/p holds on the whole domain
    vq = 0
    qq = q
    while qq % 2 == 0:
        qq //= 2
        vq += 1
    vj = params.J.valuation
    if (vq == 2 and vj == 2) or (vq >= 3 and vj >= 2):
        return Outcome.PHASE_TRANSITION
    return Outcome.NO_SECOND_TI_SOLUTION


def cross_check(params: ModelParams, probe_cap: int = 10**5, seed: int = 0) -> CrossCheckReport:
    """Compare the closed-form conditions with the computed verdict and,
    when affordable, brute-force the compatibility of a computed root on a
    small volume.  Mismatches are reported, never auto-resolved."""
    table = condition_table_verdict(params)
    computed = classify(params, seed)
    findings: list[str] = []
    if table is None:
        agreement = "not-comparable"
    elif table is computed.outcome:
        agreement = "agree"
    else:
        agreement = "mismatch"
        findings.append(
            f"closed-form conditions give {table.value} but computation gives "
            f"{computed.outcome.value} at (p={params.p}, q={params.q}, "
            f"k={params.k}, |J|={params.J.norm()})"
        )
    disc = computed.witnesses.discriminant
    if disc is not None and disc.rule_agrees is False:
        findings.extend(disc.notes)
    probe = None
    if computed.outcome is Outcome.PHASE_TRANSITION and params.k == 2:
        vol_size = params.q ** build_volume(params.k, 2).vertex_count
        if vol_size <= probe_cap:
            h = lift_root_to_field(computed.witnesses.roots[0], params)
            rep = check_compatibility(params, 2, BoundaryFieldAssignment.constant(h))
            if rep.determined:
                findings.append(
                    f"compatibility probe found a determined deviation {rep.max_deviation}"
                )
                probe = f"deviation {rep.max_deviation}"
            else:
                probe = f"compatible, deviations <= {params.p}^-{rep.deviation_floor}"
        else:
            probe = "skipped (volume too large)"
    return CrossCheckReport(table, computed.outcome, agreement, tuple(findings), probe)
