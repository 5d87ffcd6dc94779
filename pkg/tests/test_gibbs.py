"""Volumes, Hamiltonian, measures, compatibility, transition matrices."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from padic_potts.analytic import exp_p
from padic_potts.gibbs import (
    BoundaryFieldAssignment,
    EnumerationCapError,
    build_volume,
    check_compatibility,
    hamiltonian,
    marginal_path_norms,
    partition_and_measures,
    transition_matrix,
    weight,
)
from padic_potts.padic import PadicError, PadicNumber, equal_to_precision
from padic_potts.recursion import (
    FieldVector,
    ModelParams,
    boundary_field_from_recursion,
    lift_root_to_field,
    sample_domain_field,
    solve_ti_k2,
)


def make_params(p, q, k, j_num, prec=32) -> ModelParams:
    return ModelParams(p, q, k, PadicNumber.from_int(j_num, p, prec))


P333 = make_params(3, 3, 2, 3)


def zero_assignment(p, q, prec=33) -> BoundaryFieldAssignment:
    return BoundaryFieldAssignment.constant(FieldVector.zero(p, q, prec))


def test_volume_counts():
    v = build_volume(2, 1)
    assert v.vertex_count == 4 and len(v.edges) == 3
    assert [len(s) for s in v.shells] == [1, 3]
    v = build_volume(2, 2)
    assert v.vertex_count == 10
    assert [len(s) for s in v.shells] == [1, 3, 6]
    v = build_volume(3, 2)
    assert v.vertex_count == 17
    assert [len(s) for s in v.shells] == [1, 4, 12]
    assert len(v.edges) == v.vertex_count - 1


def test_volume_successors_and_guards():
    v = build_volume(2, 2)
    assert len(v.successors(0)) == 3  # root has k+1
    assert all(len(v.successors(x)) == 2 for x in v.shells[1])
    with pytest.raises(PadicError):
        build_volume(2, 0)
    with pytest.raises(PadicError):
        build_volume(0, 1)


def test_hamiltonian_constant_configuration():
    v = build_volume(2, 1)
    J = PadicNumber.from_int(3, 3, 32)
    h = hamiltonian([1, 1, 1, 1], v, J)
    assert equal_to_precision(h, PadicNumber.from_int(-9, 3, 32), 30)  # -3J


def test_hamiltonian_no_equal_neighbors():
    # star edges only: root disagrees with every child, so no term survives
    v = build_volume(2, 1)
    J = PadicNumber.from_int(3, 3, 32)
    assert hamiltonian([1, 2, 2, 2], v, J).zero
    assert hamiltonian([1, 2, 3, 2], v, J).zero


def test_hamiltonian_random_against_edge_scan():
    rng = random.Random(20)
    v = build_volume(2, 2)
    J = PadicNumber.from_int(3, 3, 32)
    for _ in range(50):
        config = [rng.randint(1, 3) for _ in range(v.vertex_count)]
        count = sum(1 for (a, b) in v.edges if config[a] == config[b])
        h = hamiltonian(config, v, J)
        expect = PadicNumber.from_int(-3 * count, 3, 32)
        if count == 0:
            assert h.zero
        else:
            assert equal_to_precision(h, expect, 28)
        assert h.zero or h.norm() <= J.norm()


def test_weight_zero_field_is_exp_of_minus_h():
    v = build_volume(2, 1)
    fields = zero_assignment(3, 3)
    J = P333.J
    config = [1, 1, 2, 3]
    w = weight(config, v, fields, J)
    expect = exp_p(-hamiltonian(config, v, J))
    assert equal_to_precision(w, expect, 30)
    assert w.norm() == 1


def test_weight_all_q_spins_boundary_term():
    # every boundary vertex at label q contributes the component sum
    v = build_volume(2, 1)
    a = PadicNumber.from_int(3, 3, 32)
    b = PadicNumber.from_int(9, 3, 32)
    fields = BoundaryFieldAssignment.constant(FieldVector(3, (a, b)))
    config = [3, 3, 3, 3]
    w = weight(config, v, fields, P333.J)
    total = (a + b) * PadicNumber.from_int(3, 3, 40)  # |W_1| = 3 boundary vertices
    expect = exp_p(-hamiltonian(config, v, P333.J) + total)
    assert equal_to_precision(w, expect, 28)


def test_weight_matches_factored_table():
    rng = random.Random(21)
    v = build_volume(2, 2)
    sol = solve_ti_k2(P333)
    h = lift_root_to_field(sol.admissible[0].z, P333)
    fields = BoundaryFieldAssignment.constant(h).transformed()
    table = partition_and_measures(v, fields, P333)
    for _ in range(25):
        idx = rng.randrange(len(table))
        direct = weight(table.config(idx), v, fields, P333.J)
        assert equal_to_precision(direct, table.weight(idx), 26)


def _exp_term_by_term(arg: PadicNumber, terms: int = 60) -> PadicNumber:
    # independent route: explicit powers against factorial rationals,
    # no shared code with the production series loop
    total = PadicNumber.one(arg.p, arg.prec + arg.v)
    fact = 1
    for n in range(1, terms):
        fact *= n
        total = total + arg**n / PadicNumber.from_rational(fact, 1, arg.p, arg.prec + 8)
    return total


def test_weight_explicit_digits_at_root_field():
    v = build_volume(2, 1)
    sol = solve_ti_k2(P333)
    h = lift_root_to_field(sol.admissible[0].z, P333)
    fields = BoundaryFieldAssignment.constant(h).transformed()
    config = (1, 1, 2, 3)
    w = weight(config, v, fields, P333.J)
    count = sum(1 for (a, b) in v.edges if config[a] == config[b])
    arg = P333.J * PadicNumber.from_int(count, 3, 40)
    for x in v.boundary:
        arg = arg + fields.at(x).spin_action(config[x])
    expect = _exp_term_by_term(arg)
    assert equal_to_precision(w, expect, 24)
    assert w.digits(6) == expect.digits(6)


def test_partition_normalization_small():
    v = build_volume(2, 1)
    table = partition_and_measures(v, zero_assignment(3, 3), P333)
    total = None
    for _, mu in table.iter_measures():
        total = mu if total is None else total + mu
    one = PadicNumber.one(3, 30)
    assert equal_to_precision(total, one, 20)


def test_partition_norms_q_not_in_pn():
    params = make_params(3, 4, 2, 3)
    table = partition_and_measures(build_volume(2, 1), zero_assignment(3, 4), params)
    assert table.partition.norm() == 1
    assert table.measure_norm() == 1


def test_partition_norm_q3_p3():
    table = partition_and_measures(build_volume(2, 1), zero_assignment(3, 3), P333)
    assert table.partition.norm() <= Fraction(1, 3)
    assert table.measure_norm() >= 3
    assert len(table) == 81


def test_enumeration_cap():
    with pytest.raises(EnumerationCapError):
        partition_and_measures(build_volume(2, 2), zero_assignment(3, 3), P333, cap=1000)


def test_summation_order_independence():
    # exact arithmetic at fixed precision: any summation order gives the same Z
    v = build_volume(2, 1)
    table = partition_and_measures(v, zero_assignment(3, 3), P333)
    rng = random.Random(22)
    units = list(table.weight_units)
    rng.shuffle(units)
    mod = 3**table.work_prec
    z2 = 0
    for u in units:
        z2 = (z2 + u) % mod
    zsum = 0
    for u in table.weight_units:
        zsum = (zsum + u) % mod
    assert z2 == zsum


def test_compatibility_zero_field():
    params = make_params(3, 4, 2, 3)
    rep = check_compatibility(params, 2, zero_assignment(3, 4), cap=2 * 10**6)
    assert not rep.determined
    assert rep.compatible_at(20)


def test_compatibility_solved_roots():
    sol = solve_ti_k2(P333)
    for entry in sol.admissible:
        h = lift_root_to_field(entry.z, P333)
        rep = check_compatibility(P333, 2, BoundaryFieldAssignment.constant(h))
        assert not rep.determined
        assert rep.compatible_at(6)


def test_compatibility_trivial_for_two_states():
    # with two spin labels both pair to the same scalar, so every field
    # yields the same (compatible) measures
    params = make_params(3, 2, 2, 3)
    rng = random.Random(27)
    h = sample_domain_field(params, rng)
    rep = check_compatibility(params, 2, BoundaryFieldAssignment.constant(h))
    assert not rep.determined
    assert rep.compatible_at(20)


def test_compatibility_fails_for_random_field():
    rng = random.Random(23)
    h = sample_domain_field(P333, rng)
    rep = check_compatibility(P333, 2, BoundaryFieldAssignment.constant(h))
    assert rep.determined
    assert rep.max_deviation >= Fraction(1, 27)


def test_compatibility_for_non_invariant_backward_built_field():
    # strongest form of the equivalence: draw arbitrary fields on the outer
    # shell, define each first-shell field as the recursion image of its
    # children, and the measures must marginalize exactly
    from padic_potts.recursion import recursion_step

    params = make_params(3, 4, 2, 3, prec=48)
    rng = random.Random(29)
    vol = build_volume(2, 2)
    overrides: dict[int, "FieldVector"] = {}
    for y in vol.shells[2]:
        overrides[y] = sample_domain_field(params, rng)
    for x in vol.shells[1]:
        children = [overrides[y] for y in vol.successors(x)]
        overrides[x] = recursion_step(children, params)
    fields = BoundaryFieldAssignment(FieldVector.zero(3, 4, 49), overrides)
    rep = check_compatibility(params, 2, fields, cap=2 * 10**6)
    assert not rep.determined
    assert rep.compatible_at(20), rep

    # perturbing a single first-shell vertex breaks it
    bumped = dict(overrides)
    x0 = vol.shells[1][0]
    bump = PadicNumber.from_int(3, 3, 48)
    bumped[x0] = FieldVector(
        3, tuple(c + bump for c in overrides[x0].components)
    )
    rep = check_compatibility(
        params, 2, BoundaryFieldAssignment(FieldVector.zero(3, 4, 49), bumped),
        cap=2 * 10**6,
    )
    assert rep.determined


def test_transition_matrix_rows_and_norms():
    sol = solve_ti_k2(P333)
    h = lift_root_to_field(sol.admissible[0].z, P333)
    tm = transition_matrix(P333, h)
    one = PadicNumber.one(3, 30)
    for row in tm.entries:
        total = row[0]
        for e in row[1:]:
            total = total + e
        assert equal_to_precision(total, one, 20)
    assert tm.min_norm() >= 3  # q in pN

    params = make_params(3, 4, 2, 3)
    tm = transition_matrix(params, FieldVector.zero(3, 4, 33))
    assert tm.min_norm() == 1
    for row in tm.entries:
        for e in row:
            assert e.norm() == 1


def test_invariant_vector_is_invariant():
    sol = solve_ti_k2(P333)
    h = lift_root_to_field(sol.admissible[0].z, P333)
    tm = transition_matrix(P333, h)
    q = 3
    for col in range(q):
        acc = None
        for r in range(q):
            term = tm.invariant[r] * tm.entries[r][col]
            acc = term if acc is None else acc + term
        d = acc - tm.invariant[col]
        assert d.is_zeroish or d.v >= 15


def test_invariant_vector_matches_symmetric_closed_form():
    # the unnormalized weights are symmetric, so pi_i = rowsum_i / total
    # must agree with the eliminated solution
    sol = solve_ti_k2(P333)
    h = lift_root_to_field(sol.admissible[0].z, P333)
    tm = transition_matrix(P333, h)
    c = boundary_field_from_recursion(h)
    raw = []
    for i in range(1, 4):
        row = []
        for jj in range(1, 4):
            arg = c.spin_action(i) + c.spin_action(jj)
            if i == jj:
                arg = arg + P333.J
            row.append(exp_p(arg))
        raw.append(row)
    total = None
    sums = []
    for row in raw:
        s = row[0]
        for e in row[1:]:
            s = s + e
        sums.append(s)
        total = s if total is None else total + s
    for got, want_num in zip(tm.invariant, sums):
        d = got - want_num / total
        assert d.is_zeroish or d.v >= 15


def test_marginal_path_norms_growth_and_flatness():
    sol = solve_ti_k2(P333)
    h = lift_root_to_field(sol.admissible[0].z, P333)
    norms = marginal_path_norms(P333, h, 5)
    for n in range(1, 6):
        assert norms[n].as_fraction() >= 3**n
    params = make_params(3, 4, 2, 3)
    flat = marginal_path_norms(params, FieldVector.zero(3, 4, 33), 5)
    assert all(x == 1 for x in flat)


def test_volume_describe():
    d = build_volume(2, 2).describe()
    assert d["vertices"] == 10 and d["edges"] == 9 and d["shell_sizes"] == [1, 3, 6]
