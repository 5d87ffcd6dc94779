"""Finite Cayley-tree volumes and exact finite-volume measures.

Weights are exp_p of (coupling term + boundary term) and are therefore
units; the partition function and every normalized measure value are
tracked p-adically, including the case where the partition function's
digits cancel past working precision (reported with a certified
valuation bound, never flushed to zero).

Fields handed to the public verification entry points live in recursion
coordinates (the solver's space); they are converted to the coordinates
entering the boundary sum via the invertible transform before any weight
is formed.  ``weight`` and ``partition_and_measures`` pair their field
argument literally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .analytic import exp_domain_min_valuation, exp_p
from .padic import (
    DomainError,
    PadicError,
    PadicNorm,
    PadicNumber,
    PrecisionExhaustedError,
    int_valuation,
)
from .recursion import (
    FieldVector,
    ModelParams,
    boundary_field_from_recursion,
)

DEFAULT_ENUMERATION_CAP = 10**6


class EnumerationCapError(PadicError):
    """Configuration count exceeds the allowed enumeration budget."""


@dataclass(frozen=True)
class CayleyVolume:
    """Ball of radius n in the Cayley tree of order k.

    Vertices are indexed breadth-first (root = 0), so every parent index
    precedes its children and the first |V_{n-1}| indices are exactly the
    radius-(n-1) ball.
    """

    k: int
    n: int
    paths: tuple[tuple[int, ...], ...]
    shells: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int], ...]
    parent: tuple[int, ...]  # parent[0] = -1

    @property
    def vertex_count(self) -> int:
        return len(self.paths)

    @property
    def boundary(self) -> tuple[int, ...]:
        return self.shells[self.n]

    def successors(self, x: int) -> tuple[int, ...]:
        return tuple(c for (par, c) in self.edges if par == x)

    def describe(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "shell_sizes": [len(s) for s in self.shells],
            "vertices": self.vertex_count,
            "edges": len(self.edges),
        }


def build_volume(k: int, n: int) -> CayleyVolume:
    """Shells W_0..W_n, edge list and parent map; the root has k+1
    neighbours, every other vertex k further ones."""
    if k < 1:
        raise PadicError("tree order must be >= 1")
    if n < 1:
        raise PadicError("radius must be >= 1 (a single vertex carries no edge)")
    paths: list[tuple[int, ...]] = [()]
    shells: list[tuple[int, ...]] = [(0,)]
    parent = [-1]
    edges: list[tuple[int, int]] = []
    frontier = [0]
    for depth in range(1, n + 1):
        new_frontier = []
        degree = k + 1 if depth == 1 else k
        for x in frontier:
            for branch in range(degree):
                idx = len(paths)
                paths.append(paths[x] + (branch,))
                parent.append(x)
                edges.append((x, idx))
                new_frontier.append(idx)
        shells.append(tuple(new_frontier))
        frontier = new_frontier
    return CayleyVolume(k, n, tuple(paths), tuple(shells), tuple(edges), tuple(parent))


@dataclass(frozen=True)
class BoundaryFieldAssignment:
    """Vertex-indexed boundary fields; constant unless overridden."""

    default: FieldVector
    overrides: Mapping[int, FieldVector] = field(default_factory=dict)

    @classmethod
    def constant(cls, h: FieldVector) -> "BoundaryFieldAssignment":
        return cls(h)

    def at(self, x: int) -> FieldVector:
        return self.overrides.get(x, self.default)

    def transformed(self) -> "BoundaryFieldAssignment":
        return BoundaryFieldAssignment(
            boundary_field_from_recursion(self.default),
            {x: boundary_field_from_recursion(h) for x, h in self.overrides.items()},
        )


def _monochrome_edges(config: Sequence[int], volume: CayleyVolume) -> int:
    return sum(1 for (a, b) in volume.edges if config[a] == config[b])


def hamiltonian(config: Sequence[int], volume: CayleyVolume, J: PadicNumber) -> PadicNumber:
    """-J times the number of monochromatic edges; |H|_p <= |J|_p."""
    if len(config) != volume.vertex_count:
        raise PadicError("configuration does not cover the volume")
    count = _monochrome_edges(config, volume)
    return -(J * PadicNumber.from_int(count, J.p, J.prec + 8))


def _boundary_term(
    config: Sequence[int], volume: CayleyVolume, fields: BoundaryFieldAssignment
) -> PadicNumber:
    p = fields.default.p
    total = PadicNumber.make_zero(p, 32)
    for x in volume.boundary:
        total = total + fields.at(x).spin_action(config[x])
    return total


def weight(
    config: Sequence[int],
    volume: CayleyVolume,
    fields: BoundaryFieldAssignment,
    J: PadicNumber,
) -> PadicNumber:
    """exp_p(-H + boundary sum), the fields paired literally per spin
    label (label q acts as the component sum)."""
    arg = -hamiltonian(config, volume, J) + _boundary_term(config, volume, fields)
    if not arg.zero and arg.v < exp_domain_min_valuation(J.p):
        raise DomainError("weight exponent left the exponential ball")
    return exp_p(arg)


@dataclass
class MeasureTable:
    """Per-configuration weights (always units) and the partition function.

    Weights are stored as unit integers modulo p^work_prec; configurations
    are indexed by their mixed-radix id, vertex 0 most significant, so the
    restriction of configuration i to the inner ball is i // q^{|W_n|}.
    """

    p: int
    q: int
    volume: CayleyVolume
    work_prec: int
    weight_units: list[int]
    partition: PadicNumber

    def __len__(self) -> int:
        return len(self.weight_units)

    def config(self, idx: int) -> tuple[int, ...]:
        spins = []
        for _ in range(self.volume.vertex_count):
            spins.append(idx % self.q + 1)
            idx //= self.q
        return tuple(reversed(spins))

    def weight(self, idx: int) -> PadicNumber:
        return PadicNumber(self.p, 0, self.weight_units[idx], self.work_prec)

    def measure(self, idx: int) -> PadicNumber:
        return self.weight(idx) / self.partition

    def measure_norm(self) -> PadicNorm:
        """|mu(sigma)|_p, identical for every configuration since all
        weights are units."""
        if self.partition.exhausted:
            raise PrecisionExhaustedError(
                "partition function exhausted; only a norm lower bound "
                f"{self.p}^{self.partition.v} is certified",
                valuation_bound=self.partition.v,
            )
        return PadicNorm(self.p, -self.partition.v)

    def iter_measures(self) -> Iterator[tuple[int, PadicNumber]]:
        for i in range(len(self)):
            yield i, self.measure(i)


def _edge_factor_tables(
    volume: CayleyVolume,
    fields: BoundaryFieldAssignment,
    params: ModelParams,
) -> tuple[int, list[list[list[int]]]]:
    """Per-vertex (spin, parent-spin) unit factors and the common working
    precision: theta on equal-spin edges, boundary exponential folded in
    on the outer shell."""
    p, q = params.p, params.q
    theta = params.theta
    work = theta.prec
    boundary_units: dict[int, list[int]] = {}
    for x in volume.boundary:
        h = fields.at(x)
        units = []
        for s in range(1, q + 1):
            e = exp_p(h.spin_action(s))
            if e.v != 0:
                raise PadicError("boundary exponential is not a unit")
            work = min(work, e.prec)
            units.append(e)
        boundary_units[x] = units
    mod = p**work
    theta_u = theta.unit % mod
    tables: list[list[list[int]]] = [[[1] * q for _ in range(q)]]  # root: no edge
    for x in range(1, volume.vertex_count):
        base = [1] * q
        if x in boundary_units:
            base = [e.unit % mod for e in boundary_units[x]]
        tab = [[base[s] * (theta_u if s == sp else 1) % mod for sp in range(q)] for s in range(q)]
        tables.append(tab)
    return work, tables


def partition_and_measures(
    volume: CayleyVolume,
    fields: BoundaryFieldAssignment,
    params: ModelParams,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> MeasureTable:
    """Exact enumeration of all q^|V_n| weights, Z_n and measures.

    The q in pN regime can exhaust Z_n's digits at depth; the partition
    value then carries the still-certified valuation bound.
    """
    q = params.q
    nverts = volume.vertex_count
    total = q**nverts
    if total > cap:
        raise EnumerationCapError(
            f"{q}^{nverts} = {total} configurations exceed the cap {cap}"
        )
    work, tables = _edge_factor_tables(volume, fields, params)
    p = params.p
    mod = p**work
    parent = volume.parent
    spins = [0] * nverts
    prods = [1] * (nverts + 1)
    for x in range(1, nverts):
        prods[x + 1] = prods[x] * tables[x][0][spins[parent[x]]] % mod
    weights = [0] * total
    weights[0] = prods[nverts]
    zsum = prods[nverts]
    for idx in range(1, total):
        x = nverts - 1
        while spins[x] == q - 1:
            spins[x] = 0
            x -= 1
        spins[x] += 1
        # parent[0] = -1 wraps to the last spin; harmless, the root table is all ones
        for y in range(x, nverts):
            prods[y + 1] = prods[y] * tables[y][spins[y]][spins[parent[y]]] % mod
        w = prods[nverts]
        weights[idx] = w
        zsum = (zsum + w) % mod
    if zsum == 0:
        partition = PadicNumber.make_exhausted(p, work)
    else:
        zv = int_valuation(zsum, p)
        partition = PadicNumber(p, zv, zsum // p**zv, work - zv)
    return MeasureTable(p, q, volume, work, weights, partition)


@dataclass(frozen=True)
class CompatibilityReport:
    """Marginalization check of the radius-n table against radius n-1."""

    n: int
    configurations: int
    deviation_floor: int | None  # all deviations certified <= p^(-floor); None: all exactly 0
    max_deviation: PadicNorm  # upper bound over deviations; exact when `determined`
    determined: bool  # some deviation has an exact nonzero valuation

    def compatible_at(self, abs_prec: int) -> bool:
        return self.deviation_floor is None or self.deviation_floor >= abs_prec


def check_compatibility(
    params: ModelParams,
    n: int,
    fields: BoundaryFieldAssignment,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> CompatibilityReport:
    """Brute-force marginalization: sum the radius-n measure over the outer
    shell and compare with the radius-(n-1) measure, configuration by
    configuration.

    ``fields`` is given in recursion coordinates (the space the
    fixed-point equation lives in) and is transformed to boundary
    coordinates internally; failure is data, not an error.
    """
    if n < 2:
        raise PadicError("compatibility needs n >= 2")
    vol_n = build_volume(params.k, n)
    vol_m = build_volume(params.k, n - 1)
    measure_fields = fields.transformed()
    tab_n = partition_and_measures(vol_n, measure_fields, params, cap)
    tab_m = partition_and_measures(vol_m, measure_fields, params, cap)
    q = params.q
    block = q ** len(vol_n.boundary)
    p = params.p
    worst = PadicNorm.zero(p)
    floor: int | None = None
    determined = False
    mod = p**tab_n.work_prec
    for inner_idx in range(len(tab_m)):
        partial = 0
        base = inner_idx * block
        for j in range(block):
            partial = (partial + tab_n.weight_units[base + j]) % mod
        if partial == 0:
            marginal = PadicNumber.make_exhausted(p, tab_n.work_prec)
        else:
            pv = int_valuation(partial, p)
            marginal = PadicNumber(p, pv, partial // p**pv, tab_n.work_prec - pv)
        dev = marginal / tab_n.partition - tab_m.measure(inner_idx)
        bound = dev.norm_upper_bound()
        if bound > worst:
            worst = bound
        if not dev.is_zeroish:
            determined = True
        if not dev.zero:
            floor = dev.v if floor is None else min(floor, dev.v)
    return CompatibilityReport(n, len(tab_n), floor, worst, determined)


# ---- transition matrix and marginal path norms -----------------------------


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic q x q matrix p_ij built from a fixed-point field."""

    entries: tuple[tuple[PadicNumber, ...], ...]
    invariant: tuple[PadicNumber, ...]
    invariant_choice: str

    def norms(self) -> list[list[PadicNorm]]:
        return [[e.norm() for e in row] for row in self.entries]

    def min_norm(self) -> PadicNorm:
        out = None
        for row in self.entries:
            for e in row:
                n = e.norm()
                out = n if out is None or n < out else out
        return out


def transition_matrix(params: ModelParams, h: FieldVector) -> TransitionMatrix:
    """p_ij = exp(J d_ij + c.s_i + c.s_j) normalized along rows, with c the
    boundary-coordinate image of h.  When q is divisible by p every entry
    norm is >= p (the row sum picks up the factor q); this is asserted."""
    c = boundary_field_from_recursion(h)
    q, p = params.q, params.p
    raw: list[list[PadicNumber]] = []
    for i in range(1, q + 1):
        row = []
        for j in range(1, q + 1):
            arg = c.spin_action(i) + c.spin_action(j)
            if i == j:
                arg = arg + params.J
            row.append(exp_p(arg))
        raw.append(row)
    entries = []
    for row in raw:
        total = row[0]
        for e in row[1:]:
            total = total + e
        if total.is_zeroish:
            raise PrecisionExhaustedError(
                "row sum indistinguishable from zero",
                valuation_bound=total.v if total.exhausted else None,
            )
        entries.append(tuple(e / total for e in row))
    matrix = tuple(entries)
    if params.q_in_pn:
        for row in matrix:
            for e in row:
                if not e.norm() >= params.p:
                    raise PadicError("entry norm fell below p in the q in pN regime")
    inv, choice = _invariant_vector(matrix, raw, params)
    return TransitionMatrix(matrix, inv, choice)


def _invariant_vector(
    matrix: tuple[tuple[PadicNumber, ...], ...],
    raw: list[list[PadicNumber]],
    params: ModelParams,
) -> tuple[tuple[PadicNumber, ...], str]:
    """Solve pi P = pi with sum(pi) = 1 by exact Gaussian elimination with
    max-norm pivoting.  On a defective pivot fall back to the closed form
    pi_i = rowsum_i / total, which is invariant because the unnormalized
    weights are symmetric in (i, j)."""
    q, p = params.q, params.p
    one = params.one
    zero = PadicNumber.make_zero(p, params.theta.prec)
    rows: list[list[PadicNumber]] = []
    rhs: list[PadicNumber] = []
    for col in range(q - 1):  # (P^T - I) pi = 0, drop one redundant row
        row = []
        for r in range(q):
            e = matrix[r][col]
            row.append(e - one if r == col else e)
        rows.append(row)
        rhs.append(zero)
    rows.append([one] * q)
    rhs.append(one)
    try:
        sol = _solve_linear(rows, rhs, p)
        return tuple(sol), "gaussian-elimination"
    except (PadicError, ZeroDivisionError):
        row_sums = []
        total = None
        for row in raw:
            s = row[0]
            for e in row[1:]:
                s = s + e
            row_sums.append(s)
            total = s if total is None else total + s
        return tuple(s / total for s in row_sums), "symmetric-row-sum-fallback"


def _solve_linear(
    rows: list[list[PadicNumber]], rhs: list[PadicNumber], p: int
) -> list[PadicNumber]:
    n = len(rows)
    a = [list(r) + [rhs[i]] for i, r in enumerate(rows)]
    for col in range(n):
        pivot, best = None, None
        for r in range(col, n):
            e = a[r][col]
            if not e.is_zeroish:
                nb = e.norm()
                if best is None or nb > best:
                    pivot, best = r, nb
        if pivot is None:
            raise PadicError("singular system")
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col]
        for r in range(n):
            if r == col:
                continue
            e = a[r][col]
            if e.is_zeroish:
                continue
            factor = e / inv
            a[r] = [x - factor * y for (x, y) in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


def marginal_path_norms(
    params: ModelParams, h: FieldVector, n_max: int
) -> list[PadicNorm]:
    """Worst-case |mu(path configuration)|_p on the 2n+1 vertex path for
    n = 0..n_max: invariant-vector factor times 2n transition factors,
    maximized by a valuation shortest-path sweep."""
    tm = transition_matrix(params, h)
    q = params.q
    ev = [[e.valuation for e in row] for row in tm.entries]
    dp = [x.valuation for x in tm.invariant]
    out = [PadicNorm(params.p, min(dp))]
    for _ in range(n_max):
        for _ in range(2):  # one extra vertex on each side of the path
            dp = [min(dp[s] + ev[s][t] for s in range(q)) for t in range(q)]
        out.append(PadicNorm(params.p, min(dp)))
    return out
