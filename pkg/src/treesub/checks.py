"""Exhaustive and sampled verification of tree-submodularity inequalities.

Each checker tests inequalities of the shape

    f(x) + f(y) >= f(op1(x, y)) + f(op2(x, y))

over pairs of labelings, for a pair of componentwise operations:

* ``check_strong``       -- midpoint meet/join;
* ``check_weak``         -- wedge/vee (highest common ancestor pair);
* ``check_translation``  -- the directed d-step family, every d from 0 up
                            to the pairwise distance (all coordinates
                            saturate beyond it, so larger d is vacuous);
* ``check_multimorphism``-- arbitrary per-tree operation tables.

Exhaustive mode enumerates pairs in (rank(x), rank(y)) lexicographic
order and reports the first violation, so witnesses are stable across
runs and implementations.  Sampled mode draws pairs i.i.d. uniform by
rank from a seeded stream; it proves nothing and its report says so.

Costs are integers, so verdicts are exact.  Dense domains are checked
through vectorized rank tables; a pure-Python scan handles cost
magnitudes beyond the int64 comfort zone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, DomainError
from .functions import (
    DEFAULT_PAIR_BUDGET,
    CostFunction,
    Labeling,
    ProductDomain,
    DenseTable,
    enumeration_budget,
    materialize,
)
from .rng import SplitMix64
from .solvers import BinaryCubeFunction, SignBoxFunction
from .trees import RootedTree, meet_join, rho, up_down, wedge_vee

_INT64_SAFE = 1 << 40  # |cost| bound for the vectorized path


@dataclass(frozen=True)
class ViolationWitness:
    """A pair (and step count, where applicable) violating an inequality.

    ``lhs`` and ``rhs`` are integers in units of the function's
    denominator, with lhs < rhs exactly: lhs = f(x) + f(y) and
    rhs = f(op1) + f(op2).
    """

    property_name: str
    x: Labeling
    y: Labeling
    d: int | None
    lhs: int
    rhs: int


@dataclass(frozen=True)
class CheckReport:
    """Structured verdict of one checker run."""

    property_name: str
    mode: str
    ok: bool
    witness: ViolationWitness | None
    pairs_checked: int
    note: str = ""


OpTable = list[list[int]]


def _build_tables(domain: ProductDomain, op) -> tuple[list[OpTable], list[OpTable]]:
    first, second = [], []
    for t in domain.trees:
        n = t.node_count
        t1 = [[0] * n for _ in range(n)]
        t2 = [[0] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                t1[a][b], t2[a][b] = op(t, a, b)
        first.append(t1)
        second.append(t2)
    return first, second


def meet_join_tables(domain: ProductDomain) -> tuple[list[OpTable], list[OpTable]]:
    return _build_tables(domain, meet_join)


def wedge_vee_tables(domain: ProductDomain) -> tuple[list[OpTable], list[OpTable]]:
    return _build_tables(domain, wedge_vee)


def up_down_tables(domain: ProductDomain, d: int) -> tuple[list[OpTable], list[OpTable]]:
    return _build_tables(domain, lambda t, a, b: up_down(t, a, b, d))


def projection_tables(domain: ProductDomain) -> tuple[list[OpTable], list[OpTable]]:
    """op1 returns the first argument, op2 the second; always a multimorphism."""
    first, second = [], []
    for t in domain.trees:
        n = t.node_count
        first.append([[a] * n for a in range(n)])
        second.append([list(range(n)) for _ in range(n)])
    return first, second


def min_max_tables(domain: ProductDomain) -> tuple[list[OpTable], list[OpTable]]:
    """Depth-wise min/max tables; only chains order their labels totally."""
    for i, t in enumerate(domain.trees):
        if not t.is_chain():
            raise DomainError(f"min/max tables need chain trees; tree {i} is not")
    lo, hi = [], []
    for t in domain.trees:
        n = t.node_count
        lo.append([[a if t.depth[a] <= t.depth[b] else b for b in range(n)] for a in range(n)])
        hi.append([[b if t.depth[a] <= t.depth[b] else a for b in range(n)] for a in range(n)])
    return lo, hi


def _validate_tables(domain: ProductDomain, tables: list[OpTable], which: str) -> None:
    if len(tables) != domain.n:
        raise DomainError(f"{which}: got {len(tables)} tables for {domain.n} trees")
    for i, (t, table) in enumerate(zip(domain.trees, tables)):
        n = t.node_count
        if len(table) != n or any(len(row) != n for row in table):
            raise DomainError(f"{which}: table {i} is not {n}x{n}")
        for row in table:
            for v in row:
                if not isinstance(v, int) or not 0 <= v < n:
                    raise DomainError(f"{which}: table {i} holds invalid label {v!r}")


def _pair_budget(budget: int | None) -> int:
    return budget if budget is not None else enumeration_budget(DEFAULT_PAIR_BUDGET)


def _require_exhaustible(size: int, budget: int | None) -> int:
    limit = _pair_budget(budget)
    if size * size > limit:
        raise BudgetExceededError(
            f"domain size {size}: {size * size} pairs exceed budget {limit}; "
            "raise TREESUB_BUDGET or use sampled mode"
        )
    return limit


def _digits(domain: ProductDomain, size: int) -> np.ndarray:
    cards = domain.cardinalities()
    digs = np.empty((size, domain.n), dtype=np.int64)
    ranks = np.arange(size, dtype=np.int64)
    for i in range(domain.n - 1, -1, -1):
        ranks, digs[:, i] = np.divmod(ranks, cards[i])
    return digs


def _strides(domain: ProductDomain) -> list[int]:
    strides = [1] * domain.n
    for i in range(domain.n - 2, -1, -1):
        strides[i] = strides[i + 1] * domain.trees[i + 1].node_count
    return strides


def _op_rank_matrix(domain: ProductDomain, tables: list[OpTable], digs: np.ndarray) -> np.ndarray:
    size = digs.shape[0]
    out = np.zeros((size, size), dtype=np.int64)
    strides = _strides(domain)
    for i in range(domain.n):
        tbl = np.asarray(tables[i], dtype=np.int64)
        out += tbl[digs[:, i][:, None], digs[:, i][None, :]] * strides[i]
    return out


def _values_vector(f: CostFunction, budget: int | None) -> np.ndarray | None:
    table = materialize(f, budget=_pair_budget(budget))
    if max((abs(v) for v in table.values), default=0) >= _INT64_SAFE:
        return None  # fall back to exact Python arithmetic
    return np.asarray(table.values, dtype=np.int64)


def _apply_tables(tables: list[OpTable], x: Labeling, y: Labeling) -> Labeling:
    return tuple(tables[i][x[i]][y[i]] for i in range(len(x)))


def _exhaustive_pair_check(
    f: CostFunction,
    domain: ProductDomain,
    op1: list[OpTable],
    op2: list[OpTable],
    name: str,
    budget: int | None,
) -> CheckReport:
    size = domain.size()
    _require_exhaustible(size, budget)
    values = _values_vector(f, budget)
    if values is not None:
        digs = _digits(domain, size)
        r1 = _op_rank_matrix(domain, op1, digs)
        r2 = _op_rank_matrix(domain, op2, digs)
        lhs = values[:, None] + values[None, :]
        rhs = values[r1] + values[r2]
        viol = lhs < rhs
        if not viol.any():
            return CheckReport(name, "exhaustive", True, None, size * size)
        flat = int(np.argmax(viol))
        xr, yr = divmod(flat, size)
        witness = ViolationWitness(
            name, domain.unrank(xr), domain.unrank(yr), None,
            int(lhs[xr, yr]), int(rhs[xr, yr]),
        )
        return CheckReport(name, "exhaustive", False, witness, size * size)

    # Exact big-integer fallback, same enumeration order.
    table = materialize(f, budget=_pair_budget(budget))
    vals = table.values
    for xr in range(size):
        x = domain.unrank(xr)
        for yr in range(size):
            y = domain.unrank(yr)
            lhs = vals[xr] + vals[yr]
            rhs = table.evaluate(_apply_tables(op1, x, y)) + table.evaluate(
                _apply_tables(op2, x, y)
            )
            if lhs < rhs:
                witness = ViolationWitness(name, x, y, None, lhs, rhs)
                return CheckReport(name, "exhaustive", False, witness, size * size)
    return CheckReport(name, "exhaustive", True, None, size * size)


def _sampled_pair_check(
    f: CostFunction,
    domain: ProductDomain,
    op1: list[OpTable],
    op2: list[OpTable],
    name: str,
    samples: int,
    seed: int,
) -> CheckReport:
    rng = SplitMix64(seed)
    size = domain.size()
    for s in range(samples):
        x = domain.unrank(rng.below(size))
        y = domain.unrank(rng.below(size))
        lhs = f.evaluate(x) + f.evaluate(y)
        rhs = f.evaluate(_apply_tables(op1, x, y)) + f.evaluate(_apply_tables(op2, x, y))
        if lhs < rhs:
            witness = ViolationWitness(name, x, y, None, lhs, rhs)
            return CheckReport(
                name, "sampled", False, witness, s + 1,
                note=f"violation found at sample {s + 1} of {samples}",
            )
    return CheckReport(
        name, "sampled", True, None, samples,
        note=f"no violation found in {samples} samples; not a proof",
    )


def _pair_check(
    f: CostFunction,
    domain: ProductDomain | None,
    op_builder,
    name: str,
    mode: str,
    samples: int,
    seed: int,
    budget: int | None,
) -> CheckReport:
    domain = domain if domain is not None else f.domain
    op1, op2 = op_builder(domain)
    if mode == "exhaustive":
        return _exhaustive_pair_check(f, domain, op1, op2, name, budget)
    if mode == "sampled":
        return _sampled_pair_check(f, domain, op1, op2, name, samples, seed)
    raise DomainError(f"unknown mode {mode!r}; use 'exhaustive' or 'sampled'")


def check_strong(
    f: CostFunction,
    domain: ProductDomain | None = None,
    mode: str = "exhaustive",
    *,
    samples: int = 1000,
    seed: int = 0,
    budget: int | None = None,
) -> CheckReport:
    """Verify f(x)+f(y) >= f(meet)+f(join) for componentwise midpoints."""
    return _pair_check(f, domain, meet_join_tables, "strong", mode, samples, seed, budget)


def check_weak(
    f: CostFunction,
    domain: ProductDomain | None = None,
    mode: str = "exhaustive",
    *,
    samples: int = 1000,
    seed: int = 0,
    budget: int | None = None,
) -> CheckReport:
    """Verify f(x)+f(y) >= f(wedge)+f(vee)."""
    return _pair_check(f, domain, wedge_vee_tables, "weak", mode, samples, seed, budget)


def check_multimorphism(
    f: CostFunction,
    domain: ProductDomain | None = None,
    op_pair: tuple[list[OpTable], list[OpTable]] | None = None,
    mode: str = "exhaustive",
    *,
    samples: int = 1000,
    seed: int = 0,
    budget: int | None = None,
    name: str = "multimorphism",
) -> CheckReport:
    """Verify the binary multimorphism inequality for arbitrary op tables."""
    domain = domain if domain is not None else f.domain
    if op_pair is None:
        raise DomainError("check_multimorphism needs an op_pair of per-tree tables")
    op1, op2 = op_pair
    _validate_tables(domain, op1, "op1")
    _validate_tables(domain, op2, "op2")
    if mode == "exhaustive":
        return _exhaustive_pair_check(f, domain, op1, op2, name, budget)
    if mode == "sampled":
        return _sampled_pair_check(f, domain, op1, op2, name, samples, seed)
    raise DomainError(f"unknown mode {mode!r}; use 'exhaustive' or 'sampled'")


def _max_pair_distance(domain: ProductDomain) -> int:
    worst = 0
    for t in domain.trees:
        for a in range(t.node_count):
            for b in range(t.node_count):
                worst = max(worst, rho(t, a, b))
    return worst


def check_translation(
    f: CostFunction,
    domain: ProductDomain | None = None,
    mode: str = "exhaustive",
    *,
    samples: int = 1000,
    seed: int = 0,
    budget: int | None = None,
) -> CheckReport:
    """Verify the d-step inequality for every pair and every relevant d.

    Per pair, d only needs to range over 0..rho_inf(x, y): beyond that
    every coordinate saturates and the inequality is an equality.  The
    witness therefore always carries d <= rho_inf(x, y), and d ordering
    is ascending within the first violating pair.
    """
    domain = domain if domain is not None else f.domain
    name = "translation"
    note = "d capped at rho_inf(x, y) per pair; all coordinates saturate beyond"
    if mode == "sampled":
        rng = SplitMix64(seed)
        size = domain.size()
        for s in range(samples):
            x = domain.unrank(rng.below(size))
            y = domain.unrank(rng.below(size))
            fx, fy = f.evaluate(x), f.evaluate(y)
            dmax = max(rho(t, xi, yi) for t, xi, yi in zip(domain.trees, x, y))
            for d in range(dmax + 1):
                moved = [up_down(t, xi, yi, d) for t, xi, yi in zip(domain.trees, x, y)]
                up = tuple(m[0] for m in moved)
                down = tuple(m[1] for m in moved)
                lhs = fx + fy
                rhs = f.evaluate(up) + f.evaluate(down)
                if lhs < rhs:
                    witness = ViolationWitness(name, x, y, d, lhs, rhs)
                    return CheckReport(
                        name, "sampled", False, witness, s + 1,
                        note=f"violation found at sample {s + 1} of {samples}",
                    )
        return CheckReport(
            name, "sampled", True, None, samples,
            note=f"no violation found in {samples} samples; not a proof",
        )
    if mode != "exhaustive":
        raise DomainError(f"unknown mode {mode!r}; use 'exhaustive' or 'sampled'")

    size = domain.size()
    _require_exhaustible(size, budget)
    dmax = _max_pair_distance(domain)
    values = _values_vector(f, budget)
    if values is not None:
        digs = _digits(domain, size)
        lhs = values[:, None] + values[None, :]
        viol_by_d = []
        for d in range(dmax + 1):
            op1, op2 = up_down_tables(domain, d)
            r1 = _op_rank_matrix(domain, op1, digs)
            r2 = _op_rank_matrix(domain, op2, digs)
            viol_by_d.append(lhs < values[r1] + values[r2])
        any_viol = np.logical_or.reduce(viol_by_d)
        if not any_viol.any():
            return CheckReport(name, "exhaustive", True, None, size * size, note=note)
        flat = int(np.argmax(any_viol))
        xr, yr = divmod(flat, size)
        d_star = next(d for d in range(dmax + 1) if viol_by_d[d][xr, yr])
        x, y = domain.unrank(xr), domain.unrank(yr)
        op1, op2 = up_down_tables(domain, d_star)
        table = materialize(f, budget=_pair_budget(budget))
        lhs_v = table.values[xr] + table.values[yr]
        rhs_v = table.evaluate(_apply_tables(op1, x, y)) + table.evaluate(
            _apply_tables(op2, x, y)
        )
        witness = ViolationWitness(name, x, y, d_star, lhs_v, rhs_v)
        return CheckReport(name, "exhaustive", False, witness, size * size, note=note)

    table = materialize(f, budget=_pair_budget(budget))
    vals = table.values
    for xr in range(size):
        x = domain.unrank(xr)
        for yr in range(size):
            y = domain.unrank(yr)
            pair_d = max(rho(t, xi, yi) for t, xi, yi in zip(domain.trees, x, y))
            for d in range(pair_d + 1):
                moved = [up_down(t, xi, yi, d) for t, xi, yi in zip(domain.trees, x, y)]
                up = tuple(m[0] for m in moved)
                down = tuple(m[1] for m in moved)
                lhs = vals[xr] + vals[yr]
                rhs = table.evaluate(up) + table.evaluate(down)
                if lhs < rhs:
                    witness = ViolationWitness(name, x, y, d, lhs, rhs)
                    return CheckReport(name, "exhaustive", False, witness, size * size, note=note)
    return CheckReport(name, "exhaustive", True, None, size * size, note=note)


# ---------------------------------------------------------------------------
# Restriction checks used by the descent neighborhoods


def check_cube_submodular(g: BinaryCubeFunction, budget: int | None = None) -> CheckReport:
    """Exhaustive submodularity check of a binary-cube restriction.

    The cube over the free coordinates is a product of 2-node chains, on
    which the midpoint pair coincides with set intersection/union, so the
    generic strong check applies.  Witness labelings are reported as
    sorted tuples of the free coordinate ids in each subset.
    """
    free = g.free
    if not free:
        return CheckReport("submodular-cube", "exhaustive", True, None, 1,
                           note="no free coordinates")
    domain = ProductDomain([RootedTree([-1, 0]) for _ in free])
    values = [
        g.evaluate(frozenset(free[j] for j in range(len(free)) if bits[j]))
        for bits in domain.labelings()
    ]
    report = check_strong(DenseTable(domain, values), budget=budget)
    witness = report.witness
    if witness is not None:
        def to_subset(bits):
            return tuple(sorted(free[j] for j in range(len(free)) if bits[j]))

        witness = ViolationWitness(
            "submodular-cube", to_subset(witness.x), to_subset(witness.y),
            None, witness.lhs, witness.rhs,
        )
    return CheckReport("submodular-cube", report.mode, report.ok, witness,
                       report.pairs_checked, report.note)


_SIGN_TREES = {
    (0,): RootedTree([-1]),
    (-1, 0): RootedTree([-1, 0]),
    (0, 1): RootedTree([-1, 0]),
    (-1, 0, 1): RootedTree([-1, 0, 0]),
}

_SIGN_OF_NODE = {
    (0,): (0,),
    (-1, 0): (0, -1),
    (0, 1): (0, 1),
    (-1, 0, 1): (0, -1, 1),
}


def check_sign_box_bisubmodular(h: SignBoxFunction, budget: int | None = None) -> CheckReport:
    """Exhaustive bisubmodularity check of a sign-box restriction.

    Each coordinate's allowed signs embed into a 1-3 node rooted tree on
    which the midpoint pair realizes join = sign(a+b) and
    meet = |ab| * sign(a+b), so the generic strong check applies.
    Witnesses are reported as sign vectors.
    """
    trees = [_SIGN_TREES[allowed] for allowed in h.allowed]
    sign_maps = [_SIGN_OF_NODE[allowed] for allowed in h.allowed]
    domain = ProductDomain(trees)
    values = [
        h.evaluate(tuple(sign_maps[i][v] for i, v in enumerate(labels)))
        for labels in domain.labelings()
    ]
    report = check_strong(DenseTable(domain, values), budget=budget)
    witness = report.witness
    if witness is not None:
        def to_signs(labels):
            return tuple(sign_maps[i][v] for i, v in enumerate(labels))

        witness = ViolationWitness(
            "bisubmodular-box", to_signs(witness.x), to_signs(witness.y),
            None, witness.lhs, witness.rhs,
        )
    return CheckReport("bisubmodular-box", report.mode, report.ok, witness,
                       report.pairs_checked, report.note)
