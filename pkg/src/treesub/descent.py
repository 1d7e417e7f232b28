"""Two-stage steepest descent over products of rooted binary trees.

Starting from any labeling (all roots by default), the first stage
repeatedly replaces the current labeling with the best strictly better
point of its inward neighborhood (every coordinate stays or moves to its
parent); the second stage does the same with the outward neighborhood
(every coordinate stays or moves to one of its at most two children).
The inward restriction of a strongly tree-submodular cost is submodular
on a binary cube and the outward restriction is bisubmodular on a sign
box, so each stage is an exact inner minimization.

For strongly tree-submodular costs each stage accepts at most
K = max_i |D_i| moves and the final labeling is a global minimizer; the
certificate in the trace records that both neighborhoods were re-solved
at termination without finding a better point.  A safety cap of K + 1
accepted moves per stage turns a violated bound (non-submodular input or
a solver bug) into a loud error instead of a long walk.

Optional diagnostics track the distance from the current labeling to the
nearest minimizer over its ancestor ideal and descendant filter; they
cost an exponential enumeration and are meant for tests and benchmarks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (
    BudgetExceededError,
    DomainError,
    IterationBoundError,
    UnsupportedStructureError,
)
from .functions import (
    DEFAULT_CELL_BUDGET,
    CostFunction,
    Labeling,
    ProductDomain,
    enumeration_budget,
)
from .solvers import (
    BinaryCubeFunction,
    SignBoxFunction,
    bisub_brute,
    bisub_minnorm,
    sfm_brute,
    sfm_wolfe,
)

INWARD_ENGINES = ("brute", "wolfe")
OUTWARD_ENGINES = ("brute", "minnorm")


@dataclass(frozen=True)
class Certificate:
    """Both neighborhoods re-solved at termination without improvement."""

    inward_opt: bool
    outward_opt: bool

    def holds(self) -> bool:
        return self.inward_opt and self.outward_opt


@dataclass(frozen=True)
class StepDiagnostics:
    """Distances to the nearest ideal/filter optimum at one point of a run."""

    stage: str  # "start", "s1" or "s2"
    value: int
    rho_minus: int
    rho_plus: int
    inward_still_optimal: bool | None = None  # re-solved after s2 moves only


@dataclass
class DescentTrace:
    """Iteration accounting for one descent run.

    ``values`` holds the start cost followed by the cost after each
    accepted move, so it is strictly decreasing.  For verified strongly
    tree-submodular inputs both step counts stay at or below K.
    """

    s1_steps: int
    s2_steps: int
    values: list[int]
    K: int
    certificate: Certificate
    diagnostics: list[StepDiagnostics] | None = None


def inward_restrict(f: CostFunction, domain: ProductDomain | None, x: Labeling) -> BinaryCubeFunction:
    """Restriction of f to the inward neighborhood of x, as a cube function.

    Coordinate i is free iff x_i is not the root; a subset of free
    coordinates maps to the labeling that replaces those coordinates with
    their parents.  The empty set maps to x itself.
    """
    domain = domain if domain is not None else f.domain
    x = domain.validate(x)
    free = tuple(i for i, t in enumerate(domain.trees) if x[i] != t.root)
    free_set = frozenset(free)

    def evaluate(subset: frozenset[int]) -> int:
        if not subset <= free_set:
            raise DomainError(f"subset {sorted(subset)} leaves the free set {sorted(free_set)}")
        y = list(x)
        for i in subset:
            y[i] = domain.trees[i].parent[x[i]]
        return f.evaluate(tuple(y))

    return BinaryCubeFunction(m=domain.n, free=free, evaluate=evaluate)


def apply_inward(domain: ProductDomain, x: Labeling, subset: frozenset[int]) -> Labeling:
    return tuple(
        domain.trees[i].parent[x[i]] if i in subset else x[i] for i in range(domain.n)
    )


def outward_restrict(f: CostFunction, domain: ProductDomain | None, x: Labeling) -> SignBoxFunction:
    """Restriction of f to the outward neighborhood of x, as a sign box.

    Sign -1 moves coordinate i to the first child of x_i and +1 to the
    second child; signs without a child are excluded from the allowed
    set.  The all-zeros vector maps to x itself.  Requires binary trees.
    """
    domain = domain if domain is not None else f.domain
    x = domain.validate(x)
    _require_binary(domain)
    allowed = []
    for i, t in enumerate(domain.trees):
        kids = t.children[x[i]]
        if len(kids) == 0:
            allowed.append((0,))
        elif len(kids) == 1:
            allowed.append((-1, 0))
        else:
            allowed.append((-1, 0, 1))
    allowed = tuple(allowed)

    def evaluate(signs) -> int:
        if len(signs) != domain.n:
            raise DomainError(f"sign vector length {len(signs)} does not match arity {domain.n}")
        y = list(x)
        for i, s in enumerate(signs):
            if s == 0:
                continue
            if s not in allowed[i]:
                raise DomainError(f"sign {s} not allowed at coordinate {i}")
            kids = domain.trees[i].children[x[i]]
            y[i] = kids[0] if s == -1 else kids[1]
        return f.evaluate(tuple(y))

    return SignBoxFunction(m=domain.n, allowed=allowed, evaluate=evaluate)


def apply_outward(domain: ProductDomain, x: Labeling, signs) -> Labeling:
    y = list(x)
    for i, s in enumerate(signs):
        if s:
            kids = domain.trees[i].children[x[i]]
            y[i] = kids[0] if s == -1 else kids[1]
    return tuple(y)


def _require_binary(domain: ProductDomain) -> None:
    for i, t in enumerate(domain.trees):
        for v, kids in enumerate(t.children):
            if len(kids) > 2:
                raise UnsupportedStructureError(
                    f"tree {i} is not binary: node {v} has {len(kids)} children"
                )


def _solve_inward(f, domain, x, engine: str, eps: float):
    cube = inward_restrict(f, domain, x)
    if engine == "brute":
        return sfm_brute(cube)
    if engine == "wolfe":
        return sfm_wolfe(cube, eps)
    raise DomainError(f"unknown inward engine {engine!r}; known: {INWARD_ENGINES}")


def _solve_outward(f, domain, x, engine: str, eps: float):
    box = outward_restrict(f, domain, x)
    if engine == "brute":
        return bisub_brute(box)
    if engine == "minnorm":
        return bisub_minnorm(box, eps)
    raise DomainError(f"unknown outward engine {engine!r}; known: {OUTWARD_ENGINES}")


def rho_minus(
    f: CostFunction,
    domain: ProductDomain | None,
    x: Labeling,
    budget: int | None = None,
) -> int:
    """Distance from x to the nearest minimizer of f over {y preceding x}.

    Exact, by enumerating the ancestor ideal of x.  Zero iff x minimizes
    f over its inward neighborhood.
    """
    domain = domain if domain is not None else f.domain
    x = domain.validate(x)
    chains = []
    for i, t in enumerate(domain.trees):
        chain = [x[i]]
        while chain[-1] != t.root:
            chain.append(t.parent[chain[-1]])
        chains.append(chain)
    return _nearest_optimum_distance(f, domain, x, chains, budget)


def rho_plus(
    f: CostFunction,
    domain: ProductDomain | None,
    x: Labeling,
    budget: int | None = None,
) -> int:
    """Distance from x to the nearest minimizer of f over {y succeeding x}."""
    domain = domain if domain is not None else f.domain
    x = domain.validate(x)
    regions = []
    for i, t in enumerate(domain.trees):
        below = []
        stack = [x[i]]
        while stack:
            v = stack.pop()
            below.append(v)
            stack.extend(t.children[v])
        regions.append(below)
    return _nearest_optimum_distance(f, domain, x, regions, budget)


def _nearest_optimum_distance(f, domain, x, regions, budget) -> int:
    limit = budget if budget is not None else enumeration_budget(DEFAULT_CELL_BUDGET)
    region_size = 1
    for r in regions:
        region_size *= len(r)
    if region_size > limit:
        raise BudgetExceededError(f"region of {region_size} labelings exceeds budget {limit}")
    best_value: int | None = None
    best_dist = 0
    for y in itertools.product(*regions):
        value = f.evaluate(y)
        # ancestor/descendant moves stay on root paths, so the per-tree
        # distance is a depth difference
        dist = max(
            abs(domain.trees[i].depth[y[i]] - domain.trees[i].depth[x[i]])
            for i in range(domain.n)
        )
        if best_value is None or value < best_value or (value == best_value and dist < best_dist):
            best_value, best_dist = value, dist
    return best_dist


def minimize(
    f: CostFunction,
    domain: ProductDomain | None = None,
    x0: Labeling | None = None,
    *,
    inward_engine: str = "brute",
    outward_engine: str = "brute",
    eps: float = 1e-10,
    diagnostics: bool = False,
    diagnostics_budget: int | None = None,
) -> tuple[Labeling, int, DescentTrace]:
    """Run the two-stage descent to a certified local (hence, for strongly
    tree-submodular costs, global) minimum.

    Moves are accepted only on strict improvement, so the value sequence
    strictly decreases and the run terminates.  The default start is the
    all-roots labeling, which makes the first stage vacuous.
    """
    domain = domain if domain is not None else f.domain
    _require_binary(domain)
    x = domain.validate(x0) if x0 is not None else domain.all_roots()
    K = max(t.node_count for t in domain.trees)
    fx = f.evaluate(x)
    values = [fx]
    diag: list[StepDiagnostics] | None = [] if diagnostics else None

    def record(stage: str, inward_ok: bool | None = None) -> None:
        if diag is None:
            return
        diag.append(
            StepDiagnostics(
                stage=stage,
                value=fx,
                rho_minus=rho_minus(f, domain, x, budget=diagnostics_budget),
                rho_plus=rho_plus(f, domain, x, budget=diagnostics_budget),
                inward_still_optimal=inward_ok,
            )
        )

    record("start")

    s1 = 0
    while True:
        subset, val = _solve_inward(f, domain, x, inward_engine, eps)
        if val < fx:
            x = apply_inward(domain, x, subset)
            fx = val
            s1 += 1
            if s1 > K + 1:
                raise IterationBoundError(
                    f"inward stage accepted {s1} moves, above the K+1 cap ({K + 1}); "
                    "the cost is likely not strongly tree-submodular"
                )
            values.append(fx)
            record("s1")
        else:
            break

    s2 = 0
    while True:
        signs, val = _solve_outward(f, domain, x, outward_engine, eps)
        if val < fx:
            x = apply_outward(domain, x, signs)
            fx = val
            s2 += 1
            if s2 > K + 1:
                raise IterationBoundError(
                    f"outward stage accepted {s2} moves, above the K+1 cap ({K + 1}); "
                    "the cost is likely not strongly tree-submodular"
                )
            values.append(fx)
            if diag is not None:
                _, inward_val = _solve_inward(f, domain, x, "brute", eps)
                record("s2", inward_ok=inward_val == fx)
        else:
            break

    _, final_in = _solve_inward(f, domain, x, inward_engine, eps)
    _, final_out = _solve_outward(f, domain, x, outward_engine, eps)
    certificate = Certificate(inward_opt=final_in == fx, outward_opt=final_out == fx)
    trace = DescentTrace(
        s1_steps=s1,
        s2_steps=s2,
        values=values,
        K=K,
        certificate=certificate,
        diagnostics=diag,
    )
    return x, fx, trace


def minimize_exhaustive(
    f: CostFunction,
    domain: ProductDomain | None = None,
    budget: int | None = None,
) -> tuple[Labeling, int]:
    """Global minimum by scanning the whole domain; ties pick the lowest rank.

    Works for any tree shapes, including non-binary ones that the descent
    rejects, and doubles as the oracle the descent is tested against.
    """
    domain = domain if domain is not None else f.domain
    limit = budget if budget is not None else enumeration_budget(DEFAULT_CELL_BUDGET)
    size = domain.size()
    if size > limit:
        raise BudgetExceededError(f"domain size {size} exceeds budget {limit}")
    best_x: Labeling | None = None
    best = 0
    for x in domain.labelings():
        value = f.evaluate(x)
        if best_x is None or value < best:
            best_x, best = x, value
    assert best_x is not None
    return best_x, best
