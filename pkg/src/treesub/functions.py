"""Product label domains, exact cost functions, and verified generators.

Costs are exact rationals stored as integers in units of 1/denominator,
with one denominator per function.  Every comparison made anywhere in the
package is therefore an exact integer comparison; floating point appears
only inside the optional min-norm solvers.

Generators never assume a construction is tree-submodular: every emitted
fixture is re-verified by the property checker before it is returned, and
rejection sampling fails loudly with its acceptance rate when a parameter
choice is infeasible.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .errors import BudgetExceededError, DomainError, GenerationError, InternalError
from .rng import SplitMix64
from .trees import RootedTree, meet_join, rho, wedge_vee

Labeling = tuple[int, ...]

_MAX_DOMAIN_SIZE = 1 << 62  # keeps rank arithmetic inside int64

DEFAULT_PAIR_BUDGET = 10**6
DEFAULT_CELL_BUDGET = 10**6
DEFAULT_BOX_BUDGET = 3**12


def enumeration_budget(default: int) -> int:
    """Default budget, overridable through the TREESUB_BUDGET variable."""
    raw = os.environ.get("TREESUB_BUDGET")
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise DomainError(f"TREESUB_BUDGET={raw!r} is not an integer") from exc
    if value <= 0:
        raise DomainError(f"TREESUB_BUDGET={value} must be positive")
    return value


class ProductDomain:
    """Ordered product of rooted-tree label domains.

    A labeling is a tuple of node ids, one per tree.  Labelings are
    ranked in mixed radix with variable 0 most significant.
    """

    __slots__ = ("trees",)

    def __init__(self, trees: Sequence[RootedTree]):
        trees = tuple(trees)
        if not trees:
            raise DomainError("a domain needs at least one variable")
        size = 1
        for t in trees:
            size *= t.node_count
            if size > _MAX_DOMAIN_SIZE:
                raise DomainError("domain size exceeds the 2**62 guard")
        self.trees = trees

    @property
    def n(self) -> int:
        return len(self.trees)

    def size(self) -> int:
        out = 1
        for t in self.trees:
            out *= t.node_count
        return out

    def cardinalities(self) -> tuple[int, ...]:
        return tuple(t.node_count for t in self.trees)

    def all_roots(self) -> Labeling:
        return tuple(t.root for t in self.trees)

    def validate(self, x: Sequence[int]) -> Labeling:
        if len(x) != len(self.trees):
            raise DomainError(
                f"labeling length {len(x)} does not match arity {len(self.trees)}"
            )
        for t, v in zip(self.trees, x):
            t.check_node(v)
        return tuple(x)

    def rank(self, x: Sequence[int]) -> int:
        if len(x) != len(self.trees):
            raise DomainError(
                f"labeling length {len(x)} does not match arity {len(self.trees)}"
            )
        r = 0
        for t, v in zip(self.trees, x):
            t.check_node(v)
            r = r * t.node_count + v
        return r

    def unrank(self, k: int) -> Labeling:
        size = self.size()
        if not 0 <= k < size:
            raise DomainError(f"rank {k} is not in 0..{size - 1}")
        out = [0] * len(self.trees)
        for i in range(len(self.trees) - 1, -1, -1):
            k, out[i] = divmod(k, self.trees[i].node_count)
        return tuple(out)

    def labelings(self) -> Iterator[Labeling]:
        """All labelings in rank order."""
        return itertools.product(*(range(t.node_count) for t in self.trees))

    def __eq__(self, other) -> bool:
        return isinstance(other, ProductDomain) and self.trees == other.trees

    def __hash__(self) -> int:
        return hash(self.trees)

    def __repr__(self) -> str:
        return f"ProductDomain({self.cardinalities()})"


def rank(domain: ProductDomain, x: Sequence[int]) -> int:
    return domain.rank(x)


def unrank(domain: ProductDomain, k: int) -> Labeling:
    return domain.unrank(k)


class CostFunction:
    """Exact cost oracle over a ProductDomain.

    ``evaluate`` returns an integer in units of 1/denominator; ``value``
    returns the same cost as a Fraction.  Instances are immutable and the
    oracles are pure, so concurrent evaluation is safe.
    """

    domain: ProductDomain
    denominator: int

    def evaluate(self, x: Sequence[int]) -> int:
        raise NotImplementedError

    def value(self, x: Sequence[int]) -> Fraction:
        return Fraction(self.evaluate(x), self.denominator)


def _check_denominator(denominator: int) -> int:
    if not isinstance(denominator, int) or denominator < 1:
        raise DomainError(f"denominator {denominator!r} must be a positive integer")
    return denominator


class DenseTable(CostFunction):
    """Costs as a flat integer table indexed by labeling rank."""

    __slots__ = ("domain", "denominator", "values")

    def __init__(self, domain: ProductDomain, values: Sequence[int], denominator: int = 1):
        values = tuple(int(v) for v in values)
        if len(values) != domain.size():
            raise DomainError(
                f"table has {len(values)} entries, domain has {domain.size()}"
            )
        self.domain = domain
        self.denominator = _check_denominator(denominator)
        self.values = values

    def evaluate(self, x: Sequence[int]) -> int:
        k = self.domain.rank(x)
        if k >= len(self.values):
            raise InternalError("cost table shorter than the domain")
        return self.values[k]


@dataclass(frozen=True)
class Term:
    """One summand: a scope of at most three variables and its sub-table.

    ``values`` is indexed in mixed radix over the scope's label counts,
    with the first scope variable most significant.
    """

    scope: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= len(self.scope) <= 3:
            raise DomainError(f"term arity {len(self.scope)} is not in 1..3")
        if len(set(self.scope)) != len(self.scope):
            raise DomainError(f"term scope {self.scope} repeats a variable")


class SumOfTerms(CostFunction):
    """Costs as a sum of low-arity terms sharing one denominator."""

    __slots__ = ("domain", "denominator", "terms")

    def __init__(self, domain: ProductDomain, terms: Sequence[Term], denominator: int = 1):
        terms = tuple(terms)
        for t in terms:
            expected = 1
            for i in t.scope:
                if not 0 <= i < domain.n:
                    raise DomainError(f"term scope index {i} is out of range")
                expected *= domain.trees[i].node_count
            if len(t.values) != expected:
                raise DomainError(
                    f"term over scope {t.scope} has {len(t.values)} entries, expected {expected}"
                )
        self.domain = domain
        self.denominator = _check_denominator(denominator)
        self.terms = terms

    def evaluate(self, x: Sequence[int]) -> int:
        x = self.domain.validate(x)
        total = 0
        for t in self.terms:
            idx = 0
            for i in t.scope:
                idx = idx * self.domain.trees[i].node_count + x[i]
            total += t.values[idx]
        return total


def materialize(f: CostFunction, budget: int | None = None) -> DenseTable:
    """Evaluate f on every labeling and return the dense table."""
    if isinstance(f, DenseTable):
        return f
    size = f.domain.size()
    limit = budget if budget is not None else enumeration_budget(DEFAULT_CELL_BUDGET)
    if size > limit:
        raise BudgetExceededError(f"materializing {size} cells exceeds budget {limit}")
    values = [f.evaluate(x) for x in f.domain.labelings()]
    return DenseTable(f.domain, values, f.denominator)


@dataclass(frozen=True)
class InstanceFixture:
    """A domain plus cost function whose listed properties re-verify."""

    domain: ProductDomain
    function: CostFunction
    verified_properties: frozenset[str]
    provenance: str
    start: Labeling | None = None


# ---------------------------------------------------------------------------
# Tree builders


def chain_tree(node_count: int) -> RootedTree:
    """Chain 0-1-...-(n-1) rooted at 0, so label id equals depth."""
    if node_count < 1:
        raise DomainError("chain needs at least one node")
    return RootedTree([-1] + list(range(node_count - 1)))


def star3_tree() -> RootedTree:
    """Root 0 with leaf children 1 and 2; signs read as 1 -> -1, 2 -> +1."""
    return RootedTree([-1, 0, 0])


def complete_binary_tree(levels: int) -> RootedTree:
    """Complete binary tree with the given number of levels (>= 1)."""
    if levels < 1:
        raise DomainError("need at least one level")
    n = 2**levels - 1
    return RootedTree([-1] + [(v - 1) // 2 for v in range(1, n)])


def fork_tree(k: int) -> RootedTree:
    """Chain 0..k with two extra leaves k+1 and k+2 attached at node k."""
    if k < 0:
        raise DomainError("fork chain length must be non-negative")
    return RootedTree([-1] + list(range(k)) + [k, k])


def random_tree(rng: SplitMix64, node_count: int, max_children: int = 2) -> RootedTree:
    """Uniform-ish random tree: each new node picks a non-full parent."""
    if node_count < 1:
        raise DomainError("tree needs at least one node")
    parent = [-1]
    load = [0]
    for v in range(1, node_count):
        open_slots = [u for u in range(v) if load[u] < max_children]
        p = open_slots[rng.below(len(open_slots))]
        parent.append(p)
        load[p] += 1
        load.append(0)
    return RootedTree(parent)


# ---------------------------------------------------------------------------
# Generators

_PROPERTY_NAMES = ("strong", "weak", "translation")


def _unary_pairs(tree: RootedTree, op) -> list[tuple[int, int, int, int]]:
    out = []
    for a in range(tree.node_count):
        for b in range(tree.node_count):
            u, v = op(tree, a, b)
            out.append((a, b, u, v))
    return out


def _convex_of_depth(rng: SplitMix64, tree: RootedTree, max_value: int) -> list[int]:
    """Unary table h(depth) with h convex and non-decreasing.

    Such tables satisfy both the midpoint-pair and the wedge/vee unary
    inequalities on any tree, so they give the generator a proposal that
    always survives verification.
    """
    max_depth = max(tree.depth)
    increments = sorted(rng.below(max(1, max_value // 2) + 1) for _ in range(max_depth))
    h = [rng.below(max_value + 1)]
    for step in increments:
        h.append(h[-1] + step)
    return [h[tree.depth[v]] for v in range(tree.node_count)]


def _distance_to_target(rng: SplitMix64, tree: RootedTree, max_value: int) -> list[int]:
    """Unary table scale * rho(v, target), convex along every path.

    Distance to a fixed node is convex along any path of a tree, so this
    proposal survives both unary inequalities while placing its minimum
    at an arbitrary node instead of the root.
    """
    target = rng.below(tree.node_count)
    scale = 1 + rng.below(max(1, max_value // 4))
    return [scale * rho(tree, v, target) for v in range(tree.node_count)]


def _random_unary(
    rng: SplitMix64,
    tree: RootedTree,
    op,
    max_value: int,
    tries: int = 10_000,
) -> list[int]:
    """Unary table passing g(a)+g(b) >= g(op1)+g(op2) for every pair.

    Proposals rotate between uniform tables, convex-of-depth tables with
    small noise, and distance-to-target tables with small noise; a
    noise-free convex-of-depth table is the last resort, so the loop
    always terminates.
    """
    pairs = _unary_pairs(tree, op)
    n = tree.node_count
    noise = min(2, max_value)
    for attempt in range(tries):
        if attempt == tries - 1:
            g = _convex_of_depth(rng, tree, max_value)
        elif attempt % 3 == 0:
            g = [rng.below(max_value + 1) for _ in range(n)]
        elif attempt % 3 == 1:
            base = _convex_of_depth(rng, tree, max_value)
            g = [base[v] + rng.below(noise + 1) for v in range(n)]
        else:
            base = _distance_to_target(rng, tree, max_value)
            g = [base[v] + rng.below(noise + 1) for v in range(n)]
        if all(g[a] + g[b] >= g[u] + g[v] for a, b, u, v in pairs):
            return g
    raise GenerationError("unary rejection sampling failed", attempts=tries)


def _depth_coupling_term(
    domain: ProductDomain, i: int, j: int, weight: int
) -> Term:
    """Pairwise term weight * |depth(x_i) - depth(x_j)|."""
    ti, tj = domain.trees[i], domain.trees[j]
    values = [
        weight * abs(ti.depth[a] - tj.depth[b])
        for a in range(ti.node_count)
        for b in range(tj.node_count)
    ]
    return Term(scope=(i, j), values=tuple(values))


def _run_check(kind: str, f: CostFunction, budget: int | None):
    from . import checks  # deferred: checks imports this module

    if kind == "strong":
        return checks.check_strong(f, budget=budget)
    if kind == "weak":
        return checks.check_weak(f, budget=budget)
    if kind == "translation":
        return checks.check_translation(f, budget=budget)
    raise DomainError(f"unknown property {kind!r}")


def _verify_properties(
    f: CostFunction, wanted: Sequence[str], budget: int | None
) -> frozenset[str]:
    verified = set()
    for name in wanted:
        report = _run_check(name, f, budget)
        if not report.ok:
            raise GenerationError(f"construction failed the {name} check")
        verified.add(name)
    return frozenset(verified)


def _random_verified(
    kind: str,
    domain: ProductDomain,
    seed: int,
    max_value: int,
    attempt_budget: int,
    pair_budget: int | None,
) -> InstanceFixture:
    """Rejection loop shared by the random-verified-strong/weak kinds.

    Candidates are separable bases (per-variable unary tables, themselves
    rejection-sampled against the unary inequality) optionally coupled by
    depth-distance terms and, on small domains, a little dense noise.
    Every candidate goes through the exhaustive checker; nothing is
    trusted by construction.
    """
    prop = "strong" if kind == "random-verified-strong" else "weak"
    op = meet_join if prop == "strong" else wedge_vee
    rng = SplitMix64(seed)
    size = domain.size()
    limit = pair_budget if pair_budget is not None else enumeration_budget(DEFAULT_PAIR_BUDGET)
    if size * size > limit:
        raise BudgetExceededError(
            f"domain size {size} needs {size * size} verification pairs, budget {limit}"
        )
    if attempt_budget < 1:
        raise GenerationError(
            "attempt budget 0: acceptance rate 0/0", attempts=0, accepted=0
        )
    for attempt in range(attempt_budget):
        style = attempt % 3  # 0: +noise, 1: +couplings, 2: separable only
        terms = [
            Term(scope=(i,), values=tuple(_random_unary(rng, t, op, max_value)))
            for i, t in enumerate(domain.trees)
        ]
        if style in (0, 1) and domain.n >= 2:
            pairs = list(itertools.combinations(range(domain.n), 2))
            for _ in range(1 + rng.below(domain.n)):
                i, j = pairs[rng.below(len(pairs))]
                terms.append(_depth_coupling_term(domain, i, j, 1 + rng.below(2)))
        candidate: CostFunction = SumOfTerms(domain, terms)
        if style == 0 and size <= 64:
            table = list(materialize(candidate).values)
            noise = min(2, max_value)
            values = [v + rng.below(noise + 1) for v in table]
            candidate = DenseTable(domain, values)
        table_fn = materialize(candidate)
        report = _run_check(prop, table_fn, pair_budget)
        if report.ok:
            return InstanceFixture(
                domain=domain,
                function=table_fn,
                verified_properties=frozenset({prop}),
                provenance=f"{kind} seed={seed} attempt={attempt} style={style}",
            )
    raise GenerationError(
        f"{kind}: no candidate accepted; acceptance rate 0/{attempt_budget}",
        attempts=attempt_budget,
        accepted=0,
    )


def _chain_separable(
    domain: ProductDomain,
    seed: int,
    max_value: int,
    pair_budget: int | None,
) -> InstanceFixture:
    """Separable convex costs plus |x_i - x_j| couplings on chain domains."""
    for i, t in enumerate(domain.trees):
        if not t.is_chain():
            raise DomainError(f"chain-separable needs chain trees; tree {i} is not")
    rng = SplitMix64(seed)
    terms = []
    for i, t in enumerate(domain.trees):
        target = rng.below(t.node_count)
        scale = 1 + rng.below(3)
        values = [scale * (v - target) ** 2 for v in range(t.node_count)]
        terms.append(Term(scope=(i,), values=tuple(values)))
    if domain.n >= 2:
        for i, j in itertools.combinations(range(domain.n), 2):
            weight = rng.below(3)
            if weight:
                terms.append(_depth_coupling_term(domain, i, j, weight))
    f = SumOfTerms(domain, terms)
    verified = _verify_properties(f, ["strong"], pair_budget)
    return InstanceFixture(
        domain=domain,
        function=f,
        verified_properties=verified,
        provenance=f"chain-separable seed={seed}",
    )


def _catalog_builders() -> dict[str, Callable[[], InstanceFixture]]:
    def chain5_separable() -> InstanceFixture:
        domain = ProductDomain([chain_tree(5), chain_tree(5)])
        terms = [
            Term(scope=(0,), values=tuple((v - 3) ** 2 for v in range(5))),
            Term(scope=(1,), values=tuple((v - 1) ** 2 for v in range(5))),
            _depth_coupling_term(domain, 0, 1, 2),
        ]
        f = SumOfTerms(domain, terms)
        verified = _verify_properties(f, ["strong", "translation", "weak"], None)
        return InstanceFixture(domain, f, verified, "catalog chain5-separable")

    def chain5_concave() -> InstanceFixture:
        domain = ProductDomain([chain_tree(5)])
        f = DenseTable(domain, [-(v**2) for v in range(5)])
        return InstanceFixture(domain, f, frozenset(), "catalog chain5-concave")

    def star3_root_spike() -> InstanceFixture:
        domain = ProductDomain([star3_tree()])
        f = DenseTable(domain, [1, 0, 0])
        return InstanceFixture(domain, f, frozenset(), "catalog star3-root-spike")

    def bintree5_strong() -> InstanceFixture:
        tree = RootedTree([-1, 0, 0, 1, 1])
        domain = ProductDomain([tree, tree])
        inner = _random_verified(
            "random-verified-strong", domain, seed=42, max_value=20,
            attempt_budget=1000, pair_budget=None,
        )
        return InstanceFixture(
            inner.domain, inner.function, inner.verified_properties,
            "catalog bintree5-strong (seed 42)",
        )

    def fork2_weak() -> InstanceFixture:
        domain = ProductDomain([fork_tree(2), fork_tree(2)])
        inner = _random_verified(
            "random-verified-weak", domain, seed=7, max_value=20,
            attempt_budget=1000, pair_budget=None,
        )
        return InstanceFixture(
            inner.domain, inner.function, inner.verified_properties,
            "catalog fork2-weak (seed 7)",
        )

    def chain5_quadratic() -> InstanceFixture:
        domain = ProductDomain([chain_tree(5)])
        f = DenseTable(domain, [v**2 for v in range(5)])
        verified = _verify_properties(f, ["strong", "translation", "weak"], None)
        return InstanceFixture(
            domain, f, verified, "catalog chain5-quadratic (start at 4)", start=(4,)
        )

    def const_mixed() -> InstanceFixture:
        domain = ProductDomain([chain_tree(3), star3_tree()])
        f = DenseTable(domain, [5] * domain.size())
        verified = _verify_properties(f, ["strong", "translation", "weak"], None)
        return InstanceFixture(domain, f, verified, "catalog const-mixed")

    return {
        "chain5-separable": chain5_separable,
        "chain5-concave": chain5_concave,
        "star3-root-spike": star3_root_spike,
        "bintree5-strong": bintree5_strong,
        "fork2-weak": fork2_weak,
        "chain5-quadratic": chain5_quadratic,
        "const-mixed": const_mixed,
    }


def fixture_catalog_names() -> tuple[str, ...]:
    return tuple(sorted(_catalog_builders()))


GENERATE_KINDS = (
    "random-verified-strong",
    "random-verified-weak",
    "chain-separable",
    "fixture-catalog",
)


def generate(
    kind: str,
    domain: ProductDomain | None = None,
    seed: int = 0,
    *,
    name: str | None = None,
    max_value: int = 20,
    attempt_budget: int = 1000,
    pair_budget: int | None = None,
) -> InstanceFixture:
    """Produce an InstanceFixture whose declared properties were checked.

    Deterministic given (kind, domain, seed) and the keyword parameters;
    all randomness flows through one splitmix64 stream seeded with
    ``seed``.
    """
    if kind == "fixture-catalog":
        builders = _catalog_builders()
        if name not in builders:
            raise DomainError(
                f"unknown fixture name {name!r}; known: {', '.join(sorted(builders))}"
            )
        return builders[name]()
    if domain is None:
        raise DomainError(f"kind {kind!r} needs a domain")
    if kind == "chain-separable":
        return _chain_separable(domain, seed, max_value, pair_budget)
    if kind in ("random-verified-strong", "random-verified-weak"):
        return _random_verified(kind, domain, seed, max_value, attempt_budget, pair_budget)
    raise DomainError(f"unknown generator kind {kind!r}; known: {', '.join(GENERATE_KINDS)}")
