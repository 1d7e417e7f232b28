"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the library code paths they check:
paths come from breadth-first search over an adjacency list, ancestor
tests from set containment of root walks, and property checks from plain
double loops over labelings.
"""

from __future__ import annotations

from collections import deque

import pytest
from hypothesis import settings

import treesub as ts

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")


@pytest.fixture
def chain5() -> ts.RootedTree:
    return ts.chain_tree(5)


@pytest.fixture
def star3() -> ts.RootedTree:
    return ts.star3_tree()


@pytest.fixture
def bintree7() -> ts.RootedTree:
    return ts.complete_binary_tree(3)


@pytest.fixture
def fork2() -> ts.RootedTree:
    return ts.fork_tree(2)


# ---------------------------------------------------------------------------
# Independent oracles


def bfs_path(tree: ts.RootedTree, a: int, b: int) -> list[int]:
    """Shortest path by BFS over the undirected adjacency list."""
    adj: list[list[int]] = [[] for _ in range(tree.node_count)]
    for v, p in enumerate(tree.parent):
        if p >= 0:
            adj[v].append(p)
            adj[p].append(v)
    prev = {a: None}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        if u == b:
            break
        for w in adj[u]:
            if w not in prev:
                prev[w] = u
                queue.append(w)
    out = [b]
    while prev[out[-1]] is not None:
        out.append(prev[out[-1]])
    return list(reversed(out))


def root_walk(tree: ts.RootedTree, v: int) -> list[int]:
    out = [v]
    while out[-1] != tree.root:
        out.append(tree.parent[out[-1]])
    return out


def is_ancestor_oracle(tree: ts.RootedTree, a: int, b: int) -> bool:
    return a in root_walk(tree, b)


def naive_check(f: ts.CostFunction, op) -> ts.ViolationWitness | None:
    """First violation of f(x)+f(y) >= f(op1)+f(op2) in rank-lex order."""
    domain = f.domain
    for x in domain.labelings():
        for y in domain.labelings():
            moved = [op(t, xi, yi) for t, xi, yi in zip(domain.trees, x, y)]
            first = tuple(m[0] for m in moved)
            second = tuple(m[1] for m in moved)
            lhs = f.evaluate(x) + f.evaluate(y)
            rhs = f.evaluate(first) + f.evaluate(second)
            if lhs < rhs:
                return ts.ViolationWitness("naive", x, y, None, lhs, rhs)
    return None


def naive_check_translation(f: ts.CostFunction) -> ts.ViolationWitness | None:
    domain = f.domain
    for x in domain.labelings():
        for y in domain.labelings():
            dmax = ts.rho_inf(domain, x, y)
            for d in range(dmax + 1):
                moved = [
                    ts.up_down(t, xi, yi, d)
                    for t, xi, yi in zip(domain.trees, x, y)
                ]
                up = tuple(m[0] for m in moved)
                down = tuple(m[1] for m in moved)
                lhs = f.evaluate(x) + f.evaluate(y)
                rhs = f.evaluate(up) + f.evaluate(down)
                if lhs < rhs:
                    return ts.ViolationWitness("naive-translation", x, y, d, lhs, rhs)
    return None


def brute_minimum(f: ts.CostFunction) -> tuple[tuple[int, ...], int]:
    """Full scan, first minimum in rank order."""
    best_x, best = None, None
    for x in f.domain.labelings():
        v = f.evaluate(x)
        if best is None or v < best:
            best_x, best = x, v
    return best_x, best


def random_table_function(
    rng: ts.SplitMix64, domain: ts.ProductDomain, max_value: int = 20
) -> ts.DenseTable:
    values = [rng.below(max_value + 1) for _ in range(domain.size())]
    return ts.DenseTable(domain, values)


_SIGN_CHOICES = ((-1, 0, 1), (-1, 0), (0, 1))

_SIGN_TREE = {
    (-1, 0, 1): ts.star3_tree(),
    (-1, 0): ts.RootedTree([-1, 0]),
    (0, 1): ts.RootedTree([-1, 0]),
}

_SIGN_TO_LABEL = {
    (-1, 0, 1): {0: 0, -1: 1, 1: 2},
    (-1, 0): {0: 0, -1: 1},
    (0, 1): {0: 0, 1: 1},
}


def random_sign_box(rng: ts.SplitMix64, m: int, full_box: bool = False):
    """Verified random bisubmodular function over a (possibly restricted) box.

    Bisubmodularity over a sign box is strong tree-submodularity over the
    product of the per-coordinate sign trees, so the verified generator
    provides the rejection loop.
    """
    if full_box:
        allowed = ((-1, 0, 1),) * m
    else:
        allowed = tuple(
            _SIGN_CHOICES[rng.below(3)] if i else (-1, 0, 1) for i in range(m)
        )
    domain = ts.ProductDomain([_SIGN_TREE[a] for a in allowed])
    fx = ts.generate("random-verified-strong", domain, seed=rng.below(1 << 32))
    f = fx.function

    def evaluate(signs) -> int:
        labels = tuple(_SIGN_TO_LABEL[allowed[i]][s] for i, s in enumerate(signs))
        return f.evaluate(labels)

    return ts.SignBoxFunction(m=m, allowed=allowed, evaluate=evaluate)


def random_cut_plus_modular(rng: ts.SplitMix64, m: int) -> ts.BinaryCubeFunction:
    """Weighted graph cut plus a modular term: submodular by construction."""
    edges = []
    for u in range(m):
        for v in range(u + 1, m):
            w = rng.below(5)
            if w:
                edges.append((u, v, w))
    shifts = [rng.below(13) - 6 for _ in range(m)]

    def evaluate(subset) -> int:
        cut = sum(w for u, v, w in edges if (u in subset) != (v in subset))
        return cut + sum(shifts[i] for i in subset)

    return ts.BinaryCubeFunction(m=m, free=tuple(range(m)), evaluate=evaluate)
