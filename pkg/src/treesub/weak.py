"""Chain-plus-fork domains and the prefix encoding into sign vectors.

A fork tree is a chain 0..K (node k's parent is k-1, node 0 the root)
with optionally two extra leaves attached at node K; a plain chain is the
degenerate fork without the two leaves.  Weakly tree-submodular costs on
products of fork trees can be minimized through an encoding psi that maps
each label to K binary coordinates plus one ternary coordinate:

    label k in 0..K      ->  1 repeated k times, then zeros
    the first fork leaf  ->  1 repeated K times, then -1
    the second fork leaf ->  1 repeated K times, then +1

Each encoded coordinate lives on a star (root 0, other values its
children), and psi is injective and preserves the wedge/vee operations
computed coordinatewise on those stars, so the image of psi is closed
under them (a signed ring family).  At desk scale the minimization simply
enumerates the image through the sign-box engine with a membership
predicate; the point of the module is to validate the reduction, not to
be fast.  For plain chains the ternary coordinate is constantly 0 and the
encoding degenerates to the classic binary chain representation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, NotInImageError, UnsupportedStructureError
from .functions import CostFunction, Labeling, ProductDomain
from .solvers import SignBoxFunction, bisub_brute
from .trees import RootedTree

EncodedPoint = tuple[int, ...]


@dataclass(frozen=True)
class ForkTree:
    """Recognized chain-plus-fork shape of a rooted tree.

    ``chain[k]`` is the node id at chain depth k; ``minus`` and ``plus``
    are the two fork-leaf ids (first and second child of chain[K]) or
    None for a plain chain.
    """

    tree: RootedTree
    K: int
    chain: tuple[int, ...]
    minus: int | None
    plus: int | None

    @property
    def has_fork(self) -> bool:
        return self.minus is not None


@dataclass(frozen=True)
class NotFork:
    """Negative recognition verdict with the offending structure."""

    reason: str


def recognize(tree: RootedTree) -> ForkTree | NotFork:
    """Classify a tree as a fork (or plain chain) or report why not."""
    chain = [tree.root]
    v = tree.root
    while True:
        kids = tree.children[v]
        if len(kids) == 0:
            return ForkTree(tree, K=len(chain) - 1, chain=tuple(chain), minus=None, plus=None)
        if len(kids) == 1:
            chain.append(kids[0])
            v = kids[0]
            continue
        if len(kids) == 2:
            lo, hi = kids
            if tree.children[lo] or tree.children[hi]:
                return NotFork(f"node {v} branches into non-leaf children")
            return ForkTree(tree, K=len(chain) - 1, chain=tuple(chain), minus=lo, plus=hi)
        return NotFork(f"node {v} has {len(kids)} children")


def psi(fork: ForkTree, x: int) -> EncodedPoint:
    """Encode one label into K binary coordinates plus a ternary one."""
    fork.tree.check_node(x)
    K = fork.K
    if x == fork.minus and fork.minus is not None:
        return (1,) * K + (-1,)
    if x == fork.plus and fork.plus is not None:
        return (1,) * K + (1,)
    k = fork.tree.depth[x]
    if k > K or fork.chain[k] != x:
        raise DomainError(f"label {x} is not on the recognized chain")
    return (1,) * k + (0,) * (K + 1 - k)


def in_image(fork: ForkTree, y: EncodedPoint) -> bool:
    """Membership of an encoded vector in the image of psi."""
    K = fork.K
    if len(y) != K + 1:
        return False
    if any(v not in (0, 1) for v in y[:K]) or y[K] not in (-1, 0, 1):
        return False
    k = 0
    while k < K and y[k] == 1:
        k += 1
    if any(v != 0 for v in y[k:K]):
        return False
    if y[K] != 0:
        if k != K:
            return False
        if y[K] == -1 and fork.minus is None:
            return False
        if y[K] == 1 and fork.plus is None:
            return False
    return True


def psi_inverse(fork: ForkTree, y: EncodedPoint) -> int:
    """Decode an encoded vector; total exactly on the image of psi."""
    if not in_image(fork, y):
        raise NotInImageError(f"vector {y!r} is not an encoding for K={fork.K}")
    if y[fork.K] == -1:
        return fork.minus  # type: ignore[return-value]
    if y[fork.K] == 1:
        return fork.plus  # type: ignore[return-value]
    k = 0
    while k < fork.K and y[k] == 1:
        k += 1
    return fork.chain[k]


def star_wedge_vee(a: int, b: int) -> tuple[int, int]:
    """Wedge/vee on a star tree rooted at 0, computed on raw labels.

    Distinct non-root labels meet at the root and their vee is the root
    as well; the root against any label gives (root, label).
    """
    if a == b:
        return a, a
    if a == 0:
        return 0, b
    if b == 0:
        return 0, a
    return 0, 0


def encoded_wedge_vee(y1: EncodedPoint, y2: EncodedPoint) -> tuple[EncodedPoint, EncodedPoint]:
    """Coordinatewise star wedge/vee of two encoded vectors."""
    if len(y1) != len(y2):
        raise DomainError("encoded vectors of different lengths")
    pairs = [star_wedge_vee(a, b) for a, b in zip(y1, y2)]
    return tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)


def encoding_table(fork: ForkTree) -> list[tuple[int, EncodedPoint]]:
    """The full label -> encoding mapping, in label id order."""
    return [(x, psi(fork, x)) for x in range(fork.tree.node_count)]


def recognize_domain(domain: ProductDomain) -> list[ForkTree]:
    forks = []
    for i, tree in enumerate(domain.trees):
        verdict = recognize(tree)
        if isinstance(verdict, NotFork):
            raise UnsupportedStructureError(f"tree {i}: {verdict.reason}")
        forks.append(verdict)
    return forks


def minimize_weak(
    f: CostFunction,
    domain: ProductDomain | None = None,
    engine: str = "brute",
    budget: int | None = None,
) -> tuple[Labeling, int]:
    """Minimize a (weakly tree-submodular) cost over a product of forks.

    Builds the flattened sign box of all encoded coordinates and runs the
    enumeration engine restricted to the image of psi; the encoded argmin
    decodes back to a labeling.  Exact for any cost; the weak
    tree-submodularity premise is what makes the encoded family a signed
    ring family rather than what this routine relies on.
    """
    domain = domain if domain is not None else f.domain
    if engine != "brute":
        raise DomainError(f"unknown engine {engine!r}; the desk-scale engine is 'brute'")
    forks = recognize_domain(domain)

    blocks: list[tuple[int, int]] = []  # (offset, width) per variable
    allowed: list[tuple[int, ...]] = []
    offset = 0
    for fork in forks:
        width = fork.K + 1
        blocks.append((offset, width))
        allowed.extend([(0, 1)] * fork.K)
        last: tuple[int, ...] = (0,)
        if fork.minus is not None:
            last = (-1, 0, 1)
        allowed.append(last)
        offset += width

    def split(vec):
        return [tuple(vec[o:o + w]) for o, w in blocks]

    def feasible(vec) -> bool:
        return all(in_image(fork, part) for fork, part in zip(forks, split(vec)))

    def evaluate(vec) -> int:
        labels = tuple(
            psi_inverse(fork, part) for fork, part in zip(forks, split(vec))
        )
        return f.evaluate(labels)

    box = SignBoxFunction(m=offset, allowed=tuple(allowed), evaluate=evaluate)
    best_vec, best = bisub_brute(box, budget=budget, feasible=feasible)
    labeling = tuple(
        psi_inverse(fork, part) for fork, part in zip(forks, split(best_vec))
    )
    return labeling, best
