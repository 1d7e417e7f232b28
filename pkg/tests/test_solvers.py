"""Inner engines: brute enumeration and min-norm-point solvers."""

from __future__ import annotations

import pytest

import treesub as ts
from treesub.errors import BudgetExceededError, DomainError, SolverFailureError
from treesub.solvers import BinaryCubeFunction, SignBoxFunction

from conftest import random_cut_plus_modular, random_sign_box


def cube(weights=None, fn=None, m=None):
    if fn is None:
        w = dict(enumerate(weights))
        fn = lambda A: sum(w[i] for i in A)
        m = len(weights)
    return BinaryCubeFunction(m=m, free=tuple(range(m)), evaluate=fn)


# ---------------------------------------------------------------------------
# sfm_brute


def test_brute_hump():
    g = cube(fn=lambda A: len(A) * (3 - len(A)), m=3)
    assert ts.sfm_brute(g) == (frozenset(), 0)


def test_brute_cardinality():
    g = cube(fn=len, m=3)
    assert ts.sfm_brute(g) == (frozenset(), 0)


def test_brute_triangle_cut_tie_break():
    edges = [(0, 1), (1, 2), (0, 2)]
    g = cube(fn=lambda A: sum(1 for u, v in edges if (u in A) != (v in A)), m=3)
    # empty set and the full set are tied at 0; lowest subset rank wins
    assert ts.sfm_brute(g) == (frozenset(), 0)


def test_brute_modular():
    g = cube(weights=(-1, 2, -3))
    assert ts.sfm_brute(g) == (frozenset({0, 2}), -4)


def test_brute_respects_free_set():
    g = BinaryCubeFunction(m=4, free=(1, 3), evaluate=lambda A: -len(A))
    subset, value = ts.sfm_brute(g)
    assert subset == frozenset({1, 3}) and value == -2


def test_brute_size_guard():
    g = BinaryCubeFunction(m=25, free=tuple(range(25)), evaluate=len)
    with pytest.raises(BudgetExceededError):
        ts.sfm_brute(g)


def test_cube_validates_free():
    with pytest.raises(DomainError):
        BinaryCubeFunction(m=2, free=(0, 0), evaluate=len)
    with pytest.raises(DomainError):
        BinaryCubeFunction(m=2, free=(5,), evaluate=len)


# ---------------------------------------------------------------------------
# sfm_wolfe


def test_wolfe_modular():
    g = cube(weights=(-1, 2, -3))
    assert ts.sfm_wolfe(g) == (frozenset({0, 2}), -4)


def test_wolfe_cardinality():
    g = cube(fn=len, m=3)
    assert ts.sfm_wolfe(g) == (frozenset(), 0)


def test_wolfe_empty_free():
    g = BinaryCubeFunction(m=3, free=(), evaluate=lambda A: 9)
    assert ts.sfm_wolfe(g) == (frozenset(), 9)


def test_wolfe_matches_brute_on_random_submodular():
    rng = ts.SplitMix64(2024)
    for trial in range(50):
        m = 2 + rng.below(7)  # up to 8
        g = random_cut_plus_modular(rng, m)
        _, expected = ts.sfm_brute(g)
        subset, value = ts.sfm_wolfe(g)
        assert value == expected, (trial, m)
        assert subset <= frozenset(range(m))


def test_wolfe_deterministic():
    rng = ts.SplitMix64(77)
    g = random_cut_plus_modular(rng, 6)
    assert ts.sfm_wolfe(g) == ts.sfm_wolfe(g)


def test_wolfe_iteration_cap_raises():
    g = cube(weights=(-1, 2, -3))
    with pytest.raises(SolverFailureError):
        ts.sfm_wolfe(g, max_iter=0)


# ---------------------------------------------------------------------------
# bisub_brute


def test_bisub_zero_function_first_enumerated():
    h = SignBoxFunction(m=2, allowed=((-1, 0, 1), (-1, 0, 1)), evaluate=lambda s: 0)
    assert ts.bisub_brute(h) == ((-1, -1), 0)
    h2 = SignBoxFunction(m=2, allowed=((0, 1), (0,)), evaluate=lambda s: 0)
    assert ts.bisub_brute(h2) == ((0, 0), 0)


def test_bisub_sum():
    h = SignBoxFunction(m=2, allowed=((-1, 0, 1), (-1, 0, 1)), evaluate=lambda s: sum(s))
    assert ts.bisub_brute(h) == ((-1, -1), -2)


def test_bisub_feasible_predicate():
    h = SignBoxFunction(m=2, allowed=((-1, 0, 1), (-1, 0, 1)), evaluate=lambda s: sum(s))
    vec, value = ts.bisub_brute(h, feasible=lambda s: s[0] >= 0)
    assert vec == (0, -1) and value == -1


def test_bisub_no_feasible_point():
    h = SignBoxFunction(m=1, allowed=((-1, 0, 1),), evaluate=lambda s: 0)
    with pytest.raises(DomainError):
        ts.bisub_brute(h, feasible=lambda s: False)


def test_bisub_box_guard():
    h = SignBoxFunction(m=14, allowed=((-1, 0, 1),) * 14, evaluate=lambda s: 0)
    with pytest.raises(BudgetExceededError):
        ts.bisub_brute(h)


def test_sign_box_validates_allowed():
    with pytest.raises(DomainError):
        SignBoxFunction(m=1, allowed=((1, 0),), evaluate=lambda s: 0)
    with pytest.raises(DomainError):
        SignBoxFunction(m=1, allowed=((-1, 1),), evaluate=lambda s: 0)
    with pytest.raises(DomainError):
        SignBoxFunction(m=2, allowed=((0,),), evaluate=lambda s: 0)


# ---------------------------------------------------------------------------
# bisub_minnorm


def test_minnorm_zero_function():
    h = SignBoxFunction(m=2, allowed=((-1, 0, 1), (0, 1)), evaluate=lambda s: 0)
    vec, value = ts.bisub_minnorm(h, verify_against_brute=True)
    assert value == 0


def test_minnorm_modular_clipped():
    # minimizer is -sign(w) where allowed, else 0
    w = (2, -3, 4)
    allowed = ((-1, 0, 1), (-1, 0), (0, 1))
    h = SignBoxFunction(m=3, allowed=allowed, evaluate=lambda s: sum(wi * si for wi, si in zip(w, s)))
    vec, value = ts.bisub_minnorm(h, verify_against_brute=True)
    assert vec == (-1, 0, 0) and value == -2


def test_minnorm_all_fixed():
    h = SignBoxFunction(m=2, allowed=((0,), (0,)), evaluate=lambda s: 4)
    assert ts.bisub_minnorm(h) == ((0, 0), 4)


def test_minnorm_matches_brute_on_random_bisubmodular():
    rng = ts.SplitMix64(515)
    for trial in range(12):
        m = 2 + rng.below(4)  # up to 5 here; the acceptance suite pushes to 6
        h = random_sign_box(rng, m)
        assert ts.check_sign_box_bisubmodular(h).ok
        _, expected = ts.bisub_brute(h)
        vec, value = ts.bisub_minnorm(h)
        assert value == expected, (trial, m)
        assert all(s in h.allowed[i] for i, s in enumerate(vec))


def test_minnorm_deterministic():
    rng = ts.SplitMix64(99)
    h = random_sign_box(rng, 3)
    assert ts.bisub_minnorm(h) == ts.bisub_minnorm(h)


def test_min_norm_state_invariant():
    import numpy as np

    vertices = np.array([[2.0, 0.0], [0.0, 2.0]])
    lam = np.array([0.5, 0.5])
    state = ts.MinNormState(vertices.T @ lam, vertices, lam, eps=1e-10)
    assert state.consistent()
    drifted = ts.MinNormState(np.array([9.0, 9.0]), vertices, lam, eps=1e-10)
    assert not drifted.consistent()
    unbalanced = ts.MinNormState(vertices.T @ lam, vertices, np.array([0.9, 0.5]), eps=1e-10)
    assert not unbalanced.consistent()
