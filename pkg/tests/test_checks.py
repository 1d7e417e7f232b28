"""Property checkers: witnesses, equivalences, modes, and budgets."""

from __future__ import annotations

import pytest

import treesub as ts
from treesub.errors import BudgetExceededError, DomainError
from treesub.solvers import BinaryCubeFunction, SignBoxFunction

from conftest import naive_check, naive_check_translation, random_table_function


@pytest.fixture
def concave_chain():
    dom = ts.ProductDomain([ts.chain_tree(5)])
    return ts.DenseTable(dom, [-(v * v) for v in range(5)])


@pytest.fixture
def star_spike():
    dom = ts.ProductDomain([ts.star3_tree()])
    return ts.DenseTable(dom, [1, 0, 0])


def test_concave_chain_strong_witness(concave_chain):
    report = ts.check_strong(concave_chain)
    assert not report.ok
    w = report.witness
    assert (w.x, w.y) == ((0,), (2,))
    assert w.lhs == -4 and w.rhs == -2
    assert w.d is None


def test_witness_is_replayable(concave_chain):
    w = ts.check_strong(concave_chain).witness
    f = concave_chain
    m, j = ts.meet_join(f.domain.trees[0], w.x[0], w.y[0])
    assert f.evaluate(w.x) + f.evaluate(w.y) == w.lhs
    assert f.evaluate((m,)) + f.evaluate((j,)) == w.rhs
    assert w.lhs < w.rhs


def test_star_spike_weak_witness(star_spike):
    report = ts.check_weak(star_spike)
    assert not report.ok
    w = report.witness
    assert (w.x, w.y) == ((1,), (2,))
    assert w.lhs == 0 and w.rhs == 2


def test_translation_on_concave_chain(concave_chain):
    report = ts.check_translation(concave_chain)
    assert not report.ok
    w = report.witness
    assert w.d is not None and w.d >= 0
    # replay through the d-step operations
    up, down = ts.up_down(concave_chain.domain.trees[0], w.x[0], w.y[0], w.d)
    f = concave_chain
    assert f.evaluate(w.x) + f.evaluate(w.y) == w.lhs
    assert f.evaluate((up,)) + f.evaluate((down,)) == w.rhs


def test_constant_function_ok(star_spike):
    dom = star_spike.domain
    c = ts.DenseTable(dom, [3, 3, 3])
    for check in (ts.check_strong, ts.check_weak, ts.check_translation):
        report = check(c)
        assert report.ok and report.witness is None


def test_verified_strong_fixture_passes_translation_and_weak():
    tree = ts.RootedTree([-1, 0, 0, 1, 1])
    dom = ts.ProductDomain([tree, tree])
    for seed in range(5):
        fx = ts.generate("random-verified-strong", dom, seed=seed)
        assert ts.check_translation(fx.function).ok
        assert ts.check_weak(fx.function).ok


def test_weak_verdict_equals_translation_d0_slice():
    dom = ts.ProductDomain([ts.chain_tree(3), ts.star3_tree()])
    rng = ts.SplitMix64(17)
    for _ in range(30):
        f = random_table_function(rng, dom, max_value=8)
        weak_ok = ts.check_weak(f).ok
        tr = ts.check_translation(f)
        if tr.ok:
            assert weak_ok
        elif tr.witness.d == 0:
            assert not weak_ok


def test_strong_translation_equivalence_random_tables():
    dom = ts.ProductDomain([ts.chain_tree(4), ts.chain_tree(3)])
    rng = ts.SplitMix64(23)
    agree_ok = agree_viol = 0
    for _ in range(60):
        f = random_table_function(rng, dom, max_value=10)
        s = ts.check_strong(f).ok
        t = ts.check_translation(f).ok
        assert s == t
        if s:
            agree_ok += 1
        else:
            agree_viol += 1
    assert agree_viol > 0  # both verdicts actually occur


def test_checkers_match_naive_oracle():
    dom = ts.ProductDomain([ts.chain_tree(3), ts.star3_tree()])
    rng = ts.SplitMix64(31)
    for _ in range(25):
        f = random_table_function(rng, dom, max_value=6)
        got = ts.check_strong(f)
        expect = naive_check(f, ts.meet_join)
        assert got.ok == (expect is None)
        if expect is not None:
            assert (got.witness.x, got.witness.y) == (expect.x, expect.y)
            assert (got.witness.lhs, got.witness.rhs) == (expect.lhs, expect.rhs)
        got_w = ts.check_weak(f)
        expect_w = naive_check(f, ts.wedge_vee)
        assert got_w.ok == (expect_w is None)
        got_t = ts.check_translation(f)
        expect_t = naive_check_translation(f)
        assert got_t.ok == (expect_t is None)
        if expect_t is not None:
            assert (got_t.witness.x, got_t.witness.y, got_t.witness.d) == (
                expect_t.x, expect_t.y, expect_t.d,
            )


def test_big_value_fallback_agrees():
    dom = ts.ProductDomain([ts.chain_tree(3), ts.chain_tree(3)])
    rng = ts.SplitMix64(47)
    small = [rng.below(10) for _ in range(9)]
    huge = [v + (1 << 50) * w for v, w in zip(small, [1, -1, 2, 0, 1, -2, 1, 0, 1])]
    f = ts.DenseTable(dom, huge)
    got = ts.check_strong(f)
    expect = naive_check(f, ts.meet_join)
    assert got.ok == (expect is None)
    if expect is not None:
        assert (got.witness.x, got.witness.y) == (expect.x, expect.y)


def test_sampled_mode_deterministic(concave_chain):
    a = ts.check_strong(concave_chain, mode="sampled", samples=200, seed=5)
    b = ts.check_strong(concave_chain, mode="sampled", samples=200, seed=5)
    assert a == b
    assert not a.ok  # 200 samples over 25 pairs find the violation
    assert "sample" in a.note


def test_sampled_mode_honest_note(star_spike):
    c = ts.DenseTable(star_spike.domain, [0, 0, 0])
    report = ts.check_strong(c, mode="sampled", samples=50, seed=1)
    assert report.ok
    assert "not a proof" in report.note
    assert report.pairs_checked == 50


def test_sampled_translation(concave_chain):
    report = ts.check_translation(concave_chain, mode="sampled", samples=300, seed=2)
    assert not report.ok
    assert report.witness.d is not None


def test_unknown_mode(concave_chain):
    with pytest.raises(DomainError):
        ts.check_strong(concave_chain, mode="fast")


def test_budget_refusal_reports_size():
    dom = ts.ProductDomain([ts.chain_tree(40), ts.chain_tree(40)])
    f = ts.SumOfTerms(dom, [])
    with pytest.raises(BudgetExceededError) as err:
        ts.check_strong(f)
    assert "1600" in str(err.value)


def test_budget_env_override(monkeypatch, concave_chain):
    monkeypatch.setenv("TREESUB_BUDGET", "10")
    with pytest.raises(BudgetExceededError):
        ts.check_strong(concave_chain)
    monkeypatch.setenv("TREESUB_BUDGET", "1000000")
    assert not ts.check_strong(concave_chain).ok


# ---------------------------------------------------------------------------
# Generic multimorphism check


def test_multimorphism_meet_join_matches_strong():
    dom = ts.ProductDomain([ts.chain_tree(3), ts.star3_tree()])
    rng = ts.SplitMix64(3)
    tables = ts.meet_join_tables(dom)
    for _ in range(50):
        f = random_table_function(rng, dom, max_value=8)
        direct = ts.check_strong(f)
        generic = ts.check_multimorphism(f, dom, tables)
        assert direct.ok == generic.ok
        if not direct.ok:
            assert (direct.witness.x, direct.witness.y) == (
                generic.witness.x, generic.witness.y,
            )


def test_multimorphism_projections_always_ok():
    dom = ts.ProductDomain([ts.chain_tree(4)])
    rng = ts.SplitMix64(8)
    tables = ts.projection_tables(dom)
    for _ in range(10):
        f = random_table_function(rng, dom)
        assert ts.check_multimorphism(f, dom, tables).ok


def test_multimorphism_min_max_on_chains_is_weak():
    dom = ts.ProductDomain([ts.chain_tree(4), ts.chain_tree(3)])
    rng = ts.SplitMix64(13)
    mm = ts.min_max_tables(dom)
    for _ in range(30):
        f = random_table_function(rng, dom, max_value=10)
        assert ts.check_multimorphism(f, dom, mm).ok == ts.check_weak(f).ok


def test_min_max_tables_reject_branching():
    with pytest.raises(DomainError):
        ts.min_max_tables(ts.ProductDomain([ts.star3_tree()]))


def test_multimorphism_malformed_table():
    dom = ts.ProductDomain([ts.chain_tree(3)])
    f = ts.DenseTable(dom, [0, 1, 2])
    good = [[[0] * 3 for _ in range(3)]]
    bad_shape = [[[0] * 2 for _ in range(3)]]
    bad_label = [[[7] * 3 for _ in range(3)]]
    with pytest.raises(DomainError):
        ts.check_multimorphism(f, dom, (bad_shape, good))
    with pytest.raises(DomainError):
        ts.check_multimorphism(f, dom, (good, bad_label))
    with pytest.raises(DomainError):
        ts.check_multimorphism(f, dom, None)


# ---------------------------------------------------------------------------
# Cube / sign-box restriction checks


def test_cube_check_flags_supermodular():
    good = BinaryCubeFunction(m=3, free=(0, 1, 2), evaluate=lambda A: len(A) * (3 - len(A)))
    assert ts.check_cube_submodular(good).ok
    # convex of cardinality is strictly supermodular: g({0})+g({1}) < g(both)+g(none)
    bad = BinaryCubeFunction(m=2, free=(0, 1), evaluate=lambda A: len(A) * len(A))
    report = ts.check_cube_submodular(bad)
    assert not report.ok
    # first violating pair in rank order: subsets {1} and {0}
    assert report.witness.x == (1,) and report.witness.y == (0,)
    assert report.witness.lhs == 2 and report.witness.rhs == 4


def test_cube_check_empty_free():
    g = BinaryCubeFunction(m=2, free=(), evaluate=lambda A: 5)
    assert ts.check_cube_submodular(g).ok


def test_sign_box_check():
    ok_fn = SignBoxFunction(m=2, allowed=((-1, 0, 1), (-1, 0)), evaluate=lambda s: sum(s))
    assert ts.check_sign_box_bisubmodular(ok_fn).ok
    # root spike on one ternary coordinate: h(0) = 1, h(+-1) = 0
    bad = SignBoxFunction(m=1, allowed=((-1, 0, 1),), evaluate=lambda s: int(s[0] == 0))
    report = ts.check_sign_box_bisubmodular(bad)
    assert not report.ok
    assert set(report.witness.x + report.witness.y) == {-1, 1}
