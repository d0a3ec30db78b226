import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from qosmarket.consumer import (
    NOCONSUME, Cell, ConsumerStrategy, add_water, compute_loads, loads_many, purify,
    symmetric_equilibrium, verify_equilibrium,
)
from qosmarket.errors import AtomsPresent, CellMismatch, NegativeInput, NotSorted
from qosmarket.measure import Measure
from qosmarket.oracle import pour_loads

from strategies import market, measures

U = Measure.uniform()


class TestAddWater:
    def test_examples(self):
        assert add_water((1, 1), 0) == [0, 0]
        assert add_water((3, 1), 1) == pytest.approx([0, 1])
        assert add_water((3, 1), 3) == pytest.approx([0.5, 2.5])

    def test_errors(self):
        with pytest.raises(NotSorted):
            add_water((1, 2), 1)
        with pytest.raises(NegativeInput):
            add_water((2, 1), -1)
        with pytest.raises(NegativeInput):
            add_water((2, -1), 1)

    @given(st.lists(st.floats(0, 5), min_size=1, max_size=8), st.floats(0, 10))
    def test_properties(self, raw, m):
        levels = sorted(raw, reverse=True)
        p = add_water(levels, m)
        assert all(-1e-12 <= x <= m + 1e-12 for x in p)
        assert sum(p) == pytest.approx(m, abs=1e-9)
        after = [a + b for a, b in zip(levels, p)]
        assert all(x >= y - 1e-9 for x, y in zip(after, after[1:]))
        low = min(after)
        assert all(abs(a - low) <= 1e-9 for a, x in zip(after, p) if x > 1e-12)


class TestComputeLoads:
    def test_examples(self):
        lv = compute_loads(U, (0, 1 / 3, 2 / 3))
        assert lv.noconsume == 0
        assert lv.loads == pytest.approx((1 / 3,) * 3, abs=1e-12)
        assert compute_loads(U, (0, 0.5, 0.9)).loads == pytest.approx((0.5, 0.4, 0.1), abs=1e-12)
        assert compute_loads(U, (0, 0.2)).loads == pytest.approx((0.5, 0.5), abs=1e-12)

    def test_examples_against_pouring(self):
        for t in [(0, 0.5, 0.9), (0, 0.2)]:
            assert compute_loads(U, t).loads == pytest.approx(pour_loads(U, t, step=1e-5).loads, abs=1e-3)

    def test_no_producers(self):
        assert compute_loads(U, ()).noconsume == 1.0

    def test_noconsume_is_mass_below_the_lowest_level(self):
        lv = compute_loads(U + Measure.point(0.1, 0.3), (0.4, 0.7))
        assert lv.noconsume == pytest.approx(0.7)

    @given(market())
    def test_conservation_and_nonnegativity(self, case):
        mu, t = case
        lv = compute_loads(mu, t)
        assert lv.total() == pytest.approx(mu.total, abs=1e-9)
        assert min(lv.loads) >= -1e-12 and lv.noconsume >= 0

    @given(market())
    def test_loads_nonincreasing_in_sorted_order(self, case):
        mu, t = case
        loads = compute_loads(mu, t).loads
        ordered = [loads[j] for j in sorted(range(len(t)), key=lambda j: t[j])]
        assert all(a >= b - 1e-9 for a, b in zip(ordered, ordered[1:]))

    @given(market(), st.randoms(use_true_random=False))
    def test_permutation_equivariance(self, case, rnd):
        mu, t = case
        perm = list(range(len(t)))
        rnd.shuffle(perm)
        base = compute_loads(mu, t).loads
        shuffled = compute_loads(mu, [t[p] for p in perm]).loads
        assert shuffled == pytest.approx([base[p] for p in perm], abs=1e-12)

    @given(market())
    def test_recursive_identity(self, case):
        mu, t = case
        lv = compute_loads(mu, t)
        ts = sorted(t)
        order = sorted(range(len(t)), key=lambda j: t[j])
        srt = [lv.loads[j] for j in order]
        F = [mu.prefix(x) for x in ts] + [mu.total]
        n = len(t)
        for k in range(n):
            rest = F[0] + sum(srt[:k])
            expect = max((F[j] - rest) / (j - k) for j in range(k + 1, n + 1))
            assert srt[k] == pytest.approx(expect, abs=1e-9)

    @given(market(max_n=5), st.data())
    def test_loads_many_matches(self, case, data):
        mu, t = case
        nc, L = loads_many(mu, [t, tuple(reversed(t))])
        assert L[0] == pytest.approx(compute_loads(mu, t).loads, abs=1e-9)
        assert L[1] == pytest.approx(compute_loads(mu, tuple(reversed(t))).loads, abs=1e-9)
        assert nc[0] == pytest.approx(mu.prefix(min(t)))

    @given(market(), st.data())
    def test_own_strategy_monotone(self, case, data):
        mu, t = case
        j = data.draw(st.integers(0, len(t) - 1))
        higher = data.draw(st.floats(t[j], 1.0))
        moved = list(t)
        moved[j] = higher
        assert compute_loads(mu, moved).loads[j] <= compute_loads(mu, t).loads[j] + 1e-9

    @given(market(min_n=2), st.data())
    def test_approach_monotone(self, case, data):
        mu, t = case
        j, k = data.draw(st.permutations(range(len(t))))[:2]
        target = data.draw(st.floats(min(t[k], t[j]), max(t[k], t[j])))
        closer = list(t)
        closer[k] = target
        before, after = compute_loads(mu, t), compute_loads(mu, closer)
        assert after.loads[j] <= before.loads[j] + 1e-9

    @given(market(), st.data())
    def test_moving_left_never_raises_abstention(self, case, data):
        mu, t = case
        k = data.draw(st.integers(0, len(t) - 1))
        left = list(t)
        left[k] = data.draw(st.floats(0.0, t[k]))
        assert compute_loads(mu, left).noconsume <= compute_loads(mu, t).noconsume + 1e-9

    @given(market(min_n=2), st.data())
    def test_lipschitz_in_others(self, case, data):
        mu, t = case
        k = data.draw(st.integers(0, len(t) - 1))
        new = data.draw(st.floats(t[k], 1.0))
        moved = list(t)
        moved[k] = new
        a, b = compute_loads(mu, t), compute_loads(mu, moved)
        for j in range(len(t)):
            assert abs(a.loads[j] - b.loads[j]) <= mu.mass_co(t[k], new) + 1e-9

    @given(market())
    def test_matches_pouring(self, case):
        mu, t = case
        step = 1e-4
        assert compute_loads(mu, t).loads == pytest.approx(pour_loads(mu, t, step=step).loads, abs=10 * step)


class TestSymmetricEquilibrium:
    def test_no_producers(self):
        s = symmetric_equilibrium(U, ())
        assert [(c.lo, c.hi, c.weights) for c in s.cells] == [(0.0, 1.0, {NOCONSUME: 1.0})]
        assert verify_equilibrium(U, (), s).ok

    def test_spill_back(self):
        s = symmetric_equilibrium(U, (0, 0.2))
        assert [(c.lo, c.hi) for c in s.cells] == [(0, 0.2), (0.2, 1)]
        assert s.cells[0].weights == {0: 1.0}
        assert s.cells[1].weights[0] == pytest.approx(0.375)
        assert s.cells[1].weights[1] == pytest.approx(0.625)

    def test_balanced_blocks_do_not_spill(self):
        s = symmetric_equilibrium(U, (0, 0.5))
        assert s.cells[0].weights == {0: 1.0}
        assert s.cells[1].weights.get(1) == pytest.approx(1.0)
        assert s.cells[1].weights.get(0, 0.0) == pytest.approx(0.0)

    def test_tied_producers_split_evenly(self):
        s = symmetric_equilibrium(U, (0.5, 0.5, 0.0))
        lv = verify_equilibrium(U, (0.5, 0.5, 0.0), s).loads
        assert lv.loads[0] == pytest.approx(lv.loads[1], abs=1e-12)

    @given(market())
    def test_is_an_equilibrium_with_the_algorithmic_loads(self, case):
        mu, t = case
        s = symmetric_equilibrium(mu, t)
        rep = verify_equilibrium(mu, t, s)
        assert rep.ok, rep.problems
        assert rep.worst_violation <= 1e-9
        assert rep.loads.loads == pytest.approx(compute_loads(mu, t).loads, abs=1e-9)

    @given(market(min_n=0, max_n=5))
    def test_cells_are_effective_types(self, case):
        mu, t = case
        s = symmetric_equilibrium(mu, t)
        assert s.cells[-1].closed and s.cells[-1].hi == 1.0
        for c in s.cells:
            assert sum(c.weights.values()) == pytest.approx(1.0)
            for k, w in c.weights.items():
                if w > 0 and k != NOCONSUME:
                    assert t[k] <= c.lo


class TestPurify:
    def test_example(self):
        pure = purify(U, symmetric_equilibrium(U, (0, 0.2)))
        assert [(p.lo, p.hi, p.target) for p in pure.pieces] == [
            (0, pytest.approx(0.5), 0), (pytest.approx(0.5), 1, 1)]

    def test_pure_input_is_unchanged(self):
        s = symmetric_equilibrium(U, (0, 0.5))
        pure = purify(U, s)
        assert [(p.lo, p.hi) for p in pure.pieces] == [(c.lo, c.hi) for c in s.cells]

    def test_atoms_rejected(self):
        mu = U + Measure.point(0.3, 0.1)
        with pytest.raises(AtomsPresent):
            purify(mu, symmetric_equilibrium(mu, (0, 0.5)))

    @given(market(atomless=True))
    def test_keeps_loads_and_equilibrium(self, case):
        mu, t = case
        s = symmetric_equilibrium(mu, t)
        pure = purify(mu, s)
        rep = verify_equilibrium(mu, t, pure)
        assert rep.ok, rep.problems
        assert rep.loads.loads == pytest.approx(compute_loads(mu, t).loads, abs=1e-9)


class TestVerify:
    def test_everyone_on_one_producer(self):
        s = ConsumerStrategy(2, (Cell(0.0, 1.0, {0: 1.0}, closed=True),))
        rep = verify_equilibrium(U, (0, 0), s)
        assert not rep.ok
        assert rep.worst_violation == pytest.approx(1.0)

    def test_abstaining_while_served_is_flagged(self):
        s = ConsumerStrategy(1, (Cell(0.0, 1.0, {NOCONSUME: 1.0}, closed=True),))
        assert not verify_equilibrium(U, (0,), s).ok

    def test_using_an_unacceptable_producer_is_flagged(self):
        s = ConsumerStrategy(2, (Cell(0.0, 0.5, {1: 1.0}), Cell(0.5, 1.0, {0: 0.5, 1: 0.5}, closed=True)))
        assert not verify_equilibrium(U, (0, 0.5), s).ok

    def test_no_producers(self):
        s = ConsumerStrategy(0, (Cell(0.0, 1.0, {NOCONSUME: 1.0}, closed=True),))
        assert verify_equilibrium(U, (), s).ok

    def test_cell_mismatch(self):
        s = symmetric_equilibrium(U, (0, 0.2))
        with pytest.raises(CellMismatch):
            verify_equilibrium(U, (0, 0.3), s)

    @given(measures(), st.floats(0.05, 0.95))
    def test_detects_a_broken_split(self, mu, t1):
        assume(mu.mass_co(t1, 2.0) > 1e-3 and mu.prefix(t1) > 1e-3)
        # all of the upper cell goes to the far producer: producer 1 then has the
        # whole tail while producer 0 keeps only the prefix
        s = ConsumerStrategy(2, (Cell(0.0, t1, {0: 1.0}), Cell(t1, 1.0, {1: 1.0}, closed=True)))
        rep = verify_equilibrium(mu, (0.0, t1), s)
        ok = mu.mass_co(t1, 2.0) <= mu.prefix(t1) + 1e-9
        assert rep.ok == ok
