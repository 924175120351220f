"""Solver tests: perturbation, local search, ILS, and the smoothed variant."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsils import (
    Budget,
    LambdaSchedule,
    SearchConfig,
    SmoothedObjective,
    ToyKind,
    auto_alpha,
    construct_toy,
    enumerate_local_optima,
    evaluate,
    flip_delta,
    gen_random_instance,
    ils,
    local_search,
    lsils,
    perturb,
    random_solution,
    sample_distinct_positions,
    seeded_rng,
)
from lsils.qubo import INIT_STREAM

from test_qubo import make_instance


class TestConfigValidation:
    def test_budget_kind_checked(self):
        with pytest.raises(ValueError, match="kind"):
            Budget("flips", 100)

    def test_budget_amount_positive(self):
        for amount in (0, -5):
            with pytest.raises(ValueError, match="positive"):
                Budget("evals", amount)

    def test_pivot_rule_checked(self):
        with pytest.raises(ValueError, match="pivot"):
            SearchConfig(budget=Budget("evals", 10), pivot_rule="steepest")

    def test_alpha_checked(self):
        with pytest.raises(ValueError, match="alpha"):
            SearchConfig(budget=Budget("evals", 10), alpha="big")
        with pytest.raises(ValueError, match="alpha"):
            SearchConfig(budget=Budget("evals", 10), alpha=-1.0)

    def test_toy_kind_coerced(self):
        cfg = SearchConfig(budget=Budget("evals", 10), toy_kind="plusminusi")
        assert cfg.toy_kind is ToyKind.PLUS_MINUS_I

    def test_lsils_requires_toy_kind(self):
        inst = make_instance(8, seed=0)
        with pytest.raises(ValueError, match="toy"):
            lsils(inst, SearchConfig(budget=Budget("evals", 100)))

    def test_perturbation_bits_range_checked(self):
        inst = make_instance(8, seed=0)
        for bits in (0, 9):
            cfg = SearchConfig(budget=Budget("evals", 100), perturbation_bits=bits)
            with pytest.raises(ValueError, match="bits"):
                ils(inst, cfg)


class TestSampling:
    @given(st.integers(1, 40), st.integers(0, 2**32), st.data())
    def test_positions_distinct_and_in_range(self, n, seed, data):
        count = data.draw(st.integers(1, n))
        pos = sample_distinct_positions(seeded_rng(seed), n, count)
        assert pos.size == count
        assert len(set(pos.tolist())) == count
        assert pos.min() >= 0 and pos.max() < n

    def test_full_count_is_permutation(self):
        pos = sample_distinct_positions(seeded_rng(7), 12, 12)
        assert sorted(pos.tolist()) == list(range(12))

    def test_count_out_of_range(self):
        rng = seeded_rng(0)
        with pytest.raises(ValueError):
            sample_distinct_positions(rng, 5, 0)
        with pytest.raises(ValueError):
            sample_distinct_positions(rng, 5, 6)


class TestPerturb:
    def test_all_bits_gives_complement(self):
        x = np.array([0, 1, 1, 0, 1], dtype=np.int8)
        y = perturb(x, 5, seeded_rng(3))
        assert np.array_equal(y, 1 - x)

    @given(st.integers(1, 30), st.integers(0, 2**32), st.data())
    def test_hamming_distance_equals_bits(self, n, seed, data):
        bits = data.draw(st.integers(1, n))
        x = random_solution(n, seeded_rng(seed))
        y = perturb(x, bits, seeded_rng(seed + 1))
        assert int((x != y).sum()) == bits

    def test_same_seed_same_output(self):
        x = random_solution(20, seeded_rng(11))
        a = perturb(x, 5, seeded_rng(42))
        b = perturb(x, 5, seeded_rng(42))
        assert np.array_equal(a, b)

    def test_input_not_mutated(self):
        x = random_solution(10, seeded_rng(1))
        before = x.copy()
        perturb(x, 4, seeded_rng(2))
        assert np.array_equal(x, before)


def assert_no_improving_flip(objective, x):
    for k in range(x.size):
        assert flip_delta(objective, x, k) <= 0


class TestLocalSearch:
    @pytest.mark.parametrize("kind", list(ToyKind))
    @pytest.mark.parametrize("pivot", ["best", "first"])
    def test_toy_descends_to_anchor(self, kind, pivot):
        anchor = random_solution(12, seeded_rng(5))
        toy = construct_toy(kind, anchor, seed=9)
        for s in range(6):
            x = random_solution(12, seeded_rng(50 + s))
            out = local_search(x, toy, pivot_rule=pivot)
            assert np.array_equal(out, anchor)

    def test_locally_optimal_start_unchanged(self):
        inst = make_instance(8, seed=3)
        count, optima = enumerate_local_optima(inst)
        assert count >= 1
        x = optima[0]
        out = local_search(x, inst)
        assert np.array_equal(out, x)

    @given(st.integers(2, 16), st.integers(0, 2**32))
    def test_output_has_no_improving_flip(self, n, seed):
        inst = make_instance(n, seed=seed % 1000)
        x = random_solution(n, seeded_rng(seed))
        out = local_search(x, inst)
        assert_no_improving_flip(inst, out)

    def test_output_in_enumerated_optima_set(self):
        inst = gen_random_instance(18, 1.0, (-100, 100), seed=12)
        _, optima = enumerate_local_optima(inst, cap=100000)
        optima_set = {tuple(o.tolist()) for o in optima}
        for s in range(5):
            out = local_search(random_solution(18, seeded_rng(s)), inst)
            assert tuple(out.tolist()) in optima_set

    @pytest.mark.parametrize("pivot", ["best", "first"])
    def test_fixed_points_are_exactly_the_local_optima(self, pivot):
        n = 12
        inst = make_instance(n, seed=21)
        _, optima = enumerate_local_optima(inst, cap=1 << n)
        optima_set = {tuple(o.tolist()) for o in optima}
        fixed = set()
        for s in range(1 << n):
            x = np.array([(s >> i) & 1 for i in range(n)], dtype=np.int8)
            out = local_search(x, inst, pivot_rule=pivot)
            if np.array_equal(out, x):
                fixed.add(tuple(x.tolist()))
        assert fixed == optima_set

    def test_smoothed_full_weight_returns_anchor(self):
        # With the blend fully on the toy side, every descent lands on the
        # anchor no matter where the perturbation started.
        n = 14
        inst = make_instance(n, seed=8)
        anchor = random_solution(n, seeded_rng(77))
        toy = construct_toy(ToyKind.PLUS_MINUS_ONE, anchor)
        obj = SmoothedObjective(
            instance=inst, toy=toy, lam=1.0, alpha=auto_alpha(inst, toy))
        rng = seeded_rng(123)
        for _ in range(200):
            x = perturb(anchor, int(rng.integers(1, n + 1)), rng)
            out = local_search(x, obj)
            assert np.array_equal(out, anchor)

    def test_invalid_pivot_rejected(self):
        inst = make_instance(6, seed=0)
        with pytest.raises(ValueError, match="pivot"):
            local_search(random_solution(6, seeded_rng(0)), inst, pivot_rule="x")


def small_run(n=40, amount=20000, seed=0, **kw):
    inst = make_instance(n, seed=seed + 500)
    cfg = SearchConfig(budget=Budget("evals", amount), seed=seed, **kw)
    return inst, cfg


class TestIls:
    def test_degenerate_budget_equals_first_descent(self):
        inst, cfg = small_run(amount=1, seed=4)
        result = ils(inst, cfg)
        x0 = random_solution(inst.n, seeded_rng(4, INIT_STREAM))
        expected = local_search(x0, inst)
        assert np.array_equal(result.best_solution, expected)
        assert result.best_value == evaluate(inst, expected)

    def test_best_matches_fresh_evaluate(self):
        inst, cfg = small_run(seed=1)
        result = ils(inst, cfg)
        assert result.best_value == evaluate(inst, result.best_solution)
        assert_no_improving_flip(inst, result.best_solution)

    def test_records_monotone_and_final_row_matches(self):
        inst, cfg = small_run(amount=30000, seed=2, log_interval=5000)
        result = ils(inst, cfg)
        best_series = [r.best_f for r in result.records]
        assert best_series == sorted(best_series)
        last = result.records[-1]
        assert last.best_f == result.best_value
        assert last.evaluations == result.evaluations
        assert result.evaluations >= 30000

    def test_mark_grid_is_the_log_interval(self):
        inst, cfg = small_run(amount=30000, seed=6, log_interval=5000)
        result = ils(inst, cfg)
        marks = [r.elapsed for r in result.records[:-1]]
        assert marks == sorted(set(marks))
        assert all(m % 5000 == 0 and m <= 30000 for m in marks)

    def test_rerun_is_bit_identical(self):
        inst, cfg = small_run(seed=9, log_interval=4000)
        a = ils(inst, cfg)
        b = ils(inst, cfg)
        assert np.array_equal(a.best_solution, b.best_solution)
        assert (a.best_value, a.evaluations) == (b.best_value, b.evaluations)
        assert a.records == b.records

    def test_default_perturbation_is_quarter_of_n(self):
        inst, cfg = small_run(seed=3)
        explicit = SearchConfig(budget=cfg.budget, seed=3,
                                perturbation_bits=inst.n // 4)
        a = ils(inst, cfg)
        b = ils(inst, explicit)
        assert np.array_equal(a.best_solution, b.best_solution)
        assert a.evaluations == b.evaluations

    def test_beats_random_sampling_every_seed(self):
        n, amount = 100, 10**7
        inst = gen_random_instance(n, 1.0, (-100, 100), seed=31)
        q = inst.q.astype(np.float64)
        samples = amount // n
        for seed in range(20):
            result = ils(inst, SearchConfig(budget=Budget("evals", amount),
                                            seed=seed))
            rng = np.random.default_rng(seed)
            sample_best = -np.inf
            for start in range(0, samples, 20000):
                block = min(20000, samples - start)
                xs = rng.integers(0, 2, size=(block, n)).astype(np.float64)
                values = np.einsum("ij,ij->i", xs @ q, xs)
                sample_best = max(sample_best, float(values.max()))
            assert result.best_value >= sample_best

    def test_seconds_budget_runs_and_stops(self):
        inst = make_instance(50, seed=77)
        cfg = SearchConfig(budget=Budget("seconds", 0.2), seed=0,
                           log_interval=0.05)
        result = ils(inst, cfg)
        assert 0.2 <= result.elapsed_seconds < 5.0
        assert result.best_value == evaluate(inst, result.best_solution)
        elapsed = [r.elapsed for r in result.records]
        assert elapsed == sorted(elapsed)


class TestLsils:
    def test_zero_schedule_is_bit_identical_to_ils(self):
        inst = make_instance(60, seed=15)
        for kind in list(ToyKind):
            for seed in (0, 7):
                base_cfg = SearchConfig(budget=Budget("evals", 50000),
                                        seed=seed, log_interval=10000)
                smooth_cfg = SearchConfig(budget=Budget("evals", 50000),
                                          seed=seed, log_interval=10000,
                                          lambda_schedule=LambdaSchedule.zero(),
                                          toy_kind=kind)
                a = ils(inst, base_cfg)
                b = lsils(inst, smooth_cfg)
                assert np.array_equal(a.best_solution, b.best_solution)
                assert a.best_value == b.best_value
                assert a.evaluations == b.evaluations
                assert a.records == b.records

    def test_full_weight_schedule_freezes_the_best(self):
        # At blend weight 1 every descent returns to the current best, so
        # the best never moves past the initial plain descent.
        inst = make_instance(60, seed=16)
        frozen = lsils(inst, SearchConfig(
            budget=Budget("evals", 40000), seed=5,
            lambda_schedule=LambdaSchedule.constant(1.0),
            toy_kind=ToyKind.PLUS_MINUS_ONE))
        first_descent = ils(inst, SearchConfig(budget=Budget("evals", 1), seed=5))
        assert frozen.best_value == first_descent.best_value
        assert np.array_equal(frozen.best_solution, first_descent.best_solution)

    def test_algo_labels(self):
        inst = make_instance(20, seed=17)
        r1 = ils(inst, SearchConfig(budget=Budget("evals", 2000), seed=0))
        r2 = lsils(inst, SearchConfig(budget=Budget("evals", 2000), seed=0,
                                      toy_kind="random"))
        assert r1.algo == "ils"
        assert r2.algo == "lsils-random"

    def test_records_lambda_column_follows_schedule(self):
        inst = make_instance(40, seed=18)
        schedule = LambdaSchedule.staged_ramp(40000)
        result = lsils(inst, SearchConfig(
            budget=Budget("evals", 40000), seed=1, log_interval=4000,
            lambda_schedule=schedule, toy_kind=ToyKind.PLUS_MINUS_I))
        lams = [r.lam for r in result.records]
        assert lams == sorted(lams)
        assert set(lams) <= {0.0, 0.001, 0.002, 0.003, 0.004}
        assert lams[-1] == 0.004

    def test_best_matches_fresh_evaluate_and_is_monotone(self):
        inst = make_instance(50, seed=19)
        result = lsils(inst, SearchConfig(
            budget=Budget("evals", 60000), seed=2, log_interval=6000,
            lambda_schedule=LambdaSchedule.staged_ramp(60000),
            toy_kind=ToyKind.PLUS_MINUS_I))
        assert result.best_value == evaluate(inst, result.best_solution)
        series = [r.best_f for r in result.records]
        assert series == sorted(series)

    def test_random_toy_rerun_is_bit_identical(self):
        inst = make_instance(50, seed=20)
        cfg = dict(budget=Budget("evals", 60000), seed=3, log_interval=6000,
                   lambda_schedule=LambdaSchedule.staged_ramp(60000),
                   toy_kind=ToyKind.RANDOM)
        a = lsils(inst, SearchConfig(**cfg))
        b = lsils(inst, SearchConfig(**cfg))
        assert np.array_equal(a.best_solution, b.best_solution)
        assert (a.best_value, a.evaluations) == (b.best_value, b.evaluations)
        assert a.records == b.records
