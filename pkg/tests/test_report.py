import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oodcf import counterfactual, report
from oodcf.counterfactual import GenerationConfig
from oodcf.errors import DimensionMismatch, EmptyInput


def pairwise_auroc(pos, neg):
    """Exhaustive pairwise-comparison oracle with half credit for ties."""
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


class TestL1Distance:
    def test_identity(self):
        assert report.l1_distance(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0

    def test_hand_arithmetic(self):
        assert report.l1_distance(np.array([1.0, 2.0]), np.array([2.0, 0.0])) == 3.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            report.l1_distance(np.zeros(2), np.zeros(3))

    def test_standardized_variant(self):
        got = report.l1_distance(np.array([0.0, 0.0]), np.array([2.0, 3.0]),
                                 standardized=True, scale=np.array([2.0, 3.0]))
        assert got == 2.0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 1000))
    def test_permutation_invariance(self, seed):
        gen = np.random.default_rng(seed)
        x, y = gen.normal(size=(2, 6))
        perm = gen.permutation(6)
        assert report.l1_distance(x, y) == pytest.approx(
            report.l1_distance(x[perm], y[perm]), rel=1e-12)


class TestAuroc:
    def test_perfect_separation(self):
        assert report.auroc([3.0, 2.0], [1.0, 0.0]) == 1.0

    def test_single_tied_pair(self):
        assert report.auroc([1.0], [1.0]) == 0.5

    def test_hand_case(self):
        # 8 of 9 pairs have pos > neg
        assert report.auroc([0.9, 0.8, 0.4], [0.7, 0.3, 0.2]) == pytest.approx(8 / 9)

    def test_empty_raises(self):
        with pytest.raises(EmptyInput):
            report.auroc([], [1.0])

    def test_matches_pairwise_oracle_with_ties(self):
        gen = np.random.default_rng(0)
        for _ in range(200):
            n_pos = int(gen.integers(1, 50))
            n_neg = int(gen.integers(1, 50))
            # coarse grid forces plenty of ties
            pos = gen.integers(0, 6, n_pos).astype(float)
            neg = gen.integers(0, 6, n_neg).astype(float)
            assert abs(report.auroc(pos, neg) - pairwise_auroc(pos, neg)) < 1e-12

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 1000))
    def test_complement_identity(self, seed):
        gen = np.random.default_rng(seed)
        pos = gen.integers(0, 5, int(gen.integers(1, 20))).astype(float)
        neg = gen.integers(0, 5, int(gen.integers(1, 20))).astype(float)
        assert report.auroc(pos, neg) + report.auroc(neg, pos) == pytest.approx(1.0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 1000))
    def test_monotone_transform_invariance(self, seed):
        gen = np.random.default_rng(seed)
        pos = gen.normal(size=int(gen.integers(1, 25)))
        neg = gen.normal(size=int(gen.integers(1, 25)))
        base = report.auroc(pos, neg)
        assert report.auroc(np.exp(pos), np.exp(neg)) == pytest.approx(base)
        assert report.auroc(3 * pos + 7, 3 * neg + 7) == pytest.approx(base)


def fake_results(points):
    out = []
    for x in np.atleast_2d(points):
        x = np.asarray(x, dtype=float)
        out.append(counterfactual.CounterfactualResult(
            x_original=x, x_counterfactual=x.copy(), delta=np.zeros_like(x),
            trajectories=[], losses_before={}, losses_after={}, steps_taken={},
            variant="full", target_class=None))
    return out


class TestEvaluateRun:
    def test_counterfactuals_equal_to_id_test_score_half(self, toy_fit):
        id_test = toy_fit.test.id_rows().features
        row = report.evaluate_run(fake_results(id_test), id_test,
                                  toy_fit.model, toy_fit.projection)
        assert row.auroc == pytest.approx(0.5, abs=1e-12)
        assert row.l1 == 0.0

    def test_untouched_ood_remains_detectable(self, toy_fit, toy_ood):
        id_test = toy_fit.test.id_rows().features
        row = report.evaluate_run(fake_results(toy_ood), id_test,
                                  toy_fit.model, toy_fit.projection)
        assert row.auroc >= 0.99

    def test_schema_fields(self, toy_fit, toy_ood):
        cfg = GenerationConfig()
        results = counterfactual.batch_generate(
            toy_ood[:20], variant="full", model=toy_fit.model,
            projection=toy_fit.projection, cfg=cfg)
        row = report.evaluate_run(results, toy_fit.test.id_rows().features,
                                  toy_fit.model, toy_fit.projection,
                                  approach="OOD CF")
        assert row.approach == "OOD CF"
        for name in ("non_dis", "dis", "l1", "auroc"):
            assert np.isfinite(getattr(row, name))
        assert 0.0 <= row.auroc <= 1.0

    def test_failed_rows_excluded(self, toy_fit, toy_ood):
        results = fake_results(toy_ood[:5])
        results.append(counterfactual.CounterfactualResult(
            x_original=toy_ood[5], x_counterfactual=toy_ood[5],
            delta=np.zeros(2), trajectories=[], losses_before={},
            losses_after={}, steps_taken={}, variant="full",
            target_class=None, error="NonFiniteLoss: boom"))
        row = report.evaluate_run(results, toy_fit.test.id_rows().features,
                                  toy_fit.model, toy_fit.projection)
        assert np.isfinite(row.l1)

    def test_all_failed_raises(self, toy_fit, toy_ood):
        bad = counterfactual.CounterfactualResult(
            x_original=toy_ood[0], x_counterfactual=toy_ood[0],
            delta=np.zeros(2), trajectories=[], losses_before={},
            losses_after={}, steps_taken={}, variant="full",
            target_class=None, error="boom")
        with pytest.raises(EmptyInput):
            report.evaluate_run([bad], toy_fit.test.id_rows().features,
                                toy_fit.model, toy_fit.projection)


class TestRepeatAndAggregate:
    @staticmethod
    def run_fn(seed):
        gen = np.random.default_rng(seed)
        return report.EvalRow(approach="X", non_dis=float(gen.normal()),
                              dis=float(gen.normal()), l1=float(gen.normal()),
                              auroc=float(gen.random()))

    def test_single_seed_equals_single_run(self):
        agg = report.repeat_and_aggregate(self.run_fn, 7, n_seeds=1)
        single = self.run_fn(7)
        assert agg.mean.non_dis == single.non_dis
        assert agg.mean.auroc == single.auroc
        assert agg.mean.n_seeds == 1

    def test_mean_matches_arithmetic(self):
        agg = report.repeat_and_aggregate(self.run_fn, 0, n_seeds=5)
        rows = [self.run_fn(s) for s in range(5)]
        assert agg.mean.l1 == pytest.approx(np.mean([r.l1 for r in rows]), abs=1e-12)
        assert len(agg.per_seed) == 5
        assert set(agg.std) == {"non_dis", "dis", "l1", "auroc"}

    def test_rerun_is_bit_identical(self):
        a = report.repeat_and_aggregate(self.run_fn, 3, n_seeds=4)
        b = report.repeat_and_aggregate(self.run_fn, 3, n_seeds=4)
        assert a.mean == b.mean

    def test_explicit_seed_list(self):
        agg = report.repeat_and_aggregate(self.run_fn, 0, seeds=[2, 9, 14])
        assert [seed for seed, _ in agg.per_seed] == [2, 9, 14]
        assert agg.mean.n_seeds == 3

    def test_failing_seed_reports_seed(self):
        def boom(seed):
            if seed == 4:
                raise EmptyInput("nothing to do")
            return self.run_fn(seed)

        with pytest.raises(EmptyInput, match="seed 4"):
            report.repeat_and_aggregate(boom, 3, n_seeds=3)


class TestFormatTable:
    def test_header_schema(self, toy_fit):
        rows = [report.EvalRow("OOD CF", 1.0, -2.0, 11.8, 0.86),
                report.EvalRow("CFI", 1.6, 8.5, 9.5, 1.0)]
        text = report.format_table(rows)
        lines = text.splitlines()
        assert lines[0].split() == ["Approach", "Non-dis", "Dis", "L1", "AUROC"]
        assert "OOD CF" in lines[2]
