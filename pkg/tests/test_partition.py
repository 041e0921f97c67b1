import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oodcf import partition
from oodcf.errors import (
    CapExceeded,
    DataError,
    DegenerateNormalizationWarning,
    OutOfRange,
)


def separated_1d(n=200, gap=3.0, scale=1.0, seed=0):
    gen = np.random.default_rng(seed)
    Z = np.concatenate([gen.normal(-gap, scale, n), gen.normal(gap, scale, n)])
    Y = np.concatenate([np.zeros(n, int), np.ones(n, int)])
    return Z[:, None], Y


class TestFitQda:
    def test_separated_posterior_matches_closed_form(self):
        Z, Y = separated_1d()
        model = partition.fit_qda(Z, Y)
        post = model.posterior(np.array([[3.0]]))[0]
        assert post[1] > 0.99
        # closed-form two-Gaussian posterior from the fitted moments
        m0, v0 = model.components[0].mean[0], model.components[0].cov[0, 0]
        m1, v1 = model.components[1].mean[0], model.components[1].cov[0, 0]
        log0 = -0.5 * (math.log(2 * math.pi * v0) + (3 - m0) ** 2 / v0) + math.log(0.5)
        log1 = -0.5 * (math.log(2 * math.pi * v1) + (3 - m1) ** 2 / v1) + math.log(0.5)
        expected = 1.0 / (1.0 + math.exp(log0 - log1))
        assert post[1] == pytest.approx(expected, rel=1e-12)

    def test_identical_classes_posterior_near_priors(self):
        gen = np.random.default_rng(1)
        base = gen.normal(size=(300, 2))
        Z = np.vstack([base, base])  # class distributions identical
        Y = np.array([0] * 300 + [1] * 300)
        model = partition.fit_qda(Z, Y)
        post = model.posterior(gen.normal(size=(50, 2)))
        assert np.allclose(post, 0.5, atol=1e-9)

    def test_single_class_rejected(self):
        Z = np.random.default_rng(2).normal(size=(20, 2))
        with pytest.raises(DataError):
            partition.fit_qda(Z, np.zeros(20, int))

    def test_priors_are_empirical(self):
        Z, Y = separated_1d()
        Z = np.vstack([Z, Z[:100]])
        Y = np.concatenate([Y, np.zeros(100, int)])
        model = partition.fit_qda(Z, Y)
        assert model.priors[0] == pytest.approx(300 / 500)

    def test_posterior_rows_sum_to_one(self):
        Z, Y = separated_1d(seed=3)
        model = partition.fit_qda(Z, Y)
        P = model.posterior(np.linspace(-5, 5, 40)[:, None])
        assert np.allclose(P.sum(axis=1), 1.0, atol=1e-12)


class TestBernoulliEntropy:
    def test_maximum(self):
        assert partition.bernoulli_entropy(0.5) == 1.0

    def test_degenerate_ends(self):
        assert partition.bernoulli_entropy(0.0) == 0.0
        assert partition.bernoulli_entropy(1.0) == 0.0

    def test_quarter(self):
        # -0.25*log2(0.25) - 0.75*log2(0.75), evaluated at high precision
        assert partition.bernoulli_entropy(0.25) == pytest.approx(
            0.8112781244591328, abs=1e-12)

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            partition.bernoulli_entropy(1.5)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.0, 1.0))
    def test_bounds_and_symmetry(self, p):
        h = partition.bernoulli_entropy(p)
        assert 0.0 <= h <= 1.0
        assert h == pytest.approx(partition.bernoulli_entropy(1.0 - p), abs=1e-12)


class TestConditionalEntropy:
    def test_constant_half_posterior_is_exactly_one(self):
        gen = np.random.default_rng(4)
        base = gen.normal(size=(100, 1))
        model = partition.fit_qda(np.vstack([base, base]),
                                  np.array([0] * 100 + [1] * 100))
        h = partition.conditional_entropy(model, gen.normal(size=(30, 1)))
        assert h == 1.0

    def test_toy_pc1_entropy(self, toy_fit):
        model = partition.fit_qda(toy_fit.Z_train[:, [0]], toy_fit.train.class_label)
        h = partition.conditional_entropy(model, toy_fit.Z_eval[:, [0]])
        assert abs(h - 1.92e-3) <= 5e-3

    def test_toy_pc2_entropy(self, toy_fit):
        model = partition.fit_qda(toy_fit.Z_train[:, [1]], toy_fit.train.class_label)
        h = partition.conditional_entropy(model, toy_fit.Z_eval[:, [1]])
        assert abs(h - 1.0) <= 0.02

    def test_binary_entropy_range(self):
        Z, Y = separated_1d(gap=0.5, seed=5)
        model = partition.fit_qda(Z, Y)
        h = partition.conditional_entropy(model, Z)
        assert 0.0 <= h <= 1.0


class TestPartitionLoss:
    def test_toy_pc1_subset(self, toy_fit):
        loss = partition.partition_loss(
            (0,), toy_fit.Z_train, toy_fit.train.class_label, toy_fit.Z_eval)
        assert loss == pytest.approx(-0.998, abs=0.02)

    def test_toy_sign_flip(self, toy_fit):
        a = partition.partition_loss(
            (0,), toy_fit.Z_train, toy_fit.train.class_label, toy_fit.Z_eval)
        b = partition.partition_loss(
            (1,), toy_fit.Z_train, toy_fit.train.class_label, toy_fit.Z_eval)
        assert b == -a

    def test_uninformative_dims_cancel(self):
        gen = np.random.default_rng(6)
        base = gen.normal(size=(150, 2))
        Z = np.vstack([base, base])
        Y = np.array([0] * 150 + [1] * 150)
        loss = partition.partition_loss((0,), Z, Y, gen.normal(size=(40, 2)))
        assert loss == 0.0

    def test_empty_sides_rejected(self, toy_fit):
        with pytest.raises(OutOfRange):
            partition.partition_loss(
                (0, 1), toy_fit.Z_train, toy_fit.train.class_label, toy_fit.Z_eval)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 300))
    def test_antisymmetry_exact(self, seed):
        gen = np.random.default_rng(seed)
        k = int(gen.integers(2, 5))
        Z = gen.normal(size=(60, k))
        Y = gen.integers(0, 2, size=60)
        if len(np.unique(Y)) < 2:
            Y[0], Y[1] = 0, 1
        Ze = gen.normal(size=(25, k))
        cut = int(gen.integers(1, k))
        sub = tuple(range(cut))
        comp = tuple(range(cut, k))
        assert partition.partition_loss(sub, Z, Y, Ze) == \
            -partition.partition_loss(comp, Z, Y, Ze)


def four_d_signal_data(seed=0, n=400, n_eval=200):
    """Dims 0 and 1 carry all class signal; dims 2 and 3 are noise."""
    gen = np.random.default_rng(seed)

    def block(n_rows):
        y = gen.integers(0, 2, size=n_rows)
        mu = np.where(y[:, None] == 0, 1.5, -1.5) * np.array([1.0, 1.0, 0.0, 0.0])
        return mu + gen.normal(size=(n_rows, 4)), y

    Z, Y = block(n)
    Ze, _ = block(n_eval)
    return Z, Y, Ze


def reference_search(Z, Y, Ze, slack=0.10):
    """Independent re-implementation: direct-formula QDA posteriors, explicit
    enumeration, and the documented normalization/threshold rule."""

    def entropy(cols):
        cols = list(cols)
        logps = []
        for c in (0, 1):
            rows = Z[Y == c][:, cols]
            mu = rows.mean(axis=0)
            cov = np.atleast_2d(np.cov(rows.T, ddof=1))
            inv = np.linalg.inv(cov)
            sign, logdet = np.linalg.slogdet(cov)
            diff = Ze[:, cols] - mu
            quad = np.einsum("ij,jk,ik->i", diff, inv, diff)
            lp = -0.5 * (len(cols) * np.log(2 * np.pi) + logdet + quad)
            logps.append(lp + np.log(rows.shape[0] / Z.shape[0]))
        L = np.vstack(logps)
        L = L - L.max(axis=0)
        P = np.exp(L)
        P = P / P.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(P > 0, P * np.log2(P), 0.0)
        return float((-terms.sum(axis=0)).mean())

    k = Z.shape[1]
    best = []
    for c in range(1, k):
        cands = []
        for sub in combinations(range(k), c):
            comp = tuple(i for i in range(k) if i not in sub)
            cands.append((entropy(sub) - entropy(comp), sub))
        loss, sub = min(cands, key=lambda t: (t[0], t[1]))
        best.append((c, sub, loss))
    losses = np.array([b[2] for b in best])
    norm = (losses - losses.mean()) / losses.std()
    m = norm.min()
    tau = m + abs(m) * slack
    for (c, sub, loss), z in zip(best, norm):
        if z < tau or z == tau:
            return sub, [b[2] for b in best]
    raise AssertionError("unreachable")


class TestSearchPartition:
    def test_toy_partition(self, toy_fit):
        assert toy_fit.part.z_d == (0,)
        assert toy_fit.part.z_n == (1,)

    def test_four_d_against_independent_oracle(self):
        Z, Y, Ze = four_d_signal_data()
        result = partition.search_partition(Z, Y, Ze)
        oracle_subset, oracle_losses = reference_search(Z, Y, Ze)
        assert result.z_d == oracle_subset
        assert set(result.z_d) <= {0, 1}
        impl_losses = [r.loss for r in result.per_cardinality]
        assert np.allclose(impl_losses, oracle_losses, atol=1e-9)

    def test_slack_zero_is_global_argmin(self):
        Z, Y, Ze = four_d_signal_data(seed=1)
        result = partition.search_partition(Z, Y, Ze, slack=0.0)
        losses = [r.normalized for r in result.per_cardinality]
        chosen = [r for r in result.per_cardinality if r.chosen][0]
        assert chosen.normalized == min(losses)

    def test_deterministic(self):
        Z, Y, Ze = four_d_signal_data(seed=2)
        a = partition.search_partition(Z, Y, Ze)
        b = partition.search_partition(Z, Y, Ze)
        assert a.z_d == b.z_d
        assert [r.loss for r in a.per_cardinality] == [r.loss for r in b.per_cardinality]

    def test_monotone_bias_guard(self):
        # the slack rule can only shrink the discriminative set
        for seed in range(4):
            Z, Y, Ze = four_d_signal_data(seed=seed)
            result = partition.search_partition(Z, Y, Ze)
            by_norm = min(result.per_cardinality, key=lambda r: r.normalized)
            assert result.chosen_cardinality <= by_norm.cardinality

    def test_partition_covers_all_dims(self):
        Z, Y, Ze = four_d_signal_data(seed=3)
        result = partition.search_partition(Z, Y, Ze)
        assert sorted(result.z_d + result.z_n) == [0, 1, 2, 3]
        assert set(result.z_d) & set(result.z_n) == set()
        assert 1 <= len(result.z_d) <= 3

    def test_cap(self):
        gen = np.random.default_rng(7)
        Z = gen.normal(size=(30, 6))
        Y = gen.integers(0, 2, size=30)
        with pytest.raises(CapExceeded):
            partition.search_partition(Z, Y, Z, cap=5)

    def test_degenerate_normalization_fallback(self, toy_fit):
        # k=2 has a single cardinality: std is zero, fallback must warn
        with pytest.warns(DegenerateNormalizationWarning):
            result = partition.search_partition(
                toy_fit.Z_train, toy_fit.train.class_label, toy_fit.Z_eval)
        assert result.chosen_cardinality == 1
        assert result.notes

    def test_k_below_two(self):
        gen = np.random.default_rng(8)
        with pytest.raises(OutOfRange):
            partition.search_partition(gen.normal(size=(20, 1)),
                                       gen.integers(0, 2, 20),
                                       gen.normal(size=(5, 1)))


class TestMulticlass:
    """Three ID classes: entropies generalize to the categorical posterior."""

    @staticmethod
    def data(seed=0):
        gen = np.random.default_rng(seed)
        means = np.array([[4.0, 0, 0], [-4.0, 0, 0], [0.0, 4, 0]])
        Z = np.vstack([m + gen.normal(size=(60, 3)) * 0.5 for m in means])
        Y = np.repeat([0, 1, 2], 60)
        Ze = np.vstack([m + gen.normal(size=(20, 3)) * 0.5 for m in means])
        return Z, Y, Ze

    def test_entropy_bounded_by_log2_c(self):
        Z, Y, Ze = self.data()
        gen = np.random.default_rng(1)
        noise = partition.fit_qda(gen.normal(size=(180, 2)), Y)
        h = partition.conditional_entropy(noise, gen.normal(size=(50, 2)))
        assert 0.0 <= h <= np.log2(3) + 1e-9

    def test_three_class_search_runs(self):
        Z, Y, Ze = self.data()
        result = partition.search_partition(Z, Y, Ze)
        # dims 0 and 1 carry the class structure; dim 2 is noise
        assert 2 not in result.z_d
        assert sorted(result.z_d + result.z_n) == [0, 1, 2]
