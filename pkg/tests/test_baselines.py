import math

import numpy as np
import pytest
from scipy import stats

from augshuffle.accountant import baseline_parameters
from augshuffle.baselines import (
    GRR,
    OLH,
    OUE,
    RAPPOR,
    bc20_round,
    cm22_round,
    local_randomizer,
    lwy22_round,
    max_log_ratio,
    multi_message_estimate,
    multi_message_expected_l2,
    multi_message_fakes,
    multi_message_round,
)
from augshuffle.engine import Dataset
from augshuffle.harness.datasets import synth_zipf

LOCAL = ["grr", "oue", "olh", "rappor"]


@pytest.fixture(scope="module")
def small_data():
    return synth_zipf(5000, 10, 1.0, seed=3)


class TestChannels:
    @pytest.mark.parametrize("cls", [GRR, OUE, RAPPOR])
    @pytest.mark.parametrize("d", [2, 3, 6, 10])
    @pytest.mark.parametrize("eps", [0.3, 1.0, 2.5])
    def test_exact_ldp(self, cls, d, eps):
        channel = cls(eps, d).channel_matrix()
        assert np.allclose(channel.sum(axis=1), 1)
        assert max_log_ratio(channel) == pytest.approx(eps, rel=1e-9)

    def test_grr_three_items(self):
        channel = GRR(1.0, 3).channel_matrix()
        assert channel.max() / channel.min() == pytest.approx(math.e)

    def test_olh_channel_within_budget(self):
        mech = OLH(1.2, 8)
        seeds = np.random.default_rng(0).integers(0, 2**63, size=64, dtype=np.uint64)
        channel = mech.channel_matrix(seeds)
        assert np.allclose(channel.sum(axis=1), 1)
        assert max_log_ratio(channel) <= 1.2 + 1e-9

    def test_rappor_flip_probability(self):
        assert RAPPOR(1.4, 5).flip == pytest.approx(1 / (math.exp(0.7) + 1))


class TestLimits:
    def test_grr_huge_epsilon_is_identity(self):
        x = np.random.default_rng(1).integers(1, 8, size=500)
        assert np.array_equal(GRR(60.0, 7).randomize(x, np.random.default_rng(2)), x)

    def test_grr_zero_epsilon_is_uniform(self):
        out = GRR(0.0, 5).randomize(np.ones(50_000, dtype=int), np.random.default_rng(3))
        _, p_value = stats.chisquare(np.bincount(out - 1, minlength=5))
        assert p_value > 1e-4

    def test_oue_huge_epsilon_is_one_hot(self):
        x = np.array([3, 1, 2])
        bits = OUE(60.0, 4).randomize(x, np.random.default_rng(4))
        # the true bit survives with probability 1/2 at any epsilon; the rest must be 0
        rows = np.arange(3)
        mask = np.ones_like(bits)
        mask[rows, x - 1] = False
        assert not bits[mask.astype(bool)].any()

    def test_noiseless_one_hot_gives_exact_frequencies(self):
        data = Dataset(np.array([1, 2, 2, 4]), 4)
        rappor = RAPPOR(80.0, 4)
        messages = rappor.randomize(data.values, np.random.default_rng(5))
        assert np.allclose(rappor.estimate(messages, data.n), data.true_frequencies())
        # with no flips the debiased estimate is the raw column mean
        assert np.allclose(rappor.estimate(messages), messages.mean(axis=0))


class TestLocalEstimators:
    @pytest.mark.parametrize("kind", LOCAL)
    def test_unbiased(self, kind, small_data):
        mech = local_randomizer(kind, 1.0, small_data.d)
        rng = np.random.default_rng(10)
        runs = 300
        est = np.array([mech.estimate(mech.randomize(small_data.values, rng), small_data.n) for _ in range(runs)])
        sd = np.sqrt(mech.variance_per_item(small_data.n) * 1.3)
        assert np.all(np.abs(est.mean(axis=0) - small_data.true_frequencies()) <= 4 * sd / math.sqrt(runs))

    @pytest.mark.parametrize("kind", LOCAL)
    def test_loss_matches_table(self, kind, small_data):
        mech = local_randomizer(kind, 0.5, small_data.d)
        rng = np.random.default_rng(11)
        truth = small_data.true_frequencies()
        runs = 1000
        errors = [((mech.estimate(mech.randomize(small_data.values, rng), small_data.n) - truth) ** 2).sum()
                  for _ in range(runs)]
        assert np.mean(errors) == pytest.approx(mech.expected_l2(small_data.n), rel=0.2)


class TestMultiMessage:
    def test_bc20_without_dummies_sends_inputs(self, small_data):
        report = bc20_round(small_data, 0.0, np.random.default_rng(0))
        assert np.array_equal(report.messages[0], small_data.values)
        est = multi_message_estimate("bc20", report, {"q1": 0.0}).estimates
        assert np.allclose(est, small_data.true_frequencies())

    def test_lwy22_message_count(self, small_data):
        q3 = 0.3
        totals = [lwy22_round(small_data, q3, np.random.default_rng(i)).n_messages for i in range(200)]
        n = small_data.n
        assert abs(np.mean(totals) - n * (1 + q3)) <= 4 * math.sqrt(n * q3 * (1 - q3) / 200)

    def test_cm22_dummy_bits(self):
        data = Dataset(np.array([1]), 50)
        q2, xi = 0.1, 2000
        report = cm22_round(data, q2, xi, np.random.default_rng(1))
        dummy_bits = report.messages[0][1:].sum(axis=1)
        assert abs(dummy_bits.mean() - 50 * q2) <= 4 * math.sqrt(50 * q2 * (1 - q2) / xi)

    @pytest.mark.parametrize("kind", ["bc20", "cm22", "lwy22"])
    def test_materialized_and_aggregated_agree_in_law(self, kind):
        data = synth_zipf(3000, 5, 1.0, seed=4)
        params = baseline_parameters(kind, 2.0, data.n, data.d, 1e-6)
        runs = 800
        full = np.array([multi_message_round(kind, data, params, np.random.default_rng(i)).counts
                         for i in range(runs)])
        fast = np.array([multi_message_round(kind, data, params, np.random.default_rng(10**6 + i), False).counts
                         for i in range(runs)])
        for item in range(data.d):
            assert stats.ks_2samp(full[:, item], fast[:, item]).pvalue > 1e-4

    @pytest.mark.parametrize("kind", ["bc20", "cm22", "lwy22"])
    def test_unbiased_and_loss(self, kind):
        data = synth_zipf(5000, 10, 1.0, seed=5)
        params = baseline_parameters(kind, 2.0, data.n, data.d, 1e-8)
        rng = np.random.default_rng(12)
        truth = data.true_frequencies()
        runs = 1000
        est = np.array([multi_message_estimate(kind, multi_message_round(kind, data, params, rng, False), params).estimates
                        for _ in range(runs)])
        loss = multi_message_expected_l2(kind, params, data.n, data.d)
        assert np.all(np.abs(est.mean(axis=0) - truth) <= 4 * math.sqrt(loss / data.d / runs) * 1.5)
        assert ((est - truth) ** 2).sum(axis=1).mean() == pytest.approx(loss, rel=0.2)


class TestFakes:
    def test_cm22_first_vector(self):
        params = {"q2": 0.23, "xi": 3}
        targets = np.array([2, 7])
        report = multi_message_fakes("cm22", targets, 40, 30, params, np.random.default_rng(0))
        first = report.messages[0]
        assert first[:, targets - 1].all()
        outside = np.delete(first, targets - 1, axis=1).sum(axis=1)
        assert np.all(outside == math.floor(30 * 0.23) - 2)

    def test_bc20_fake_message_count(self):
        d, q1, count = 20, 0.2, 4000
        targets = np.array([1, 5, 9])
        report = multi_message_fakes("bc20", targets, count, d, {"q1": q1}, np.random.default_rng(1))
        per_user = report.n_messages / count
        expected = 1 + 3 + (d - 3) * q1
        assert abs(per_user - expected) <= 4 * math.sqrt((d - 3) * q1 * (1 - q1) / count)

    def test_olh_fakes_hit_every_target(self):
        mech = OLH(0.5, 30)
        targets = np.array([3, 17])
        fakes = mech.mga_messages(targets, 200, np.random.default_rng(2))
        support = mech.counts(fakes)
        assert support[targets - 1].min() == 200

    def test_oue_fakes_look_genuine(self):
        mech = OUE(1.0, 40)
        fakes = mech.mga_messages(np.array([1, 2]), 10, np.random.default_rng(3))
        assert fakes[:, :2].all()
        assert fakes.sum(axis=1).tolist() == [round(0.5 + 39 / (math.e + 1))] * 10
