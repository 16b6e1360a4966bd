import math

import numpy as np
import pytest

from augshuffle.accountant import ProtocolConfig, baseline_parameters
from augshuffle.adversary import AttackSpec, collusion_scenario, measure_gain, mga_fake_messages, predicted_gain
from augshuffle.harness.datasets import synth_zipf

DATA = synth_zipf(4000, 20, 1.0, seed=21)


def test_single_target_fakes_all_send_it():
    spec = AttackSpec(0.2, (7,))
    fakes = mga_fake_messages("sageo", spec, None, np.random.default_rng(0), 1000, 20)
    assert fakes.size == spec.fake_count(1000) == 250
    assert set(fakes.tolist()) == {7}


def test_attack_spec_validation():
    with pytest.raises(ValueError):
        AttackSpec(1.0, (1,))
    with pytest.raises(ValueError):
        AttackSpec(0.1, (2, 2))
    spec = AttackSpec.random_targets(0.1, 3, 20, seed=1)
    assert len(spec.targets) == 3 and all(1 <= t <= 20 for t in spec.targets)


@pytest.mark.parametrize("kind", ["sageo", "grr", "oue", "olh", "rappor", "cm22"])
def test_no_fakes_no_gain(kind):
    config = ProtocolConfig(kind, 1.0, 1e-12, n=DATA.n, d=DATA.d)
    report = measure_gain(kind, config, DATA, AttackSpec(0.0, (1, 2)), runs=5, seed=3)
    assert report.gain == pytest.approx(0.0, abs=1e-12)


def test_predicted_gain_substitutions():
    assert predicted_gain("sbin", 0.1, 0.2, 2, 100, 1.0, 1e-12, 10**4) == pytest.approx(0.08)
    eps, n, d, delta = 1.0, 10**4, 100, 1e-12
    for kind, formula in {
        "grr": lambda e: 0.1 * (1 - 0.2) + 0.1 * (d - 2) / math.expm1(e),
        "rappor": lambda e: 0.1 * (2 - 0.2) + 0.1 * 2 / math.expm1(e / 2),
        "oue": lambda e: 0.1 * (4 - 0.2) + 0.1 * 4 / math.expm1(e),
    }.items():
        e_l = baseline_parameters(kind, eps, n, d, delta)["eps_local"]
        assert predicted_gain(kind, 0.1, 0.2, 2, d, eps, delta, n) == pytest.approx(formula(e_l))


@pytest.mark.parametrize("kind", ["sbin", "sageo", "s1geo"])
def test_proposed_gain_matches_and_is_flat(kind):
    spec = AttackSpec(0.1, (3, 11))
    gains = []
    for eps in (0.1, 5.0):
        config = ProtocolConfig(kind, eps, 1e-12, n=DATA.n, d=DATA.d)
        report = measure_gain(kind, config, DATA, spec, runs=60, seed=4)
        assert abs(report.gain - report.predicted) <= 4 * report.stderr + 1e-12
        gains.append(report)
    a, b = gains
    assert abs(a.gain - b.gain) <= 4 * math.hypot(a.stderr, b.stderr) + 1e-12


def test_grr_gain_grows_as_epsilon_shrinks():
    spec = AttackSpec(0.1, (3, 11))
    small = measure_gain("grr", ProtocolConfig("grr", 0.3, 1e-12, n=DATA.n, d=DATA.d), DATA, spec, 40, 5)
    large = measure_gain("grr", ProtocolConfig("grr", 5.0, 1e-12, n=DATA.n, d=DATA.d), DATA, spec, 40, 5)
    assert small.gain - large.gain > 2 * math.hypot(small.stderr, large.stderr)
    assert small.predicted > large.predicted


@pytest.mark.parametrize("kind", ["grr", "oue", "olh", "rappor"])
def test_local_gain_close_to_prediction(kind):
    spec = AttackSpec(0.1, (3, 11))
    config = ProtocolConfig(kind, 1.0, 1e-12, n=DATA.n, d=DATA.d)
    report = measure_gain(kind, config, DATA, spec, runs=30, seed=6)
    assert abs(report.gain - report.predicted) <= 4 * report.stderr + 0.02 * report.predicted


def test_collusion_curves():
    n = 10**5
    proposed = collusion_scenario("sageo", 0.1, n, (0, 0.1, 0.5, 0.9), 1e-12, 100)
    assert [eps for *_, eps in proposed] == [0.1] * 4
    shuffle = collusion_scenario("oue", 0.1, n, (0, 0.1, 0.5, 0.9, 1 - 1 / n), 1e-12, 100)
    values = [eps for *_, eps in shuffle]
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert shuffle[-1][1] == n - 1
    assert values[-1] == pytest.approx(baseline_parameters("oue", 0.1, n, 100, 1e-12)["eps_local"])


@pytest.mark.parametrize("kind", ["cm22", "lwy22", "bc20"])
def test_multi_message_gain_against_prediction(kind):
    data = synth_zipf(20_000, 20, 1.0, seed=22)
    spec = AttackSpec(0.1, (3, 11))
    config = ProtocolConfig(kind, 2.0, 1e-6, n=data.n, d=data.d)
    report = measure_gain(kind, config, data, spec, runs=30, seed=7)
    if report.predicted_is_lower_bound:
        assert report.gain >= report.predicted - 4 * report.stderr
    else:
        assert abs(report.gain - report.predicted) <= 4 * report.stderr + 1e-3 * report.predicted
