"""Data-poisoning and collusion adversaries.

The poisoning adversary injects fake users who craft messages that maximise
the total estimated frequency of a set of target items. Gain is measured on
coupled runs: the genuine users' randomness is shared between the clean and
poisoned run, so the difference isolates the fakes' effect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_count
from .accountant import (
    MULTI_MESSAGE,
    PROPOSED,
    SINGLE_MESSAGE,
    ProtocolConfig,
    baseline_parameters,
    collusion_epsilon,
    proposed_mechanism,
)
from .baselines import (
    HashedReports,
    local_randomizer,
    multi_message_estimate,
    multi_message_fakes,
    multi_message_round,
)
from .engine import Dataset, analyze, noisy_histogram
from .harness.costs import expected_l2
from .harness.defenses import apply_defense

LOWER_BOUND_GAINS = frozenset({"cm22", "lwy22"})


@dataclass(frozen=True)
class AttackSpec:
    """Fraction ``fraction = n' / (n + n')`` of fake users and their targets."""

    fraction: float
    targets: tuple
    seed: int | None = None

    def __post_init__(self):
        if not 0 <= self.fraction < 1:
            raise ValueError(f"fraction must lie in [0, 1), got {self.fraction}")
        targets = tuple(int(t) for t in self.targets)
        if not targets:
            raise ValueError("at least one target item is required")
        if len(set(targets)) != len(targets) or min(targets) < 1:
            raise ValueError("targets must be distinct items >= 1")
        object.__setattr__(self, "targets", targets)

    @classmethod
    def random_targets(cls, fraction, n_targets, d, seed=None):
        """Pick ``n_targets`` distinct targets uniformly from ``1..d``."""
        rng = np.random.default_rng(seed)
        targets = rng.choice(np.arange(1, d + 1), size=n_targets, replace=False)
        return cls(fraction, tuple(sorted(targets.tolist())), seed)

    def fake_count(self, n):
        return int(round(self.fraction * n / (1 - self.fraction)))

    def effective_fraction(self, n):
        fakes = self.fake_count(n)
        return fakes / (n + fakes)


@dataclass(frozen=True)
class GainReport:
    gain: float
    stderr: float
    predicted: float
    per_target: np.ndarray
    runs: int
    predicted_is_lower_bound: bool = False


def mga_fake_messages(kind, spec: AttackSpec, params, rng, n, d):
    """Messages of the ``spec.fake_count(n)`` fake users.

    ``params`` is the protocol's parameter dict: ``{"eps_local"}`` for the
    single-message baselines, the inverted parameters for the multi-message
    ones, and is ignored for the proposed protocols.
    """
    count = spec.fake_count(n)
    targets = np.asarray(spec.targets, dtype=np.int64)
    if kind in PROPOSED:
        return rng.choice(targets, size=count)
    if kind in SINGLE_MESSAGE:
        return local_randomizer(kind, params["eps_local"], d).mga_messages(targets, count, rng)
    if kind in MULTI_MESSAGE:
        return multi_message_fakes(kind, targets, count, d, params, rng)
    raise ValueError(f"unknown protocol {kind!r}")


def _concat_messages(genuine, fake):
    if isinstance(genuine, HashedReports):
        return HashedReports.concat(genuine, fake)
    return np.concatenate((genuine, fake))


def _run_pair(kind, config, dataset, spec, params, mech, run_seed):
    """Clean and poisoned estimates sharing the genuine users' randomness."""
    genuine_seed, fake_seed = run_seed.spawn(2)
    fake_rng = np.random.default_rng(fake_seed)
    n, d = dataset.n, dataset.d
    fakes = mga_fake_messages(kind, spec, params, fake_rng, n, d)
    if kind in PROPOSED:
        mu = mech.dist.mean()
        clean = analyze(noisy_histogram(dataset, mech.dist, mech.beta, genuine_seed), n, mech.beta, mu)
        poisoned_data = Dataset(np.concatenate((dataset.values, fakes)), d)
        poisoned = analyze(
            noisy_histogram(poisoned_data, mech.dist, mech.beta, genuine_seed), poisoned_data.n, mech.beta, mu
        )
        return clean.estimates, poisoned.estimates
    rng = np.random.default_rng(genuine_seed)
    if kind in SINGLE_MESSAGE:
        local = local_randomizer(kind, params["eps_local"], d)
        reports = local.randomize(dataset.values, rng)
        clean = local.estimate(reports, n)
        poisoned = local.estimate(_concat_messages(reports, fakes), n + len(fakes))
        return clean, poisoned
    report = multi_message_round(kind, dataset, params, rng, materialize=False)
    clean = multi_message_estimate(kind, report, params).estimates
    poisoned = multi_message_estimate(kind, report.merge(fakes), params).estimates
    return clean, poisoned


def measure_gain(kind, config: ProtocolConfig, dataset: Dataset, spec: AttackSpec, runs, seed=None,
                 defense=None, alpha_sig=0.05):
    """Average total target inflation over ``runs`` coupled runs.

    ``defense`` post-processes both the clean and the poisoned estimate.
    """
    runs = check_count(runs, "runs", minimum=1)
    n, d = dataset.n, dataset.d
    if max(spec.targets) > d:
        raise ValueError("targets must lie in [1, d]")
    mech, params = None, None
    if kind in PROPOSED:
        mech = proposed_mechanism(kind, config.epsilon, config.delta, config.beta)
    else:
        params = baseline_parameters(kind, config.epsilon, n, d, config.delta, config.local_epsilon)
    variance = None
    if defense and "threshold" in defense:
        variance = expected_l2(kind, config.epsilon, config.delta, n, d, config.beta, config.local_epsilon) / d

    target_idx = np.asarray(spec.targets) - 1
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    deltas = np.empty((runs, len(target_idx)))
    for r, run_seed in enumerate(root.spawn(runs)):
        clean, poisoned = _run_pair(kind, config, dataset, spec, params, mech, run_seed)
        clean = apply_defense(clean, defense, variance, alpha_sig)
        poisoned = apply_defense(poisoned, defense, variance, alpha_sig)
        deltas[r] = poisoned[target_idx] - clean[target_idx]
    totals = deltas.sum(axis=1)
    stderr = float(totals.std(ddof=1) / math.sqrt(runs)) if runs > 1 else math.nan
    f_t = float(dataset.true_frequencies()[target_idx].sum())
    predicted = predicted_gain(
        kind, spec.effective_fraction(n), f_t, len(target_idx), d, config.epsilon, config.delta, n,
        config.local_epsilon,
    )
    return GainReport(float(totals.mean()), stderr, predicted, deltas.mean(axis=0), runs,
                      kind in LOWER_BOUND_GAINS)


def predicted_gain(kind, fraction, f_t, t_count, d, eps, delta, n, local_epsilon=None):
    """Analytic maximal gain of ``kind`` at the given attack strength.

    ``fraction`` is ``n' / (n + n')`` and ``f_t`` the true total frequency of
    the ``t_count`` targets. For cm22 and lwy22 the value is a lower bound.
    """
    lam = float(fraction)
    if kind in PROPOSED:
        return lam * (1 - f_t)
    params = baseline_parameters(kind, eps, n, d, delta, local_epsilon)
    if kind == "grr":
        return lam * (1 - f_t) + lam * (d - t_count) / math.expm1(params["eps_local"])
    if kind in ("oue", "olh"):
        return lam * (2 * t_count - f_t) + 2 * lam * t_count / math.expm1(params["eps_local"])
    if kind == "rappor":
        return lam * (t_count - f_t) + lam * t_count / math.expm1(params["eps_local"] / 2)
    if kind == "bc20":
        return lam * (1 - f_t + t_count * (1 - params["q1"]))
    if kind == "cm22":
        q2 = params["q2"]
        return lam * (1 - q2) * t_count / (1 - 2 * q2) - lam * f_t
    if kind == "lwy22":
        return lam * (1 - f_t) + lam * params["q3"] * (d - t_count) / d
    raise ValueError(f"unknown protocol {kind!r}")


def collusion_scenario(kind, target_eps, n, omega_ratios, delta, d, local_epsilon=None):
    """Actual epsilon against a victim when a fraction of users collude.

    Returns ``(ratio, omega_size, epsilon)`` triples; the colluding set size
    is ``floor(ratio * n)`` capped at ``n - 1``.
    """
    curve = []
    for ratio in omega_ratios:
        if not 0 <= ratio <= 1 - 1 / n + 1e-15:
            raise ValueError(f"omega ratio {ratio} outside [0, 1 - 1/n]")
        omega = min(int(math.floor(ratio * n + 1e-9)), n - 1)
        curve.append((ratio, omega, collusion_epsilon(kind, target_eps, n, omega, d, delta, local_epsilon)))
    return curve
