"""Seeded experiment sweeps that emit :class:`ResultRow` records."""

from __future__ import annotations

import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from ..accountant import (
    ALL_PROTOCOLS,
    PROPOSED,
    SINGLE_MESSAGE,
    ProtocolConfig,
    baseline_parameters,
    competing_binomial_trials,
    exact_dp_profile,
    proposed_mechanism,
)
from ..adversary import AttackSpec, collusion_scenario, measure_gain
from ..baselines import local_randomizer, multi_message_estimate, multi_message_round
from ..distributions import AGeoDist, BinomialDist
from ..engine import Dataset, simulate_histograms
from ..errors import ConfigError, DomainError, InfeasibleError, ValidityError
from .costs import comm_cost, expected_l2
from .datasets import load_dataset, synth_zipf
from .defenses import apply_defense, wang_dummy_defense, wang_estimate

CSV_HEADER = ("protocol", "epsilon", "delta", "beta", "n", "d", "metric", "value", "stderr", "seed")
_SKIPPABLE = (ValidityError, DomainError, InfeasibleError)


@dataclass(frozen=True)
class ResultRow:
    protocol: str
    epsilon: float
    delta: float
    beta: float
    n: int
    d: int
    metric: str
    value: float
    stderr: float = math.nan
    seed: int | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs of every sweep; unused fields are ignored by a given sweep."""

    protocols: tuple = ("sageo",)
    epsilons: tuple = (1.0,)
    delta: float = 1e-12
    beta: float = 1.0
    runs: int = 100
    n: int = 10_000
    d: int = 100
    zipf: float = 1.0
    dataset: str | None = None
    dataset_format: str = "auto"
    defense: str | None = None
    alpha_sig: float = 0.05
    alpha_bits: int = 2048
    local_epsilon: float | None = None
    wang_a: float = 0.0
    attack_fraction: float = 0.1
    n_targets: int = 2
    omega_ratios: tuple = (0.0, 0.1, 0.5, 0.9)
    seed: int = 0
    jobs: int = 1
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.protocols or not self.epsilons:
            raise ConfigError("protocol and epsilon grids must be nonempty")
        unknown = [p for p in self.protocols if p not in ALL_PROTOCOLS]
        if unknown:
            raise ConfigError(f"unknown protocol(s) {unknown}; choose from {', '.join(ALL_PROTOCOLS)}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if any(e <= 0 for e in self.epsilons):
            raise ConfigError("epsilons must be > 0")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if not 0 <= self.beta <= 1:
            raise ConfigError("beta must lie in [0, 1]")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls) if f.name != "extra"]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return "%.12g" % value


def write_csv(rows, stream=None):
    """Write rows with the fixed header, LF line endings, ``%.12g`` numbers."""
    stream = stream or sys.stdout
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [_fmt(row.protocol), _fmt(row.epsilon), _fmt(row.delta), _fmt(row.beta), _fmt(row.n),
             _fmt(row.d), row.metric, _fmt(row.value), _fmt(row.stderr), _fmt(row.seed)]
        )


def build_dataset(config: ExperimentConfig):
    if config.dataset:
        return load_dataset(config.dataset, config.dataset_format)
    data_seed = np.random.SeedSequence(config.seed, spawn_key=(0,))
    return synth_zipf(config.n, config.d, config.zipf, data_seed)


def _cell_seed(config, index):
    return np.random.SeedSequence(config.seed, spawn_key=(1, index))


# ------------------------------------------------------------- simulation


def squared_errors(kind, dataset: Dataset, eps, delta, beta, runs, seed, *, local_epsilon=None,
                   defense=None, alpha_sig=0.05, wang_a=0.0, chunk=2000):
    """Per-run squared error ``sum_i (f_hat_i - f_i)^2`` of ``runs`` runs."""
    n, d = dataset.n, dataset.d
    truth = dataset.true_frequencies()
    rng = np.random.default_rng(seed)
    variance = None
    if defense and "threshold" in defense:
        variance = expected_l2(kind, eps, delta, n, d, beta, local_epsilon) / d
    out = np.empty(runs)
    if kind in PROPOSED:
        mech = proposed_mechanism(kind, eps, delta, beta)
        mu = mech.dist.mean()
        counts = dataset.counts()
        for start in range(0, runs, chunk):
            size = min(chunk, runs - start)
            hist = simulate_histograms(counts, mech.dist, mech.beta, size, rng)
            est = apply_defense((hist - mu) / (n * mech.beta), defense, variance, alpha_sig)
            out[start : start + size] = ((est - truth) ** 2).sum(axis=1)
        return out
    params = baseline_parameters(kind, eps, n, d, delta, local_epsilon)
    for r in range(runs):
        if kind in SINGLE_MESSAGE:
            local = local_randomizer(kind, params["eps_local"], d)
            reports = local.randomize(dataset.values, rng)
            if wang_a > 0:
                padded, added = wang_dummy_defense(reports, wang_a, local, rng)
                est = wang_estimate(local, padded, n, added)
            else:
                est = local.estimate(reports, n)
        else:
            report = multi_message_round(kind, dataset, params, rng, materialize=False)
            est = multi_message_estimate(kind, report, params).estimates
        est = apply_defense(est, defense, variance, alpha_sig)
        out[r] = ((est - truth) ** 2).sum()
    return out


def _stderr(samples):
    return float(np.std(samples, ddof=1) / math.sqrt(len(samples))) if len(samples) > 1 else math.nan


def _row(config, kind, eps, n, d, metric, value, stderr=math.nan, beta=None):
    if beta is None:
        beta = config.beta
        if kind == "s1geo":
            beta = proposed_mechanism("s1geo", eps, config.delta).beta
        elif kind not in PROPOSED:
            beta = 1.0
    return ResultRow(kind, eps, config.delta, beta, n, d, metric, value, stderr, config.seed)


def _skip(config, kind, eps, n, d, err):
    return [_row(config, kind, eps, n, d, f"skipped: {err}", math.nan)]


def _mse_cell(config, kind, eps, dataset, seed):
    n, d = dataset.n, dataset.d
    errors = squared_errors(
        kind, dataset, eps, config.delta, config.beta, config.runs, seed,
        local_epsilon=config.local_epsilon, defense=config.defense, alpha_sig=config.alpha_sig,
        wang_a=config.wang_a,
    )
    analytic = expected_l2(kind, eps, config.delta, n, d, config.beta, config.local_epsilon)
    return [
        _row(config, kind, eps, n, d, "mse", float(errors.mean()), _stderr(errors)),
        _row(config, kind, eps, n, d, "analytic_l2", analytic),
    ]


def _gain_cell(config, kind, eps, dataset, seed):
    n, d = dataset.n, dataset.d
    target_seed, run_seed = seed.spawn(2)
    spec = AttackSpec.random_targets(config.attack_fraction, config.n_targets, d, target_seed)
    proto = ProtocolConfig(kind, eps, config.delta, config.beta, n, d, config.alpha_bits, config.local_epsilon)
    report = measure_gain(kind, proto, dataset, spec, config.runs, run_seed, config.defense, config.alpha_sig)
    label = "predicted_gain_lower_bound" if report.predicted_is_lower_bound else "predicted_gain"
    return [
        _row(config, kind, eps, n, d, "gain", report.gain, report.stderr),
        _row(config, kind, eps, n, d, label, report.predicted),
    ]


def _collude_cell(config, kind, eps, dataset, seed):
    n, d = config.n, config.d
    curve = collusion_scenario(kind, eps, n, config.omega_ratios, config.delta, d, config.local_epsilon)
    return [_row(config, kind, eps, n, d, f"actual_epsilon@omega_ratio={ratio:g}", value)
            for ratio, _, value in curve]


def _cost_cell(config, kind, eps, dataset, seed):
    n, d = config.n, config.d
    proto = ProtocolConfig(kind, eps, config.delta, config.beta, n, d, config.alpha_bits, config.local_epsilon)
    bits = comm_cost(kind, proto)
    return [_row(config, kind, eps, n, d, "comm_bits", bits), _row(config, kind, eps, n, d, "comm_bits_per_user", bits / n)]


def _verify_cell(config, kind, eps, dataset, seed):
    n, d = config.n, config.d
    if kind not in PROPOSED:
        return _skip(config, kind, eps, n, d, "exact profiling covers the proposed protocols only")
    mech = proposed_mechanism(kind, eps, config.delta, config.beta)
    delta_hat = exact_dp_profile(mech, eps / 2)
    beta = mech.beta
    return [
        _row(config, kind, eps, n, d, "eps_half", eps / 2, beta=beta),
        _row(config, kind, eps, n, d, "delta_hat", delta_hat, beta=beta),
        _row(config, kind, eps, n, d, "delta_half_target", config.delta / 2, beta=beta),
        _row(config, kind, eps, n, d, "certified_delta", 2 * delta_hat, beta=beta),
    ]


def _accountant_cell(config, kind, eps, dataset, seed):
    n, d = config.n, config.d
    rows = []
    if kind in PROPOSED:
        mech = proposed_mechanism(kind, eps, config.delta, config.beta)
        dist = mech.dist
        values = {"sampling_rate": mech.beta, "dummy_mean": dist.mean(),
                  "dummy_variance": dist.variance(), "dummy_variance_bound": dist.variance_upper()}
        if isinstance(dist, BinomialDist):
            values["trials"] = dist.trials
            for rival in ("dkmmn08", "asykm18"):
                values[f"{rival}_trials"] = competing_binomial_trials(rival, eps, config.delta, d)
        elif isinstance(dist, AGeoDist):
            values.update(mode=dist.mode, left_ratio=dist.left_ratio, right_ratio=dist.right_ratio)
    else:
        values = dict(baseline_parameters(kind, eps, n, d, config.delta, config.local_epsilon))
    values["expected_l2"] = expected_l2(kind, eps, config.delta, n, d, config.beta, config.local_epsilon)
    for metric, value in values.items():
        rows.append(_row(config, kind, eps, n, d, metric, value, beta=values.get("sampling_rate")))
    return rows


_CELLS = {
    "simulate": _mse_cell,
    "attack": _gain_cell,
    "collude": _collude_cell,
    "cost": _cost_cell,
    "verify-dp": _verify_cell,
    "accountant": _accountant_cell,
}
_NEEDS_DATA = {"simulate", "attack"}


def _evaluate(task):
    sweep, config, kind, eps, dataset, seed = task
    try:
        return _CELLS[sweep](config, kind, eps, dataset, seed)
    except _SKIPPABLE as err:
        n = dataset.n if dataset is not None else config.n
        d = dataset.d if dataset is not None else config.d
        return _skip(config, kind, eps, n, d, err)


def run_sweep(sweep, config: ExperimentConfig, dataset=None):
    """Evaluate every (protocol, epsilon) cell of ``sweep`` and gather rows.

    Cells get seeds derived from the root seed by position, so the rows are
    identical whether cells run serially or in worker processes.
    """
    if sweep not in _CELLS:
        raise ValueError(f"unknown sweep {sweep!r}")
    if dataset is None and sweep in _NEEDS_DATA:
        dataset = build_dataset(config)
    cells = [(kind, eps) for kind in config.protocols for eps in config.epsilons]
    tasks = [(sweep, config, kind, eps, dataset, _cell_seed(config, i)) for i, (kind, eps) in enumerate(cells)]
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_evaluate, tasks))
    else:
        results = [_evaluate(task) for task in tasks]
    return [row for rows in results for row in rows]


def mse_sweep(config, dataset=None):
    return run_sweep("simulate", config, dataset)


__all__ = [
    "CSV_HEADER",
    "ExperimentConfig",
    "ResultRow",
    "build_dataset",
    "mse_sweep",
    "run_sweep",
    "squared_errors",
    "write_csv",
]
