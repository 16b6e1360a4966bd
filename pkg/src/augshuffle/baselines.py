"""Shuffle-model baselines used for comparison.

Single-message protocols apply a local randomizer (GRR, OUE, OLH or RAPPOR)
and rely on shuffling for amplification. Multi-message protocols (BC20, CM22,
LWY22) have every user send extra messages. Each protocol comes with its
unbiased estimator and an analytic loss predictor.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_count, check_positive
from .accountant import BOUND_FOR_PROTOCOL, MULTI_MESSAGE, SINGLE_MESSAGE, baseline_parameters
from .engine import Dataset, FrequencyEstimate

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def mix_hash(seeds, values, modulus):
    """64-bit splitmix-style hash of ``(seed, value)`` reduced mod ``modulus``.

    Broadcasts over ``seeds`` and ``values``.
    """
    with np.errstate(over="ignore"):
        z = np.asarray(seeds, dtype=np.uint64) ^ (np.asarray(values, dtype=np.uint64) * _GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return (z % np.uint64(modulus)).astype(np.int64)


def _keep_probability(eps_local, others):
    """``e^eps / (e^eps + others)`` without overflow for huge eps."""
    return 1.0 / (1.0 + others * math.exp(-eps_local))


# ------------------------------------------------------------ local models


class LocalRandomizer:
    """Shared plumbing for the four local randomizers."""

    name = ""
    support = ""

    def __init__(self, eps_local, d):
        self.eps_local = check_positive(eps_local, "eps_local", allow_zero=True)
        self.d = check_count(d, "d", minimum=2)

    def __repr__(self):
        return f"{type(self).__name__}(eps_local={self.eps_local!r}, d={self.d})"

    def expected_l2(self, n):
        """Loss of the debiased estimate summed over items (standard formula)."""
        return self.d * self.variance_per_item(n)

    def dummy_contribution(self):
        """Expected per-item estimator value of one message drawn uniformly
        from the output space."""
        raise NotImplementedError


class GRR(LocalRandomizer):
    """Generalized randomized response over ``1..d``."""

    name = "grr"
    support = "index"

    @property
    def p(self):
        return _keep_probability(self.eps_local, self.d - 1)

    @property
    def q(self):
        return (1.0 - self.p) / (self.d - 1)

    def randomize(self, x, rng):
        x = np.asarray(x, dtype=np.int64)
        keep = rng.random(x.shape) < self.p
        other = rng.integers(1, self.d, size=x.shape)
        other = other + (other >= x)  # uniform over items other than x
        out = np.where(keep, x, other)
        return int(out) if out.ndim == 0 else out

    def counts(self, messages):
        messages = np.asarray(messages)
        if messages.ndim != 1:
            raise ValueError("GRR messages must be a 1-D array of items")
        return np.bincount(messages - 1, minlength=self.d)[: self.d]

    def estimate(self, messages, n=None):
        n = len(messages) if n is None else n
        return (self.counts(messages) / n - self.q) / (self.p - self.q)

    def variance_per_item(self, n):
        e = math.exp(self.eps_local)
        return (e + self.d - 2) / (n * math.expm1(self.eps_local) ** 2)

    def channel_matrix(self):
        mat = np.full((self.d, self.d), self.q)
        np.fill_diagonal(mat, self.p)
        return mat

    def mga_messages(self, targets, count, rng):
        return rng.choice(np.asarray(targets), size=count)

    def uniform_dummies(self, count, rng):
        return rng.integers(1, self.d + 1, size=count)

    def dummy_contribution(self):
        return np.full(self.d, (1.0 / self.d - self.q) / (self.p - self.q))


class _BitVector(LocalRandomizer):
    support = "bit-vector"

    def _bit_probabilities(self):
        raise NotImplementedError

    def randomize(self, x, rng):
        x = np.atleast_1d(np.asarray(x, dtype=np.int64))
        p, q = self._bit_probabilities()
        bits = rng.random((x.size, self.d)) < q
        rows = np.arange(x.size)
        bits[rows, x - 1] = rng.random(x.size) < p
        return bits

    def counts(self, messages):
        messages = np.asarray(messages)
        if messages.ndim != 2 or messages.shape[1] != self.d:
            raise ValueError(f"{self.name} messages must be an (n, {self.d}) bit matrix")
        return messages.sum(axis=0)

    def estimate(self, messages, n=None):
        n = len(messages) if n is None else n
        p, q = self._bit_probabilities()
        return (self.counts(messages) / n - q) / (p - q)

    def channel_matrix(self):
        """``P(output | input)`` over all ``2^d`` bit vectors (rows are inputs)."""
        p, q = self._bit_probabilities()
        outputs = np.array(list(itertools.product((0, 1), repeat=self.d)), dtype=bool)
        mat = np.empty((self.d, outputs.shape[0]))
        for x in range(self.d):
            probs = np.where(outputs, q, 1 - q)
            probs[:, x] = np.where(outputs[:, x], p, 1 - p)
            mat[x] = probs.prod(axis=1)
        return mat

    def mga_messages(self, targets, count, rng):
        bits = np.zeros((count, self.d), dtype=bool)
        bits[:, np.asarray(targets) - 1] = True
        return bits

    def uniform_dummies(self, count, rng):
        return rng.random((count, self.d)) < 0.5

    def dummy_contribution(self):
        p, q = self._bit_probabilities()
        return np.full(self.d, (0.5 - q) / (p - q))


class OUE(_BitVector):
    """Optimized unary encoding: keep the 1 with prob 1/2, raise a 0 with prob 1/(e^eps+1)."""

    name = "oue"

    def _bit_probabilities(self):
        return 0.5, 1.0 / (math.exp(self.eps_local) + 1.0)

    def variance_per_item(self, n):
        e = math.exp(self.eps_local)
        return 4 * e / (n * math.expm1(self.eps_local) ** 2)

    def mga_messages(self, targets, count, rng):
        # targets set, padded with random ones so the 1-count looks genuine
        bits = super().mga_messages(targets, count, rng)
        p, q = self._bit_probabilities()
        pad = max(int(round(p + (self.d - 1) * q)) - len(targets), 0)
        others = np.setdiff1d(np.arange(1, self.d + 1), targets)
        for row in bits:
            if pad:
                row[rng.choice(others, size=min(pad, others.size), replace=False) - 1] = True
        return bits


class RAPPOR(_BitVector):
    """One-hot vector with every bit flipped with probability 1/(e^(eps/2)+1)."""

    name = "rappor"

    @property
    def flip(self):
        return 1.0 / (math.exp(self.eps_local / 2) + 1.0)

    def _bit_probabilities(self):
        return 1.0 - self.flip, self.flip

    def variance_per_item(self, n):
        half = math.exp(self.eps_local / 2)
        return half / (n * math.expm1(self.eps_local / 2) ** 2)


@dataclass(frozen=True)
class HashedReports:
    """OLH messages: the user's hash seed and a randomized hash value."""

    seeds: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.values)

    @staticmethod
    def concat(first, second):
        return HashedReports(
            np.concatenate((first.seeds, second.seeds)), np.concatenate((first.values, second.values))
        )


class OLH(LocalRandomizer):
    """Optimized local hashing with hash range ``ceil(e^eps) + 1``."""

    name = "olh"
    support = "hashed"

    @property
    def g(self):
        return int(math.ceil(math.exp(min(self.eps_local, 40.0)))) + 1

    @property
    def p(self):
        return _keep_probability(self.eps_local, self.g - 1)

    @property
    def q(self):
        return 1.0 / self.g

    def _perturb(self, hashed, rng):
        keep = rng.random(hashed.shape) < self.p
        other = rng.integers(0, self.g - 1, size=hashed.shape)
        other = other + (other >= hashed)
        return np.where(keep, hashed, other)

    def randomize(self, x, rng):
        x = np.atleast_1d(np.asarray(x, dtype=np.int64))
        seeds = rng.integers(0, 2**63, size=x.size, dtype=np.uint64)
        return HashedReports(seeds, self._perturb(mix_hash(seeds, x, self.g), rng))

    def counts(self, messages, chunk=4096):
        if not isinstance(messages, HashedReports):
            raise ValueError("OLH messages must be HashedReports")
        items = np.arange(1, self.d + 1, dtype=np.uint64)
        support = np.zeros(self.d, dtype=np.int64)
        for start in range(0, len(messages), chunk):
            seeds = messages.seeds[start : start + chunk, None]
            vals = messages.values[start : start + chunk, None]
            support += (mix_hash(seeds, items[None, :], self.g) == vals).sum(axis=0)
        return support

    def estimate(self, messages, n=None):
        n = len(messages) if n is None else n
        return (self.counts(messages) / n - self.q) / (self.p - self.q)

    def variance_per_item(self, n):
        e = math.exp(self.eps_local)
        return 4 * e / (n * math.expm1(self.eps_local) ** 2)

    def mga_messages(self, targets, count, rng, batch=4096, max_batches=64):
        """Fake reports whose seed hashes every target to the reported value.

        Seeds are searched in batches; if too few full collisions turn up,
        the remaining fakes use the seeds covering the most targets.
        """
        targets = np.asarray(targets, dtype=np.uint64)
        found_seeds, found_values = [], []
        best_seeds, best_values, best_hits = [], [], []
        have = 0
        for _ in range(max_batches):
            seeds = rng.integers(0, 2**63, size=batch, dtype=np.uint64)
            hashed = mix_hash(seeds[:, None], targets[None, :], self.g)
            tallies = np.zeros((batch, self.g), dtype=np.int64)
            np.add.at(tallies, (np.arange(batch)[:, None], hashed), 1)
            hits = tallies.max(axis=1)
            top = tallies.argmax(axis=1)
            full = hits == targets.size
            found_seeds.append(seeds[full])
            found_values.append(top[full])
            have += int(full.sum())
            best_seeds.append(seeds)
            best_values.append(top)
            best_hits.append(hits)
            if have >= count:
                break
        seeds = np.concatenate(found_seeds)[:count]
        values = np.concatenate(found_values)[:count]
        if seeds.size < count:
            order = np.argsort(-np.concatenate(best_hits), kind="stable")[: count - seeds.size]
            seeds = np.concatenate((seeds, np.concatenate(best_seeds)[order]))
            values = np.concatenate((values, np.concatenate(best_values)[order]))
        return HashedReports(seeds, values.astype(np.int64))

    def uniform_dummies(self, count, rng):
        seeds = rng.integers(0, 2**63, size=count, dtype=np.uint64)
        return HashedReports(seeds, rng.integers(0, self.g, size=count))

    def dummy_contribution(self):
        return np.zeros(self.d)

    def channel_matrix(self, seeds):
        """Average of ``P((seed, y) | x)`` for the given seeds, outputs ``(seed, y)``."""
        seeds = np.asarray(seeds, dtype=np.uint64)
        items = np.arange(1, self.d + 1)
        rows = []
        for x in items:
            hashed = mix_hash(seeds, x, self.g)
            probs = np.full((seeds.size, self.g), (1 - self.p) / (self.g - 1))
            probs[np.arange(seeds.size), hashed] = self.p
            rows.append(probs.ravel() / seeds.size)
        return np.array(rows)


LOCAL_RANDOMIZERS = {"grr": GRR, "oue": OUE, "olh": OLH, "rappor": RAPPOR}


def local_randomizer(kind, eps_local, d):
    try:
        return LOCAL_RANDOMIZERS[kind](eps_local, d)
    except KeyError:
        raise ValueError(f"unknown local randomizer {kind!r}") from None


def grr_randomize(x, eps_local, d, rng):
    return GRR(eps_local, d).randomize(x, rng)


def oue_randomize(x, eps_local, d, rng):
    return OUE(eps_local, d).randomize(x, rng)


def olh_randomize(x, eps_local, d, rng):
    return OLH(eps_local, d).randomize(x, rng)


def rappor_randomize(x, eps_local, d, rng):
    return RAPPOR(eps_local, d).randomize(x, rng)


def empirical_estimate(kind, messages, n, eps_local, d):
    """Debiased frequency estimate of ``n`` local reports."""
    mech = local_randomizer(kind, eps_local, d)
    est = mech.estimate(messages, n)
    return FrequencyEstimate(est, int(n), 1.0, 0.0)


def max_log_ratio(channel):
    """Largest ``log P(y|x) / P(y|x')`` over outputs with nonzero mass."""
    channel = np.asarray(channel)
    hi = channel.max(axis=0)
    lo = channel.min(axis=0)
    if np.any((lo == 0) & (hi > 0)):
        return math.inf
    mask = hi > 0
    return float(np.max(np.log(hi[mask]) - np.log(lo[mask])))


# ---------------------------------------------------------- multi-message


@dataclass
class MultiMessageReport:
    """Per-item message tallies of a multi-message round.

    ``counts`` holds, per item, the number of messages naming it (bc20,
    lwy22) or the number of 1 bits in its column (cm22). ``messages`` keeps
    the raw messages when the round was materialised.
    """

    kind: str
    n_users: int
    d: int
    counts: np.ndarray
    n_messages: int
    messages: list | None = field(default=None, repr=False)

    def merge(self, other):
        if other.kind != self.kind or other.d != self.d:
            raise ValueError("cannot merge reports of different protocols or domains")
        messages = None
        if self.messages is not None and other.messages is not None:
            messages = self.messages + other.messages
        return MultiMessageReport(
            self.kind,
            self.n_users + other.n_users,
            self.d,
            self.counts + other.counts,
            self.n_messages + other.n_messages,
            messages,
        )


def _item_report(kind, n_users, d, items, materialize):
    items = np.asarray(items, dtype=np.int64)
    counts = np.bincount(items - 1, minlength=d)
    return MultiMessageReport(kind, n_users, d, counts, int(items.size), [items] if materialize else None)


def bc20_round(dataset: Dataset, q1, rng, materialize=True):
    """Each user sends its input plus, per item, a dummy with probability ``q1``."""
    n, d = dataset.n, dataset.d
    if materialize:
        dummy = rng.random((n, d)) < q1
        dummies = np.nonzero(dummy)[1] + 1
        return _item_report("bc20", n, d, np.concatenate((dataset.values, dummies)), True)
    counts = dataset.counts() + rng.binomial(n, q1, size=d)
    return MultiMessageReport("bc20", n, d, counts, int(counts.sum()))


def lwy22_round(dataset: Dataset, q3, rng, materialize=True):
    """Each user sends its input plus, with probability ``q3``, one uniform dummy."""
    n, d = dataset.n, dataset.d
    if materialize:
        has = rng.random(n) < q3
        dummies = rng.integers(1, d + 1, size=int(has.sum()))
        return _item_report("lwy22", n, d, np.concatenate((dataset.values, dummies)), True)
    total = rng.binomial(n, q3)
    counts = dataset.counts() + rng.multinomial(total, np.full(d, 1.0 / d))
    return MultiMessageReport("lwy22", n, d, counts, int(counts.sum()))


def cm22_round(dataset: Dataset, q2, xi, rng, materialize=True):
    """Each user sends its one-hot vector and ``xi`` zero vectors, all bits
    flipped with probability ``q2``."""
    n, d = dataset.n, dataset.d
    n_vectors = n * (xi + 1)
    if materialize:
        vectors = rng.random((n_vectors, d)) < q2
        rows = np.arange(n)
        vectors[rows, dataset.values - 1] ^= True
        return MultiMessageReport("cm22", n, d, vectors.sum(axis=0), n_vectors, [vectors])
    holders = dataset.counts()
    counts = rng.binomial(holders, 1 - q2) + rng.binomial(n_vectors - holders, q2)
    return MultiMessageReport("cm22", n, d, counts, n_vectors)


def multi_message_round(kind, dataset, params, rng, materialize=True):
    if kind == "bc20":
        return bc20_round(dataset, params["q1"], rng, materialize)
    if kind == "cm22":
        return cm22_round(dataset, params["q2"], params["xi"], rng, materialize)
    if kind == "lwy22":
        return lwy22_round(dataset, params["q3"], rng, materialize)
    raise ValueError(f"unknown multi-message protocol {kind!r}")


def multi_message_estimate(kind, report: MultiMessageReport, params):
    """Debias a multi-message report with the protocol's own estimator."""
    if report.kind != kind:
        raise ValueError(f"report was produced by {report.kind!r}, not {kind!r}")
    n = report.n_users
    if kind == "bc20":
        est = report.counts / n - params["q1"]
    elif kind == "cm22":
        q2, xi = params["q2"], params["xi"]
        est = (report.counts - n * (xi + 1) * q2) / (n * (1 - 2 * q2))
    elif kind == "lwy22":
        est = report.counts / n - params["q3"] / report.d
    else:
        raise ValueError(f"unknown multi-message protocol {kind!r}")
    return FrequencyEstimate(est, n, 1.0, 0.0)


def multi_message_fakes(kind, targets, count, d, params, rng):
    """Reports of ``count`` fake users mounting the maximal-gain attack."""
    targets = np.asarray(targets, dtype=np.int64)
    t = targets.size
    if kind == "bc20":
        inputs = rng.choice(targets, size=count)
        target_dummies = np.tile(targets, count)
        non_targets = np.setdiff1d(np.arange(1, d + 1), targets)
        extra = rng.random((count, non_targets.size)) < params["q1"]
        other = non_targets[np.nonzero(extra)[1]]
        return _item_report("bc20", count, d, np.concatenate((inputs, target_dummies, other)), True)
    if kind == "lwy22":
        inputs = rng.choice(targets, size=count)
        has = rng.random(count) < params["q3"]
        dummies = rng.choice(targets, size=int(has.sum()))
        return _item_report("lwy22", count, d, np.concatenate((inputs, dummies)), True)
    if kind == "cm22":
        q2, xi = params["q2"], params["xi"]
        first = np.zeros((count, d), dtype=bool)
        first[:, targets - 1] = True
        outside = max(int(math.floor(d * q2)) - t, 0)
        non_targets = np.setdiff1d(np.arange(1, d + 1), targets)
        for row in first:
            if outside:
                row[rng.choice(non_targets, size=min(outside, non_targets.size), replace=False) - 1] = True
        honest = rng.random((count * xi, d)) < q2
        counts = first.sum(axis=0) + honest.sum(axis=0)
        return MultiMessageReport("cm22", count, d, counts, count * (xi + 1), [first, honest])
    raise ValueError(f"unknown multi-message protocol {kind!r}")


# ------------------------------------------------------ analytic predictors


def local_expected_l2(kind, eps_local, n, d):
    """Standard loss of a local randomizer (ignores the frequency-dependent term)."""
    return local_randomizer(kind, eps_local, d).expected_l2(n)


def multi_message_expected_l2(kind, params, n, d):
    if kind == "bc20":
        q1 = params["q1"]
        return d * q1 * (1 - q1) / n
    if kind == "cm22":
        q2, xi = params["q2"], params["xi"]
        return d * (xi + 1) * q2 * (1 - q2) / (n * (1 - 2 * q2) ** 2)
    if kind == "lwy22":
        rate = params["q3"] / d
        return d * rate * (1 - rate) / n
    raise ValueError(f"unknown multi-message protocol {kind!r}")


def baseline_expected_l2(kind, eps, delta, n, d, local_epsilon=None):
    """Loss of a baseline at the parameters that meet the central (eps, delta)."""
    params = baseline_parameters(kind, eps, n, d, delta, local_epsilon)
    if kind in SINGLE_MESSAGE:
        return local_expected_l2(kind, params["eps_local"], n, d)
    return multi_message_expected_l2(kind, params, n, d)


def baseline_communication_bits(kind, eps, delta, n, d, alpha_bits=2048, local_epsilon=None):
    if kind in SINGLE_MESSAGE:
        return 2 * alpha_bits * n
    params = baseline_parameters(kind, eps, n, d, delta, local_epsilon)
    if kind == "bc20":
        return 2 * alpha_bits * n * (1 + d * params["q1"])
    if kind == "cm22":
        return 2 * alpha_bits * n * (params["xi"] + 1)
    return 2 * alpha_bits * n * (1 + params["q3"])


__all__ = [
    "BOUND_FOR_PROTOCOL",
    "MULTI_MESSAGE",
    "SINGLE_MESSAGE",
    "GRR",
    "OUE",
    "OLH",
    "RAPPOR",
    "HashedReports",
    "LocalRandomizer",
    "MultiMessageReport",
    "mix_hash",
    "local_randomizer",
    "grr_randomize",
    "oue_randomize",
    "olh_randomize",
    "rappor_randomize",
    "empirical_estimate",
    "max_log_ratio",
    "bc20_round",
    "cm22_round",
    "lwy22_round",
    "multi_message_round",
    "multi_message_estimate",
    "multi_message_fakes",
    "local_expected_l2",
    "multi_message_expected_l2",
    "baseline_expected_l2",
    "baseline_communication_bits",
]
