"""Users -> augmented shuffler -> analyzer.

The shuffler keeps each encrypted report with probability ``beta``, adds
``z_i`` encrypted dummies of every item ``i`` and shuffles everything. The
analyzer decrypts, builds the histogram and debiases it. Because the shuffle
does not change the histogram, :func:`noisy_histogram` gives the same result
much faster. Both paths split one seed into the same three streams (sampling,
dummies, permutation), so under a common seed they agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_items, check_probability
from .accountant import PROPOSED, ProtocolConfig, proposed_mechanism
from .distributions import DummyCountDistribution
from .errors import DegenerateConfigError, IntegrityError


@dataclass(frozen=True, eq=False)
class Dataset:
    """Categorical inputs: one item index in ``1..d`` per user.

    ``labels`` optionally names the items (label of item ``i`` at ``i - 1``).
    """

    values: np.ndarray
    d: int
    labels: tuple | None = None

    def __post_init__(self):
        values, d = check_items(self.values, self.d)
        if values.size == 0:
            raise ValueError("a dataset needs at least one user")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "d", d)

    @classmethod
    def from_values(cls, values, d=None):
        values, d = check_items(values, d)
        return cls(values, d)

    @property
    def n(self):
        return int(self.values.size)

    def counts(self):
        return np.bincount(self.values - 1, minlength=self.d)

    def true_frequencies(self):
        return self.counts() / self.n


@dataclass(frozen=True, eq=False)
class ShuffledReport:
    """What the analyzer receives: genuine and dummy items in random order."""

    values: np.ndarray
    d: int

    @property
    def count(self):
        return int(self.values.size)

    def histogram(self):
        counts = np.bincount(self.values - 1, minlength=self.d) if self.count else np.zeros(self.d, np.int64)
        return NoisyHistogram(counts)


@dataclass(frozen=True, eq=False)
class NoisyHistogram:
    counts: np.ndarray

    @property
    def total(self):
        return int(np.sum(self.counts))


@dataclass(frozen=True, eq=False)
class FrequencyEstimate:
    """Debiased frequencies ``(h - mu) / (n * beta)``; entries may be negative."""

    estimates: np.ndarray
    n: int
    beta: float
    mu: float
    histogram: np.ndarray | None = field(default=None, repr=False)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.estimates, dtype=dtype)

    def __len__(self):
        return len(self.estimates)


# ------------------------------------------------------------------ seeds


def run_streams(seed):
    """Split one run seed into (sampling, dummy, permutation) generators.

    ``seed`` may be an int, a SeedSequence or a Generator. The same int or
    SeedSequence always yields the same three streams (the SeedSequence is
    not advanced), which is what couples the report and histogram paths. A
    Generator contributes fresh entropy and is advanced.
    """
    if isinstance(seed, np.random.Generator):
        seed = np.random.SeedSequence(int(seed.integers(2**63)))
    elif not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return tuple(
        np.random.default_rng(np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key + (i,)))
        for i in range(3)
    )


def _keep_mask(n, beta, rng):
    return rng.random(n) < beta


# ----------------------------------------------------------------- shuffle


def assemble_report(dataset, keep, dummy_counts, rng=None):
    """Kept inputs followed by item-major dummies, permuted by ``rng``.

    With ``rng=None`` the pre-permutation sequence is returned, which is handy
    for checking a fixed realization.
    """
    dummy_counts = np.asarray(dummy_counts, dtype=np.int64)
    dummies = np.repeat(np.arange(1, dataset.d + 1), dummy_counts)
    sequence = np.concatenate((dataset.values[np.asarray(keep, dtype=bool)], dummies))
    if rng is not None:
        rng.shuffle(sequence)  # Fisher-Yates
    return ShuffledReport(sequence, dataset.d)


def histogram_from_realization(dataset, keep, dummy_counts):
    """Histogram of kept inputs plus dummy counts, without building the report."""
    kept = dataset.values[np.asarray(keep, dtype=bool)]
    counts = np.bincount(kept - 1, minlength=dataset.d) + np.asarray(dummy_counts, dtype=np.int64)
    return NoisyHistogram(counts)


def augmented_shuffle(dataset: Dataset, dist: DummyCountDistribution, beta, rng=None):
    """Sample, add dummies and shuffle, exactly as the shuffler does."""
    beta = check_probability(beta, "beta")
    sampling, dummy_rng, permutation = run_streams(rng)
    keep = _keep_mask(dataset.n, beta, sampling)
    z = dist.sample(dummy_rng, size=dataset.d)
    return assemble_report(dataset, keep, z, permutation)


def noisy_histogram(dataset: Dataset, dist: DummyCountDistribution, beta, rng=None):
    """Histogram of :func:`augmented_shuffle` output without materialising it."""
    beta = check_probability(beta, "beta")
    sampling, dummy_rng, _ = run_streams(rng)
    keep = _keep_mask(dataset.n, beta, sampling)
    z = dist.sample(dummy_rng, size=dataset.d)
    return histogram_from_realization(dataset, keep, z)


def simulate_histograms(counts, dist, beta, runs, rng):
    """``runs`` independent noisy histograms, one per row.

    Thins each item's count binomially instead of flipping a coin per record,
    which gives the same distribution and is much cheaper for large sweeps.
    """
    counts = np.asarray(counts, dtype=np.int64)
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    shape = (int(runs), counts.size)
    kept = rng.binomial(counts, beta, size=shape) if beta < 1 else np.broadcast_to(counts, shape).copy()
    return kept + dist.sample(rng, size=shape)


# ---------------------------------------------------------------- analyzer


def analyze(histogram, n, beta, mu, d=None):
    """Debias a histogram (or report, or raw count array) into frequencies.

    Raw arrays may be two-dimensional, with one histogram per row.
    """
    if beta <= 0:
        raise DegenerateConfigError("beta must be > 0 for the estimator to exist")
    if n < 1:
        raise DegenerateConfigError("n must be >= 1")
    if isinstance(histogram, ShuffledReport):
        histogram = histogram.histogram()
    counts = histogram.counts if isinstance(histogram, NoisyHistogram) else np.asarray(histogram)
    if d is not None and counts.shape[-1] != d:
        raise ValueError(f"histogram has {counts.shape[-1]} bins, expected d={d}")
    estimates = (counts - mu) / (n * beta)
    return FrequencyEstimate(estimates, int(n), float(beta), float(mu), counts)


def run_protocol(kind, config: ProtocolConfig, dataset: Dataset, rng=None):
    """One end-to-end run of a proposed protocol via the histogram path."""
    if kind not in PROPOSED:
        raise ValueError(f"{kind!r} is not a proposed protocol; choose from {PROPOSED}")
    mech = proposed_mechanism(kind, config.epsilon, config.delta, config.beta)
    hist = noisy_histogram(dataset, mech.dist, mech.beta, rng)
    return analyze(hist, dataset.n, mech.beta, mech.dist.mean())


# ----------------------------------------------------------------- ciphers


class NullCipher:
    """Identity encryption; only carries the ciphertext size for cost accounting."""

    def __init__(self, ciphertext_bits=2048):
        self.ciphertext_bits = int(ciphertext_bits)

    def encrypt(self, value):
        return int(value)

    def decrypt(self, blob):
        return int(blob)


class XorMaskCipher:
    """Toy involution: XOR with a fixed 64-bit mask."""

    def __init__(self, key=0x5DEECE66D, ciphertext_bits=64):
        self.key = int(key) & (2**64 - 1)
        self.ciphertext_bits = int(ciphertext_bits)

    def encrypt(self, value):
        return (int(value) ^ self.key).to_bytes(8, "little")

    def decrypt(self, blob):
        return int.from_bytes(blob, "little") ^ self.key


class RSACipher:
    """RSA-OAEP public-key encryption (requires the ``cryptography`` package).

    Users and the shuffler only need the public key; the analyzer holds the
    private key. Slow, so meant for small demonstrations.
    """

    def __init__(self, key_size=2048):
        from cryptography.hazmat.primitives import hashes
        from cryptography.hazmat.primitives.asymmetric import padding, rsa

        self._private = rsa.generate_private_key(public_exponent=65537, key_size=key_size)
        self._public = self._private.public_key()
        self._padding = padding.OAEP(
            mgf=padding.MGF1(algorithm=hashes.SHA256()), algorithm=hashes.SHA256(), label=None
        )
        self.ciphertext_bits = key_size

    def encrypt(self, value):
        return self._public.encrypt(int(value).to_bytes(8, "little"), self._padding)

    def decrypt(self, blob):
        return int.from_bytes(self._private.decrypt(blob, self._padding), "little")


@dataclass(frozen=True)
class MessageCounts:
    user_to_shuffler: int
    shuffler_to_collector: int
    ciphertext_bits: int

    @property
    def total_bits(self):
        return self.ciphertext_bits * (self.user_to_shuffler + self.shuffler_to_collector)


def pipeline_with_cipher(dataset: Dataset, config: ProtocolConfig, cipher=None, rng=None):
    """Run the three-party protocol on encrypted messages.

    The shuffler only handles opaque blobs: it drops some, appends dummies it
    encrypts itself, and permutes. Returns the estimate and message counts.
    """
    cipher = cipher or NullCipher(config.alpha_bits)
    mech = proposed_mechanism(config.kind, config.epsilon, config.delta, config.beta)
    sampling, dummy_rng, permutation = run_streams(rng)

    uploads = [cipher.encrypt(v) for v in dataset.values.tolist()]

    keep = _keep_mask(dataset.n, mech.beta, sampling)
    z = mech.dist.sample(dummy_rng, size=dataset.d)
    blobs = [blob for blob, kept in zip(uploads, keep.tolist()) if kept]
    for item, copies in enumerate(z.tolist(), start=1):
        blobs.extend(cipher.encrypt(item) for _ in range(copies))
    order = np.arange(len(blobs))
    permutation.shuffle(order)
    delivered = [blobs[i] for i in order]

    values = np.empty(len(delivered), dtype=np.int64)
    for pos, blob in enumerate(delivered):
        value = cipher.decrypt(blob)
        if not 1 <= value <= dataset.d:
            raise IntegrityError(f"message {pos} decrypted to {value}, outside [1, {dataset.d}]")
        values[pos] = value
    report = ShuffledReport(values, dataset.d)
    estimate = analyze(report, dataset.n, mech.beta, mech.dist.mean())
    counts = MessageCounts(dataset.n, report.count, cipher.ciphertext_bits)
    return estimate, counts


def expected_l2_loss(n, d, beta, variance):
    """Expected squared error of the debiased estimate summed over items."""
    if beta <= 0:
        raise DegenerateConfigError("beta must be > 0")
    return (1 - beta) / (beta * n) + variance * d / (beta**2 * n**2)


def communication_bits(n, d, beta, mu, alpha_bits=2048):
    """Total bits sent: n uploads plus the kept inputs and dummies forwarded."""
    return alpha_bits * ((1 + beta) * n + mu * d)


def proposed_expected_l2(kind, eps, delta, n, d, beta=1.0, exact_variance=True):
    mech = proposed_mechanism(kind, eps, delta, beta)
    var = mech.dist.variance() if exact_variance else mech.dist.variance_upper()
    return expected_l2_loss(n, d, mech.beta, var)


__all__ = [
    "Dataset",
    "ShuffledReport",
    "NoisyHistogram",
    "FrequencyEstimate",
    "NullCipher",
    "XorMaskCipher",
    "RSACipher",
    "MessageCounts",
    "run_streams",
    "assemble_report",
    "histogram_from_realization",
    "augmented_shuffle",
    "noisy_histogram",
    "simulate_histograms",
    "analyze",
    "run_protocol",
    "pipeline_with_cipher",
    "expected_l2_loss",
    "communication_bits",
    "proposed_expected_l2",
]
