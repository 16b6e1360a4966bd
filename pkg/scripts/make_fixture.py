"""Regenerate the synthetic 1%-scale categorical fixture used by the tests.

The fixture mimics the shape of a census occupation column: about 6,000
records drawn from a Zipf law over 915 string categories. It is synthetic;
no real records are involved.
"""

import csv
import sys
from pathlib import Path

import numpy as np

from augshuffle.harness.datasets import zipf_probabilities

N_RECORDS = 6022
N_CATEGORIES = 915


def main(path):
    rng = np.random.default_rng(20240601)
    labels = [f"occ-{i:03d}" for i in range(N_CATEGORIES)]
    rng.shuffle(labels)
    draws = rng.choice(N_CATEGORIES, size=N_RECORDS, p=zipf_probabilities(N_CATEGORIES, 1.1))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["occupation"])
        writer.writerows([labels[i]] for i in draws)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parents[1] / "tests" / "fixtures" / "census_1pct.csv")
