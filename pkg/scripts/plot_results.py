"""Render one figure per metric from a CSV written by the ``augshuffle`` CLI.

    python3 scripts/plot_results.py results.csv --out figures/
"""

import argparse
import csv
import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def load(path):
    series = defaultdict(lambda: defaultdict(list))
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if row["metric"].startswith("skipped"):
                continue
            value = float(row["value"])
            if math.isnan(value):
                continue
            stderr = float(row["stderr"]) if row["stderr"] not in ("", "nan") else 0.0
            series[row["metric"]][row["protocol"]].append((float(row["epsilon"]), value, stderr))
    return series


def plot(series, out_dir, log_scale):
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for metric, by_protocol in series.items():
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for protocol, points in sorted(by_protocol.items()):
            points.sort()
            eps, values, errs = zip(*points)
            ax.errorbar(eps, values, yerr=[2 * e for e in errs], marker="o", capsize=2, label=protocol)
        ax.set_xlabel("epsilon")
        ax.set_ylabel(metric)
        if log_scale and all(v > 0 for pts in by_protocol.values() for _, v, _ in pts):
            ax.set_yscale("log")
        ax.legend(fontsize=7)
        fig.tight_layout()
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in metric)
        target = out_dir / f"{safe}.png"
        fig.savefig(target, dpi=150)
        plt.close(fig)
        written.append(target)
    return written


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("csv")
    parser.add_argument("--out", default="figures")
    parser.add_argument("--linear", action="store_true", help="linear y axis")
    args = parser.parse_args(argv)
    for path in plot(load(args.csv), Path(args.out), not args.linear):
        print(path)


if __name__ == "__main__":
    main()
