"""Where the real evaluation datasets come from, and how to prepare them.

The datasets are not redistributed here. Download each one from its
publisher (registration is required for some), then convert the relevant
categorical column into a one-category-per-line CSV that
``augshuffle ... --dataset FILE --format csv`` can read:

    python3 scripts/fetch_datasets.py list
    python3 scripts/fetch_datasets.py prepare raw.csv out.csv --column 3 --header
"""

import argparse
import csv
import sys

SOURCES = {
    "census": {
        "publisher": "IPUMS USA, 1940 full-count US census extract",
        "prepare": "take a 1% user sample and keep one urban attribute per person",
        "expected": "n = 602156, d = 915",
    },
    "foursquare": {
        "publisher": "Foursquare global-scale check-in dataset",
        "prepare": "keep Manhattan check-ins, one venue category per check-in",
        "expected": "n = 359054, d = 407",
    },
    "localization": {
        "publisher": "UCI repository, Localization Data for Person Activity",
        "prepare": "one activity label per record",
        "expected": "n = 164860, d = 11",
    },
    "rfid": {
        "publisher": "UCI repository, activity recognition of healthy older people with a batteryless RFID sensor",
        "prepare": "one activity label per record",
        "expected": "n = 75128, d = 4",
    },
}


def prepare(src, dst, column, header, delimiter):
    """Copy one column of ``src`` into a single-column CSV at ``dst``."""
    written = 0
    with open(src, encoding="utf-8", newline="") as fin, open(dst, "w", encoding="utf-8", newline="") as fout:
        reader = csv.reader(fin, delimiter=delimiter)
        writer = csv.writer(fout, lineterminator="\n")
        for lineno, row in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if column >= len(row):
                sys.exit(f"{src}:{lineno}: no column {column}")
            value = row[column].strip()
            if value:
                writer.writerow([value])
                written += 1
    return written


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="print the dataset sources")
    prep = sub.add_parser("prepare", help="extract one categorical column")
    prep.add_argument("src")
    prep.add_argument("dst")
    prep.add_argument("--column", type=int, default=0)
    prep.add_argument("--header", action="store_true")
    prep.add_argument("--delimiter", default=",")
    args = parser.parse_args(argv)
    if args.command == "list":
        for name, info in SOURCES.items():
            print(f"{name}: {info['publisher']}\n    {info['prepare']}; {info['expected']}")
    else:
        count = prepare(args.src, args.dst, args.column, args.header, args.delimiter)
        print(f"wrote {count} records to {args.dst}")


if __name__ == "__main__":
    main()
