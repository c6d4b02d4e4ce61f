#!/usr/bin/env python3
"""Write a small class-balanced MNIST subset as IDX files.

The source is the 5000-image CSV shipped inside the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz: 784 pixel columns, label last).
Per class, the first `per_class` rows go to the training pool and the next
`per_class` rows to the test set.
"""

import argparse
import gzip
import struct
import zipfile
from pathlib import Path

CSV_IN_WHEEL = "mlxtend/data/data/mnist_5k.csv.gz"


def read_rows(source: Path):
    if source.suffix == ".whl":
        raw = zipfile.ZipFile(source).read(CSV_IN_WHEEL)
    else:
        raw = source.read_bytes()
    text = gzip.decompress(raw).decode() if raw[:2] == b"\x1f\x8b" else raw.decode()
    for line in text.splitlines():
        if line.strip():
            values = [int(float(v)) for v in line.split(",")]
            yield values[:-1], values[-1]


def write_idx(prefix: Path, rows):
    with open(f"{prefix}-images-idx3-ubyte", "wb") as img:
        img.write(struct.pack(">IIII", 2051, len(rows), 28, 28))
        for pixels, _ in rows:
            img.write(bytes(pixels))
    with open(f"{prefix}-labels-idx1-ubyte", "wb") as lab:
        lab.write(struct.pack(">II", 2049, len(rows)))
        lab.write(bytes(label for _, label in rows))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("source", type=Path, help="mlxtend wheel or mnist_5k.csv(.gz)")
    parser.add_argument("--out", type=Path, default=Path("data/mnist"))
    parser.add_argument("--per-class", type=int, default=100)
    args = parser.parse_args()

    by_class = {k: [] for k in range(10)}
    for pixels, label in read_rows(args.source):
        if len(pixels) != 784:
            raise SystemExit(f"expected 784 pixels, got {len(pixels)}")
        by_class[label].append((pixels, label))

    train, test = [], []
    for label in range(10):
        rows = by_class[label]
        if len(rows) < 2 * args.per_class:
            raise SystemExit(f"class {label} has only {len(rows)} rows")
        train += rows[: args.per_class]
        test += rows[args.per_class : 2 * args.per_class]

    args.out.mkdir(parents=True, exist_ok=True)
    write_idx(args.out / "train", train)
    write_idx(args.out / "test", test)
    print(f"wrote {len(train)} training and {len(test)} test images to {args.out}")


if __name__ == "__main__":
    main()
