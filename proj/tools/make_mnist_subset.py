#!/usr/bin/env python3
"""Convert the 10,000 MNIST digits shipped in the npm `mnist` package to IDX files.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/make_mnist_subset.py package/src/digits data/mnist10k

Digits are interleaved by a fixed permutation, the first --train samples go to
train-*-ubyte.gz and the rest to t10k-*-ubyte.gz.
"""
import argparse
import gzip
import json
import pathlib
import random
import struct


def write_idx_images(path, images):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))


def write_idx_labels(path, labels):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir")
    ap.add_argument("out_dir")
    ap.add_argument("--train", type=int, default=8000)
    ap.add_argument("--seed", type=int, default=20190101)
    args = ap.parse_args()

    samples = []
    for digit in range(10):
        raw = json.loads((pathlib.Path(args.digits_dir) / f"{digit}.json").read_text())["data"]
        assert len(raw) % 784 == 0
        for i in range(len(raw) // 784):
            px = [min(255, max(0, round(v * 255))) for v in raw[i * 784:(i + 1) * 784]]
            samples.append((px, digit))

    random.Random(args.seed).shuffle(samples)
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    train, test = samples[:args.train], samples[args.train:]
    write_idx_images(out / "train-images-idx3-ubyte.gz", [s[0] for s in train])
    write_idx_labels(out / "train-labels-idx1-ubyte.gz", [s[1] for s in train])
    write_idx_images(out / "t10k-images-idx3-ubyte.gz", [s[0] for s in test])
    write_idx_labels(out / "t10k-labels-idx1-ubyte.gz", [s[1] for s in test])
    print(f"wrote {len(train)} train / {len(test)} test samples to {out}")


if __name__ == "__main__":
    main()
