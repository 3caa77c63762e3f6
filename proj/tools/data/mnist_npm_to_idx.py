#!/usr/bin/env python3
# Copyright 2026 The idbn Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Converts the 10,000 MNIST digits bundled in the npm `mnist` package to IDX.

Usage:
  npm pack mnist && tar xzf mnist-*.tgz
  mnist_npm_to_idx.py package/src/digits data/

Per class, the first 80% of samples go to the training split and the rest to
the test split. Both splits are interleaved by class and written gzipped.
"""
import gzip
import json
import os
import struct
import sys


def write_idx(path, magic, dims, payload):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">I", magic))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(bytes(payload))


def main(src, dst):
    side = 28
    per_class = []
    for digit in range(10):
        with open(os.path.join(src, f"{digit}.json")) as f:
            raw = json.load(f)["data"]
        n = len(raw) // (side * side)
        imgs = [
            [min(255, max(0, round(v * 255))) for v in raw[i * 784:(i + 1) * 784]]
            for i in range(n)
        ]
        per_class.append(imgs)

    splits = {"train": [], "t10k": []}
    for digit, imgs in enumerate(per_class):
        cut = int(len(imgs) * 0.8)
        splits["train"].append([(img, digit) for img in imgs[:cut]])
        splits["t10k"].append([(img, digit) for img in imgs[cut:]])

    for name, groups in splits.items():
        rows = []
        longest = max(len(g) for g in groups)
        for i in range(longest):
            for g in groups:
                if i < len(g):
                    rows.append(g[i])
        pixels = [p for img, _ in rows for p in img]
        labels = [lab for _, lab in rows]
        write_idx(os.path.join(dst, f"mnist-subset-{name}-images-idx3-ubyte.gz"),
                  0x803, [len(rows), side, side], pixels)
        write_idx(os.path.join(dst, f"mnist-subset-{name}-labels-idx1-ubyte.gz"),
                  0x801, [len(rows)], labels)
        print(name, len(rows))


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
