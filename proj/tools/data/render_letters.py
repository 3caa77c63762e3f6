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
"""Renders a handwriting-like uppercase A-J letter set in MNIST layout.

Stand-in for the EMNIST letters split when it is not available locally.
Glyphs are drawn with the Hershey vector fonts, randomly sheared, rotated,
scaled and stroked, then centred by bounding box inside a 20x20 box of a
28x28 canvas like MNIST. Labels are 0..9 for A..J.

Usage: render_letters.py OUT_DIR [PER_CLASS] [SEED]
"""
import gzip
import os
import struct
import sys

import cv2
import numpy as np

FONTS = [
    cv2.FONT_HERSHEY_SIMPLEX,
    cv2.FONT_HERSHEY_DUPLEX,
    cv2.FONT_HERSHEY_COMPLEX,
    cv2.FONT_HERSHEY_TRIPLEX,
    cv2.FONT_HERSHEY_SCRIPT_SIMPLEX,
    cv2.FONT_HERSHEY_SCRIPT_COMPLEX,
    cv2.FONT_HERSHEY_PLAIN,
]


def render(letter, rng):
    canvas = np.zeros((160, 160), np.uint8)
    font = FONTS[rng.integers(len(FONTS))]
    if rng.random() < 0.3:
        font |= cv2.FONT_ITALIC
    scale = 4.0 if font & 0xF != cv2.FONT_HERSHEY_PLAIN else 7.0
    stroke = int(rng.integers(1, 8))
    (w, h), _ = cv2.getTextSize(letter, font, scale, 1)
    cv2.putText(canvas, letter, ((160 - w) // 2, (160 + h) // 2), font, scale,
                255, 1, cv2.LINE_AA)
    if stroke > 1:
        kernel = cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (stroke, stroke))
        canvas = cv2.dilate(canvas, kernel)
    angle = rng.normal(0.0, 8.0)
    shear = rng.normal(0.0, 0.15)
    m = cv2.getRotationMatrix2D((80, 80), angle, 1.0)
    m[0, 1] += shear
    canvas = cv2.warpAffine(canvas, m, (160, 160), flags=cv2.INTER_LINEAR)

    ys, xs = np.nonzero(canvas > 30)
    crop = canvas[ys.min():ys.max() + 1, xs.min():xs.max() + 1]
    ch, cw = crop.shape
    f = 20.0 / max(ch, cw)
    nh, nw = max(1, round(ch * f)), max(1, round(cw * f))
    crop = cv2.resize(crop, (nw, nh), interpolation=cv2.INTER_AREA)

    out = np.zeros((28, 28), np.uint8)
    # centre of mass placement, as in MNIST
    cy, cx = np.argwhere(crop > 0).mean(axis=0)
    oy = int(round(14 - cy))
    ox = int(round(14 - cx))
    oy = min(max(oy, 0), 28 - nh)
    ox = min(max(ox, 0), 28 - nw)
    out[oy:oy + nh, ox:ox + nw] = crop
    return out


def write_idx(path, magic, dims, payload):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">I", magic))
        for d in dims:
            f.write(struct.pack(">I", d))
        f.write(payload)


def main():
    out_dir = sys.argv[1]
    per_class = int(sys.argv[2]) if len(sys.argv) > 2 else 1000
    seed = int(sys.argv[3]) if len(sys.argv) > 3 else 2026
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for i in range(per_class):
        for label, letter in enumerate("ABCDEFGHIJ"):
            images.append(render(letter, rng))
            labels.append(label)
    images = np.stack(images)
    write_idx(os.path.join(out_dir, "letters-synth-images-idx3-ubyte.gz"), 0x803,
              [len(images), 28, 28], images.tobytes())
    write_idx(os.path.join(out_dir, "letters-synth-labels-idx1-ubyte.gz"), 0x801,
              [len(labels)], bytes(labels))
    print(len(images))


if __name__ == "__main__":
    main()
