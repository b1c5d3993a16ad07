#!/usr/bin/env python3
"""Builds the small grayscale test corpus under tests/data/corpus.

Training crops come from natural photographs bundled with scikit-image and
matplotlib; the held-out set uses different photographs plus one brain MRI
slice (matplotlib's s1045.ima sample). Output is deterministic.
"""
import gzip
import os
import sys

import matplotlib
import numpy as np
import skimage.io
from skimage.color import rgb2gray
from skimage.util import img_as_ubyte

SK = os.path.join(os.path.dirname(skimage.__file__), "data")
MPL = os.path.join(os.path.dirname(matplotlib.__file__), "mpl-data", "sample_data")

TRAIN = ["astronaut.png", "brick.png", "cell.png", "clock_motion.png", "coffee.png",
         "gravel.png", "grass.png", "hubble_deep_field.jpg", "ihc.png",
         "motorcycle_left.png", "rocket.jpg", "retina.jpg"]
HELDOUT = ["camera.png", "moon.png", "coins.png", "chelsea.png"]
TRAIN_CROP = 160
HELDOUT_CROP = 128


def gray(path):
    im = skimage.io.imread(path)
    if im.ndim == 3:
        im = rgb2gray(im[..., :3])
    return img_as_ubyte(im)


def crops(im, size, count):
    h, w = im.shape
    out = []
    for i in range(count):
        # spread crops along the diagonal of the central region
        t = (i + 1) / (count + 1)
        y = int((h - size) * t)
        x = int((w - size) * (1 - t) if i % 2 else (w - size) * t)
        out.append(im[y:y + size, x:x + size])
    return out


def main(root):
    train_dir = os.path.join(root, "train")
    held_dir = os.path.join(root, "heldout")
    os.makedirs(train_dir, exist_ok=True)
    os.makedirs(held_dir, exist_ok=True)
    for name in TRAIN:
        stem = os.path.splitext(name)[0]
        for i, c in enumerate(crops(gray(os.path.join(SK, name)), TRAIN_CROP, 2)):
            skimage.io.imsave(os.path.join(train_dir, f"{stem}_{i}.png"), c, check_contrast=False)
    for name in HELDOUT:
        stem = os.path.splitext(name)[0]
        c = crops(gray(os.path.join(SK, name)), HELDOUT_CROP, 1)[0]
        skimage.io.imsave(os.path.join(held_dir, f"{stem}.png"), c, check_contrast=False)
    with gzip.open(os.path.join(MPL, "s1045.ima.gz"), "rb") as f:
        mri = np.frombuffer(f.read(), np.uint16).reshape(256, 256).astype(np.float64)
    mri = np.clip(mri / mri.max() * 255.0 + 0.5, 0, 255).astype(np.uint8)
    skimage.io.imsave(os.path.join(held_dir, "mri_s1045.png"), mri[64:192, 64:192], check_contrast=False)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "tests", "data", "corpus"))
