#!/usr/bin/env python3
"""Regenerate data/wine_like.csv, the bundled synthetic tabular dataset.

178 rows, 13 numeric features, 3 classes (59/71/48). Classes 0 and 1
separate along a few feature directions; class 2 sits offset both along
and across those directions, so the class_equals:2 rule yields OOD rows
with near- and far-OOD character. Deterministic: Philox seed 2024.
"""

import csv
from pathlib import Path

import numpy as np

from oodcf import rng

COLUMNS = [
    "alcohol", "malic_acid", "ash", "alcalinity_of_ash", "magnesium",
    "total_phenols", "flavanoids", "nonflavanoid_phenols", "proanthocyanins",
    "color_intensity", "hue", "od280_od315", "proline",
]
COUNTS = {0: 59, 1: 71, 2: 48}
SEED = 2024

# per-column affine map into wine-ish units
COL_SCALE = np.array([0.8, 1.1, 0.27, 3.3, 14.0, 0.63, 1.0, 0.12, 0.57, 2.3,
                      0.23, 0.71, 315.0])
COL_SHIFT = np.array([13.0, 2.3, 2.4, 19.5, 100.0, 2.3, 2.0, 0.36, 1.6, 5.1,
                      0.96, 2.6, 747.0])

# class signal spans several columns so the first principal component of the
# standardized ID data concentrates it (per-column standardization caps any
# single column's class separation near 2 sigma)
SIGNAL_COLUMNS = (5, 6, 7, 8, 9, 10)
SIGNAL_DELTA = 3.0
# OOD offsets: columns 1-2 are class-irrelevant (far-OOD character), 5-6
# lean toward class 0 along the discriminative direction (near-OOD)
OOD_OFFSETS = {1: 2.1, 2: 1.9, 5: 1.2, 6: 0.8}


def main():
    gen = rng.generator(SEED)
    d = len(COLUMNS)
    # mild correlation structure shared by all classes
    A = rng.standard_normal(gen, d * d).reshape(d, d) * 0.2
    cov = A @ A.T / d + 0.7 * np.eye(d)
    L = np.linalg.cholesky(cov)

    rows = []
    for cls in sorted(COUNTS):
        n = COUNTS[cls]
        mu = np.zeros(d)
        if cls == 0:
            for dim in SIGNAL_COLUMNS:
                mu[dim] = +SIGNAL_DELTA / 2
        elif cls == 1:
            for dim in SIGNAL_COLUMNS:
                mu[dim] = -SIGNAL_DELTA / 2
        else:
            for dim, off in OOD_OFFSETS.items():
                mu[dim] = off
        G = rng.standard_normal(gen, n * d).reshape(n, d)
        X = mu + G @ L.T
        X = COL_SHIFT + COL_SCALE * X
        for r in X:
            rows.append([cls] + [f"{v:.4f}" for v in r])

    out = Path(__file__).resolve().parent.parent / "data" / "wine_like.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["target"] + COLUMNS)
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()
