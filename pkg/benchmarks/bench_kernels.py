"""Timing comparison of the jitted kernels against the plain-Python path.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeats 5] [--scale 1.0]

Each kernel is warmed up first so compilation is not billed to the jitted
column.  With numba unavailable (or VITALITY_NUMBA=0) both columns time the
same interpreted code and the ratio is reported as 1.0 by construction.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from vitality import kernels
from vitality.kernels import (
    best_split,
    kmeans_lloyd,
    knn_impute_fill,
    point_in_rings,
    predict_tree,
    silhouette_samples,
    tree_shap_single,
    unjitted,
)
from vitality.learners import fit_tree


def timed(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_cases(scale: float):
    rng = np.random.default_rng(0)

    n = int(4000 * scale)
    X = rng.normal(size=(n, 13))
    y = rng.normal(size=n)
    rows = np.arange(n, dtype=np.int64)
    feats = np.arange(13, dtype=np.int64)
    yield "best_split", best_split, (X, y, rows, feats, 2)

    n = int(20000 * scale)
    Xp = rng.normal(size=(n, 8))
    tree = fit_tree(rng.normal(size=(512, 8)),
                    rng.normal(size=512), min_leaf=2)
    out = np.empty(n)
    yield "predict_tree", predict_tree, (
        tree.left, tree.right, tree.feature, tree.threshold, tree.value,
        Xp, out)

    deep = fit_tree(rng.normal(size=(1024, 10)),
                    rng.normal(size=1024), max_depth=8, min_leaf=2)

    def shap_batch(left, right, feature, threshold, value, nsamp, rows_,
                   depth, fn):
        phi = np.zeros(rows_.shape[1])
        for i in range(rows_.shape[0]):
            phi[:] = 0.0
            fn(left, right, feature, threshold, value, nsamp, rows_[i],
               phi, depth)

    samples = rng.normal(size=(int(300 * scale) or 1, 10))

    def shap_jit(*args):
        shap_batch(*args, tree_shap_single)

    def shap_plain(*args):
        shap_batch(*args, unjitted(tree_shap_single))

    shap_args = (deep.left, deep.right, deep.feature, deep.threshold,
                 deep.value, deep.n_samples, samples, deep.max_depth)
    yield "tree_shap_single", (shap_jit, shap_plain), shap_args

    n = int(3000 * scale)
    pts = rng.normal(size=(n, 4))
    init = pts[:3].copy()
    yield "kmeans_lloyd", kmeans_lloyd, (pts, init, 300, 1e-6)

    n = int(1200 * scale)
    spts = rng.normal(size=(n, 4))
    labels = rng.integers(0, 3, size=n)
    yield "silhouette_samples", silhouette_samples, (spts, labels, 3)

    n = int(400 * scale)
    matrix = rng.uniform(size=(n, 14))
    observed = rng.uniform(size=(n, 14)) > 0.1
    observed[:, 0] = True
    yield "knn_impute_fill", knn_impute_fill, (matrix, observed, 5)

    theta = np.linspace(0.0, 2 * np.pi, 101)
    xs, ys = np.cos(theta), np.sin(theta)
    offsets = np.array([0, 101], dtype=np.int64)
    probes = rng.uniform(-1.5, 1.5, size=(int(20000 * scale), 2))

    def pip_batch(fn):
        hits = 0
        for px, py in probes:
            hits += fn(px, py, xs, ys, offsets)
        return hits

    yield "point_in_rings", (
        lambda: pip_batch(point_in_rings),
        lambda: pip_batch(unjitted(point_in_rings)),
    ), ()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per kernel; best is reported")
    parser.add_argument("--scale", type=float, default=1.0,
                        help="problem size multiplier")
    args = parser.parse_args(argv)

    backend = "numba" if kernels.USING_NUMBA else "numpy only"
    print(f"backend: {backend}")
    print(f"{'kernel':<20} {'jitted ms':>10} {'plain ms':>10} {'speedup':>8}")
    for name, fn, fn_args in bench_cases(args.scale):
        if isinstance(fn, tuple):
            jit_fn, plain_fn = fn
        else:
            jit_fn, plain_fn = fn, unjitted(fn)
        jit_fn(*fn_args)  # warmup: compile before timing
        jit_time = timed(jit_fn, fn_args, args.repeats)
        plain_time = timed(plain_fn, fn_args, args.repeats)
        ratio = plain_time / jit_time if jit_time > 0 else float("inf")
        print(f"{name:<20} {jit_time * 1e3:>10.2f} {plain_time * 1e3:>10.2f} "
              f"{ratio:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
