"""Time the numba and numpy kernel backends on representative inputs.

    python benchmarks/bench_kernels.py [--repeat 20] [--scale 1.0]

Numba compile time is paid in a warm-up call and reported separately.
"""
import argparse
import time

import numpy as np

from thermal_backdoor import kernels


def _boxes(rng, n):
    c = rng.uniform(0.1, 0.9, size=(n, 2))
    s = rng.uniform(0.02, 0.2, size=(n, 2))
    return np.hstack([c, s])


def workloads(rng, scale):
    n_gt, n_det = int(200 * scale), int(400 * scale)
    gt, det = _boxes(rng, n_gt), _boxes(rng, n_det)
    iou = kernels.get_backend("numpy").iou_matrix(gt, det)
    conf = rng.uniform(0, 1, n_det)
    points = rng.uniform(0, 640, size=(int(200_000 * scale), 2))
    rects = np.column_stack([rng.uniform(0, 600, (int(5000 * scale), 2)), rng.uniform(600, 640, (int(5000 * scale), 2))])
    pixels = rng.integers(0, 256, size=(512, 640), dtype=np.uint8)
    stamps = np.column_stack([rng.integers(0, 600, (500, 2)), rng.integers(1, 40, (500, 2))])
    tp = rng.uniform(size=int(100_000 * scale)) < 0.6
    return {
        "iou_matrix": lambda k: k.iou_matrix(gt, det),
        "greedy_match": lambda k: k.greedy_match(iou, conf, 0.5),
        "radius_mask": lambda k: k.radius_mask(points, 160.0, 206.0, 120.0),
        "shared_cells": lambda k: k.shared_cells((100, 100, 220, 112), rects, 640, 512, 32),
        "fill_rects": lambda k: k.fill_rects(pixels, stamps, np.full(500, 255)),
        "all_point_ap": lambda k: k.all_point_ap(tp, int(tp.sum()) + 10),
    }


def bench(fn, backend, repeat):
    t0 = time.perf_counter()
    fn(backend)
    warm = time.perf_counter() - t0
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(backend)
        times.append(time.perf_counter() - t0)
    return warm, float(np.median(times))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    names = kernels.available_backends()
    backends = {n: kernels.get_backend(n) for n in names}
    work = workloads(np.random.default_rng(args.seed), args.scale)
    header = f"{'kernel':<14}" + "".join(f"{n + ' ms':>12}" for n in names)
    if "numba" in names:
        header += f"{'speedup':>10}{'jit warmup s':>14}"
    print(header)
    for kname, fn in work.items():
        row = {n: bench(fn, b, args.repeat) for n, b in backends.items()}
        line = f"{kname:<14}" + "".join(f"{row[n][1] * 1e3:>12.3f}" for n in names)
        if "numba" in names:
            line += f"{row['numpy'][1] / row['numba'][1]:>9.1f}x{row['numba'][0]:>14.3f}"
        print(line)


if __name__ == "__main__":
    main()
