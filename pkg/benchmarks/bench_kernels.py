"""Time the compiled and pure-Python kernels on the same inputs."""

import argparse
import timeit

import numpy as np

from haarlab import kernels


def cases(rng, scale):
    L = 512 * scale
    conv = (rng.integers(0, 9, 4096 * scale), rng.integers(0, 9, 4096 * scale), 9)
    step = (rng.integers(0, 2, size=(2048, L, 1)), np.array([-1, 1]),
            np.ones((2, 1, 1), dtype=np.int64), 2)
    n, T, B = 4, 64, 4096 * scale
    Q = rng.random((2, n, n))
    Q /= Q.sum(axis=1, keepdims=True)
    mult = np.exp(2j * np.pi * rng.random((B, T, n)))
    qindex = np.arange(T - 1) % 2
    return {
        "convolve_mod_1d": ("convolve_mod_1d", conv),
        "lca_step_1d": ("lca_step_1d", step),
        "transfer_forward": ("transfer_forward", (rng.random(n), Q, qindex, mult)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scale", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = kernels.backends()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name in impls) + "   speedup")
    for label, (fn, argv) in cases(rng, args.scale).items():
        times = {}
        for name, mod in impls.items():
            f = getattr(mod, fn)
            f(*argv)
            times[name] = min(timeit.repeat(lambda: f(*argv), number=1, repeat=args.repeat))
        row = f"{label:<18}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times.values())
        if "cython" in times:
            row += f"   {times['python'] / times['cython']:6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
