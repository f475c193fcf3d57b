"""Time the compiled and NumPy kernels on one training-sized batch.

    python benchmarks/bench_kernels.py [--repeats 200]

Reports microseconds per call for the forward pass and the gradient at a few
(batch, rules, features) shapes, plus the speed-up of the compiled backend.
"""

import argparse
import timeit

import numpy as np

from tskfuzzy import _kernels_py

try:
    from tskfuzzy import _kernels as compiled
except ImportError:
    compiled = None

SHAPES = [(64, 16, 8), (64, 64, 16), (512, 16, 8), (2048, 32, 10)]


def case(n, R, M, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, M))
    return dict(
        A=X, Z=X, y=rng.normal(size=n),
        C=rng.normal(size=(R, M)), S=rng.uniform(0.5, 2, (R, M)), W=rng.normal(size=(R, M + 1)),
        mask=rng.random((n, R)) < 0.5,
    )


def per_call(fn, repeats):
    fn()
    return min(timeit.repeat(fn, number=repeats, repeat=3)) / repeats * 1e6


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=200)
    args = ap.parse_args()
    backends = {"python": _kernels_py}
    if compiled is not None:
        backends["cython"] = compiled
    else:
        print("compiled extension not built; timing the NumPy backend only")

    print(f"{'N':>5} {'R':>4} {'M':>3} {'kernel':<8} " + " ".join(f"{b + ' us':>12}" for b in backends) + "  speed-up")
    for n, R, M in SHAPES:
        c = case(n, R, M)
        for kernel in ("forward", "grad"):
            times = []
            for mod in backends.values():
                if kernel == "forward":
                    fn = lambda m=mod: m.forward(c["A"], c["Z"], c["C"], c["S"], c["W"])
                else:
                    fn = lambda m=mod: m.value_and_grad(c["A"], c["Z"], c["y"], c["C"], c["S"], c["W"], c["mask"])
                times.append(per_call(fn, args.repeats))
            ratio = f"{times[0] / times[1]:8.2f}x" if len(times) == 2 else ""
            print(f"{n:>5} {R:>4} {M:>3} {kernel:<8} " + " ".join(f"{t:12.1f}" for t in times) + "  " + ratio)


if __name__ == "__main__":
    main()
