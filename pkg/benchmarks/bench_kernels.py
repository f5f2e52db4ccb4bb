"""Compare the compiled polytope kernel with the pure-Python fallback.

Each workload runs once per backend on identical inputs; the results must
agree exactly, and the table reports wall time and speedup.

    python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]
"""

import argparse
import random
import sys
import time
from fractions import Fraction

from bllab import kernel
from bllab.core import IntervalUnion, builtin_config
from bllab.functional import _plan, phi


def random_union(rng, k_max=3, den=8):
    k = rng.randint(1, k_max)
    pts = sorted(rng.sample(range(-2 * den, 2 * den + 1), 2 * k))
    return IntervalUnion.from_pairs([(Fraction(pts[2 * i], den), Fraction(pts[2 * i + 1], den))
                                     for i in range(k)])


def phi_workload(cfg, tuples):
    return lambda: [phi(cfg, E) for E in tuples]


def raw_workload(name, cfg, boxes):
    plan = _plan(cfg)
    fn = getattr(kernel, name)
    return lambda: [fn(plan.rows, plan.bases, lo, hi) for lo, hi in boxes]


def integer_boxes(rng, n, count, scale=64):
    out = []
    for _ in range(count):
        lo, hi = [], []
        for _ in range(n):
            a = rng.randint(1, scale)
            c = rng.randint(-scale // 4, scale // 4)
            lo.append(c - a)
            hi.append(c + a)
        out.append((tuple(lo), tuple(hi)))
    return out


def timed(fn, repeat):
    best, result = None, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if kernel._kernel_c is None:
        print("compiled kernel not available; build it with `pip install -e . --no-build-isolation`")
        return 1
    compiled = kernel._kernel_c
    rng = random.Random(args.seed)
    rs = builtin_config("riesz-sobolev")[0]
    gw = builtin_config("gowers", k=2)[0]
    r3 = builtin_config("random", n=5, m=3, seed=7)[0]
    r4 = builtin_config("random", n=6, m=4, seed=3)[0]

    workloads = [
        ("phi riesz-sobolev, 200 tuples", phi_workload(rs, [tuple(random_union(rng) for _ in range(3))
                                                            for _ in range(200)])),
        ("phi gowers(2), 50 tuples", phi_workload(gw, [tuple(random_union(rng) for _ in range(4))
                                                       for _ in range(50)])),
        ("phi random(5,3,7), 50 tuples", phi_workload(r3, [tuple(random_union(rng) for _ in range(5))
                                                           for _ in range(50)])),
        ("volume random(6,4,3), 100 boxes", raw_workload("volume", r4, integer_boxes(rng, 6, 100))),
        ("vertices random(6,4,3), 100 boxes", raw_workload("vertices", r4, integer_boxes(rng, 6, 100))),
    ]

    print(f"{'workload':<36} {'compiled s':>11} {'python s':>10} {'speedup':>8}  equal")
    ok = True
    for label, fn in workloads:
        kernel._kernel_c = compiled
        tc, rc = timed(fn, args.repeat)
        kernel._kernel_c = None
        tp, rp = timed(fn, args.repeat)
        kernel._kernel_c = compiled
        same = rc == rp
        ok = ok and same
        print(f"{label:<36} {tc:>11.4f} {tp:>10.4f} {tp / tc:>7.1f}x  {same}")
    print(f"int64 overflow fallbacks during the run: {kernel.stats['fallback']}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
