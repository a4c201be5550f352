"""Time the hot kernels under the numba and pure-numpy backends.

The backend is fixed at import, so each one runs in its own subprocess::

    python benchmarks/bench_kernels.py            # both backends, side by side
    python benchmarks/bench_kernels.py --dims 4 6 8 --repeats 50
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _best(fn, repeats):
    fn()  # compile / warm caches
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def measure(dims, repeats):
    from nilmoment import flow, kernels
    from nilmoment import lie_core as lc

    rng = np.random.default_rng(0)
    out = {"backend": kernels.BACKEND, "rows": []}
    for n in dims:
        c = lc.random_bracket(n, rng).coeffs
        a = rng.standard_normal((n, n))
        g = np.eye(n) + 0.3 * rng.standard_normal((n, n))
        gi = np.linalg.inv(g)
        out["rows"].append({
            "n": n,
            "moment": _best(lambda: kernels.moment_coeffs(c), repeats),
            "act": _best(lambda: kernels.act_coeffs(a, c), repeats),
            "group_act": _best(lambda: kernels.group_act_coeffs(g, gi, c), repeats),
        })
    start = lc.gl_act(np.array([[1.0, 0.5, 0, 0], [0, 1, 0, 0.5], [0.5, 0, 1, 0], [0, 0, 0.5, 1]]),
                      lc.filiform(4))
    flow.run_flow(start)
    t0 = time.perf_counter()
    rep = flow.run_flow(start)
    out["flow"] = {"seconds": time.perf_counter() - t0, "steps": rep.steps_taken}
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--dims", type=int, nargs="+", default=[3, 5, 7, 9])
    parser.add_argument("--repeats", type=int, default=100)
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.child:
        print(json.dumps(measure(args.dims, args.repeats)))
        return

    results = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, NILMOMENT_DISABLE_NUMBA=flag)
        cmd = [sys.executable, __file__, "--child", "--repeats", str(args.repeats), "--dims",
               *map(str, args.dims)]
        proc = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        results[label] = json.loads(proc.stdout.strip().splitlines()[-1])

    fast, slow = results["numba"], results["numpy"]
    print(f"backends: {fast['backend']} vs {slow['backend']} (best of {args.repeats}, microseconds)")
    print(f"{'n':>3} {'kernel':>10} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for rf, rs in zip(fast["rows"], slow["rows"]):
        for key in ("moment", "act", "group_act"):
            print(f"{rf['n']:>3} {key:>10} {rf[key] * 1e6:10.1f} {rs[key] * 1e6:10.1f} {rs[key] / rf[key]:8.1f}x")
    print(f"flow (skewed filiform4, {fast['flow']['steps']} steps): "
          f"numba {fast['flow']['seconds'] * 1e3:.1f} ms, numpy {slow['flow']['seconds'] * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
