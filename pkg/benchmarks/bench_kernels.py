"""Numba vs pure-numpy timing of the hot kernels.

Runs each kernel in a fresh interpreter twice, once with SLACKAPPROX_NUMBA=1
and once with SLACKAPPROX_NUMBA=0, and prints a table. JIT compile time is
excluded by a warm-up call.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _mu_problem():
    from slackapprox import instances as I
    from slackapprox.solver import MuProgram
    F = I.square_factors()
    prog = MuProgram(F.A, F.cone, 4)
    w = np.array([0.0, 0.0, 2.0, 2.0])
    return lambda: prog.value(w)


def _projection():
    from slackapprox import kernels
    from slackapprox.model import ConeSpec
    kinds, dims = ConeSpec.parse("orthant:40,soc:30,soc:30").arrays()
    x = np.random.default_rng(0).standard_normal(100)

    def run():
        for _ in range(2000):
            kernels.project_blocks(x.copy(), kinds, dims)
    return run


def _nmf():
    from slackapprox.factor import NMFOptions, nmf
    from slackapprox.slack import cor_instance
    S = cor_instance(3)[2]
    return lambda: nmf(S, 3, NMFOptions(max_iters=20000, tol=0.0))


def _power():
    from slackapprox import kernels
    M = np.random.default_rng(1).random((30, 30))
    M = M @ M.T
    x0 = np.ones(30)

    def run():
        for _ in range(200):
            kernels.power_iteration(M, x0, 5000, 1e-13)
    return run


CASES = {"admm_mu_square": _mu_problem, "project_blocks": _projection,
         "nmf_cor3": _nmf, "power_iteration": _power}


def child(repeat):
    from slackapprox import NUMBA_ENABLED
    out = {"numba": NUMBA_ENABLED}
    for name, make in CASES.items():
        fn = make()
        fn()                                    # compile / warm caches
        best = np.inf
        for _ in range(repeat):
            t = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t)
        out[name] = best
    print(json.dumps(out))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        child(args.repeat)
        return
    res = {}
    for flag in ("1", "0"):
        env = dict(os.environ, SLACKAPPROX_NUMBA=flag)
        p = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(args.repeat)],
                           env=env, capture_output=True, text=True, check=True)
        res[flag] = json.loads(p.stdout.strip().splitlines()[-1])
    if not res["1"]["numba"]:
        print("numba unavailable: both runs used the numpy fallback")
    print(f"{'kernel':<18}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name in CASES:
        a, b = res["1"][name], res["0"][name]
        print(f"{name:<18}{a:>12.4f}{b:>12.4f}{b / a:>10.1f}")


if __name__ == "__main__":
    main()
