"""Benchmark the compiled kernels against the pure-Python fallback.

Runs the Euler chain stepper and the mixture EM sweep through both
implementations, checks that they agree, and prints a timing table.

Usage: python benchmarks/bench_sde.py [--steps N] [--em-n N] [--repeat R]
"""

import argparse
import time

import numpy as np

from sizedist import _kernels_py

try:
    from sizedist import _kernels

    HAVE_COMPILED = True
except ImportError:
    _kernels = None
    HAVE_COMPILED = False


def time_call(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_euler(mod, steps, z):
    # drift code 0: log-space image of a stretched exponential
    gamma, eta, a = 0.45, 2000.0, 1.0
    params = np.array([-0.5 * gamma * a, gamma, np.log(eta)])
    out = np.empty(steps // 16 + 1)
    retained = mod.euler_chain(
        0, params, np.log(eta), 0.02, np.sqrt(a * 0.02), steps, steps // 10, 16, 0.0, 0, z, out
    )
    return out[:retained].copy()


def bench_em(mod, y, m):
    mu = np.quantile(y, np.linspace(0.2, 0.8, m)).copy()
    sigma = np.full(m, y.std())
    w = np.full(m, 1.0 / m)
    ll, iters, status, worst = mod.em_gauss_mix(y, mu, sigma, w, 500, 1e-8, 3, 1e-6)
    return np.array([ll, iters, status]), mu, sigma, w


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=400_000)
    ap.add_argument("--em-n", type=int, default=40_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rows = []

    z = np.random.default_rng(0).standard_normal(args.steps)
    t_py, draws_py = time_call(lambda: bench_euler(_kernels_py, args.steps, z), args.repeat)
    if HAVE_COMPILED:
        t_c, draws_c = time_call(lambda: bench_euler(_kernels, args.steps, z), args.repeat)
        assert draws_c.size == draws_py.size
        assert np.allclose(draws_c, draws_py, rtol=1e-10, atol=1e-10), "euler outputs differ"
    else:
        t_c = None
    rows.append(("euler_chain", args.steps, t_py, t_c))

    rng = np.random.default_rng(1)
    comp = rng.integers(0, 2, size=args.em_n)
    y = np.where(comp == 0, rng.normal(7.0, 2.0, args.em_n), rng.normal(4.5, 1.2, args.em_n))
    y.sort()
    t_py, em_py = time_call(lambda: bench_em(_kernels_py, y, 2), args.repeat)
    if HAVE_COMPILED:
        t_c, em_c = time_call(lambda: bench_em(_kernels, y, 2), args.repeat)
        assert abs(em_c[0][0] - em_py[0][0]) < 1e-6 * (1 + abs(em_py[0][0])), "EM ll differs"
        for a_arr, b_arr in zip(em_c[1:], em_py[1:]):
            assert np.allclose(a_arr, b_arr, rtol=1e-8, atol=1e-10), "EM params differ"
    else:
        t_c = None
    rows.append(("em_gauss_mix", args.em_n, t_py, t_c))

    if not HAVE_COMPILED:
        print("compiled extension not available; timing pure Python only\n")
    print(f"{'kernel':<14}{'size':>10}{'pure (s)':>12}{'compiled (s)':>14}{'speedup':>10}")
    for name, size, t_py, t_c in rows:
        if t_c is None:
            print(f"{name:<14}{size:>10}{t_py:>12.4f}{'--':>14}{'--':>10}")
        else:
            print(f"{name:<14}{size:>10}{t_py:>12.4f}{t_c:>14.4f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
