"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--horizon SECONDS]
"""

import argparse
import time

import numpy as np

from hawkesvol._kernels import MARK_GEOMETRIC, _pure

try:
    from hawkesvol._kernels import _compiled
except ImportError:
    _compiled = None

SYM = (0.1, 0.95, 0.82, 2.25, 0.19)
FULL = (0.1461, 0.1155, 0.3185, 0.3821, 0.9812, 1.4949,
        1.1799, 1.9553, 2.0952, 2.5030, 0.1488)
_NOSUP = np.empty(0, dtype=np.int64)
_NOCUM = np.empty(0, dtype=np.float64)


def _time(fn, min_seconds=0.4):
    fn()  # warm up
    n = 0
    t0 = time.perf_counter()
    while True:
        fn()
        n += 1
        dt = time.perf_counter() - t0
        if dt >= min_seconds:
            return dt / n


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--horizon", type=float, default=19_800.0)
    args = parser.parse_args()
    horizon = args.horizon

    sym_args = (*SYM, 0.0, horizon, 0.0, 0.0, MARK_GEOMETRIC, 0.15, 1.0, 2.0,
                _NOSUP, _NOCUM, 1e6)
    t, s, k, *_ = _pure.sym_thinning(*sym_args, np.random.default_rng(1))
    kf = k.astype(np.float64)
    full_args = (*FULL, 0.0, horizon, MARK_GEOMETRIC, 0.1, 1.0, 2.0,
                 _NOSUP, _NOCUM, 1e6)
    tf, sf, kf2, *_ = _pure.full_thinning(*full_args, np.random.default_rng(2))
    kff = kf2.astype(np.float64)

    cases = {
        f"sym_loglik ({len(t)} events)":
            lambda be: be.sym_loglik(t, s, kf, SYM[4], horizon, *SYM[:4], SYM[0], SYM[0]),
        f"sym_event_intensities ({len(t)} events)":
            lambda be: be.sym_event_intensities(t, s, kf, SYM[4], *SYM[:4], SYM[0], SYM[0]),
        f"full_loglik ({len(tf)} events)":
            lambda be: be.full_loglik(tf, sf, kff, FULL[-1], horizon, *FULL[:-1]),
        f"sym_thinning ({horizon:.0f}s horizon)":
            lambda be: be.sym_thinning(*sym_args, np.random.default_rng(3)),
        f"full_thinning ({horizon:.0f}s horizon)":
            lambda be: be.full_thinning(*full_args, np.random.default_rng(4)),
    }

    print(f"{'kernel':45s} {'pure':>12s} {'compiled':>12s} {'speedup':>9s}")
    for name, call in cases.items():
        dt_pure = _time(lambda: call(_pure))
        if _compiled is None:
            print(f"{name:45s} {dt_pure * 1e3:10.2f}ms {'n/a':>12s} {'-':>9s}")
            continue
        dt_comp = _time(lambda: call(_compiled))
        print(f"{name:45s} {dt_pure * 1e3:10.2f}ms {dt_comp * 1e3:10.2f}ms "
              f"{dt_pure / dt_comp:8.1f}x")
    if _compiled is None:
        print("\ncompiled extension unavailable; build with `python setup.py build_ext --inplace`")


if __name__ == "__main__":
    main()
