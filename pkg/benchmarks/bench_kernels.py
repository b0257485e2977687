"""Compare the compiled and numpy quadrature kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--targets 2000] [--sources 32768] [--repeat 3]

Each kernel is timed on the same random targets and sources for every
available backend, and the maximum relative difference between backends is
printed next to the timings.
"""
import argparse
import time

import numpy as np

from vekuabvp import kernels


def _inputs(n_targets, n_sources, seed=0):
    rng = np.random.default_rng(seed)
    def disk(n, r):
        return r * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
    return {
        "targets": disk(n_targets, 0.9),
        "sources": disk(n_sources, 0.6),
        "cvalues": rng.standard_normal(n_sources) + 1j * rng.standard_normal(n_sources),
        "rvalues": rng.standard_normal(n_sources),
        "weights": rng.random(n_sources) / n_sources,
    }


def _cases(d):
    t, s, w = d["targets"], d["sources"], d["weights"]
    return {
        "cauchy_sum": lambda impl: kernels.cauchy_sum(t, s, d["cvalues"], w, 0.1, 0.2, -0.1j, impl=impl),
        "cauchy2_sum": lambda impl: kernels.cauchy2_sum(t, s, d["cvalues"], w, impl=impl),
        "log_sum": lambda impl: kernels.log_sum(t, s, d["rvalues"], w, 0.1, 0.2, impl=impl),
    }


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--targets", type=int, default=2000)
    ap.add_argument("--sources", type=int, default=32768)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}; default {kernels.BACKEND}")
    print(f"{args.targets} targets x {args.sources} sources, best of {args.repeat}")
    d = _inputs(args.targets, args.sources)
    rows = []
    for name, case in _cases(d).items():
        results = {b: best_time(lambda: case(impl), args.repeat) for b, impl in backends.items()}
        ref = results["python"][1]
        line = [f"{name:12s}"]
        for b, (t, out) in results.items():
            rel = np.max(np.abs(out - ref)) / max(np.max(np.abs(ref)), 1e-300)
            line.append(f"{b} {t * 1e3:9.1f} ms (rel diff {rel:.1e})")
        if "cython" in results:
            line.append(f"speedup {results['python'][0] / results['cython'][0]:.1f}x")
        rows.append("  ".join(line))
    print("\n".join(rows))


if __name__ == "__main__":
    main()
