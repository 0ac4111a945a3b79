"""Time the compiled kernels against the numpy fallback.

``rare_sais.kernels`` routes component_logpdf to numpy above
``COMPILED_LOGPDF_MAX_DIM`` because the BLAS solve wins there.

    python benchmarks/bench_kernels.py [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from rare_sais import _pykernels

try:
    from rare_sais import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    x2 = rng.standard_normal((100_000, 2))
    out = [
        ("s1  M=1e5", "s1", (x2, 3.0)),
        ("s2  M=1e5", "s2", (x2, 4.0, 7.0)),
        ("s3  M=1e5", "s3", (x2,)),
    ]
    for d in (10, 100):
        out.append((f"s4  M=1e5 d={d}", "s4", (rng.standard_normal((100_000, d)), 3.5)))
    for d, n in ((2, 6), (20, 5), (40, 5), (100, 5)):
        x = rng.standard_normal((n * 3000, d))
        means = rng.standard_normal((n, d))
        chols = np.stack([np.linalg.cholesky(np.eye(d) * (1 + k)) for k in range(n)])
        out.append((f"component_logpdf M={n * 3000} N={n} d={d}", "component_logpdf",
                    (x, means, np.ascontiguousarray(chols))))
    return out


def best_time(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()
    if _ckernels is None:
        print("compiled core not built; only the numpy backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<36}{'numpy ms':>10}{'cython ms':>11}{'speedup':>9}")
    for label, name, fargs in cases(rng):
        t_py = best_time(getattr(_pykernels, name), fargs, args.repeat) * 1e3
        if _ckernels is None:
            print(f"{label:<36}{t_py:>10.3f}")
            continue
        t_c = best_time(getattr(_ckernels, name), fargs, args.repeat) * 1e3
        print(f"{label:<36}{t_py:>10.3f}{t_c:>11.3f}{t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
