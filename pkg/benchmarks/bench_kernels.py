"""Time the numba kernels against their numpy counterparts.

    python benchmarks/bench_kernels.py [--repeat 2000] [--dim 4]

Also times one end-to-end curvature evaluation per backend by re-importing
the package in a subprocess with KAHLERPROD_NO_JIT set.
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from kahlerprod import _kernels

END_TO_END = """
import timeit, numpy as np
from kahlerprod import product
spec = product.parse_model("cp(2,c=0.0625)xch(1,c=-0.0625)")
rng = np.random.default_rng(0)
q = product.sample_point(spec, rng)
X, Y, Z = rng.normal(size=(3, spec.dim))
product.curvature_fd(spec, q, X, Y, Z)
n = 200
print(timeit.timeit(lambda: product.curvature_fd(spec, q, X, Y, Z), number=n) / n)
"""


def bench(fn, args, repeat):
    fn(*args)  # warm-up / compile
    return min(timeit.repeat(lambda: fn(*args), number=repeat, repeat=3)) / repeat


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--dim", type=int, default=4, help="real dimension (even)")
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba not installed; only the numpy path is available")
        return 0
    d = args.dim
    rng = np.random.default_rng(0)
    p = 0.3 * rng.normal(size=d)
    g, dg = _kernels.space_form_metric_numpy(p, 1.0, 4.0)
    gamma = _kernels.christoffel_numpy(np.linalg.inv(g), dg)
    dgamma = rng.normal(size=(d, d, d, d))
    cases = [
        ("space_form_metric", _kernels.space_form_metric_numpy, _kernels.space_form_metric_numba, (p, 1.0, 4.0)),
        ("christoffel", _kernels.christoffel_numpy, _kernels.christoffel_numba, (np.linalg.inv(g), dg)),
        ("riemann", _kernels.riemann_numpy, _kernels.riemann_numba, (gamma, dgamma)),
    ]
    print(f"{'kernel':<20}{'numpy [us]':>12}{'numba [us]':>12}{'speedup':>10}")
    for name, f_np, f_nb, fargs in cases:
        t_np, t_nb = bench(f_np, fargs, args.repeat), bench(f_nb, fargs, args.repeat)
        print(f"{name:<20}{t_np * 1e6:>12.2f}{t_nb * 1e6:>12.2f}{t_np / t_nb:>10.1f}")
    print("\nend-to-end curvature_fd on cp(2)xch(1):")
    for label, flag in (("numpy", "1"), ("numba", "0")):
        env = dict(os.environ, KAHLERPROD_NO_JIT=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        print(f"  {label:<6} {float(out.stdout) * 1e3:8.3f} ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
