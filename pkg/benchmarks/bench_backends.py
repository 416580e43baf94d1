"""Benchmark the compiled integrator kernels against the pure-Python fallback.

Times two representative workloads from the verification pipeline:

  * variational: rotation-plus-quadratic field on the plane, flow with the
    co-integrated differential over one time unit;
  * cocycle: backward trajectory + 4x4 matrix ODE + quadrature in one pass.

Usage: python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import time

import numpy as np

from lieflow import GeneratorSet, parse_vector_field, solve_structure_matrix
from lieflow._compile import field_polyset, jacobian_polyset, matrix_polyset
from lieflow import _kernels_py

try:
    from lieflow import _kernels as _kernels_compiled
except ImportError:
    _kernels_compiled = None


def variational_workload():
    vf = parse_vector_field("x*dy - y*dx + 1/10*x^2*dx", 2)
    fset = field_polyset(vf)
    gset = jacobian_polyset(vf)
    return (
        2, 2,
        fset.offsets, fset.exps, fset.coefs,
        gset.offsets, gset.exps, gset.coefs,
        np.array([0.4, -0.3]), np.eye(2).ravel(),
        1.0, 1.0, 1.0, False,
        _kernels_py.METHOD_RK45, 1e-2, 1e-10, 1e-10, 10**6,
        np.full(2, -np.inf), np.full(2, np.inf),
    )


def cocycle_workload():
    gens = GeneratorSet(
        tuple(parse_vector_field(t, 2) for t in ("x*dx", "x*dy", "y*dx", "y*dy"))
    )
    X = parse_vector_field("x*dy - y*dx", 2)
    sm = solve_structure_matrix(X, gens, 2)
    fset = field_polyset(X)
    gset = matrix_polyset(sm.entries, 2)
    return (
        2, 4,
        fset.offsets, fset.exps, fset.coefs,
        gset.offsets, gset.exps, gset.coefs,
        np.array([0.7, -0.2]), np.eye(4).ravel(),
        1.0, -1.0, 1.0, True,
        _kernels_py.METHOD_RK45, 1e-2, 1e-10, 1e-10, 10**6,
        np.full(2, -np.inf), np.full(2, np.inf),
    )


def time_kernel(kernels, args, repeats):
    # warm up once, then time
    status, _, _, _, steps = kernels.integrate_matrix_ode(*args)
    assert status == kernels.STATUS_OK
    start = time.perf_counter()
    for _ in range(repeats):
        kernels.integrate_matrix_ode(*args)
    elapsed = time.perf_counter() - start
    return elapsed / repeats, steps


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    workloads = [
        ("variational flow (n=2)", variational_workload()),
        ("cocycle solve (N=4)", cocycle_workload()),
    ]
    backends = [("pure python", _kernels_py)]
    if _kernels_compiled is not None:
        backends.insert(0, ("compiled", _kernels_compiled))
    else:
        print("compiled extension not available; timing the fallback only")

    print(f"{'workload':<24} {'backend':<12} {'per solve':>12} {'steps':>7}")
    for label, workload in workloads:
        timings = {}
        for name, kernels in backends:
            per_solve, steps = time_kernel(kernels, workload, args.repeats)
            timings[name] = per_solve
            print(f"{label:<24} {name:<12} {per_solve * 1e3:>10.3f}ms {steps:>7}")
        if "compiled" in timings:
            speedup = timings["pure python"] / timings["compiled"]
            print(f"{label:<24} {'speedup':<12} {speedup:>11.1f}x")


if __name__ == "__main__":
    main()
