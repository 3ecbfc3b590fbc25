"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernel.py [--repeat N]

Times the batched face kernel at several batch sizes, then end-to-end flow
and Newton solves on the bundled surfaces, and checks the two backends agree.
"""
import argparse
import timeit

import numpy as np

from bordered_yamabe import kernel, solver
from bordered_yamabe import surface as sf


def random_margins(rng, faces):
    return rng.uniform(0.05, 3.0, (faces, 3))


def best_of(fn, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    backends = kernel.available_backends()
    if "compiled" not in backends:
        print("compiled backend not built; only timing the Python fallback")
    rng = np.random.default_rng(0)
    b_tetra = np.array([1.0, 2.0, 3.0, 1.5])
    cases = [(f"face_thetas_jac F={n}", lambda m=random_margins(rng, n): kernel.face_thetas_jac(m))
             for n in (1, 16, 1024, 65536)]
    cases += [
        ("flow_solve pants", lambda: solver.flow_solve(*sf.pair_of_pants(), None, np.ones(3))),
        ("newton_solve tetra", lambda: solver.newton_solve(*sf.tetrahedral_surface(), None, b_tetra)),
    ]

    margins = random_margins(rng, 4096)
    results = {}
    previous = kernel.get_backend()
    try:
        for name in backends:
            kernel.set_backend(name)
            results[name] = kernel.face_thetas_jac(margins)
            print(f"\nbackend {name}")
            for label, fn in cases:
                print(f"  {label:<24} {best_of(fn, args.repeat) * 1e6:12.2f} us")
    finally:
        kernel.set_backend(previous)

    if len(results) == 2:
        (th_a, jac_a), (th_b, jac_b) = results.values()
        print(f"\nmax rel diff theta {np.max(np.abs(th_a - th_b) / np.abs(th_b)):.2e}"
              f"  jacobian {np.max(np.abs(jac_a - jac_b) / np.abs(jac_b)):.2e}")


if __name__ == "__main__":
    main()
