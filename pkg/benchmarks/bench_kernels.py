"""Time the compiled Kahan matvec against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 20] [--threads 1]

Also confirms the two backends agree bit for bit on every size.
"""
import argparse
import timeit
from pathlib import Path

import numpy as np

from fredholm_lattice import kernels
from fredholm_lattice.operator import DiscreteOperator, trapezoid_weights
from fredholm_lattice.problem import load

EXAMPLE = Path(__file__).resolve().parent.parent / "problems" / "example.json"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--sizes", type=int, nargs="+", default=[201, 501, 1001, 2001])
    args = parser.parse_args()

    spec = load(EXAMPLE).spec
    print(f"active backend: {kernels.BACKEND}")
    if kernels.kahan_matvec_compiled is None:
        print("compiled extension not available; only the fallback is timed")
    print(f"{'n':>6} {'numpy ms':>10} {'compiled ms':>12} {'speedup':>8} {'identical':>10}")
    for n in args.sizes:
        op = DiscreteOperator(spec, trapezoid_weights(spec.grid(n)))
        M = op.weighted
        x = np.linspace(0.0, 2.0, n)
        t_py = min(timeit.repeat(lambda: kernels.kahan_matvec_python(M, x),
                                 number=1, repeat=args.repeat)) * 1e3
        if kernels.kahan_matvec_compiled is None:
            print(f"{n:>6} {t_py:>10.3f} {'-':>12} {'-':>8} {'-':>10}")
            continue
        t_c = min(timeit.repeat(lambda: kernels.kahan_matvec_compiled(M, x, args.threads),
                                number=1, repeat=args.repeat)) * 1e3
        same = np.array_equal(kernels.kahan_matvec_python(M, x),
                              kernels.kahan_matvec_compiled(M, x, args.threads))
        print(f"{n:>6} {t_py:>10.3f} {t_c:>12.3f} {t_py / t_c:>8.2f} {str(same):>10}")


if __name__ == "__main__":
    main()
