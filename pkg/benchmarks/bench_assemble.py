"""Time Hamiltonian assembly with the compiled kernel against the Python fallback.

    python3 benchmarks/bench_assemble.py [--sizes 40,160,320] [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from dwell import _assemble_py, _kernels
from dwell.fock import Model, Parity, SectorBasis


def cases(sizes):
    for n in sizes:
        for model in (Model.ATOMS, Model.MIXTURE):
            yield n, model, SectorBasis(n, model, Parity.EVEN)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--sizes", default="40,160,320,1000")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    sizes = [int(x) for x in args.sizes.split(",")]
    if _kernels.BACKEND != "cython":
        print("compiled kernel not built; only the fallback is timed")
    print(f"{'model':8s} {'N':>6s} {'dim':>7s} {'python [s]':>11s} {'compiled [s]':>13s} {'speedup':>8s}")
    for n, model, basis in cases(sizes):
        mixture = model is Model.MIXTURE
        call_args = (n, mixture, 1, 1.0, 2.0, 5.0 if mixture else 0.0, 5.0 if mixture else 0.0,
                     basis._layout.offsets)
        t_py = min(timeit.repeat(lambda: _assemble_py.assemble(*call_args), number=1,
                                 repeat=args.repeat))
        if _kernels.BACKEND == "cython":
            ref = _assemble_py.assemble(*call_args)
            out = _kernels.assemble(*call_args)
            assert all(np.array_equal(a, b) for a, b in zip(ref, out)), "kernels disagree"
            t_c = min(timeit.repeat(lambda: _kernels.assemble(*call_args), number=1,
                                    repeat=args.repeat))
            print(f"{model.value:8s} {n:6d} {basis.dim:7d} {t_py:11.4f} {t_c:13.5f} {t_py / t_c:8.1f}")
        else:
            print(f"{model.value:8s} {n:6d} {basis.dim:7d} {t_py:11.4f} {'-':>13s} {'-':>8s}")


if __name__ == "__main__":
    main()
