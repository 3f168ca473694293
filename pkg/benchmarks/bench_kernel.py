"""Wall-clock comparison of the compiled and pure-Python transition kernels.

    python3 benchmarks/bench_kernel.py [--eps 0.02 0.01] [--repeat 3]
"""

import argparse
import time

from foldcycle import kernels
from foldcycle.model import PrototypicalSystem, SectionSpec
from foldcycle.transition import entry_state, transition_map


def time_one(sys, section, backend, repeat):
    entry = entry_state(section, -0.125)
    best = float("inf")
    rec = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        rec = transition_map(sys, entry, section, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, rec


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.04, 0.02, 0.01])
    ap.add_argument("--alpha", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not kernels.compiled_available():
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` first")
        return 1
    section = SectionSpec()
    print(f"{'eps':>8} {'steps':>9} {'python s':>10} {'cython s':>10} {'speedup':>8} {'same exit':>9}")
    for eps in args.eps:
        sys = PrototypicalSystem.unit(args.alpha, eps)
        tp, rp = time_one(sys, section, "python", args.repeat)
        tc, rc = time_one(sys, section, "cython", args.repeat)
        same = rp.exit == rc.exit and rp.log_contraction_y == rc.log_contraction_y
        print(f"{eps:8.4f} {rc.stats.n_accepted:9d} {tp:10.3f} {tc:10.4f} {tp / tc:8.1f} {str(same):>9}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
