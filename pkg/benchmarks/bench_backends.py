"""Wall-clock comparison of the numba and numpy kernel backends.

Each cell runs one algorithm on one generated graph with both backends,
checks that the results agree, and reports the best of ``--repeat`` timings.
Output is CSV on stdout.

    python benchmarks/bench_backends.py --repeat 3
"""

import argparse
import csv
import sys
import time

from deltacolor.coloring import Coloring
from deltacolor.defective import defective_color, refine
from deltacolor.delta import color_delta_plus_one, mis_from_coloring
from deltacolor.graphcore import GraphSpec, generate
from deltacolor.palette import linial_coloring
from deltacolor.reduce import kw_reduce

GRAPHS = ["regular:n=4096,d=16,seed=1", "regular:n=16384,d=32,seed=1", "gnp:n=4096,p=0.01,seed=2"]


def _ids(g):
    return Coloring.from_sequence(range(1, g.n + 1))


CASES = {
    "refine": lambda g, b: refine(g, range(1, g.n + 1), 4, backend=b),
    "kw": lambda g, b: kw_reduce(g, _ids(g), backend=b),
    "defective": lambda g, b: defective_color(g, 2, 5, backend=b),
    "delta": lambda g, b: color_delta_plus_one(g, backend=b)[:2],
    "mis": lambda g, b: (None, mis_from_coloring(g, linial_coloring(g)[0], backend=b).run),
}


def timed(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--graph", action="append", help="generator spec; repeatable")
    ap.add_argument("--algo", action="append", choices=sorted(CASES))
    args = ap.parse_args(argv)

    # compile every numba kernel once before timing
    small = generate(GraphSpec("regular", 64, d=4, seed=1))
    for case in CASES.values():
        case(small, "numba")

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["graph", "n", "delta", "algorithm", "numba_s", "numpy_s", "speedup", "rounds", "agree"])
    for spec in args.graph or GRAPHS:
        g = generate(GraphSpec.parse(spec))
        for name in args.algo or sorted(CASES):
            t_nb, (col_nb, res_nb) = timed(lambda: CASES[name](g, "numba"), args.repeat)
            t_np, (col_np, res_np) = timed(lambda: CASES[name](g, "numpy"), args.repeat)
            agree = res_nb.rounds_used == res_np.rounds_used and res_nb.messages_sent == res_np.messages_sent
            if col_nb is not None:
                agree = agree and col_nb.colors.tolist() == col_np.colors.tolist()
            w.writerow([spec, g.n, g.max_degree, name, f"{t_nb:.4f}", f"{t_np:.4f}", f"{t_np / t_nb:.2f}",
                        res_nb.rounds_used, int(agree)])
            sys.stdout.flush()


if __name__ == "__main__":
    main()
