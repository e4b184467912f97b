"""Exact checkers, closed-form bounds and a sequential reference coloring.

The checkers scan the edge list directly with numpy and do not share code
with the round kernels.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .coloring import Coloring
from .errors import InvalidParameters
from .graphcore import Graph

COVER_FREE_CAP = 10 ** 6


def _colors(coloring) -> np.ndarray:
    if isinstance(coloring, Coloring):
        return np.asarray(coloring.colors)
    return np.asarray(coloring, dtype=np.int64)


def check_legal(graph: Graph, coloring) -> list[tuple[int, int]]:
    """Monochromatic edges (u, v) with u < v."""
    c = _colors(coloring)
    e = graph.edge_array()
    if not len(e):
        return []
    bad = e[c[e[:, 0] - 1] == c[e[:, 1] - 1]]
    return [(int(u), int(v)) for u, v in bad]


def check_defect(graph: Graph, coloring) -> tuple[int, int]:
    """(defect, palette used): max same-colored neighbors of a vertex, and the largest color."""
    c = _colors(coloring)
    if graph.n == 0:
        return 0, 0
    e = graph.edge_array()
    mono = e[c[e[:, 0] - 1] == c[e[:, 1] - 1]] if len(e) else e
    counts = np.bincount(mono.reshape(-1) - 1, minlength=graph.n) if len(mono) else np.zeros(1, dtype=int)
    return int(counts.max()), int(c.max())


def check_mis(graph: Graph, members) -> list[tuple]:
    """('edge', u, v) for two adjacent members, ('uncovered', v) for a vertex with no member in N[v]."""
    flag = np.zeros(graph.n, dtype=bool)
    arr = np.asarray(members)
    if arr.dtype == bool:
        flag[:] = arr
    elif arr.size:
        flag[np.asarray(list(members), dtype=np.int64) - 1] = True
    out: list[tuple] = []
    e = graph.edge_array()
    if len(e):
        both = flag[e[:, 0] - 1] & flag[e[:, 1] - 1]
        out += [("edge", int(u), int(v)) for u, v in e[both]]
    covered = flag.copy()
    if len(e):
        covered[e[flag[e[:, 0] - 1], 1] - 1] = True
        covered[e[flag[e[:, 1] - 1], 0] - 1] = True
    out += [("uncovered", int(v) + 1) for v in np.flatnonzero(~covered)]
    return out


def check_cover_free(family, A: int, count: int | None = None) -> bool:
    """Exhaustive check that no set lies inside the union of A others.

    ``family`` is a CoverFreeFamily (its first ``count`` sets, default all)
    or an explicit list of sets. Refuses when more than COVER_FREE_CAP
    (set, A-subset) combinations would be needed.
    """
    sets = family if isinstance(family, (list, tuple)) else family.sets(count)
    sets = [frozenset(s) for s in sets]
    n = len(sets)
    if A < 1:
        raise InvalidParameters("A must be >= 1")
    if n <= A:
        # fewer than A + 1 sets: no tuple of distinct indices exists
        return True
    work = n * math.comb(n - 1, A)
    if work > COVER_FREE_CAP:
        raise InvalidParameters(f"{work} combinations exceed the cap of {COVER_FREE_CAP}")
    for i, s in enumerate(sets):
        others = sets[:i] + sets[i + 1:]
        for combo in itertools.combinations(others, A):
            if s <= frozenset().union(*combo):
                return False
    return True


def greedy_reference_coloring(graph: Graph) -> Coloring:
    """Vertices in id order take the smallest color unused by earlier neighbors."""
    colors = [0] * graph.n
    for v, nbrs in enumerate(graph.adjacency):
        taken = {colors[u - 1] for u in nbrs}
        c = 1
        while c in taken:
            c += 1
        colors[v] = c
    return Coloring.from_sequence(colors, palette=graph.max_degree + 1)


# --------------------------------------------------------------------------
# Closed-form bounds


def _safe_iter_log(i: int, x: float) -> float:
    for _ in range(i):
        if x <= 1:
            return 0.0
        x = math.log2(x)
    return max(x, 0.0)


def refine_rounds_bound(chi: int) -> int:
    return chi + 1


def kw_round_bound(m: int, delta: int) -> int:
    span = delta + 1
    return 0 if m <= span else span * math.ceil(math.log2(m / span))


def defective_iterations_bound(chi0: int, p: int, q: int) -> int:
    """ceil(log_{q/p^2} chi0): the least I with (q / p^2)^I >= chi0, in exact integers."""
    if p * p >= q:
        raise InvalidParameters("need p^2 < q")
    i = 0
    while q ** i < chi0 * p ** (2 * i):
        i += 1
    return i


def delta_time_bound(i: int, delta: int, c: float, eps: float) -> float:
    """tau(i, D) = i + i c D^eps + c sum_{j<=i} D/2^j + c sum_{j<i} log^(j) D + c (D+1) log^(i) D."""
    if delta <= 0:
        return 0.0
    tau = i + i * c * delta ** eps
    tau += c * sum(delta / 2 ** j for j in range(i + 1))
    tau += c * sum(_safe_iter_log(j, delta) for j in range(i))
    tau += c * (delta + 1) * _safe_iter_log(i, delta)
    return tau


def bound_formulas(algorithm: str, params: dict) -> dict:
    """Theoretical bounds for one algorithm: {name: (value, formula)}."""
    if algorithm == "refine":
        p, chi, m, sub = params["p"], params["chi"], params.get("m", 0), params["delta"]
        return {"rounds": (refine_rounds_bound(chi), "chi+1"), "palette": (p * p, "p^2"),
                "defect": (m + sub // p, "m+floor(D'/p)")}
    if algorithm == "defective":
        p, q, chi0, delta = params["p"], params["q"], params["chi0"], params["delta"]
        iters = params.get("iterations", defective_iterations_bound(chi0, p, q))
        return {"iterations": (defective_iterations_bound(chi0, p, q), "ceil(log_{q/p^2} chi0)"),
                "palette": (p * p, "p^2"), "defect": (iters * (delta // p), "I*floor(D/p)")}
    if algorithm == "kw":
        m, delta = params["m"], params["delta"]
        return {"rounds": (kw_round_bound(m, delta), "(D+1)*ceil(log(m/(D+1)))"),
                "palette": (min(m, delta + 1), "D+1"), "violations": (0, "legal")}
    if algorithm == "delta":
        i, delta, c, eps = params["depth"], params["delta"], params.get("c", 2.0), params.get("eps", 0.25)
        init = params.get("init_rounds", 0)
        return {"palette": (delta + 1, "D+1"), "violations": (0, "legal"),
                "rounds": (init + delta_time_bound(i, delta, c, eps), "T_init + tau(i,D)")}
    if algorithm == "linial":
        from .graphcore import log_star
        from .palette import LINIAL_ROUND_SLACK
        n, delta, c = params["n"], params["delta"], params["c"]
        return {"rounds": (log_star(max(n, 1)) + LINIAL_ROUND_SLACK, "log*n+C0"),
                "palette": (max(1, math.floor(c * delta * delta)) if delta else 1, "c*D^2"),
                "violations": (0, "legal")}
    if algorithm == "tradeoff":
        delta, t, K = params["delta"], params["t"], params["K"]
        return {"palette": (K * delta * t if delta else 1, "K*D*t"), "violations": (0, "legal")}
    if algorithm == "mis":
        return {"rounds": (params["palette"], "C"), "violations": (0, "independent+maximal")}
    raise InvalidParameters(f"unknown algorithm id {algorithm!r}")


@dataclass
class BoundReport:
    """Measured quantities next to their bounds; ``passed`` iff measured <= bound for every bound."""

    algorithm: str
    params: dict
    measured: dict
    bounds: dict  # name -> (value, formula)
    constants: dict = field(default_factory=dict)

    @property
    def flags(self) -> dict:
        return {k: self.measured[k] <= v for k, (v, _) in self.bounds.items()}

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "params": self.params,
            "measured": self.measured,
            "bounds": {k: {"value": v, "formula": f} for k, (v, f) in self.bounds.items()},
            "pass": self.flags,
            "constants": self.constants,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, default=_jsonable)


def _jsonable(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)
