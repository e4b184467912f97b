"""(D + 1)-coloring by recursive defective partitioning, the color/time tradeoff, and MIS.

All recursive calls run inside one simulated network: sibling classes are
groups of the same phase, and every phase advances the round clock by a
budget every vertex can compute from (D, depth, eps, palette sizes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .coloring import Coloring
from .defective import defect_after, defective_phase, defective_schedule, group_defect, same_group_edges
from .engine import TAG_BITS, Message, Network, RunResult, VertexProgram, run, split_groups, value_bits_array
from .errors import InvalidParameters, PreconditionError
from .graphcore import Graph, iterated_log, log_star
from .palette import build_family, linial_phase, recolor_phase
from .reduce import kw_phase, kw_rounds
from .verify import BoundReport, check_legal, delta_time_bound

DEFAULT_EPS = Fraction(1, 4)


def as_fraction(eps) -> Fraction:
    f = Fraction(eps).limit_denominator(1000)
    if not 0 < f < 1:
        raise InvalidParameters(f"eps must lie strictly between 0 and 1, got {eps}")
    return f


def floor_power(x: int, e: Fraction) -> int:
    """floor(x ** e) for integer x >= 0 and rational e, exactly."""
    if x <= 0:
        return 0
    y = int(math.floor(x ** float(e)))
    num, den = e.numerator, e.denominator
    while y > 0 and y ** den > x ** num:
        y -= 1
    while (y + 1) ** den <= x ** num:
        y += 1
    return y


@dataclass(frozen=True)
class LevelPlan:
    k: int
    q: int
    d: int
    iterations: int


def level_plan(bound: int, depth: int, palette: int, eps: Fraction) -> LevelPlan | None:
    """Parameters of one recursion level, or None when it reduces to the base case.

    The base case is taken when depth is 1, when floor(log^(depth-1) bound) <= 1,
    when floor(bound^eps) <= k^2, or when the provable class degree after the
    defective step is not below ``bound`` (nothing would be gained).
    """
    if depth <= 1 or bound < 2:
        return None
    try:
        k = int(math.floor(iterated_log(depth - 1, bound)))
    except ValueError:
        return None
    q = floor_power(bound, eps)
    if k <= 1 or q <= k * k:
        return None
    sched = defective_schedule(palette, k, q)
    d = defect_after(sched.iterations, bound, k)
    if d >= bound:
        return None
    return LevelPlan(k, q, d, sched.iterations)


@dataclass
class RunStats:
    levels: list = field(default_factory=list)

    def record(self, **kw):
        self.levels.append(kw)


def delta_phase(net: Network, group: np.ndarray, bound: int, depth: int, psi: np.ndarray, palette: int,
                eps: Fraction, stats: RunStats | None = None) -> np.ndarray:
    """Legal (bound + 1)-coloring of every group, given a legal ``palette``-coloring psi of each."""
    group = np.asarray(group, dtype=np.int64)
    plan = level_plan(bound, depth, palette, eps)
    span = bound + 1
    if plan is None:
        window = kw_rounds(palette, span) if palette > span else 0
        start = net.clock
        out = kw_phase(net, group, psi, bound, palette, window=window, tag=f"kw:{depth}")
        if stats is not None:
            stats.record(depth=depth, bound=bound, base=True, palette=palette, kw_rounds=net.clock - start)
        return out

    k, q, d = plan.k, plan.q, plan.d
    start = net.clock
    phi, sched, _ = defective_phase(net, group, psi, palette, k, q, bound, tag=f"defective:{depth}")
    defective_rounds = net.clock - start
    sub = split_groups(group, phi)
    src, _ = same_group_edges(net.graph, sub)
    measured = int(np.bincount(src, minlength=net.n).max()) if len(src) else 0
    if measured > d:
        raise AssertionError(f"class degree {measured} exceeds the bound {d} passed to the recursion")

    fam = build_family(max(d, 1), palette)
    if fam.ground_size < palette:
        lam = recolor_phase(net, sub, psi, fam, window=1)
        lam_palette = fam.ground_size
    else:
        lam, lam_palette = psi, palette
    if stats is not None:
        stats.record(depth=depth, bound=bound, base=False, k=k, q=q, d=d, iterations=sched.iterations,
                     defective_rounds=defective_rounds, palette=palette, class_palette=lam_palette)

    inner = delta_phase(net, sub, d, depth - 1, lam, lam_palette, eps, stats)
    active = group >= 0
    shifted = np.where(active, inner + (d + 1) * (phi - 1), 1)
    gsrc, gdst = same_group_edges(net.graph, group)
    clash = shifted[gsrc] == shifted[gdst]
    if clash.any():
        u, v = int(gsrc[clash][0]) + 1, int(gdst[clash][0]) + 1
        raise AssertionError(f"neighbors {u} and {v} share color {shifted[gsrc][clash][0]} after the shift")
    combined = k * k * (d + 1)
    window = kw_rounds(combined, span) if combined > span else 0
    return kw_phase(net, group, shifted, bound, combined, window=window, tag=f"kw:{depth}")


def delta_color(graph: Graph, bound: int, depth: int, psi: Coloring, eps=DEFAULT_EPS, members=None,
                backend=None, order=None, trace=False) -> tuple[Coloring, RunResult]:
    """Legal (bound + 1)-coloring of the subgraph induced by ``members`` from a legal coloring psi."""
    eps = as_fraction(eps)
    if depth < 1:
        raise InvalidParameters(f"depth must be >= 1, got {depth}")
    group = np.zeros(graph.n, dtype=np.int64) if members is None else np.where(np.asarray(members, bool), 0, -1)
    src, _ = same_group_edges(graph, group)
    measured = int(np.bincount(src, minlength=graph.n).max()) if len(src) else 0
    if bound < measured:
        raise PreconditionError(f"degree bound {bound} below the measured max degree {measured}")
    colors = np.asarray(psi.colors, dtype=np.int64)
    if group_defect(graph, group, colors):
        raise PreconditionError("psi must be legal")
    net = Network(graph, backend=backend, order=order, trace=trace)
    stats = RunStats()
    out = delta_phase(net, group, bound, depth, colors, psi.palette, eps, stats)
    out = np.where(group >= 0, out, 1)
    col = Coloring(out, bound + 1, 0, {"algorithm": "delta", "levels": stats.levels})
    return col, net.result(out.tolist())


def default_depth(delta: int) -> int:
    return max(log_star(delta), 1) if delta >= 1 else 1


def color_delta_plus_one(graph: Graph, eps=DEFAULT_EPS, depth: int | None = None, backend=None, order=None,
                         trace=False, max_rounds: int | None = None) -> tuple[Coloring, RunResult, BoundReport]:
    """The full pipeline: initial coloring from ids, then the recursive reduction to D + 1 colors."""
    eps = as_fraction(eps)
    delta = graph.max_degree
    depth = default_depth(delta) if depth is None else depth
    if depth < 1:
        raise InvalidParameters(f"depth must be >= 1, got {depth}")
    net = Network(graph, backend=backend, order=order, trace=trace, max_rounds=max_rounds)
    lam, lam_palette, seq = linial_phase(net)
    init_rounds = net.clock
    stats = RunStats()
    out = delta_phase(net, np.zeros(graph.n, dtype=np.int64), delta, depth, lam, lam_palette, eps, stats)
    col = Coloring(out, delta + 1, 0, {"algorithm": "delta", "levels": stats.levels})
    res = net.result(out.tolist())

    c_palette = lam_palette / (delta * delta) if delta else 0.0
    c_time = max((lv["defective_rounds"] / max(lv["bound"], 1) ** float(eps)
                  for lv in stats.levels if not lv["base"]), default=0.0)
    c = max(2.0, c_palette, c_time)
    tau = delta_time_bound(depth, delta, c, float(eps))
    report = BoundReport(
        algorithm="delta",
        params={"n": graph.n, "delta": delta, "depth": depth, "eps": str(eps)},
        measured={"rounds": res.rounds_used, "palette": col.used, "defect": 0, "messages": res.messages_sent,
                  "max_bits": res.max_message_bits, "init_rounds": init_rounds, "init_palette": lam_palette,
                  "violations": len(check_legal(graph, col))},
        bounds={"palette": (delta + 1, "D+1"), "violations": (0, "legal"),
                "rounds": (init_rounds + tau, "T_init + tau(i,D)")},
        constants={"c_palette": c_palette, "c_time": c_time, "c": c},
    )
    return col, res, report


# --------------------------------------------------------------------------
# Color/time tradeoff

# palette <= TRADEOFF_K * D * t; each defective step of the nested branch can
# leave a class degree near D, so the constant is 2 / eps (for eps = 1/4)
TRADEOFF_K = 8


def _class_coloring(net, group, bound, lam, lam_palette, eps):
    """Per-class legal (bound + 1)-coloring, reusing the global legal coloring lam."""
    fam = build_family(max(bound, 1), lam_palette)
    if fam.ground_size < lam_palette:
        lam = recolor_phase(net, group, lam, fam, window=1)
        lam_palette = fam.ground_size
    return delta_phase(net, group, bound, default_depth(bound), lam, lam_palette, eps)


def tradeoff_color(graph: Graph, t: int, eps=DEFAULT_EPS, backend=None, order=None, trace=False,
                   max_rounds: int | None = None) -> tuple[Coloring, RunResult]:
    """An O(D * t)-coloring in O(D / t) rounds after the initial coloring."""
    eps = as_fraction(eps)
    delta = graph.max_degree
    net = Network(graph, backend=backend, order=order, trace=trace, max_rounds=max_rounds)
    if delta == 0:
        ones = np.ones(graph.n, dtype=np.int64)
        return Coloring(ones, 1, 0, {"algorithm": "tradeoff", "t": t}), net.result(ones.tolist())
    t_max = floor_power(delta, 1 - eps)
    if not 1 < t <= t_max:
        raise InvalidParameters(f"t must satisfy 1 < t <= floor(D^(1-eps)) = {t_max}, got t={t}")
    lam, lam_palette, _ = linial_phase(net)
    init_rounds = net.clock
    group = np.zeros(graph.n, dtype=np.int64)

    p = floor_power(min(t, delta // t), Fraction(1, 3)) if t ** 4 >= delta else 0
    levels = []
    if p >= 2:
        branch = "nested"
        q = min(t, delta // t)
        nest = 0
        while p ** (nest + 1) <= t:
            nest += 1
        steps = [p] * nest
        last = -(-t // p ** nest)
        if last > 1:
            steps.append(last)
    else:
        branch = "single"
        q = floor_power(delta, Fraction(3, 4))
        steps = [t]
    bound, classes = delta, 1
    # cls is the mixed-radix class index each vertex computes locally
    cls = np.zeros(graph.n, dtype=np.int64)
    for ps in steps:
        qs = max(q, ps * ps + 1)
        phi, sched, bound_next = defective_phase(net, group, lam, lam_palette, ps, qs, bound, tag="defective")
        group = split_groups(group, phi)
        cls = cls * ps * ps + (phi - 1)
        levels.append({"p": ps, "q": qs, "iterations": sched.iterations, "class_bound": bound_next})
        bound = bound_next
        classes *= ps * ps
    inner = _class_coloring(net, group, bound, lam, lam_palette, eps)
    out = inner + (bound + 1) * cls
    palette = classes * (bound + 1)
    col = Coloring(out, palette, 0, {"algorithm": "tradeoff", "t": t, "branch": branch, "levels": levels,
                                     "K": palette / (delta * t), "init_rounds": init_rounds})
    return col, net.result(out.tolist())


# --------------------------------------------------------------------------
# MIS from a legal coloring


@dataclass
class MisResult:
    members: np.ndarray  # bool per vertex (index v - 1)
    rounds: int
    run: RunResult | None = None

    @property
    def member_set(self) -> set[int]:
        return {int(v) + 1 for v in np.flatnonzero(self.members)}


def mis_phase(net: Network, colors: np.ndarray, palette: int) -> np.ndarray:
    ph = net.phase("mis")
    state = np.zeros(net.n, dtype=np.int64)
    top = int(colors.max()) if net.n else 0
    for c in range(1, min(top, palette) + 1):
        joined_ann = state == 1
        acted = net.kernels.mis(ph, colors, c, joined_ann, state)
        ph.emit(acted, TAG_BITS + value_bits_array(state == 1))
    ph.close()
    return state == 1


class MisProgram(VertexProgram):
    """Vertices of color c decide in round c and announce the decision. params: ``colors``."""

    def init(self, vertex, neighbors, n, max_degree, params):
        return {"vertex": vertex, "color": int(params["colors"][vertex - 1]), "peers": neighbors,
                "joined_nbr": False, "state": 0}

    def step(self, round_no, state, inbox):
        st = dict(state)
        st["joined_nbr"] = st["joined_nbr"] or any(m.payload[0] == 1 for m in inbox)
        if round_no != st["color"]:
            return st, {}, None
        st["state"] = 2 if st["joined_nbr"] else 1
        msg = Message(st["vertex"], "mis", (1 if st["state"] == 1 else 0,))
        return st, {u: msg for u in st["peers"]}, st["state"] == 1

    def finished(self, state):
        return state["state"] != 0

    def state_tag(self, state):
        return "mis"


def _check_mis_input(graph: Graph, coloring: Coloring):
    if check_legal(graph, coloring):
        raise PreconditionError("MIS needs a legal coloring as input")


def mis_from_coloring(graph: Graph, coloring: Coloring, backend=None, order=None, trace=False) -> MisResult:
    _check_mis_input(graph, coloring)
    net = Network(graph, backend=backend, order=order, trace=trace)
    members = mis_phase(net, np.asarray(coloring.colors, dtype=np.int64), coloring.palette)
    res = net.result(members.astype(int).tolist())
    return MisResult(members, res.rounds_used, res)


def mis_reference(graph: Graph, coloring: Coloring, order=None, trace=False) -> MisResult:
    """:func:`mis_from_coloring` through the per-vertex engine."""
    _check_mis_input(graph, coloring)
    res = run(graph, MisProgram(), {"colors": np.asarray(coloring.colors)}, order=order, trace=trace)
    members = np.array([bool(o) for o in res.outputs])
    res.outputs = members.astype(int).tolist()
    return MisResult(members, res.rounds_used, res)
