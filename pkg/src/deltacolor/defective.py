"""Defective colorings: the two-stage refinement and the iterated palette shrinking built on it.

Refinement takes an m-defective chi-coloring phi and a target p. Each vertex
picks psi in 1..p once every neighbor with a smaller phi has picked, and Psi
once every neighbor with a larger phi has picked, each time the least used
value among those neighbors (ties to the smallest). The result
(Psi - 1) * p + psi has at most p * p colors and defect at most m + floor(D / p).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coloring import Coloring
from .engine import TAG_BITS, Message, Network, RunResult, VertexProgram, run, split_groups, value_bits_array
from .errors import InvalidParameters, PreconditionError
from .graphcore import Graph


def same_group_edges(graph: Graph, group: np.ndarray):
    src = np.repeat(np.arange(graph.n, dtype=np.int64), np.diff(graph.indptr))
    dst = graph.indices
    keep = (group[src] >= 0) & (group[src] == group[dst])
    return src[keep], dst[keep]


def group_defect(graph: Graph, group: np.ndarray, colors: np.ndarray) -> int:
    """Largest number of same-group, same-color neighbors of any vertex."""
    src, dst = same_group_edges(graph, group)
    hit = colors[src] == colors[dst]
    if not hit.any():
        return 0
    return int(np.bincount(src[hit], minlength=graph.n).max())


def refine_phase(net: Network, group: np.ndarray, phi: np.ndarray, p: int, window: int | None = None,
                 tag: str = "refine"):
    """Array form of :class:`RefineProgram`. Returns (psi, Psi) arrays, 0 outside the groups."""
    ph = net.phase(tag, group)
    active = ph.group >= 0
    phi = np.ascontiguousarray(phi, dtype=np.int64)
    lo = np.zeros(net.n, dtype=np.int64)
    hi = np.zeros(net.n, dtype=np.int64)
    if not active.any():
        ph.close(window)
        return lo, hi
    ann_lo, ann_hi = lo.copy(), hi.copy()
    net.kernels.refine(ph, phi, p, ann_lo, ann_hi, lo, hi, False)
    ph.emit(active, TAG_BITS + value_bits_array(phi))
    while ((lo == 0) | (hi == 0))[active].any():
        ann_lo, ann_hi = lo.copy(), hi.copy()
        net.kernels.refine(ph, phi, p, ann_lo, ann_hi, lo, hi, True)
        new_lo = np.where(ann_lo == 0, lo, 0)
        new_hi = np.where(ann_hi == 0, hi, 0)
        sender = (new_lo > 0) | (new_hi > 0)
        ph.emit(sender, TAG_BITS + value_bits_array(new_lo) + value_bits_array(new_hi))
    ph.close(window)
    return lo, hi


class RefineProgram(VertexProgram):
    """Per-vertex refinement. params: ``phi`` (vertex -> color), ``p``, optional ``group``."""

    def init(self, vertex, neighbors, n, max_degree, params):
        group = params.get("group")
        g = 0 if group is None else int(group[vertex - 1])
        if g < 0:
            return {"done": True}
        peers = tuple(u for u in neighbors if group is None or group[u - 1] == g)
        return {"done": False, "vertex": vertex, "phi": int(params["phi"][vertex - 1]), "p": params["p"],
                "peers": peers, "smaller": None, "larger": None, "lo": 0, "hi": 0, "ann_lo": {}, "ann_hi": {}}

    def _pick(self, p, values):
        counts = [0] * p
        for a in values:
            counts[a - 1] += 1
        return counts.index(min(counts)) + 1

    def step(self, round_no, state, inbox):
        st = dict(state)
        me = st["vertex"]
        if round_no == 1:
            if not st["peers"]:
                st.update(lo=1, hi=1, done=True)
                return st, {}, (1, 1)
            msg = Message(me, "phi", (st["phi"],))
            return st, {u: msg for u in st["peers"]}, None
        ann_lo, ann_hi = dict(st["ann_lo"]), dict(st["ann_hi"])
        if round_no == 2:
            phis = {m.source: m.payload[0] for m in inbox}
            st["smaller"] = tuple(u for u in st["peers"] if phis[u] < st["phi"])
            st["larger"] = tuple(u for u in st["peers"] if phis[u] > st["phi"])
        else:
            for m in inbox:
                if m.payload[0]:
                    ann_lo[m.source] = m.payload[0]
                if m.payload[1]:
                    ann_hi[m.source] = m.payload[1]
        st["ann_lo"], st["ann_hi"] = ann_lo, ann_hi
        new_lo = new_hi = 0
        if not st["lo"] and all(u in ann_lo for u in st["smaller"]):
            new_lo = self._pick(st["p"], [ann_lo[u] for u in st["smaller"]])
        if not st["hi"] and all(u in ann_hi for u in st["larger"]):
            new_hi = self._pick(st["p"], [ann_hi[u] for u in st["larger"]])
        st["lo"] = st["lo"] or new_lo
        st["hi"] = st["hi"] or new_hi
        st["done"] = bool(st["lo"] and st["hi"])
        out = {}
        if new_lo or new_hi:
            msg = Message(me, "decision", (new_lo, new_hi))
            out = {u: msg for u in st["peers"]}
        return st, out, (st["lo"], st["hi"]) if st["done"] else None

    def finished(self, state):
        return state["done"]

    def state_tag(self, state):
        return "refine"


def combine(lo: np.ndarray, hi: np.ndarray, p: int) -> np.ndarray:
    return np.where(lo > 0, (hi - 1) * p + lo, 0)


def refine_violations(graph: Graph, group: np.ndarray, phi, lo, hi, p: int) -> list[tuple[int, str, int, int]]:
    """Vertices breaking the per-stage pigeonhole count.

    For each v: |{u in S(v): psi(u) = psi(v)}| <= floor(|S(v)| / p), and the
    same for the larger-phi neighbors and Psi. Entries are (vertex, stage, count, limit).
    """
    src, dst = same_group_edges(graph, np.asarray(group, dtype=np.int64))
    phi, lo, hi = (np.asarray(a) for a in (phi, lo, hi))
    bad = []
    for name, side, val in (("smaller", phi[dst] < phi[src], lo), ("larger", phi[dst] > phi[src], hi)):
        size = np.bincount(src[side], minlength=graph.n)
        same = np.bincount(src[side & (val[dst] == val[src])], minlength=graph.n)
        for v in np.flatnonzero(same > size // p).tolist():
            bad.append((v + 1, name, int(same[v]), int(size[v] // p)))
    return bad


def _refine_inputs(graph: Graph, phi, p: int, m, members):
    if p < 1:
        raise InvalidParameters(f"refine needs p >= 1, got p={p}")
    phi = np.asarray(phi, dtype=np.int64)
    if phi.shape != (graph.n,) or (graph.n and phi.min() < 1):
        raise InvalidParameters("phi must assign a positive color to every vertex")
    group = np.zeros(graph.n, dtype=np.int64) if members is None else np.where(np.asarray(members, bool), 0, -1)
    measured = group_defect(graph, group, phi)
    if m is None:
        m = measured
    elif measured > m:
        raise PreconditionError(f"input defect {measured} exceeds the declared bound m={m}")
    return phi, group, m


def _refine_result(graph, group, phi, p, m, lo, hi, res):
    src, _ = same_group_edges(graph, group)
    sub_delta = int(np.bincount(src, minlength=graph.n).max()) if graph.n else 0
    chi = int(phi.max()) if graph.n else 0
    colors = np.where(group >= 0, combine(lo, hi, p), 1)
    col = Coloring(colors, p * p, m + sub_delta // p,
                   {"algorithm": "refine", "chi": chi, "sub_delta": sub_delta, "psi": lo, "Psi": hi})
    return col, res


def refine(graph: Graph, phi, p: int, m: int | None = None, members=None, backend=None, order=None,
           trace=False) -> tuple[Coloring, RunResult]:
    """Refine an m-defective coloring ``phi`` to at most p * p colors.

    ``m`` defaults to the measured defect of phi; a declared m below the
    measured defect is rejected before anything runs.
    """
    phi, group, m = _refine_inputs(graph, phi, p, m, members)
    net = Network(graph, backend=backend, order=order, trace=trace)
    lo, hi = refine_phase(net, group, phi, p)
    return _refine_result(graph, group, phi, p, m, lo, hi, net.result(combine(lo, hi, p).tolist()))


def refine_reference(graph: Graph, phi, p: int, m: int | None = None, members=None, order=None, trace=False):
    """:func:`refine` through the per-vertex engine."""
    phi, group, m = _refine_inputs(graph, phi, p, m, members)
    res = run(graph, RefineProgram(), {"phi": phi, "p": p, "group": group}, order=order, trace=trace)
    lo = np.array([o[0] if o else 0 for o in res.outputs], dtype=np.int64)
    hi = np.array([o[1] if o else 0 for o in res.outputs], dtype=np.int64)
    res.outputs = combine(lo, hi, p).tolist()
    return _refine_result(graph, group, phi, p, m, lo, hi, res)


# --------------------------------------------------------------------------
# Iterated shrinking


@dataclass(frozen=True)
class DefectiveSchedule:
    """Globally computable plan of one defective-coloring invocation."""

    p: int
    q: int
    chi: tuple[int, ...]  # palette bound before each iteration, then the final one
    windows: tuple[int, ...]  # round budget of each refinement

    @property
    def iterations(self) -> int:
        return len(self.windows)

    @property
    def rounds(self) -> int:
        return sum(self.windows)


def defective_schedule(chi0: int, p: int, q: int) -> DefectiveSchedule:
    if p < 1 or p * p >= q:
        raise InvalidParameters(f"defective coloring needs 1 <= p and p^2 < q, got p={p}, q={q}")
    chi, seq, windows = chi0, [chi0], []
    while chi > p * p:
        if chi < q:
            width = chi
        else:
            width = chi - (chi // q - 1) * q
        windows.append(width + 1)
        chi = max(chi // q, 1) * p * p
        seq.append(chi)
    return DefectiveSchedule(p, q, tuple(seq), tuple(windows))


def defect_after(iterations: int, degree_bound: int, p: int) -> int:
    """Defect bound after the given number of refinements, starting from a legal coloring.

    A vertex with m same-colored neighbors has at most degree_bound - m others
    to split, so one refinement maps a defect of m to m + floor((degree_bound - m) / p).
    This is at most iterations * floor(degree_bound / p).
    """
    m = 0
    for _ in range(iterations):
        m = m + (degree_bound - m) // p
    return m


def defective_phase(net: Network, group: np.ndarray, phi: np.ndarray, chi0: int, p: int, q: int,
                    degree_bound: int, tag: str = "defective"):
    """Array form of the iterated shrinking on every group in parallel.

    ``phi`` must be legal inside each group with colors in 1..chi0. Returns
    (colors in 1..p*p, schedule, defect bound).
    """
    sched = defective_schedule(chi0, p, q)
    group = np.asarray(group, dtype=np.int64)
    active = group >= 0
    cur = np.where(active, phi, 1).astype(np.int64)
    src, dst = same_group_edges(net.graph, group)
    for it, window in enumerate(sched.windows):
        chi = sched.chi[it]
        if chi < q:
            j = np.ones(net.n, dtype=np.int64)
        else:
            j = np.minimum((cur + q - 1) // q, chi // q)
        psi = cur - (j - 1) * q
        sub = split_groups(group, j)
        lo, hi = refine_phase(net, sub, psi, p, window, tag=f"{tag}:{it + 1}")
        nxt = combine(lo, hi, p) + (j - 1) * p * p
        nxt = np.where(active, nxt, 1)
        cross = (j[src] != j[dst]) & (nxt[src] == nxt[dst])
        if cross.any():
            u, v = int(src[cross][0]) + 1, int(dst[cross][0]) + 1
            raise AssertionError(f"neighbors {u} and {v} in different classes got the same color")
        if active.any() and nxt[active].max() > sched.chi[it + 1]:
            raise AssertionError(f"iteration {it + 1}: palette {nxt[active].max()} above bound {sched.chi[it + 1]}")
        cur = nxt
    return cur, sched, defect_after(sched.iterations, degree_bound, p)


def defective_color(graph: Graph, p: int, q: int, initial: Coloring | None = None, backend=None,
                    order=None, trace=False) -> tuple[Coloring, RunResult]:
    """An (I * floor(D / p))-defective p^2-coloring of the whole graph.

    Without ``initial`` the legal starting coloring comes from
    :func:`deltacolor.palette.linial_coloring`, run inside the same simulation.
    """
    from .palette import linial_phase

    delta = graph.max_degree
    if not 1 <= p <= max(delta, 1):
        raise InvalidParameters(f"defective coloring needs 1 <= p <= max degree ({delta}), got p={p}")
    if p * p >= q:
        raise InvalidParameters(f"defective coloring needs p^2 < q, got p={p}, q={q}")
    net = Network(graph, backend=backend, order=order, trace=trace)
    group = np.zeros(graph.n, dtype=np.int64)
    if initial is None:
        phi, chi0, _ = linial_phase(net)
        init_rounds = net.clock
    else:
        if group_defect(graph, group, initial.colors):
            raise PreconditionError("the initial coloring must be legal")
        phi, chi0, init_rounds = np.asarray(initial.colors), initial.palette, 0
    colors, sched, bound = defective_phase(net, group, phi, chi0, p, q, delta)
    col = Coloring(colors, p * p, bound,
                   {"algorithm": "defective", "iterations": sched.iterations, "chi0": chi0,
                    "chi_sequence": list(sched.chi), "init_rounds": init_rounds})
    return col, net.result(colors.tolist())
