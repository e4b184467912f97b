"""Reduction of a legal m-coloring to D + 1 colors.

A stage splits the palette into consecutive blocks of 2 * (D + 1) colors. For
r = 1..D+1, the vertices whose in-block color is (D + 1) + r move to the
smallest in-block color in 1..D+1 not held by a neighbor in the same block.
Afterwards block b keeps only its lower half, so the colors are relabelled
to (b - 1) * (D + 1) + c and the palette roughly halves. Every vertex
broadcasts its color in every round.
"""

from __future__ import annotations

import math

import numpy as np

from .coloring import Coloring
from .engine import TAG_BITS, Message, Network, RunResult, VertexProgram, run, value_bits_array
from .errors import EmptyChoiceError, InvalidParameters, PreconditionError
from .graphcore import Graph


def stage_palette(m: int, span: int) -> int:
    """Palette bound after one stage on palette m with blocks of 2 * span colors."""
    blocks = -(-m // (2 * span))
    last = m - (blocks - 1) * 2 * span
    return (blocks - 1) * span + min(last, span)


def stage_palettes(m: int, span: int) -> list[int]:
    seq = [m]
    while seq[-1] > span:
        seq.append(stage_palette(seq[-1], span))
    return seq


def kw_rounds(m: int, span: int) -> int:
    return span * (len(stage_palettes(m, span)) - 1)


def kw_bound(m: int, delta: int) -> int:
    """(D + 1) * ceil(log2(m / (D + 1))), and 0 when m <= D + 1."""
    span = delta + 1
    if m <= span:
        return 0
    return span * math.ceil(math.log2(m / span))


def relabel(colors: np.ndarray, span: int) -> np.ndarray:
    width = 2 * span
    return ((colors - 1) // width) * span + (colors - 1) % width + 1


def kw_phase(net: Network, group: np.ndarray, colors: np.ndarray, delta: int, m: int,
             window: int | None = None, tag: str = "kw") -> np.ndarray:
    """Array form of :class:`KWProgram` on every group in parallel. Returns colors in 1..delta+1."""
    span = delta + 1
    ph = net.phase(tag, group)
    active = ph.group >= 0
    cur = np.where(active, colors, 1).astype(np.int64)
    if m <= span:
        ph.close(window)
        return cur
    stages = len(stage_palettes(m, span)) - 1
    ph.emit(active, TAG_BITS + value_bits_array(cur))
    for s in range(stages):
        for r in range(1, span + 1):
            cur = net.kernels.kw(ph, cur, span, r)
            if (cur[active] < 0).any():
                v = int(np.flatnonzero(active & (cur < 0))[0]) + 1
                raise EmptyChoiceError(f"vertex {v}: no free color in its block (degree above {delta}?)")
            if r == span:
                cur = np.where(active, relabel(cur, span), cur)
            if s < stages - 1 or r < span:
                ph.emit(active, TAG_BITS + value_bits_array(cur))
            else:
                ph.silent()
    ph.close(window)
    return cur


class KWProgram(VertexProgram):
    """Per-vertex block reduction. params: ``colors``, ``delta``, ``m``, optional ``group``."""

    def init(self, vertex, neighbors, n, max_degree, params):
        group = params.get("group")
        g = 0 if group is None else int(group[vertex - 1])
        span = params["delta"] + 1
        total = kw_rounds(params["m"], span) if params["m"] > span else 0
        if g < 0 or total == 0:
            return {"done": True, "color": int(params["colors"][vertex - 1]) if g >= 0 else 0}
        peers = tuple(u for u in neighbors if group is None or group[u - 1] == g)
        return {"done": False, "vertex": vertex, "color": int(params["colors"][vertex - 1]), "span": span,
                "total": total, "peers": peers}

    def step(self, round_no, state, inbox):
        st = dict(state)
        span, width = st["span"], 2 * st["span"]
        if round_no >= 2:
            idx = round_no - 2
            r = idx % span + 1
            c = st["color"]
            if (c - 1) % width + 1 == span + r:
                block = (c - 1) // width
                taken = {(m.payload[0] - 1) % width + 1 for m in inbox
                         if (m.payload[0] - 1) // width == block}
                free = [x for x in range(1, span + 1) if x not in taken]
                if not free:
                    raise EmptyChoiceError(f"vertex {st['vertex']}: no free color in its block")
                c = block * width + free[0]
            if r == span:
                c = int(relabel(np.int64(c), span))
            st["color"] = c
        if round_no > st["total"]:
            st["done"] = True
            return st, {}, st["color"]
        msg = Message(st["vertex"], "color", (st["color"],))
        return st, {u: msg for u in st["peers"]}, None

    def finished(self, state):
        return state["done"]

    def state_tag(self, state):
        return "kw"


def _check_legal_input(graph: Graph, colors: np.ndarray, m: int):
    if graph.n and (colors.min() < 1 or colors.max() > m):
        raise InvalidParameters(f"input colors must lie in 1..{m}")
    e = graph.edge_array()
    if len(e) and (colors[e[:, 0] - 1] == colors[e[:, 1] - 1]).any():
        raise PreconditionError("input coloring is not legal")


def kw_reduce(graph: Graph, coloring: Coloring, delta: int | None = None, backend=None, order=None,
              trace=False) -> tuple[Coloring, RunResult]:
    """Legal (delta + 1)-coloring from the legal ``coloring``; delta defaults to the max degree."""
    delta = graph.max_degree if delta is None else delta
    if delta < graph.max_degree:
        raise InvalidParameters(f"degree bound {delta} below the max degree {graph.max_degree}")
    colors = np.asarray(coloring.colors, dtype=np.int64)
    m = coloring.palette
    _check_legal_input(graph, colors, m)
    net = Network(graph, backend=backend, order=order, trace=trace)
    if m <= delta + 1:
        return coloring, net.result(colors.tolist())
    out = kw_phase(net, np.zeros(graph.n, dtype=np.int64), colors, delta, m)
    return Coloring(out, delta + 1, 0, {"algorithm": "kw", "m": m}), net.result(out.tolist())


def kw_reduce_reference(graph: Graph, coloring: Coloring, delta: int | None = None, order=None, trace=False):
    """:func:`kw_reduce` through the per-vertex engine."""
    delta = graph.max_degree if delta is None else delta
    colors = np.asarray(coloring.colors, dtype=np.int64)
    _check_legal_input(graph, colors, coloring.palette)
    res = run(graph, KWProgram(), {"colors": colors, "delta": delta, "m": coloring.palette},
              order=order, trace=trace)
    out = np.array([c if c is not None else colors[i] for i, c in enumerate(res.outputs)], dtype=np.int64)
    res.outputs = out.tolist()
    palette = delta + 1 if coloring.palette > delta + 1 else coloring.palette
    return Coloring(out, palette, 0, {"algorithm": "kw"}), res


def sequential_reduce(graph: Graph, coloring: Coloring, delta: int | None = None) -> tuple[Coloring, int]:
    """One color class per round: color delta+1+r recolors greedily in round r.

    Returns the coloring and the round count max(0, m - (delta + 1)).
    """
    delta = graph.max_degree if delta is None else delta
    span = delta + 1
    colors = [int(c) for c in coloring.colors]
    _check_legal_input(graph, np.asarray(colors, dtype=np.int64), coloring.palette)
    adj = graph.adjacency
    m = coloring.palette
    for c in range(span + 1, m + 1):
        movers = [v for v in range(graph.n) if colors[v] == c]
        for v in movers:
            taken = {colors[u - 1] for u in adj[v]}
            colors[v] = next(x for x in range(1, span + 1) if x not in taken)
    return Coloring(colors, min(m, span)), max(0, m - span)
