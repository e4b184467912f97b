"""Cover-free set families from low-degree polynomials, and the palette reductions built on them.

The family for (A, k) uses the smallest d >= 1 such that q = next_prime(A * d)
satisfies q ** (d + 1) >= k. Set number s (1-based) is the graph of the
polynomial over GF(q) whose coefficients are the base-q digits of s - 1:

    set(s) = { a * q + P_s(a) + 1 : a in 0..q-1 }  inside 1..q*q

Two distinct polynomials of degree <= d agree on at most d points, so A other
sets cover at most A * d < q points of any set.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coloring import Coloring
from .engine import TAG_BITS, Message, Network, RunResult, VertexProgram, run, value_bits_array
from .errors import EmptyChoiceError, InvalidParameters, PreconditionError
from .graphcore import Graph, next_prime

INT_LIMIT = 2 ** 62


@dataclass(frozen=True)
class CoverFreeFamily:
    A: int
    d: int
    q: int
    k: int

    @property
    def ground_size(self) -> int:
        return self.q * self.q

    @property
    def set_count(self) -> int:
        return self.q ** (self.d + 1)

    def coefficients(self, index) -> np.ndarray:
        """Base-q digits (lowest first) of index - 1, shape (..., d + 1)."""
        idx = np.asarray(index, dtype=np.int64) - 1
        if idx.size and (idx.min() < 0 or idx.max() >= min(self.set_count, INT_LIMIT)):
            raise InvalidParameters(f"set index out of range 1..{self.set_count}")
        digits = np.empty(idx.shape + (self.d + 1,), dtype=np.int64)
        rest = idx.copy()
        for j in range(self.d + 1):
            digits[..., j] = rest % self.q
            rest //= self.q
        return digits

    def evaluate(self, index) -> np.ndarray:
        """Table of P_s(a) for every requested index s and every point a, shape (..., q)."""
        coef = self.coefficients(index)
        a = np.arange(self.q, dtype=np.int64)
        out = np.zeros(coef.shape[:-1] + (self.q,), dtype=np.int64)
        # Horner from the top coefficient
        for j in range(self.d, -1, -1):
            out = (out * a + coef[..., j, None]) % self.q
        return out

    def set(self, index: int) -> tuple[int, ...]:
        ev = self.evaluate(np.array([index]))[0]
        return tuple(int(a * self.q + v + 1) for a, v in enumerate(ev.tolist()))

    def sets(self, count: int | None = None) -> list[tuple[int, ...]]:
        count = self.set_count if count is None else count
        ev = self.evaluate(np.arange(1, count + 1))
        base = np.arange(self.q, dtype=np.int64) * self.q + 1
        return [tuple(row.tolist()) for row in ev + base]

    def to_text(self, count: int | None = None) -> str:
        """Debug export: a header line, then one set per line."""
        lines = [f"# A={self.A} d={self.d} q={self.q} ground={self.ground_size} sets={self.set_count}"]
        lines += [" ".join(map(str, s)) for s in self.sets(count)]
        return "\n".join(lines) + "\n"


@lru_cache(maxsize=256)
def build_family(A: int, k: int) -> CoverFreeFamily:
    if A < 1 or k < 1:
        raise InvalidParameters(f"family needs A >= 1 and k >= 1, got A={A}, k={k}")
    d = 1
    while True:
        q = next_prime(A * d)
        if q * q > INT_LIMIT:
            raise OverflowError(f"ground set of size {q}^2 does not fit in 64-bit integers")
        if q ** (d + 1) >= k:
            return CoverFreeFamily(A=A, d=d, q=q, k=k)
        d += 1


# --------------------------------------------------------------------------
# One-round recoloring


def _check_input(family: CoverFreeFamily, colors: np.ndarray, active: np.ndarray) -> None:
    if active.any() and colors[active].max() > family.set_count:
        raise PreconditionError(
            f"input color {int(colors[active].max())} exceeds the family's {family.set_count} sets "
            f"(A={family.A}); the degree bound is too small for this palette")


def recolor_phase(net: Network, group: np.ndarray, colors: np.ndarray, family: CoverFreeFamily,
                  window: int | None = None) -> np.ndarray:
    """Array form of :class:`OneRoundRecolor`. Returns new colors, 0 outside the groups."""
    ph = net.phase("recolor", group)
    active = ph.group >= 0
    colors = np.asarray(colors, dtype=np.int64)
    _check_input(family, colors, active)
    ph.emit(active, TAG_BITS + value_bits_array(colors))
    evals = family.evaluate(np.where(active, colors, 1))
    out = net.kernels.recolor(ph, evals, family.q)
    if (out[active] < 0).any():
        v = int(np.flatnonzero(active & (out < 0))[0]) + 1
        raise EmptyChoiceError(f"vertex {v}: every point of its set is covered by neighbors "
                               f"(degree above A={family.A} or input not legal)")
    ph.close(window)
    return out


class OneRoundRecolor(VertexProgram):
    """Send the current color once, then take the least uncovered element of the own set.

    params: ``family``, ``colors`` (1-based vertex -> color) and optionally
    ``group`` (0-based array, -1 = not taking part).
    """

    def init(self, vertex, neighbors, n, max_degree, params):
        group = params.get("group")
        g = 0 if group is None else int(group[vertex - 1])
        if g < 0:
            return {"done": True, "color": 0}
        peers = tuple(u for u in neighbors if group is None or group[u - 1] == g)
        return {"done": False, "vertex": vertex, "peers": peers, "color": int(params["colors"][vertex - 1]),
                "family": params["family"], "sent": False}

    def step(self, round_no, state, inbox):
        fam: CoverFreeFamily = state["family"]
        if not state["sent"] and state["peers"]:
            msg = Message(state["vertex"], "color", (state["color"],))
            return {**state, "sent": True}, {u: msg for u in state["peers"]}, None
        mine = fam.set(state["color"])
        covered = set()
        for m in inbox:
            covered.update(fam.set(m.payload[0]))
        free = [x for x in mine if x not in covered]
        if not free:
            raise EmptyChoiceError(f"vertex {state['vertex']}: no free element left")
        return {**state, "done": True, "color": free[0]}, {}, free[0]

    def finished(self, state):
        return state["done"]

    def state_tag(self, state):
        return "recolor"


def one_round_recolor(graph: Graph, family: CoverFreeFamily, colors, members=None, backend=None,
                      order=None, trace=False):
    """Recolor the subgraph induced by ``members`` (default: all) in one round.

    Returns the new colors (0 for non-members) and the RunResult.
    """
    colors = np.asarray(colors, dtype=np.int64)
    group = _member_group(graph.n, members)
    net = Network(graph, backend=backend, order=order, trace=trace)
    out = recolor_phase(net, group, colors, family)
    return out, net.result(out.tolist())


def one_round_recolor_reference(graph: Graph, family: CoverFreeFamily, colors, members=None,
                                order=None, trace=False):
    """Same as :func:`one_round_recolor`, through the per-vertex engine."""
    colors = np.asarray(colors, dtype=np.int64)
    group = _member_group(graph.n, members)
    _check_input(family, colors, group >= 0)
    res = run(graph, OneRoundRecolor(), {"family": family, "colors": colors, "group": group},
              order=order, trace=trace)
    out = np.array([0 if o is None else o for o in res.outputs], dtype=np.int64)
    return out, res


def _member_group(n: int, members) -> np.ndarray:
    if members is None:
        return np.zeros(n, dtype=np.int64)
    flag = np.asarray(members)
    if flag.dtype == bool:
        return np.where(flag, 0, -1).astype(np.int64)
    group = np.full(n, -1, dtype=np.int64)
    group[np.asarray(list(members), dtype=np.int64) - 1] = 0
    return group


# --------------------------------------------------------------------------
# Initial coloring from identifiers


def linial_phase(net: Network, group: np.ndarray | None = None):
    """Repeated one-round recoloring starting from the vertex ids.

    Returns (colors, palette, palette sequence). Stops as soon as the next
    family's ground set would not be smaller than the current palette.
    """
    graph = net.graph
    n, delta = graph.n, graph.max_degree
    colors = np.arange(1, n + 1, dtype=np.int64)
    palette = max(n, 1)
    seq = [palette]
    if delta == 0:
        colors[:] = 1
        return colors, 1, seq + [1]
    A = delta
    while True:
        fam = build_family(A, palette)
        if fam.ground_size >= palette:
            break
        colors = recolor_phase(net, group if group is not None else np.zeros(n, dtype=np.int64), colors, fam)
        palette = fam.ground_size
        seq.append(palette)
    return colors, palette, seq


# Additive slack in linial rounds <= log_star(n) + LINIAL_ROUND_SLACK
LINIAL_ROUND_SLACK = 2


def linial_coloring(graph: Graph, backend=None, order=None, trace=False) -> tuple[Coloring, RunResult]:
    net = Network(graph, backend=backend, order=order, trace=trace)
    colors, palette, seq = linial_phase(net)
    delta = graph.max_degree
    c = palette / (delta * delta) if delta else float(palette)
    col = Coloring(colors, palette, 0, {"palette_sequence": seq, "c": c, "algorithm": "linial"})
    return col, net.result(colors.tolist())

