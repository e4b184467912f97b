"""Lock-step synchronous message passing.

Two execution paths share one timing convention:

* :func:`run` drives per-vertex :class:`VertexProgram` objects. In round R every
  unfinished vertex calls ``step`` with the messages sent to it in round R - 1
  and returns the messages it sends in round R. Rounds after the last one in
  which anything was sent only read older messages; they are local
  computation and are not counted.
* :class:`Network` / :class:`Phase` account for the array kernels in
  :mod:`deltacolor.kernels`, which simulate whole rounds at once.

Message size is measured from values: each payload entry x costs
ceil(log2(x + 2)) bits, plus ``TAG_BITS`` for the tag.
"""

from __future__ import annotations

import csv
import io
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from ._accel import default_backend
from .errors import NonTerminationError, ProtocolError
from .graphcore import Graph
from .kernels import Kernels

TAG_BITS = 2
# max_message_bits <= BITS_CONSTANT * ceil(log2 n) for every algorithm in the package
BITS_CONSTANT = 8
TRACE_HEADER = ("round", "vertex", "tag", "sent", "bits")


def value_bits(x: int) -> int:
    return (int(x) + 1).bit_length()


def value_bits_array(x: np.ndarray) -> np.ndarray:
    """Vectorized ``value_bits`` (exact integer bit length of x + 1)."""
    x = np.asarray(x, dtype=np.int64) + 1
    out = np.zeros(x.shape, dtype=np.int64)
    while True:
        nz = x > 0
        if not nz.any():
            return out
        out += nz
        x = x >> 1


@dataclass(frozen=True)
class Message:
    source: int
    tag: str
    payload: tuple[int, ...] = ()

    def __post_init__(self):
        if any(int(x) < 0 for x in self.payload):
            raise ValueError("message payload entries must be nonnegative integers")

    @property
    def bits(self) -> int:
        return TAG_BITS + sum(value_bits(x) for x in self.payload)


class VertexProgram(ABC):
    """Behaviour of a single vertex.

    ``step`` must be a pure function of its arguments. It returns
    ``(state, outgoing, output)`` where ``outgoing`` maps neighbor ids to
    messages and ``output`` is ``None`` or the vertex's latest output record.
    """

    @abstractmethod
    def init(self, vertex: int, neighbors: tuple[int, ...], n: int, max_degree: int, params: dict) -> Any:
        ...

    @abstractmethod
    def step(self, round_no: int, state: Any, inbox: list[Message]):
        ...

    @abstractmethod
    def finished(self, state: Any) -> bool:
        ...

    def state_tag(self, state: Any) -> str:
        return type(self).__name__


def broadcast(message: Message, neighbors: Iterable[int]) -> dict[int, Message]:
    return {u: message for u in neighbors}


@dataclass
class RunResult:
    rounds_used: int
    messages_sent: int
    max_message_bits: int
    outputs: list = field(default_factory=list)
    halted: bool = True
    trace: list | None = field(default=None, repr=False)

    def trace_csv(self) -> str:
        return trace_to_csv(self.trace or [])


def trace_to_csv(rows: Sequence[tuple]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def run(graph: Graph, program: VertexProgram, params: dict | None = None, max_rounds: int = 100_000,
        order: Sequence[int] | None = None, trace: bool = False, strict: bool = True) -> RunResult:
    """Execute ``program`` on every vertex of ``graph`` in lock-step rounds.

    ``order`` permutes the sequence in which vertices are stepped inside a
    round; it cannot influence the result. With ``strict`` a run that has not
    halted after ``max_rounds`` rounds raises :class:`NonTerminationError`.
    """
    if max_rounds < 0:
        raise ValueError("max_rounds must be nonnegative")
    params = params or {}
    n, delta = graph.n, graph.max_degree
    visit = list(order) if order is not None else list(range(1, n + 1))
    if sorted(visit) != list(range(1, n + 1)):
        raise ValueError("order must be a permutation of the vertex ids")
    nbrs = {v: graph.neighbors(v) for v in range(1, n + 1)}
    nbr_sets = {v: frozenset(ns) for v, ns in nbrs.items()}
    states = {v: program.init(v, nbrs[v], n, delta, params) for v in visit}
    outputs: dict[int, Any] = {v: None for v in visit}
    inboxes: dict[int, list[Message]] = {v: [] for v in visit}
    messages = max_bits = 0
    steps = last_send = 0
    rows: list | None = [] if trace else None

    while True:
        live = [v for v in visit if not program.finished(states[v])]
        if not live:
            break
        if steps > max_rounds:
            result = RunResult(last_send, messages, max_bits,
                               [outputs[v] for v in range(1, n + 1)], False, rows)
            if strict:
                raise NonTerminationError(
                    f"{len(live)} vertices still running after {max_rounds} rounds", result)
            return result
        steps += 1
        next_inbox: dict[int, list[Message]] = {v: [] for v in visit}
        sent_this_round = 0
        for v in live:
            state, outgoing, output = program.step(steps, states[v], inboxes[v])
            states[v] = state
            if output is not None:
                outputs[v] = output
            bits_v = 0
            for u, msg in (outgoing or {}).items():
                if u not in nbr_sets[v]:
                    raise ProtocolError(f"vertex {v} addressed non-neighbor {u} in round {steps}")
                if msg.source != v:
                    raise ProtocolError(f"vertex {v} forged a message from {msg.source}")
                next_inbox[u].append(msg)
                bits_v += msg.bits
                max_bits = max(max_bits, msg.bits)
            k = len(outgoing or {})
            sent_this_round += k
            if rows is not None and k:
                rows.append((steps, v, program.state_tag(state), k, bits_v))
        for box in next_inbox.values():
            box.sort(key=lambda m: (m.source, m.tag, m.payload))
        inboxes = next_inbox
        messages += sent_this_round
        if sent_this_round:
            last_send = steps

    if rows is not None:
        rows.sort()
    rounds = last_send
    if rounds > max_rounds:
        raise NonTerminationError(f"run needed {rounds} rounds, above max_rounds={max_rounds}")
    return RunResult(rounds, messages, max_bits, [outputs[v] for v in range(1, n + 1)], True, rows)


# --------------------------------------------------------------------------
# Array path


class Network:
    """Round clock, message accounting and kernel dispatch for one simulated run.

    Composite procedures advance ``clock`` by globally known per-phase
    windows, so parallel invocations on disjoint vertex groups stay in
    lock-step.
    """

    def __init__(self, graph: Graph, backend: str | None = None, order: str | Sequence[int] | None = None,
                 trace: bool = False, max_rounds: int | None = None):
        self.graph = graph
        self.n = graph.n
        self.indptr = graph.indptr
        self.indices = graph.indices
        self.kernels = Kernels(backend or default_backend())
        if order is None or (isinstance(order, str) and order == "natural"):
            self.order = np.arange(self.n, dtype=np.int64)
        elif isinstance(order, str) and order == "reverse":
            self.order = np.arange(self.n - 1, -1, -1, dtype=np.int64)
        elif isinstance(order, str):
            raise ValueError(f"unknown vertex order {order!r}")
        else:
            self.order = np.asarray(order, dtype=np.int64) - 1
            if sorted(self.order.tolist()) != list(range(self.n)):
                raise ValueError("order must be a permutation of the vertex ids")
        self.clock = 0
        self.messages = 0
        self.max_bits = 0
        self.trace = [] if trace else None
        self.max_rounds = max_rounds
        self.log: list[dict] = []

    @property
    def backend(self) -> str:
        return self.kernels.backend

    def phase(self, tag: str, group: np.ndarray | None = None) -> "Phase":
        return Phase(self, tag, group)

    def result(self, outputs=None) -> RunResult:
        if self.max_rounds is not None and self.clock > self.max_rounds:
            raise NonTerminationError(f"run needed {self.clock} rounds, above max_rounds={self.max_rounds}")
        rows = sorted(self.trace) if self.trace is not None else None
        return RunResult(self.clock, self.messages, self.max_bits,
                         list(outputs) if outputs is not None else [], True, rows)


class Phase:
    """One procedure invocation (possibly many in parallel, one per group)."""

    def __init__(self, net: Network, tag: str, group: np.ndarray | None):
        self.net = net
        self.tag = tag
        self.indptr = net.indptr
        self.indices = net.indices
        self.order = net.order
        if group is None:
            group = np.zeros(net.n, dtype=np.int64)
        self.group = np.ascontiguousarray(group, dtype=np.int64)
        self.steps = 0
        self.last_send = 0
        self._edges = None
        self._deg = None

    def edges(self):
        """Directed same-group edges (receiver, neighbor), 0-based."""
        if self._edges is None:
            src = np.repeat(np.arange(self.net.n, dtype=np.int64), np.diff(self.indptr))
            dst = self.indices
            g = self.group
            keep = (g[src] >= 0) & (g[src] == g[dst])
            self._edges = (src[keep], dst[keep])
        return self._edges

    def degree(self) -> np.ndarray:
        if self._deg is None:
            src, _ = self.edges()
            self._deg = np.bincount(src, minlength=self.net.n)
        return self._deg

    def emit(self, senders: np.ndarray, bits: np.ndarray | int) -> None:
        """Close one round: every vertex in ``senders`` broadcasts to its group neighbors."""
        self.steps += 1
        net = self.net
        senders = senders & (self.group >= 0)
        deg = self.degree()
        fan = np.where(senders, deg, 0)
        count = int(fan.sum())
        net.messages += count
        if count:
            self.last_send = self.steps
            bits = np.broadcast_to(np.asarray(bits, dtype=np.int64), fan.shape)
            net.max_bits = max(net.max_bits, int(bits[fan > 0].max()))
            if net.trace is not None:
                rnd = net.clock + self.steps
                for v in np.flatnonzero(fan).tolist():
                    net.trace.append((rnd, v + 1, self.tag, int(fan[v]), int(fan[v] * bits[v])))

    def silent(self) -> None:
        """A round in which nothing is sent."""
        self.steps += 1

    @property
    def rounds(self) -> int:
        return self.last_send

    def close(self, window: int | None = None) -> int:
        """Advance the network clock by ``window`` (or the rounds actually used)."""
        used = self.rounds
        if window is not None and used > window:
            raise NonTerminationError(f"{self.tag}: used {used} rounds, schedule window is {window}")
        advance = used if window is None else window
        self.net.clock += advance
        self.net.log.append({"phase": self.tag, "rounds": used, "window": advance})
        return used


def split_groups(group: np.ndarray, key: np.ndarray) -> np.ndarray:
    """Refine ``group`` by ``key``: equal (group, key) pairs share a new id, inactive stays -1."""
    group = np.asarray(group, dtype=np.int64)
    out = np.full(group.shape, -1, dtype=np.int64)
    act = group >= 0
    if act.any():
        pairs = np.stack([group[act], np.asarray(key, dtype=np.int64)[act]], axis=1)
        _, inv = np.unique(pairs, axis=0, return_inverse=True)
        out[act] = inv.reshape(-1)
    return out

