"""Graphs, deterministic generators, the edge-list format and a few integer utilities.

Vertices are identified by 1..n everywhere in the public API. Internally the
adjacency is kept as a CSR pair (``indptr``, ``indices``) with 0-based,
row-sorted neighbor indices so the round kernels can walk it directly.

Random generators draw from numpy's PCG64 bit generator seeded with the
64-bit ``seed`` of the spec; nothing else is consulted, so a spec always
produces the same graph.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import GraphFormatError, GraphInvariantError, InvalidParameters

GENERATOR_KINDS = ("cycle", "complete", "path", "star", "grid", "gnp", "regular")


class Graph:
    """Immutable simple undirected graph on vertices 1..n."""

    __slots__ = ("n", "indptr", "indices", "max_degree", "_edges")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = int(n)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False
        deg = np.diff(self.indptr)
        self.max_degree = int(deg.max()) if self.n else 0
        self._edges = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 0:
            raise GraphInvariantError(f"vertex count must be nonnegative, got {n}")
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size:
            if arr.min() < 1 or arr.max() > n:
                bad = arr[(arr < 1).any(axis=1) | (arr > n).any(axis=1)][0]
                raise GraphInvariantError(f"vertex id out of range 1..{n} in edge ({bad[0]}, {bad[1]})")
            loops = arr[:, 0] == arr[:, 1]
            if loops.any():
                v = int(arr[loops][0, 0])
                raise GraphInvariantError(f"self-loop at vertex {v}")
            lo = np.minimum(arr[:, 0], arr[:, 1])
            hi = np.maximum(arr[:, 0], arr[:, 1])
            key = lo * (n + 1) + hi
            uniq, counts = np.unique(key, return_counts=True)
            if (counts > 1).any():
                k = int(uniq[counts > 1][0])
                raise GraphInvariantError(f"duplicate edge ({k // (n + 1)}, {k % (n + 1)})")
            src = np.concatenate([lo, hi]) - 1
            dst = np.concatenate([hi, lo]) - 1
        else:
            src = dst = np.zeros(0, dtype=np.int64)
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, indptr, dst)

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.neighbors(v) for v in range(1, self.n + 1))

    def neighbors(self, v: int) -> tuple[int, ...]:
        row = self.indices[self.indptr[v - 1]:self.indptr[v]]
        return tuple(int(u) + 1 for u in row)

    def degree(self, v: int) -> int:
        return int(self.indptr[v] - self.indptr[v - 1])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edge_array(self) -> np.ndarray:
        """Canonical (m, 2) array of 1-based edges with u < v, sorted lexicographically."""
        if self._edges is None:
            src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
            keep = src < self.indices
            e = np.stack([src[keep] + 1, self.indices[keep] + 1], axis=1)
            e.flags.writeable = False
            self._edges = e
        return self._edges

    def edges(self) -> list[tuple[int, int]]:
        return [(int(u), int(v)) for u, v in self.edge_array()]

    def induced(self, members: Iterable[int]) -> "Graph":
        """Subgraph induced by ``members``, relabelled 1..k in increasing id order."""
        keep = sorted(set(members))
        relabel = {v: i + 1 for i, v in enumerate(keep)}
        sub = [(relabel[u], relabel[v]) for u, v in self.edges() if u in relabel and v in relabel]
        return Graph.from_edges(len(keep), sub)

    def check_invariants(self) -> None:
        """Full scan of the representation; raises GraphInvariantError on any violation."""
        n = self.n
        if len(self.indptr) != n + 1 or self.indptr[0] != 0:
            raise GraphInvariantError("malformed indptr")
        seen = set()
        for v in range(n):
            row = self.indices[self.indptr[v]:self.indptr[v + 1]]
            if len(row) and (row.min() < 0 or row.max() >= n):
                raise GraphInvariantError(f"vertex {v + 1} lists an out-of-range neighbor")
            if (np.diff(row) <= 0).any():
                raise GraphInvariantError(f"adjacency of {v + 1} not strictly sorted")
            if (row == v).any():
                raise GraphInvariantError(f"self-loop at vertex {v + 1}")
            for u in row:
                seen.add((v, int(u)))
        for v, u in seen:
            if (u, v) not in seen:
                raise GraphInvariantError(f"asymmetric adjacency between {v + 1} and {u + 1}")
        if self.max_degree != (int(np.diff(self.indptr).max()) if n else 0):
            raise GraphInvariantError("cached max degree is stale")

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m}, max_degree={self.max_degree})"


@dataclass(frozen=True)
class GraphSpec:
    """Recipe for a generated graph.

    ``n`` is the vertex count except for ``star`` (number of leaves, so the
    star has n + 1 vertices) and ``grid`` (rows; ``cols`` defaults to n).
    """

    kind: str
    n: int
    p: float | None = None
    d: int | None = None
    cols: int | None = None
    seed: int = 0

    def label(self) -> str:
        parts = [f"n={self.n}"]
        if self.p is not None:
            parts.append(f"p={self.p:g}")
        if self.d is not None:
            parts.append(f"d={self.d}")
        if self.cols is not None:
            parts.append(f"cols={self.cols}")
        if self.kind in ("gnp", "regular"):
            parts.append(f"seed={self.seed}")
        return f"{self.kind}:" + ",".join(parts)

    @classmethod
    def parse(cls, text: str) -> "GraphSpec":
        """Parse ``kind:key=value,...`` such as ``regular:n=256,d=8,seed=4``."""
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        fields: dict = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, value = item.partition("=")
            if not eq:
                raise InvalidParameters(f"malformed graph spec item {item!r}")
            key = key.strip()
            if key == "p":
                fields["p"] = float(value)
            elif key in ("n", "d", "cols", "seed"):
                fields[key] = int(value)
            else:
                raise InvalidParameters(f"unknown graph spec key {key!r}")
        if "n" not in fields:
            raise InvalidParameters("graph spec needs n")
        return cls(kind=kind, **fields)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & 0xFFFFFFFFFFFFFFFF))


def _pairs_from_index(n: int, idx: np.ndarray) -> np.ndarray:
    # row u (0-based) holds pairs (u, u+1..n-1); offsets[u] = first flat index of row u
    rows = np.arange(n, dtype=np.int64)
    offsets = rows * (2 * n - rows - 1) // 2
    u = np.searchsorted(offsets, idx, side="right") - 1
    v = idx - offsets[u] + u + 1
    return np.stack([u + 1, v + 1], axis=1)


def _gnp_edges(n: int, p: float, seed: int) -> np.ndarray:
    total = n * (n - 1) // 2
    if total == 0 or p == 0.0:
        return np.zeros((0, 2), dtype=np.int64)
    rng = _rng(seed)
    if p == 1.0:
        chosen = np.arange(total, dtype=np.int64)
    else:
        count = int(rng.binomial(total, p))
        chosen = np.sort(rng.choice(total, size=count, replace=False)).astype(np.int64)
    return _pairs_from_index(n, chosen)


def _regular_edges(n: int, d: int, seed: int) -> list[tuple[int, int]]:
    # Pairing with retries on clashing points (Steger-Wormald style), restarted when stuck.
    rng = _rng(seed)
    if d == 0:
        return []
    for _ in range(1000):
        edges: set[tuple[int, int]] = set()
        stubs = np.repeat(np.arange(n, dtype=np.int64), d)
        stuck = False
        while len(stubs):
            stubs = rng.permutation(stubs)
            leftover: Counter = Counter()
            for a, b in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
                if a > b:
                    a, b = b, a
                if a != b and (a, b) not in edges:
                    edges.add((a, b))
                else:
                    leftover[a] += 1
                    leftover[b] += 1
            if leftover and not _can_still_pair(edges, leftover):
                stuck = True
                break
            stubs = np.array([v for v, c in sorted(leftover.items()) for _ in range(c)], dtype=np.int64)
        if not stuck:
            return sorted((a + 1, b + 1) for a, b in edges)
    raise InvalidParameters(f"could not build a {d}-regular graph on {n} vertices")


def _can_still_pair(edges, leftover) -> bool:
    nodes = sorted(leftover)
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            if (a, b) not in edges:
                return True
    return False


def generate(spec: GraphSpec) -> Graph:
    kind, n = spec.kind, spec.n
    if kind not in GENERATOR_KINDS:
        raise InvalidParameters(f"unknown generator kind {kind!r}; expected one of {GENERATOR_KINDS}")
    if n < 0 or (kind in ("cycle",) and n < 3) or (kind == "grid" and n < 1):
        need = "n >= 3" if kind == "cycle" else "n >= 0" if kind != "grid" else "rows >= 1"
        raise InvalidParameters(f"{kind} requires {need}, got n={n}")
    if kind == "cycle":
        return Graph.from_edges(n, [(i, i + 1) for i in range(1, n)] + [(1, n)])
    if kind == "path":
        return Graph.from_edges(n, [(i, i + 1) for i in range(1, n)])
    if kind == "complete":
        return Graph.from_edges(n, [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)])
    if kind == "star":
        return Graph.from_edges(n + 1, [(1, v) for v in range(2, n + 2)])
    if kind == "grid":
        cols = spec.cols if spec.cols is not None else n
        if cols < 1:
            raise InvalidParameters(f"grid requires cols >= 1, got {cols}")
        vid = lambda r, c: r * cols + c + 1  # noqa: E731
        edges = [(vid(r, c), vid(r, c + 1)) for r in range(n) for c in range(cols - 1)]
        edges += [(vid(r, c), vid(r + 1, c)) for r in range(n - 1) for c in range(cols)]
        return Graph.from_edges(n * cols, edges)
    if kind == "gnp":
        p = spec.p
        if p is None or not 0.0 <= p <= 1.0:
            raise InvalidParameters(f"gnp requires 0 <= p <= 1, got p={p}")
        return Graph.from_edges(n, _gnp_edges(n, p, spec.seed))
    d = spec.d
    if d is None or d < 0:
        raise InvalidParameters(f"regular requires a degree d >= 0, got d={d}")
    if d >= n and n > 0:
        raise InvalidParameters(f"regular requires d < n, got d={d}, n={n}")
    if (n * d) % 2:
        raise InvalidParameters(f"regular requires n*d even, got n={n}, d={d}")
    return Graph.from_edges(n, _regular_edges(n, d, spec.seed))


def save_graph(graph: Graph) -> bytes:
    lines = [f"{graph.n} {graph.m}"]
    lines += [f"{u} {v}" for u, v in graph.edge_array().tolist()]
    return ("\n".join(lines) + "\n").encode("ascii")


def load_graph(data: bytes | str) -> Graph:
    text = data.decode("ascii") if isinstance(data, (bytes, bytearray)) else data
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise GraphFormatError("empty input; expected header 'n m'", line=1)
    n, m = _parse_pair(lines[0], 1)
    if n < 0 or m < 0:
        raise GraphFormatError("header values must be nonnegative", line=1)
    if len(lines) - 1 != m:
        raise GraphFormatError(f"header announces {m} edges but {len(lines) - 1} edge lines follow",
                               line=len(lines) + 1 if len(lines) - 1 < m else m + 2)
    edges = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        u, v = _parse_pair(line, lineno)
        if u == v:
            raise GraphInvariantError(f"line {lineno}: self-loop at vertex {u}")
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphInvariantError(f"line {lineno}: vertex id out of range 1..{n}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphInvariantError(f"line {lineno}: duplicate edge {key} (first on line {seen[key]})")
        seen[key] = lineno
        edges.append(key)
    return Graph.from_edges(n, edges)


def _parse_pair(line: str, lineno: int) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise GraphFormatError(f"expected two integers, got {line!r}", line=lineno)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError(f"expected two integers, got {line!r}", line=lineno) from None


def iterated_log(i: int, n: float) -> float:
    """``log2`` applied ``i`` times to ``n`` over the reals; log^(0) n = n."""
    if i < 0:
        raise ValueError("iteration count must be nonnegative")
    x = n
    for _ in range(i):
        if x <= 0:
            raise ValueError(f"iterated log undefined: reached {x} before finishing")
        x = math.log2(x)
    return float(x)


def log_star(n: float) -> int:
    """Smallest i with log^(i) n <= 2."""
    if n <= 0:
        raise ValueError("log_star needs a positive argument")
    i, x = 0, n
    while x > 2:
        x = math.log2(x)
        i += 1
    return i


def is_prime(x: int) -> bool:
    if x < 2:
        return False
    if x % 2 == 0:
        return x == 2
    f = 3
    while f * f <= x:
        if x % f == 0:
            return False
        f += 2
    return True


def next_prime(x: int) -> int:
    """Smallest prime strictly greater than x."""
    c = max(x + 1, 2)
    while not is_prime(c):
        c += 1
    return c
