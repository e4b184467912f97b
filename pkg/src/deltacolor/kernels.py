"""Per-round compute kernels for the synchronous simulator.

Every kernel reads only what neighbors have *announced* (the snapshot taken
at the end of the previous round) and writes into separate output arrays, so
the result does not depend on the order in which vertices are visited. The
numba variants walk vertices in ``order``; the numpy variants are vectorized
over the same-group edge list and ignore it.

Vertex indices are 0-based here. ``group[v] < 0`` means v does not take part
in the current phase; messages only travel between vertices of equal group.
"""

import numpy as np

from ._accel import njit

# --------------------------------------------------------------------------
# Refine: choose the least-used candidate among already-decided neighbors.


@njit
def _refine_nb(indptr, indices, group, phi, p, ann_lo, ann_hi, lo, hi, phi_known, order):
    n = len(phi)
    decided = np.zeros(n, dtype=np.bool_)
    counts = np.zeros(p, dtype=np.int64)
    for idx in range(n):
        v = order[idx]
        g = group[v]
        if g < 0:
            continue
        for stage in range(2):
            if stage == 0 and lo[v] != 0:
                continue
            if stage == 1 and hi[v] != 0:
                continue
            counts[:] = 0
            ready = True
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                if group[u] != g:
                    continue
                if not phi_known:
                    ready = False
                    break
                if stage == 0:
                    if phi[u] < phi[v]:
                        a = ann_lo[u]
                        if a == 0:
                            ready = False
                            break
                        counts[a - 1] += 1
                else:
                    if phi[u] > phi[v]:
                        a = ann_hi[u]
                        if a == 0:
                            ready = False
                            break
                        counts[a - 1] += 1
            if ready:
                best = 0
                for c in range(1, p):
                    if counts[c] < counts[best]:
                        best = c
                if stage == 0:
                    lo[v] = best + 1
                else:
                    hi[v] = best + 1
                decided[v] = True
    return decided


def _refine_np(ctx, phi, p, ann_lo, ann_hi, lo, hi, phi_known):
    n = len(phi)
    active = ctx.group >= 0
    decided = np.zeros(n, dtype=bool)
    src, dst = ctx.edges()
    if not phi_known:
        lonely = active & (ctx.degree() == 0)
        for arr in (lo, hi):
            pick = lonely & (arr == 0)
            arr[pick] = 1
            decided |= pick
        return decided
    for arr, ann, mask in ((lo, ann_lo, phi[dst] < phi[src]), (hi, ann_hi, phi[dst] > phi[src])):
        undecided = active & (arr == 0)
        e = mask & undecided[src]
        blocked = np.bincount(src[e & (ann[dst] == 0)], minlength=n)
        ready = undecided & (blocked == 0)
        rows = np.flatnonzero(ready)
        if rows.size == 0:
            continue
        pos = np.full(n, -1, dtype=np.int64)
        pos[rows] = np.arange(rows.size)
        e &= ready[src]
        counts = np.bincount(pos[src[e]] * p + ann[dst[e]] - 1, minlength=rows.size * p)
        arr[rows] = np.argmin(counts.reshape(rows.size, p), axis=1) + 1
        decided[rows] = True
    return decided


# --------------------------------------------------------------------------
# One-round recolor with a polynomial cover-free family.
# evals[v, a] is the value at a of the polynomial assigned to v's input color;
# v takes the smallest point a whose value no neighbor shares.


@njit
def _recolor_nb(indptr, indices, group, evals, q, order):
    n = evals.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for idx in range(n):
        v = order[idx]
        g = group[v]
        if g < 0:
            continue
        out[v] = -1
        for a in range(q):
            ev = evals[v, a]
            free = True
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                if group[u] == g and evals[u, a] == ev:
                    free = False
                    break
            if free:
                out[v] = a * q + ev + 1
                break
    return out


def _recolor_np(ctx, evals, q):
    n = evals.shape[0]
    out = np.zeros(n, dtype=np.int64)
    active = ctx.group >= 0
    src, dst = ctx.edges()
    rows, cols = np.nonzero(evals[src] == evals[dst])
    covered = np.bincount(src[rows] * q + cols, minlength=n * q).reshape(n, q) > 0
    free = ~covered
    first = np.argmax(free, axis=1)
    chosen = first * q + evals[np.arange(n), first] + 1
    chosen[~free.any(axis=1)] = -1
    out[active] = chosen[active]
    return out


# --------------------------------------------------------------------------
# KW block reduction, one round: vertices whose in-block color is
# (span + r) move to the smallest in-block color 1..span that no neighbor
# in the same block holds.


@njit
def _kw_nb(indptr, indices, group, cur, span, r, order):
    n = len(cur)
    width = 2 * span
    nxt = cur.copy()
    used = np.zeros(span + 1, dtype=np.bool_)
    for idx in range(n):
        v = order[idx]
        g = group[v]
        if g < 0:
            continue
        cb = (cur[v] - 1) % width + 1
        if cb != span + r:
            continue
        block = (cur[v] - 1) // width
        used[:] = False
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if group[u] != g or (cur[u] - 1) // width != block:
                continue
            cu = (cur[u] - 1) % width + 1
            if cu <= span:
                used[cu] = True
        nxt[v] = -1
        for c in range(1, span + 1):
            if not used[c]:
                nxt[v] = block * width + c
                break
    return nxt


def _kw_np(ctx, cur, span, r):
    width = 2 * span
    nxt = cur.copy()
    active = ctx.group >= 0
    inblock = (cur - 1) % width + 1
    block = (cur - 1) // width
    movers = np.flatnonzero(active & (inblock == span + r))
    if movers.size == 0:
        return nxt
    n = len(cur)
    src, dst = ctx.edges()
    pos = np.full(n, -1, dtype=np.int64)
    pos[movers] = np.arange(movers.size)
    e = (pos[src] >= 0) & (block[dst] == block[src]) & (inblock[dst] <= span)
    used = np.bincount(pos[src[e]] * span + inblock[dst[e]] - 1,
                       minlength=movers.size * span).reshape(movers.size, span) > 0
    free = ~used
    first = np.argmax(free, axis=1)
    new = block[movers] * width + first + 1
    new[~free.any(axis=1)] = -1
    nxt[movers] = new
    return nxt


# --------------------------------------------------------------------------
# Coloring to MIS, one round: undecided vertices of color c join unless a
# neighbor has announced that it joined.


@njit
def _mis_nb(indptr, indices, group, colors, c, joined_ann, state, order):
    n = len(colors)
    acted = np.zeros(n, dtype=np.bool_)
    for idx in range(n):
        v = order[idx]
        g = group[v]
        if g < 0 or state[v] != 0 or colors[v] != c:
            continue
        join = True
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if group[u] == g and joined_ann[u]:
                join = False
                break
        state[v] = 1 if join else 2
        acted[v] = True
    return acted


def _mis_np(ctx, colors, c, joined_ann, state):
    n = len(colors)
    src, dst = ctx.edges()
    blocked = np.bincount(src[joined_ann[dst]], minlength=n) > 0
    act = (ctx.group >= 0) & (state == 0) & (colors == c)
    state[act & ~blocked] = 1
    state[act & blocked] = 2
    return act


# --------------------------------------------------------------------------


class Kernels:
    """Dispatch to one backend. ``ctx`` must expose indptr, indices, group,
    order, edges() and degree()."""

    def __init__(self, backend: str):
        if backend not in ("numba", "numpy"):
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend

    def refine(self, ctx, phi, p, ann_lo, ann_hi, lo, hi, phi_known):
        if self.backend == "numba":
            return _refine_nb(ctx.indptr, ctx.indices, ctx.group, phi, p, ann_lo, ann_hi,
                              lo, hi, phi_known, ctx.order)
        return _refine_np(ctx, phi, p, ann_lo, ann_hi, lo, hi, phi_known)

    def recolor(self, ctx, evals, q):
        if self.backend == "numba":
            return _recolor_nb(ctx.indptr, ctx.indices, ctx.group, evals, q, ctx.order)
        return _recolor_np(ctx, evals, q)

    def kw(self, ctx, cur, span, r):
        if self.backend == "numba":
            return _kw_nb(ctx.indptr, ctx.indices, ctx.group, cur, span, r, ctx.order)
        return _kw_np(ctx, cur, span, r)

    def mis(self, ctx, colors, c, joined_ann, state):
        if self.backend == "numba":
            return _mis_nb(ctx.indptr, ctx.indices, ctx.group, colors, c, joined_ann, state, ctx.order)
        return _mis_np(ctx, colors, c, joined_ann, state)
