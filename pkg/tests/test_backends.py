import numpy as np
import pytest

from deltacolor._accel import HAS_NUMBA, default_backend
from deltacolor.coloring import Coloring
from deltacolor.defective import defective_color, refine, refine_reference
from deltacolor.delta import color_delta_plus_one, mis_from_coloring, mis_reference, tradeoff_color
from deltacolor.graphcore import GraphSpec, generate
from deltacolor.palette import build_family, linial_coloring, one_round_recolor, one_round_recolor_reference
from deltacolor.reduce import kw_reduce, kw_reduce_reference

GRAPHS = ["cycle:n=31", "path:n=20", "star:n=9", "grid:n=5,cols=7", "complete:n=7", "regular:n=60,d=5,seed=2",
          "gnp:n=70,p=0.1,seed=4", "gnp:n=40,p=0.0,seed=1"]
BACKENDS = ["numba", "numpy"]


def summary(res):
    return res.rounds_used, res.messages_sent, res.max_message_bits, list(res.outputs), res.trace


@pytest.fixture(params=GRAPHS)
def graph(request):
    return generate(GraphSpec.parse(request.param))


def ids_permuted(g):
    rng = np.random.default_rng(g.n)
    return rng.permutation(g.n) + 1


def test_default_backend(monkeypatch):
    monkeypatch.setenv("DELTACOLOR_BACKEND", "numpy")
    assert default_backend() == "numpy"
    monkeypatch.delenv("DELTACOLOR_BACKEND")
    assert default_backend() == ("numba" if HAS_NUMBA else "numpy")


@pytest.mark.parametrize("order", [None, "reverse"])
def test_refine_all_paths_agree(graph, order):
    phi = ids_permuted(graph)
    p = 2
    runs = [refine(graph, phi, p, backend=b, order=order, trace=True) for b in BACKENDS]
    ref_order = None if order is None else list(range(graph.n, 0, -1))
    runs.append(refine_reference(graph, phi, p, order=ref_order, trace=True))
    cols = [c.colors.tolist() for c, _ in runs]
    sums = [summary(r) for _, r in runs]
    assert cols[0] == cols[1] == cols[2]
    assert sums[0][:4] == sums[1][:4] == sums[2][:4]
    assert sums[0][4] == sums[1][4]


@pytest.mark.parametrize("order", [None, "reverse"])
def test_recolor_all_paths_agree(graph, order):
    phi = ids_permuted(graph)
    fam = build_family(max(graph.max_degree, 1), graph.n)
    runs = [one_round_recolor(graph, fam, phi, backend=b, order=order, trace=True) for b in BACKENDS]
    runs.append(one_round_recolor_reference(graph, fam, phi, trace=True))
    assert all(o.tolist() == runs[0][0].tolist() for o, _ in runs)
    assert summary(runs[0][1]) == summary(runs[1][1])
    assert summary(runs[0][1])[:3] == summary(runs[2][1])[:3]


@pytest.mark.parametrize("order", [None, "reverse"])
def test_kw_all_paths_agree(graph, order):
    init = Coloring.from_sequence(ids_permuted(graph))
    runs = [kw_reduce(graph, init, backend=b, order=order, trace=True) for b in BACKENDS]
    runs.append(kw_reduce_reference(graph, init, trace=True))
    assert all(c.colors.tolist() == runs[0][0].colors.tolist() for c, _ in runs)
    assert summary(runs[0][1]) == summary(runs[1][1])
    assert summary(runs[0][1])[:4] == summary(runs[2][1])[:4]
    # the trace rows agree apart from the tag text
    strip = [[row[:2] + row[3:] for row in r.trace] for _, r in runs]
    assert strip[0] == strip[2]


@pytest.mark.parametrize("order", [None, "reverse"])
def test_mis_all_paths_agree(graph, order):
    col, _ = linial_coloring(graph)
    runs = [mis_from_coloring(graph, col, backend=b, order=order, trace=True) for b in BACKENDS]
    runs.append(mis_reference(graph, col, trace=True))
    assert all(r.members.tolist() == runs[0].members.tolist() for r in runs)
    assert summary(runs[0].run) == summary(runs[1].run)
    assert summary(runs[0].run)[:4] == summary(runs[2].run)[:4]


@pytest.mark.parametrize("spec", ["regular:n=256,d=16,seed=3", "gnp:n=300,p=0.05,seed=2"])
def test_composites_agree_across_backends_and_orders(spec):
    g = generate(GraphSpec.parse(spec))
    outs = []
    for b in BACKENDS:
        for order in (None, "reverse"):
            col, res, rep = color_delta_plus_one(g, backend=b, order=order, trace=True)
            dcol, dres = defective_color(g, 2, 5, backend=b, order=order)
            tcol, tres = tradeoff_color(g, 2, backend=b, order=order)
            outs.append((col.colors.tolist(), summary(res), rep.to_json(), dcol.colors.tolist(), summary(dres),
                         tcol.colors.tolist(), summary(tres)))
    assert all(o == outs[0] for o in outs)


def test_benchmark_script_runs():
    import subprocess
    import sys
    from pathlib import Path

    script = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_backends.py"
    out = subprocess.run([sys.executable, str(script), "--repeat", "1", "--graph", "cycle:n=64", "--algo", "kw"],
                         capture_output=True, text=True, check=True)
    header, row = out.stdout.splitlines()
    assert header.startswith("graph,n,delta,algorithm") and row.endswith(",1")
