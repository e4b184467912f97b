"""Simulated synchronous (D + 1)-coloring: defective colorings, cover-free palettes, reductions and MIS."""

from .coloring import Coloring
from .defective import defective_color, refine
from .delta import MisResult, color_delta_plus_one, delta_color, mis_from_coloring, tradeoff_color
from .engine import Message, RunResult, VertexProgram, run
from .errors import (DeltaColorError, EmptyChoiceError, GraphFormatError, GraphInvariantError,
                     InvalidParameters, NonTerminationError, PreconditionError, ProtocolError)
from .graphcore import Graph, GraphSpec, generate, iterated_log, load_graph, log_star, next_prime, save_graph
from .palette import CoverFreeFamily, build_family, linial_coloring, one_round_recolor
from .reduce import kw_reduce, sequential_reduce
from .verify import (BoundReport, bound_formulas, check_cover_free, check_defect, check_legal, check_mis,
                     greedy_reference_coloring)

__all__ = [
    "BoundReport", "Coloring", "CoverFreeFamily", "DeltaColorError", "EmptyChoiceError", "Graph",
    "GraphFormatError", "GraphInvariantError", "GraphSpec", "InvalidParameters", "Message", "MisResult",
    "NonTerminationError", "PreconditionError", "ProtocolError", "RunResult", "VertexProgram",
    "bound_formulas", "build_family", "check_cover_free", "check_defect", "check_legal", "check_mis",
    "color_delta_plus_one", "defective_color", "delta_color", "generate", "greedy_reference_coloring",
    "iterated_log", "kw_reduce", "linial_coloring", "load_graph", "log_star", "mis_from_coloring",
    "next_prime", "one_round_recolor", "refine", "run", "save_graph", "sequential_reduce", "tradeoff_color",
]
