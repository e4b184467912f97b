from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameters


@dataclass(frozen=True)
class Coloring:
    """Vertex coloring with colors in 1..palette.

    ``colors[v - 1]`` is the color of vertex v. ``palette`` is the bound every
    vertex can compute locally, not the number of colors actually used;
    ``defect_bound`` is the promised defect (0 for a legal coloring).
    """

    colors: np.ndarray
    palette: int
    defect_bound: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.colors, dtype=np.int64)
        arr.flags.writeable = False
        object.__setattr__(self, "colors", arr)
        if arr.size and (arr.min() < 1 or arr.max() > self.palette):
            raise InvalidParameters(
                f"colors must lie in 1..{self.palette}, found range {arr.min()}..{arr.max()}")

    @classmethod
    def from_sequence(cls, colors, palette=None, defect_bound=0) -> "Coloring":
        arr = np.asarray(colors, dtype=np.int64)
        if palette is None:
            palette = int(arr.max()) if arr.size else 1
        return cls(arr, int(palette), int(defect_bound))

    def __len__(self):
        return len(self.colors)

    def color(self, v: int) -> int:
        return int(self.colors[v - 1])

    @property
    def used(self) -> int:
        """Largest color actually assigned."""
        return int(self.colors.max()) if self.colors.size else 0

    def to_csv(self) -> str:
        rows = ["vertex,color"]
        rows += [f"{v},{c}" for v, c in enumerate(self.colors.tolist(), start=1)]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text: str, palette=None) -> "Coloring":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0].replace(" ", "") != "vertex,color":
            raise InvalidParameters("coloring CSV must start with header 'vertex,color'")
        pairs = [tuple(int(x) for x in ln.split(",")) for ln in lines[1:]]
        pairs.sort()
        if [v for v, _ in pairs] != list(range(1, len(pairs) + 1)):
            raise InvalidParameters("coloring CSV must list every vertex 1..n exactly once")
        return cls.from_sequence([c for _, c in pairs], palette=palette)
