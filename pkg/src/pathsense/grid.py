"""Grid geometry: cell coordinates, grid dimensions, and agent paths."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple


class Cell(NamedTuple):
    col: int
    row: int


@dataclass(frozen=True)
class GridDims:
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.width}x{self.height}")

    @property
    def num_cells(self) -> int:
        return self.width * self.height

    def contains(self, cell: Cell) -> bool:
        return 0 <= cell.col < self.width and 0 <= cell.row < self.height

    def iter_cells(self) -> Iterator[Cell]:
        for row in range(self.height):
            for col in range(self.width):
                yield Cell(col, row)


def chebyshev(a: Cell, b: Cell) -> int:
    return max(abs(a.col - b.col), abs(a.row - b.row))


# Row-major neighbor enumeration; staying put is handled separately and always
# comes last so that deterministic tie-breaking prefers moving over idling.
NEIGHBOR_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


def step_candidates(cell: Cell, dims: GridDims) -> list[Cell]:
    """Cells reachable in one move: the in-bounds 8-neighbors, then the cell itself."""
    out = []
    for d_row, d_col in NEIGHBOR_OFFSETS:
        nxt = Cell(cell.col + d_col, cell.row + d_row)
        if dims.contains(nxt):
            out.append(nxt)
    out.append(cell)
    return out


@dataclass(frozen=True)
class Path:
    """An ordered cell sequence visited by one agent, indexed from 0.

    Consecutive positions must be 9-connected (one of the 8 neighbors, or the
    same cell again). Planner-produced paths additionally start and end at the
    base station and respect the deployment budget; those two constraints are
    checked only when ``base``/``budget`` are supplied to :meth:`validate`,
    because belief updates also accept free-standing path fragments.
    """

    cells: tuple[Cell, ...]

    def __len__(self) -> int:
        return len(self.cells)

    def validate(self, dims: GridDims, base: Cell | None = None, budget: int | None = None) -> None:
        if not self.cells:
            raise ValueError("path is empty")
        for k, cell in enumerate(self.cells):
            if not dims.contains(cell):
                raise ValueError(f"path position {k} is out of bounds: {cell}")
        for k in range(1, len(self.cells)):
            if chebyshev(self.cells[k - 1], self.cells[k]) > 1:
                raise ValueError(
                    f"path positions {k - 1} and {k} are not 9-connected: "
                    f"{self.cells[k - 1]} -> {self.cells[k]}"
                )
        if base is not None and (self.cells[0] != base or self.cells[-1] != base):
            raise ValueError(f"path must start and end at the base station {base}")
        if budget is not None and len(self.cells) > budget:
            raise ValueError(f"path length {len(self.cells)} exceeds budget {budget}")

    def distinct_cells(self) -> list[Cell]:
        """Distinct visited cells in first-visit order."""
        seen: dict[Cell, None] = {}
        for cell in self.cells:
            seen.setdefault(cell)
        return list(seen)

    def visit_counts(self) -> dict[Cell, int]:
        counts: dict[Cell, int] = {}
        for cell in self.cells:
            counts[cell] = counts.get(cell, 0) + 1
        return counts
