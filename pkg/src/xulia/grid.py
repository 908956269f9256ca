"""Absolute pointer addressing over a 24x24 screen grid.

Rows and columns are named by the first 24 letters (A..X).  Each cell is
further divided into 9 virtual subcells (numbered 1..9 row-major, so 5
is the cell centre) plus selector 0 for the top-left corner of the cell.
Two letters alone address 576 cells, a leading digit 1..9 one of 5,184
subcell centres, and digit 0 one of 576 corners: 5,760 distinct targets.

All coordinates are computed with exact rational arithmetic and floored
exactly once, which keeps the mapping monotone in row/column.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

GRID_SIZE = 24
LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWX"

# Pixels moved per relative-move command, by speed 1..4.
DEFAULT_SPEED_STEPS = (2, 8, 24, 64)

DIRECTIONS = {
    "N": (0, -1),
    "NE": (1, -1),
    "E": (1, 0),
    "SE": (1, 1),
    "S": (0, 1),
    "SW": (-1, 1),
    "W": (-1, 0),
    "NW": (-1, -1),
}


@dataclass(frozen=True)
class Screen:
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("screen dimensions must be positive")


@dataclass(frozen=True)
class GridTarget:
    """A (row, col, selector) address.

    selector None = cell centre, 0 = top-left corner, 1..9 = subcell.
    """

    row: int
    col: int
    selector: int | None = None

    def __post_init__(self) -> None:
        if not (0 <= self.row < GRID_SIZE and 0 <= self.col < GRID_SIZE):
            raise ValueError(f"grid indices out of range: {self.row},{self.col}")
        if self.selector is not None and not 0 <= self.selector <= 9:
            raise ValueError(f"selector {self.selector} outside 0..9")


@dataclass(frozen=True)
class MoveSpec:
    """Relative pointer move: compass direction plus speed 1..4."""

    direction: str
    speed: int

    def __post_init__(self) -> None:
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if not 1 <= self.speed <= 4:
            raise ValueError(f"speed {self.speed} outside 1..4")


def cell_origin(row: int, col: int, screen: Screen) -> tuple[int, int]:
    """Top-left pixel of a cell: floor(col*W/24), floor(row*H/24)."""
    x = Fraction(col * screen.width, GRID_SIZE)
    y = Fraction(row * screen.height, GRID_SIZE)
    return (int(x // 1), int(y // 1))


def _target_fractions(target: GridTarget, screen: Screen) -> tuple[Fraction, Fraction]:
    w, h = screen.width, screen.height
    row, col, sel = target.row, target.col, target.selector
    if sel is None:
        # centre of the cell
        return (Fraction(w * (2 * col + 1), 48), Fraction(h * (2 * row + 1), 48))
    if sel == 0:
        return (Fraction(w * col, GRID_SIZE), Fraction(h * row, GRID_SIZE))
    ry, cx = divmod(sel - 1, 3)
    # centre of subcell (ry, cx) within the cell
    x = Fraction(w * (6 * col + 2 * cx + 1), 144)
    y = Fraction(h * (6 * row + 2 * ry + 1), 144)
    return (x, y)


def target_point(target: GridTarget, screen: Screen) -> tuple[int, int]:
    """Pixel location of a grid target, floored once at the end."""
    x, y = _target_fractions(target, screen)
    return (int(x // 1), int(y // 1))


@dataclass(frozen=True)
class AddressableCounts:
    cells: int
    subcell_targets: int
    total_with_corner: int
    distinct_points: int | None  # verified only for collision-free screens


def all_targets():
    """Every addressable target: centres, corners and subcells."""
    for row in range(GRID_SIZE):
        for col in range(GRID_SIZE):
            yield GridTarget(row, col, None)
            yield GridTarget(row, col, 0)
            for sel in range(1, 10):
                yield GridTarget(row, col, sel)


def count_addressable(screen: Screen) -> AddressableCounts:
    """Structural target counts, plus pixel distinctness where provable.

    Centres coincide with subcell 5, so the centre selector adds no new
    points: 576 cells, 5,184 subcells and 576 corners give 5,760 targets.
    On screens whose dimensions are both divisible by 72 every target
    maps to its own pixel; for those screens the 5,760 points are
    enumerated and checked pairwise distinct.
    """
    cells = GRID_SIZE * GRID_SIZE
    subcells = cells * 9
    total = subcells + cells
    distinct: int | None = None
    if screen.width % 72 == 0 and screen.height % 72 == 0:
        points = {
            target_point(GridTarget(r, c, s), screen)
            for r in range(GRID_SIZE)
            for c in range(GRID_SIZE)
            for s in range(0, 10)
        }
        distinct = len(points)
    return AddressableCounts(cells, subcells, total, distinct)


def clamp_to_screen(x: int, y: int, screen: Screen) -> tuple[int, int]:
    return (
        min(max(x, 0), screen.width - 1),
        min(max(y, 0), screen.height - 1),
    )


def relative_move(
    current: tuple[int, int],
    spec: MoveSpec,
    screen: Screen,
    steps: tuple[int, int, int, int] = DEFAULT_SPEED_STEPS,
) -> tuple[int, int]:
    """Move by the step-table displacement, clamped to the screen.

    Diagonals displace both axes by the full step.
    """
    step = steps[spec.speed - 1]
    dx, dy = DIRECTIONS[spec.direction]
    return clamp_to_screen(current[0] + dx * step, current[1] + dy * step, screen)


@dataclass(frozen=True)
class OverlayGeometry:
    """25+25 grid lines and the per-axis letter labels.

    Subcell lines are deliberately absent: drawing them would obscure
    what sits under the overlay.
    """

    vertical_xs: tuple[int, ...]
    horizontal_ys: tuple[int, ...]
    col_labels: tuple[str, ...]
    row_labels: tuple[str, ...]


def overlay_geometry(screen: Screen) -> OverlayGeometry:
    xs = tuple(int(Fraction(i * screen.width, GRID_SIZE) // 1) for i in range(GRID_SIZE + 1))
    ys = tuple(int(Fraction(i * screen.height, GRID_SIZE) // 1) for i in range(GRID_SIZE + 1))
    labels = tuple(LETTERS)
    return OverlayGeometry(xs, ys, labels, labels)


class TargetParseError(ValueError):
    pass


def parse_target(text: str) -> GridTarget:
    """Parse a compact target string: optional selector digit + two letters.

    "AA" is the centre of cell (A,A), "0AA" its corner, "5AA" subcell 5.
    Row letter comes first, column second.
    """
    s = text.strip().upper()
    selector: int | None = None
    if s and s[0].isdigit():
        selector = int(s[0])
        s = s[1:]
    if len(s) != 2:
        raise TargetParseError(f"target must be [digit]<row><col>: {text!r}")
    row, col = LETTERS.find(s[0]), LETTERS.find(s[1])
    if row < 0 or col < 0:
        raise TargetParseError(f"letters must be A..{LETTERS[-1]}: {text!r}")
    return GridTarget(row, col, selector)
