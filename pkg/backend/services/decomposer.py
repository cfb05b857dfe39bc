"""
Plaquette decomposition of boundary-form constraints

Plans are computed against a snapshot of the layout and the sealed rectangle
(the frame). Top-edge plans are built directly; right-edge plans are built in
the frame reflected across the main diagonal and mapped back.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from models.compile_models import PlacementPlan
from models.errors import PlacementError
from models.layout_models import FILLER, GroupId, Layout, Position, Qubit, QubitKind, Shape

logger = logging.getLogger(__name__)

MAX_EDGE_NEW_TERMS = 2
MAX_CORNER_NEW_TERMS = 3


@dataclass(frozen=True)
class Frame:
    """Sealed rectangle the open layer grows from"""
    width: int
    height: int

    @property
    def top(self) -> int:
        return self.height - 1

    @property
    def right(self) -> int:
        return self.width - 1

    def transposed(self) -> "Frame":
        return Frame(self.height, self.width)


class _View:
    """A layout seen directly or reflected across the main diagonal"""

    def __init__(self, layout: Layout, transpose: bool = False):
        self.layout = layout
        self.transpose = transpose

    def real(self, pos: Position) -> Position:
        return pos.transposed() if self.transpose else pos

    def shape(self, shape: Shape) -> Shape:
        return shape.transposed() if self.transpose else shape

    def occupant(self, pos: Position) -> Optional[Qubit]:
        qubit_id = self.layout.qubit_at(self.real(pos))
        return None if qubit_id is None else self.layout.qubits[qubit_id]

    def has_cell(self, cell: Position) -> bool:
        return self.real(cell) in self.layout.cells


@dataclass
class _Draft:
    """Plan under construction, in view coordinates"""
    cells: List[Tuple[Position, Shape]]
    ends: List[Position]
    free: List[Position]
    # fixed end -> (cell, shape it collapses to when that cell is still a square)
    collapse: Dict[Position, Tuple[Position, Shape]]
    span: Tuple[int, int]


# ================================================================
# Shared machinery
# ================================================================
def _require_qubits(view: _View, positions: Iterable[Position]):
    for pos in positions:
        if view.occupant(pos) is None:
            real = view.real(pos)
            raise PlacementError(f"No boundary qubit at ({real.col}, {real.row})")


def _require_free(view: _View, draft: _Draft):
    for cell, _ in draft.cells:
        if view.has_cell(cell):
            real = view.real(cell)
            raise PlacementError(f"Cell ({real.col}, {real.row}) already occupied")
    for pos in draft.free:
        if view.occupant(pos) is not None:
            real = view.real(pos)
            raise PlacementError(f"Position ({real.col}, {real.row}) already occupied")


def _finish(view: _View, draft: _Draft, new_terms: Sequence[int], group: GroupId,
            edge: str, targets: Iterable[Position]) -> PlacementPlan:
    """Assign new terms to the ends, collapse pinned squares, map back to the layout"""
    shared: List[Position] = []
    open_ends: List[Position] = []
    for end in draft.ends:
        occupant = view.occupant(end)
        if occupant is None:
            open_ends.append(end)
        elif occupant.kind is QubitKind.FIXED:
            shared.append(end)
        else:
            real = view.real(end)
            raise PlacementError(f"End position ({real.col}, {real.row}) holds a non-fixed qubit")
    if len(new_terms) > len(open_ends):
        raise PlacementError(
            f"{len(new_terms)} new terms but only {len(open_ends)} open end positions"
        )

    # Pins go where a square can shed them first, then to the last ends
    n_fixed = len(open_ends) - len(new_terms)
    shedding = [e for e in open_ends if e in draft.collapse]
    others = [e for e in reversed(open_ends) if e not in draft.collapse]
    fixed = (shedding + others)[:n_fixed]
    parity_ends = [e for e in open_ends if e not in fixed]
    parity = list(zip(parity_ends, new_terms))

    cells = dict(draft.cells)
    for end in draft.ends:
        if end in fixed or end in shared:
            rule = draft.collapse.get(end)
            if rule and cells[rule[0]] is Shape.SQUARE:
                cells[rule[0]] = rule[1]

    plan = PlacementPlan(
        group=group,
        edge=edge,
        plaquettes=[(view.real(cell), view.shape(cells[cell])) for cell, _ in draft.cells],
        new_parity_qubits=[(view.real(pos), term) for pos, term in parity],
        free_ancillas=[view.real(pos) for pos in draft.free],
        fixed_ancillas=[view.real(pos) for pos in sorted(fixed)],
        shared_fixed=[view.real(pos) for pos in shared],
        span=draft.span,
    )
    check_plan(plan, [view.real(pos) for pos in targets])
    return plan


def check_plan(plan: PlacementPlan, targets: Iterable[Position]):
    """
    Parity bookkeeping of a plan

    Target qubits and new parity qubits must be covered an odd number of times,
    free ancillas exactly twice, every other non-pinned position an even number
    of times.
    """
    counts = Counter(plan.corner_positions())
    pinned = set(plan.fixed_ancillas) | set(plan.shared_fixed)
    odd = {pos for pos, n in counts.items() if n % 2 and pos not in pinned}
    expected = set(targets) | {pos for pos, _ in plan.new_parity_qubits}
    if odd != expected:
        raise PlacementError(
            f"Plan realises {sorted(odd)} instead of {sorted(expected)}"
        )
    for pos in plan.free_ancillas:
        if counts[pos] != 2:
            raise PlacementError(f"Free ancilla at ({pos.col}, {pos.row}) in {counts[pos]} plaquettes")
    if any(shape is Shape.TRI_MISSING_LL for _, shape in plan.plaquettes):
        raise PlacementError("Plan uses the forbidden orientation")


# ================================================================
# Edge walks
# ================================================================
def _walk_draft(view: _View, frame: Frame, cols: Sequence[int]) -> _Draft:
    """Walk from the leftmost to the rightmost constraint qubit of the top row"""
    h, w = frame.top, frame.right
    in_c = sorted(set(cols))
    if not in_c:
        raise PlacementError("Edge constraint has no boundary qubit")
    left, right = in_c[0], in_c[-1]
    if right > w:
        raise PlacementError("Constraint qubit beyond the sealed rectangle")
    _require_qubits(view, [Position(q, h) for q in range(left, right + 1)])

    if left == right:
        if left >= w:
            raise PlacementError("A lone corner qubit needs the corner cell")
        cell = Position(left, h)
        return _Draft(
            cells=[(cell, Shape.TRI_MISSING_LR)],
            ends=[Position(left, h + 1), Position(left + 1, h + 1)],
            free=[],
            collapse={},
            span=(left, left + 1),
        )

    members = set(in_c)
    cells = []
    for q in range(left, right - 1):
        shape = Shape.TRI_MISSING_LR if q + 1 in members else Shape.SQUARE
        cells.append((Position(q, h), shape))
    cells.append((Position(right - 1, h), Shape.SQUARE))
    first = Position(left, h + 1)
    return _Draft(
        cells=cells,
        ends=[first, Position(right, h + 1)],
        free=[Position(q, h + 1) for q in range(left + 1, right)],
        collapse={first: (Position(left, h), Shape.TRI_MISSING_UL)},
        span=(left, right),
    )


def _edge_plan(layout: Layout, frame: Frame, c_boundary: Sequence[int],
               new_terms: Sequence[int], group: GroupId, transpose: bool) -> PlacementPlan:
    if len(new_terms) > MAX_EDGE_NEW_TERMS:
        raise PlacementError(f"{len(new_terms)} new terms exceed the edge limit of {MAX_EDGE_NEW_TERMS}")
    view = _View(layout, transpose)
    view_frame = frame.transposed() if transpose else frame
    targets = []
    for qubit_id in c_boundary:
        pos = layout.qubits[qubit_id].position
        pos = pos.transposed() if transpose else pos
        if pos.row != view_frame.top:
            edge = "right" if transpose else "top"
            raise PlacementError(f"Qubit {qubit_id} is not on the {edge} edge")
        targets.append(pos)
    draft = _walk_draft(view, view_frame, [pos.col for pos in targets])
    _require_free(view, draft)
    return _finish(view, draft, list(new_terms), group, "right" if transpose else "top", targets)


def decompose_top(layout: Layout, frame: Frame, c_boundary: Sequence[int],
                  new_terms: Sequence[int], group: GroupId) -> PlacementPlan:
    """Realise a constraint on top-row qubits plus at most two new terms in the row above"""
    return _edge_plan(layout, frame, c_boundary, new_terms, group, transpose=False)


def decompose_right(layout: Layout, frame: Frame, c_boundary: Sequence[int],
                    new_terms: Sequence[int], group: GroupId) -> PlacementPlan:
    """Mirror image of decompose_top for the right column"""
    return _edge_plan(layout, frame, c_boundary, new_terms, group, transpose=True)


def decompose_corner(layout: Layout, frame: Frame, c_top: Sequence[int], c_right: Sequence[int],
                     new_terms: Sequence[int], group: GroupId) -> PlacementPlan:
    """
    Realise a constraint turning around the top-right corner

    c_top holds top-row qubits left of the corner, c_right right-column qubits
    below it; the corner qubit itself may appear in either list. Up to three new
    terms go above the leftmost top qubit, diagonally outside the corner and
    right of the lowest right-column qubit.
    """
    if len(new_terms) > MAX_CORNER_NEW_TERMS:
        raise PlacementError(f"{len(new_terms)} new terms exceed the corner limit of {MAX_CORNER_NEW_TERMS}")
    view = _View(layout)
    h, w = frame.top, frame.right
    corner = Position(w, h)
    tops, rights, corner_in = set(), set(), False
    for qubit_id in c_top:
        pos = layout.qubits[qubit_id].position
        if pos == corner:
            corner_in = True
        elif pos.row == h and pos.col < w:
            tops.add(pos.col)
        else:
            raise PlacementError(f"Qubit {qubit_id} is not on the top edge")
    for qubit_id in c_right:
        pos = layout.qubits[qubit_id].position
        if pos == corner:
            corner_in = True
        elif pos.col == w and pos.row < h:
            rights.add(pos.row)
        else:
            raise PlacementError(f"Qubit {qubit_id} is not on the right edge")
    if bool(tops) != bool(rights):
        raise PlacementError("Corner constraint needs qubits on both edges")
    if not tops and not corner_in:
        raise PlacementError("Corner constraint has no boundary qubit")

    left = min(tops) if tops else w
    low = min(rights) if rights else h
    _require_qubits(view, [Position(q, h) for q in range(left, w + 1)])
    _require_qubits(view, [Position(w, q) for q in range(low, h)])

    cells: List[Tuple[Position, Shape]] = []
    for q in range(left, w):
        if q + 1 < w:
            shape = Shape.TRI_MISSING_LR if q + 1 in tops else Shape.SQUARE
        else:
            # A triangle here leaves an excluded corner qubit in exactly two plaquettes
            shape = Shape.SQUARE if corner_in else Shape.TRI_MISSING_LR
        cells.append((Position(q, h), shape))
    cells.append((corner, Shape.SQUARE))
    for q in range(h - 1, low - 1, -1):
        if q + 1 < h:
            shape = Shape.TRI_MISSING_UL if q + 1 in rights else Shape.SQUARE
        else:
            shape = Shape.SQUARE
        cells.append((Position(w, q), shape))

    above = Position(left, h + 1)
    diagonal = Position(w + 1, h + 1)
    beside = Position(w + 1, low)
    free = [Position(q, h + 1) for q in range(left + 1, w + 1)]
    free += [Position(w + 1, q) for q in range(h, low, -1)]
    draft = _Draft(
        cells=cells,
        ends=[above, diagonal, beside],
        free=free,
        collapse={
            above: (Position(left, h), Shape.TRI_MISSING_UL),
            beside: (Position(w, low), Shape.TRI_MISSING_LR),
        },
        span=(left, w + (h - low)),
    )
    _require_free(view, draft)
    targets = [Position(q, h) for q in tops] + [Position(w, q) for q in rights]
    if corner_in:
        targets.append(corner)
    return _finish(view, draft, list(new_terms), group, "corner", targets)


# ================================================================
# Degree-of-freedom row and layer sealing
# ================================================================
def add_degree_of_freedom(layout: Layout, frame: Frame, term: int) -> PlacementPlan:
    """
    One new parity qubit above the upper-left corner and a full row of squares

    Adds exactly one more qubit than plaquettes. A one-qubit-wide single row is
    extended sideways instead.
    """
    h, w = frame.top, frame.right
    if w == 0:
        if h != 0:
            raise PlacementError("Cannot add a degree of freedom to a one-column layout")
        pos = Position(1, 0)
        if layout.qubit_at(pos) is not None:
            raise PlacementError("Row extension position already occupied")
        return PlacementPlan(group=FILLER, edge="dof", new_parity_qubits=[(pos, term)], span=(1, 1))

    new_row = [Position(q, h + 1) for q in range(w + 1)]
    for pos in new_row:
        if layout.qubit_at(pos) is not None:
            raise PlacementError("Top row of the new layer is not empty")
    return PlacementPlan(
        group=FILLER,
        edge="dof",
        plaquettes=[(Position(q, h), Shape.SQUARE) for q in range(w)],
        new_parity_qubits=[(new_row[0], term)],
        free_ancillas=new_row[1:],
        span=(0, w),
    )


def seal_layer(layout: Layout, frame: Frame, top_used: bool, right_used: bool) -> PlacementPlan:
    """
    Close the open layer with filler squares

    Every filler square brings exactly one fresh ancilla, so sealing never
    changes the implied constraint space.
    """
    h, w = frame.top, frame.right
    cells: List[Position] = []
    fresh: List[Position] = []
    if top_used:
        cells += [Position(q, h) for q in range(w) if Position(q, h) not in layout.cells]
        fresh += [Position(q, h + 1) for q in range(w + 1) if layout.qubit_at(Position(q, h + 1)) is None]
    if right_used:
        cells += [Position(w, q) for q in range(h) if Position(w, q) not in layout.cells]
        fresh += [Position(w + 1, q) for q in range(h + 1) if layout.qubit_at(Position(w + 1, q)) is None]
    if top_used and right_used:
        if Position(w, h) not in layout.cells:
            cells.append(Position(w, h))
        if layout.qubit_at(Position(w + 1, h + 1)) is None:
            fresh.append(Position(w + 1, h + 1))
    if len(cells) != len(fresh):
        raise PlacementError(
            f"Sealing would add {len(cells)} fillers over {len(fresh)} fresh qubits"
        )
    return PlacementPlan(
        group=FILLER,
        edge="seal",
        plaquettes=[(cell, Shape.SQUARE) for cell in cells],
        free_ancillas=fresh,
    )


def apply_plan(layout: Layout, plan: PlacementPlan) -> List[int]:
    """Place the plan's qubits and plaquettes; returns the new qubit ids"""
    added = []
    for pos, term in plan.new_parity_qubits:
        added.append(layout.add_qubit(pos, QubitKind.PARITY, term=term, group=plan.group))
    for pos in plan.free_ancillas:
        added.append(layout.add_qubit(pos, QubitKind.ANCILLA, group=plan.group))
    for pos in plan.fixed_ancillas:
        added.append(layout.add_qubit(pos, QubitKind.FIXED, group=plan.group))
    for cell, shape in plan.plaquettes:
        layout.add_plaquette(cell, shape, plan.group)
    return added
