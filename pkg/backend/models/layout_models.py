"""
Geometric layout of qubits and plaquettes on the integer grid

Row 0 is the bottom row; layouts grow upwards and to the right.
A plaquette sits on a unit cell named by its lower-left lattice point.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from models.errors import LayoutError
from services.gf2core import BitMatrix

logger = logging.getLogger(__name__)

FILLER = "filler"

GroupId = Union[int, str]


@dataclass(frozen=True, order=True)
class Position:
    col: int
    row: int

    def __post_init__(self):
        if self.col < 0 or self.row < 0:
            raise LayoutError(f"Negative position ({self.col}, {self.row})")

    def shifted(self, dcol: int, drow: int) -> "Position":
        return Position(self.col + dcol, self.row + drow)

    def transposed(self) -> "Position":
        return Position(self.row, self.col)


class QubitKind(str, Enum):
    PARITY = "parity"
    ANCILLA = "ancilla"
    FIXED = "fixed"


class Shape(str, Enum):
    """Plaquette shapes, triangles named by the cell corner they leave out"""
    SQUARE = "square"
    TRI_MISSING_LL = "tri_missing_ll"
    TRI_MISSING_UL = "tri_missing_ul"
    TRI_MISSING_LR = "tri_missing_lr"

    def corners(self, cell: Position) -> Tuple[Position, ...]:
        ll = cell
        lr = cell.shifted(1, 0)
        ul = cell.shifted(0, 1)
        ur = cell.shifted(1, 1)
        if self is Shape.SQUARE:
            return (ll, lr, ul, ur)
        if self is Shape.TRI_MISSING_LL:
            return (lr, ul, ur)
        if self is Shape.TRI_MISSING_UL:
            return (ll, lr, ur)
        return (ll, ul, ur)

    def transposed(self) -> "Shape":
        """Image under reflection across the main diagonal"""
        if self is Shape.TRI_MISSING_LR:
            return Shape.TRI_MISSING_UL
        if self is Shape.TRI_MISSING_UL:
            return Shape.TRI_MISSING_LR
        return self


@dataclass(frozen=True)
class Qubit:
    id: int
    position: Position
    kind: QubitKind
    term: Optional[int] = None
    group: Optional[GroupId] = None


@dataclass(frozen=True)
class Plaquette:
    cell: Position
    shape: Shape
    group: GroupId = FILLER

    @property
    def is_filler(self) -> bool:
        return self.group == FILLER


class Layout:
    """Qubits on grid positions plus the plaquettes constraining them"""

    def __init__(self):
        self.qubits: Dict[int, Qubit] = {}
        self.by_position: Dict[Position, int] = {}
        self.plaquettes: List[Plaquette] = []
        self.cells: Dict[Position, Plaquette] = {}
        self.pins: List[int] = []
        self._next_id = 0

    def copy(self) -> "Layout":
        clone = Layout()
        clone.qubits = dict(self.qubits)
        clone.by_position = dict(self.by_position)
        clone.plaquettes = list(self.plaquettes)
        clone.cells = dict(self.cells)
        clone.pins = list(self.pins)
        clone._next_id = self._next_id
        return clone

    # ================================================================
    # Mutation
    # ================================================================
    def add_qubit(self, pos: Position, kind: QubitKind, term: Optional[int] = None,
                  group: Optional[GroupId] = None, qubit_id: Optional[int] = None) -> int:
        """
        Register a qubit and return its id

        Fixed ancillas are also appended to pins. Raises LayoutError for an
        occupied position, a reused id or a parity qubit without a term.
        """
        if pos in self.by_position:
            raise LayoutError(f"Position ({pos.col}, {pos.row}) already occupied")
        if kind is QubitKind.PARITY and term is None:
            raise LayoutError("Parity qubit needs a term")
        if qubit_id is None:
            qubit_id = self._next_id
        elif qubit_id in self.qubits:
            raise LayoutError(f"Qubit id {qubit_id} already in use")
        self._next_id = max(self._next_id, qubit_id + 1)
        self.qubits[qubit_id] = Qubit(qubit_id, pos, kind, term, group)
        self.by_position[pos] = qubit_id
        if kind is QubitKind.FIXED:
            self.pins.append(qubit_id)
        return qubit_id

    def add_plaquette(self, cell: Position, shape: Shape, group: GroupId = FILLER) -> Plaquette:
        """Attach a plaquette to a free cell whose corners all hold qubits"""
        if shape is Shape.TRI_MISSING_LL:
            raise LayoutError(f"Forbidden orientation on cell ({cell.col}, {cell.row})")
        if cell in self.cells:
            raise LayoutError(f"Cell ({cell.col}, {cell.row}) already carries a plaquette")
        for corner in shape.corners(cell):
            if corner not in self.by_position:
                raise LayoutError(
                    f"Missing corner qubit at ({corner.col}, {corner.row}) for {shape.value}"
                )
        plaquette = Plaquette(cell, shape, group)
        self.plaquettes.append(plaquette)
        self.cells[cell] = plaquette
        return plaquette

    def remove_plaquette(self, cell: Position) -> Plaquette:
        plaquette = self.cells.pop(cell)
        self.plaquettes.remove(plaquette)
        return plaquette

    def remove_qubit(self, qubit_id: int) -> Qubit:
        """Drop a qubit no plaquette uses any more, together with its pin"""
        qubit = self.qubits[qubit_id]
        for p in self.plaquettes:
            if qubit.position in p.shape.corners(p.cell):
                raise LayoutError(f"Qubit {qubit_id} is still used by a plaquette")
        del self.qubits[qubit_id]
        del self.by_position[qubit.position]
        if qubit_id in self.pins:
            self.pins.remove(qubit_id)
        return qubit

    # ================================================================
    # Queries
    # ================================================================
    def qubit_at(self, pos: Position) -> Optional[int]:
        """Id of the qubit at pos, None for an empty site"""
        return self.by_position.get(pos)

    @property
    def width(self) -> int:
        """Number of occupied columns counted from column 0"""
        return 1 + max((q.position.col for q in self.qubits.values()), default=-1)

    @property
    def height(self) -> int:
        return 1 + max((q.position.row for q in self.qubits.values()), default=-1)

    def ids_of_kind(self, *kinds: QubitKind) -> List[int]:
        """Sorted ids of the qubits of any of the given kinds"""
        return sorted(q.id for q in self.qubits.values() if q.kind in kinds)

    def ancilla_ids(self) -> List[int]:
        """Free and fixed ancillas; these columns are eliminated to get the implied constraints"""
        return self.ids_of_kind(QubitKind.ANCILLA, QubitKind.FIXED)

    def term_qubits(self) -> Dict[int, int]:
        """term index -> qubit id for placed parity qubits"""
        return {
            q.term: q.id for q in self.qubits.values() if q.kind is QubitKind.PARITY
        }

    def corner_ids(self, p: Plaquette) -> List[int]:
        """Qubit ids on the corners of p, in Shape.corners order"""
        return [self.by_position[pos] for pos in p.shape.corners(p.cell)]

    def plaquette_vector(self, p: Plaquette) -> FrozenSet[int]:
        """Bit vector of p over qubit ids: 4 ones for a square, 3 for a triangle"""
        return frozenset(self.corner_ids(p))

    def plaquettes_of(self, qubit_id: int) -> List[Plaquette]:
        """Plaquettes having the qubit as a corner"""
        pos = self.qubits[qubit_id].position
        return [p for p in self.plaquettes if pos in p.shape.corners(p.cell)]

    def as_constraint_matrix(self) -> BitMatrix:
        """One row per plaquette and per pin; ancilla columns first, then parity columns"""
        labels = self.ancilla_ids() + self.ids_of_kind(QubitKind.PARITY)
        rows = [self.plaquette_vector(p) for p in self.plaquettes]
        rows += [{pin} for pin in self.pins]
        return BitMatrix.from_sets(rows, labels)

    def interior_ids(self) -> List[int]:
        """Qubits sitting on the lower-left corner of a plaquette"""
        return sorted(self.by_position[cell] for cell in self.cells)

    def boundary(self) -> List[int]:
        """
        Qubits not on the lower-left corner of any plaquette

        On a sealed rectangle this is the top row plus the right column. Ordered
        clockwise, from the upper-left end to the lower-right end.
        """
        interior = set(self.interior_ids())
        ids = [q for q in self.qubits.values() if q.id not in interior]
        ids.sort(key=lambda q: (q.position.col - q.position.row, -q.position.row))
        return [q.id for q in ids]

    def frozen(self) -> List[int]:
        """Non-boundary qubits on the bottom row or the left column"""
        interior = set(self.interior_ids())
        return sorted(
            q.id for q in self.qubits.values()
            if q.id in interior and (q.position.row == 0 or q.position.col == 0)
        )

    def group_ids(self) -> List[int]:
        return sorted({p.group for p in self.plaquettes if not p.is_filler})

    def __repr__(self) -> str:
        return (
            f"Layout({len(self.qubits)} qubits, {len(self.plaquettes)} plaquettes, "
            f"{self.width}x{self.height})"
        )
