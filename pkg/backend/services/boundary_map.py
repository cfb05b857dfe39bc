"""
Boundary map: every interior qubit written as a product of boundary qubits
"""
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence

from models.errors import BoundaryMapError
from models.layout_models import Layout
from services.gf2core import BitMatrix, BitVector, rank, reduce_vector, rref_with_pivots

logger = logging.getLogger(__name__)


@dataclass
class BoundaryMap:
    """Rows with one interior pivot each, all other ones on boundary columns"""
    rows: BitMatrix

    @property
    def interior(self) -> List[int]:
        return list(self.rows.pivots or ())

    def expressions(self) -> Dict[int, FrozenSet[int]]:
        """interior qubit -> boundary qubits whose product equals it"""
        return {
            pivot: self.rows.row_set(i) - {pivot}
            for i, pivot in enumerate(self.rows.pivots or ())
        }


def recompute(p: BitMatrix, boundary: Iterable[int],
              interior_order: Optional[Sequence[int]] = None,
              pinned: Iterable[int] = (), check: bool = True) -> BoundaryMap:
    """
    Re-derive the boundary map from the plaquette matrix

    Every column not listed in boundary is interior. Pivoting runs over the
    interior columns first (in interior_order), then pinned qubits, then the
    boundary, so each interior qubit is expressed through unpinned boundary
    qubits only.
    """
    boundary = set(boundary)
    pinned = [q for q in pinned if q in p.index]
    interior = [q for q in p.column_labels if q not in boundary]
    if interior_order is not None:
        position = {q: i for i, q in enumerate(interior_order)}
        interior.sort(key=lambda q: (position.get(q, len(position)), str(q)))
    pinned = [q for q in pinned if q in boundary]
    rest = [q for q in p.column_labels if q in boundary and q not in set(pinned)]

    reduced, pivots = rref_with_pivots(p, interior + pinned + rest)
    pivot_rows = {pivot: i for i, pivot in enumerate(pivots)}
    missing = [q for q in interior if q not in pivot_rows]
    if missing:
        logger.error(f"Unreachable interior qubits: {missing}")
        raise BoundaryMapError(f"Unreachable interior qubit(s): {missing}")

    kept = [pivot_rows[q] for q in interior]
    rows = BitMatrix(reduced.words[kept], p.column_labels, pivots=interior)
    if check and rows.num_rows and rank(p.stacked(rows)) != rank(p):
        raise BoundaryMapError("Boundary map row outside the plaquette rowspace")
    return BoundaryMap(rows=rows)


def recompute_for_layout(layout: Layout, check: bool = True) -> BoundaryMap:
    """Boundary map of a layout, interior qubits farthest from the top-right corner first"""
    top, right = layout.height - 1, layout.width - 1

    def distance(qubit_id: int) -> int:
        pos = layout.qubits[qubit_id].position
        return (right - pos.col) + (top - pos.row)

    interior = sorted(layout.interior_ids(), key=lambda q: (-distance(q), q))
    return recompute(
        layout.as_constraint_matrix(),
        layout.boundary(),
        interior_order=interior,
        pinned=layout.pins,
        check=check,
    )


def to_boundary_form(b: BoundaryMap, c: Iterable) -> BitVector:
    """Cancel interior qubits of c with the matching boundary-map rows"""
    return reduce_vector(b.rows, c)
