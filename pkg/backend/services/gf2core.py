"""
Dense GF(2) linear algebra on bit-packed rows

Rows are packed into 64-bit words (numpy uint64), columns are addressed
through a label -> index map. Bit vectors are exchanged as frozensets of
column labels, so a vector and the set of qubits it touches are the same thing.
"""
import logging
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from models.errors import DimensionError

logger = logging.getLogger(__name__)

WORD_BITS = 64

BitVector = FrozenSet[Hashable]


def _blocks(num_cols: int) -> int:
    return (num_cols + WORD_BITS - 1) // WORD_BITS


def _mask(index: int) -> Tuple[int, np.uint64]:
    return index // WORD_BITS, np.uint64(1) << np.uint64(index % WORD_BITS)


def xor_sets(vectors: Iterable[Iterable[Hashable]]) -> BitVector:
    """Symmetric difference of any number of bit vectors"""
    result = set()
    for vector in vectors:
        result.symmetric_difference_update(vector)
    return frozenset(result)


class BitMatrix:
    """Bit matrix over GF(2) with labelled columns"""

    def __init__(self, words: np.ndarray, column_labels: Sequence[Hashable],
                 pivots: Optional[Sequence[Hashable]] = None):
        self.column_labels: Tuple[Hashable, ...] = tuple(column_labels)
        self.index: Dict[Hashable, int] = {
            label: i for i, label in enumerate(self.column_labels)
        }
        if len(self.index) != len(self.column_labels):
            raise DimensionError("Column labels must be unique")
        blocks = _blocks(len(self.column_labels))
        words = np.asarray(words, dtype=np.uint64)
        if words.size == 0:
            words = words.reshape(words.shape[0] if words.ndim == 2 else 0, blocks)
        if words.ndim != 2 or words.shape[1] != blocks:
            raise DimensionError(
                f"Packed rows have shape {words.shape}, expected (*, {blocks})"
            )
        self.words = words
        # Pivot labels row by row, only known for matrices produced by rref
        self.pivots: Optional[Tuple[Hashable, ...]] = (
            tuple(pivots) if pivots is not None else None
        )

    # ================================================================
    # Construction
    # ================================================================
    @classmethod
    def empty(cls, column_labels: Sequence[Hashable]) -> "BitMatrix":
        labels = tuple(column_labels)
        return cls(np.zeros((0, _blocks(len(labels))), dtype=np.uint64), labels, pivots=())

    @classmethod
    def from_sets(cls, rows: Iterable[Iterable[Hashable]],
                  column_labels: Sequence[Hashable]) -> "BitMatrix":
        """Build a matrix whose i-th row has ones exactly on the labels of rows[i]"""
        labels = tuple(column_labels)
        index = {label: i for i, label in enumerate(labels)}
        rows = [tuple(row) for row in rows]
        words = np.zeros((len(rows), _blocks(len(labels))), dtype=np.uint64)
        for r, row in enumerate(rows):
            for label in row:
                if label not in index:
                    raise DimensionError(f"Unknown column label {label!r}")
                block, mask = _mask(index[label])
                words[r, block] ^= mask
        return cls(words, labels)

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[int]],
                   column_labels: Sequence[Hashable]) -> "BitMatrix":
        labels = tuple(column_labels)
        rows = []
        for line in dense:
            if len(line) != len(labels):
                raise DimensionError(
                    f"Dense row has {len(line)} entries, expected {len(labels)}"
                )
            rows.append([labels[j] for j, bit in enumerate(line) if bit % 2])
        return cls.from_sets(rows, labels)

    # ================================================================
    # Access
    # ================================================================
    @property
    def num_rows(self) -> int:
        return int(self.words.shape[0])

    @property
    def num_cols(self) -> int:
        return len(self.column_labels)

    def row_set(self, i: int) -> BitVector:
        labels = []
        for block, word in enumerate(self.words[i]):
            w = int(word)
            while w:
                low = w & -w
                labels.append(self.column_labels[block * WORD_BITS + low.bit_length() - 1])
                w ^= low
        return frozenset(labels)

    def rows(self) -> List[BitVector]:
        return [self.row_set(i) for i in range(self.num_rows)]

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.num_rows, self.num_cols), dtype=np.uint8)
        for j in range(self.num_cols):
            block, mask = _mask(j)
            dense[:, j] = (self.words[:, block] & mask) != 0
        return dense

    def pack(self, vector: Iterable[Hashable]) -> np.ndarray:
        """Pack a bit vector; every label must be a column of this matrix"""
        packed = np.zeros(_blocks(self.num_cols), dtype=np.uint64)
        for label in vector:
            if label not in self.index:
                raise DimensionError(f"Label {label!r} is not a column of this matrix")
            block, mask = _mask(self.index[label])
            packed[block] ^= mask
        return packed

    def unpack(self, packed: np.ndarray) -> BitVector:
        labels = []
        for block, word in enumerate(packed):
            w = int(word)
            while w:
                low = w & -w
                labels.append(self.column_labels[block * WORD_BITS + low.bit_length() - 1])
                w ^= low
        return frozenset(labels)

    def with_columns(self, column_labels: Sequence[Hashable]) -> "BitMatrix":
        """Same rows over another column set; dropped columns must be all-zero"""
        return BitMatrix.from_sets(self.rows(), column_labels)

    def stacked(self, other: "BitMatrix") -> "BitMatrix":
        if set(other.column_labels) != set(self.column_labels):
            raise DimensionError("Cannot stack matrices with different column labels")
        if other.column_labels != self.column_labels:
            other = other.with_columns(self.column_labels)
        return BitMatrix(np.vstack([self.words, other.words]), self.column_labels)

    def __repr__(self) -> str:
        return f"BitMatrix({self.num_rows}x{self.num_cols})"


# ================================================================
# Elimination
# ================================================================
def rref_with_pivots(m: BitMatrix,
                     column_order: Optional[Sequence[Hashable]] = None
                     ) -> Tuple[BitMatrix, Tuple[Hashable, ...]]:
    """
    Reduced row-echelon form with pivots searched in column_order

    Columns missing from column_order are searched afterwards in natural order.
    Pivot ties go to the lowest eligible row. Zero rows are dropped.
    """
    order = list(column_order) if column_order is not None else list(m.column_labels)
    seen = set()
    for label in order:
        if label not in m.index:
            raise DimensionError(f"Unknown column label {label!r} in column order")
        if label in seen:
            raise DimensionError(f"Column {label!r} repeated in column order")
        seen.add(label)
    order.extend(label for label in m.column_labels if label not in seen)

    words = m.words.copy()
    n_rows = words.shape[0]
    pivots: List[Hashable] = []
    pivot_row = 0
    for label in order:
        if pivot_row == n_rows:
            break
        block, mask = _mask(m.index[label])
        hits = (words[pivot_row:, block] & mask) != 0
        if not hits.any():
            continue
        found = pivot_row + int(np.argmax(hits))
        if found != pivot_row:
            words[[pivot_row, found]] = words[[found, pivot_row]]
        column_hits = (words[:, block] & mask) != 0
        column_hits[pivot_row] = False
        if column_hits.any():
            words[column_hits] ^= words[pivot_row]
        pivots.append(label)
        pivot_row += 1
    return BitMatrix(words[:pivot_row], m.column_labels, pivots=pivots), tuple(pivots)


def rref(m: BitMatrix, column_order: Optional[Sequence[Hashable]] = None) -> BitMatrix:
    """Reduced row echelon form with zero rows dropped; see rref_with_pivots for column_order"""
    reduced, _ = rref_with_pivots(m, column_order)
    return reduced


def rank(m: BitMatrix) -> int:
    """Dimension of the rowspace of m"""
    return rref(m).num_rows


def reduce_vector(m: BitMatrix, v: Iterable[Hashable]) -> BitVector:
    """
    XOR rows of m into v until every pivot column of m is cleared

    Labels of v outside m's columns pass through untouched.
    """
    if m.pivots is None:
        m = rref(m)
    inside = [label for label in v if label in m.index]
    outside = frozenset(label for label in v if label not in m.index)
    packed = m.pack(inside)
    for i, pivot in enumerate(m.pivots):
        block, mask = _mask(m.index[pivot])
        if packed[block] & mask:
            packed ^= m.words[i]
    return m.unpack(packed) | outside


def in_rowspace(m: BitMatrix, v: Iterable[Hashable]) -> bool:
    """
    True when v is a sum of rows of m

    Raises DimensionError when v carries labels m has no column for.
    """
    v = frozenset(v)
    unknown = [label for label in v if label not in m.index]
    if unknown:
        raise DimensionError(f"Vector has labels outside the matrix: {sorted(map(str, unknown))}")
    return not reduce_vector(m, v)


def rowspace_equal(a: BitMatrix, b: BitMatrix) -> bool:
    """Same rowspace over the same column labels, compared through ranks of a, b and a stacked on b"""
    if set(a.column_labels) != set(b.column_labels):
        raise DimensionError("Rowspace comparison needs identical column labels")
    rank_a = rank(a)
    rank_b = rank(b)
    if rank_a != rank_b:
        return False
    return rank(a.stacked(b)) == rank_a


def eliminate_columns(m: BitMatrix, cols: Iterable[Hashable]) -> BitMatrix:
    """
    Subspace of R(m) vanishing on cols, projected onto the remaining columns

    Computed by pivoting on cols first and keeping the rows whose pivot lies
    outside cols.
    """
    cols = set(cols)
    unknown = [label for label in cols if label not in m.index]
    if unknown:
        raise DimensionError(f"Cannot eliminate unknown columns: {sorted(map(str, unknown))}")
    first = [label for label in m.column_labels if label in cols]
    rest = [label for label in m.column_labels if label not in cols]
    reduced, pivots = rref_with_pivots(m, first + rest)
    kept = [i for i, pivot in enumerate(pivots) if pivot not in cols]
    projected = BitMatrix.from_sets((reduced.row_set(i) for i in kept), rest)
    return BitMatrix(projected.words, rest, pivots=[pivots[i] for i in kept])
