import pytest

from models.errors import LayoutError
from models.layout_models import FILLER, Layout, Position, QubitKind, Shape


def square_layout():
    layout = Layout()
    for term, pos in enumerate([(0, 0), (1, 0), (0, 1), (1, 1)]):
        layout.add_qubit(Position(*pos), QubitKind.PARITY, term=term)
    layout.add_plaquette(Position(0, 0), Shape.SQUARE, 0)
    return layout


def test_shape_corners():
    cell = Position(2, 3)
    assert set(Shape.TRI_MISSING_UL.corners(cell)) == {Position(2, 3), Position(3, 3), Position(3, 4)}
    assert set(Shape.TRI_MISSING_LR.corners(cell)) == {Position(2, 3), Position(2, 4), Position(3, 4)}
    assert len(Shape.SQUARE.corners(cell)) == 4


def test_transposed_shapes_swap_triangles():
    assert Shape.TRI_MISSING_LR.transposed() is Shape.TRI_MISSING_UL
    assert Shape.SQUARE.transposed() is Shape.SQUARE


def test_negative_position_rejected():
    with pytest.raises(LayoutError):
        Position(-1, 0)


def test_occupied_position_rejected():
    layout = square_layout()
    with pytest.raises(LayoutError):
        layout.add_qubit(Position(0, 0), QubitKind.ANCILLA)


def test_forbidden_orientation_rejected():
    layout = square_layout()
    with pytest.raises(LayoutError, match="Forbidden"):
        layout.add_plaquette(Position(1, 0), Shape.TRI_MISSING_LL)


def test_missing_corner_rejected():
    layout = square_layout()
    with pytest.raises(LayoutError, match="Missing corner"):
        layout.add_plaquette(Position(1, 0), Shape.SQUARE)


def test_cell_collision_rejected():
    layout = square_layout()
    with pytest.raises(LayoutError):
        layout.add_plaquette(Position(0, 0), Shape.TRI_MISSING_UL)


def test_single_square_has_three_boundary_qubits():
    layout = square_layout()
    assert layout.interior_ids() == [0]
    # clockwise from the upper-left end
    assert layout.boundary() == [2, 3, 1]


def test_frozen_qubits_are_interior_on_the_outer_edges():
    layout = square_layout()
    assert layout.frozen() == [0]


def test_constraint_matrix_puts_ancillas_first_and_pins_last():
    layout = square_layout()
    pin = layout.add_qubit(Position(2, 1), QubitKind.FIXED)
    free = layout.add_qubit(Position(2, 0), QubitKind.ANCILLA)
    layout.add_plaquette(Position(1, 0), Shape.SQUARE, FILLER)
    m = layout.as_constraint_matrix()
    assert m.column_labels[:2] == (free, pin) or m.column_labels[:2] == (pin, free)
    assert m.num_rows == 3
    assert m.row_set(2) == frozenset({pin})


def test_remove_qubit_in_use_rejected():
    layout = square_layout()
    with pytest.raises(LayoutError):
        layout.remove_qubit(0)
    layout.remove_plaquette(Position(0, 0))
    layout.remove_qubit(0)
    assert layout.qubit_at(Position(0, 0)) is None


def test_copy_is_independent():
    layout = square_layout()
    clone = layout.copy()
    clone.add_qubit(Position(2, 0), QubitKind.ANCILLA)
    assert len(layout.qubits) == 4
    assert len(clone.qubits) == 5
