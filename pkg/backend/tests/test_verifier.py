import copy

import pytest

from models.compile_models import CompilerConfig
from models.layout_models import Layout, Position, QubitKind, Shape
from models.problem_models import ProblemSpec, Term
from services.compiler_service import CompilerService
from services.verifier import (
    brute_force_check,
    energy_equivalence_check,
    geometry_check,
    verify,
    verify_rowspace,
)
from storage.json_store import layout_to_dict


def square_problem(coefficients=(1.0, 1.0, 1.0, 1.0)):
    keys = [(1, 2), (2, 3), (3, 4), (1, 4)]
    return ProblemSpec(
        num_logical=4,
        terms=[Term(frozenset(k), c) for k, c in zip(keys, coefficients)],
    )


def square_data(problem):
    layout = Layout()
    for term, pos in enumerate([(0, 0), (1, 0), (1, 1), (0, 1)]):
        layout.add_qubit(Position(*pos), QubitKind.PARITY, term=term)
    layout.add_plaquette(Position(0, 0), Shape.SQUARE, 0)
    return layout_to_dict(layout, problem)


@pytest.fixture
def compiled_example(worked_example):
    cl = CompilerService(CompilerConfig()).compile(worked_example)
    return layout_to_dict(cl.layout, worked_example, cl.layers)


def test_worked_example_passes_every_check(compiled_example, worked_example):
    report = verify(compiled_example, worked_example)
    data = report.to_dict()
    assert data["rowspace"] == "pass"
    assert data["dims"] == [3, 3]
    assert data["brute_force"]["status"] == "pass"
    assert data["brute_force"]["patterns"] == 16
    assert data["energy"]["status"] == "pass"
    assert data["geometry"] == []
    assert report.passed


def test_deleted_plaquette_is_caught(compiled_example, worked_example):
    broken = copy.deepcopy(compiled_example)
    group_cells = [i for i, p in enumerate(broken["plaquettes"]) if p["group"] != "filler"]
    del broken["plaquettes"][group_cells[0]]
    result = verify_rowspace(broken, worked_example)
    assert not result.passed
    assert "not_implied" in result.witness


def test_zero_dimensional_layout_passes_trivially():
    p = ProblemSpec(num_logical=2, terms=[Term(frozenset({1})), Term(frozenset({2}))])
    layout = Layout()
    layout.add_qubit(Position(0, 0), QubitKind.PARITY, term=0)
    layout.add_qubit(Position(1, 0), QubitKind.PARITY, term=1)
    result = verify_rowspace(layout_to_dict(layout, p), p)
    assert result.passed
    assert result.details["dims"] == [0, 0]


def test_single_square_has_eight_parity_patterns():
    p = square_problem()
    result = brute_force_check(square_data(p), p)
    assert result.passed
    assert result.details["patterns"] == 8
    assert result.details["survivors"] == 8


def test_one_spin_one_term():
    p = ProblemSpec(num_logical=1, terms=[Term(frozenset({1}), 1.0)])
    layout = Layout()
    layout.add_qubit(Position(0, 0), QubitKind.PARITY, term=0)
    result = brute_force_check(layout_to_dict(layout, p), p)
    assert result.passed
    assert result.details["survivors"] == 2


def test_missing_plaquette_fails_brute_force():
    p = square_problem()
    data = square_data(p)
    data["plaquettes"] = []
    result = brute_force_check(data, p)
    assert not result.passed
    assert result.witness["side"] == "physical only"


def test_zero_coefficients_give_flat_spectra():
    p = square_problem((0.0, 0.0, 0.0, 0.0))
    result = energy_equivalence_check(square_data(p), p)
    assert result.passed
    assert result.details["ground_energy"] == 0.0


@pytest.mark.parametrize("seed", range(10))
def test_random_coefficients_match_the_logical_spectrum(seed, random_problem):
    p = random_problem(seed)
    cl = CompilerService(CompilerConfig(rng_seed=seed)).compile(p)
    data = layout_to_dict(cl.layout, p)
    if len(data["qubits"]) > 24:
        pytest.skip("layout too large for the exhaustive oracle")
    assert energy_equivalence_check(data, p, cap=24).passed
    assert brute_force_check(data, p, cap=24).passed


def test_oracles_skip_large_layouts():
    p = square_problem()
    result = brute_force_check(square_data(p), p, cap=3)
    assert result.passed is None
    assert result.to_dict()["status"] == "skipped"


def test_forbidden_orientation_reported():
    p = square_problem()
    data = square_data(p)
    data["plaquettes"][0]["shape"] = "tri_missing_ll"
    violations = geometry_check(data, p)
    assert any("forbidden orientation" in v for v in violations)


def test_empty_corner_reported():
    p = square_problem()
    data = square_data(p)
    data["qubits"] = [q for q in data["qubits"] if (q["col"], q["row"]) != (1, 1)]
    violations = geometry_check(data, p)
    assert any("no qubit at [1, 1]" in v for v in violations)


def test_detached_cell_reported():
    p = square_problem()
    data = square_data(p)
    data["plaquettes"][0]["cell"] = [1, 0]
    violations = geometry_check(data)
    assert any("no left neighbour" in v for v in violations)


def test_mismatched_problem_fails(compiled_example, worked_example):
    other = ProblemSpec(
        num_logical=4,
        terms=[Term(t.qubits, t.coefficient) for t in worked_example.terms[:-1]] + [Term(frozenset({2, 4}))],
    )
    report = verify(compiled_example, other)
    assert not report.passed
    assert report.rowspace.witness is not None


@pytest.mark.parametrize("mangle", [
    lambda d: d["qubits"][0].pop("kind"),
    lambda d: d["qubits"][1].pop("row"),
    lambda d: d["plaquettes"][0].pop("cell"),
    lambda d: d["plaquettes"][0].update(shape=None),
])
def test_malformed_layout_gives_a_failing_report(mangle):
    p = square_problem()
    data = square_data(p)
    mangle(data)
    report = verify(data, p)
    assert not report.passed
    assert report.rowspace.witness["error"]
    assert report.geometry
