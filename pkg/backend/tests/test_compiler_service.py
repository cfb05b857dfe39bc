import pytest

from models.compile_models import CompilerConfig
from models.errors import CompilationError, SideConditionError
from models.layout_models import FILLER, QubitKind, Shape
from models.problem_models import ProblemSpec, SideCondition, Term
from services.compiler_service import CompilerService, implied_space
from services.gf2core import rowspace_equal
from services.problem_service import constraint_space
from services.verifier import verify_compiled
from storage.json_store import canonical_json, layout_to_dict

SUITE_SEEDS = range(160)
ORACLE_CAP = 24
MIN_ORACLE_INSTANCES = 50


def compile_with(p, **kwargs):
    return CompilerService(CompilerConfig(**kwargs)).compile(p)


def group_balance(cl):
    """plaquettes minus free ancillas for every constraint group"""
    balance = {}
    for p in cl.layout.plaquettes:
        if not p.is_filler:
            balance[p.group] = balance.get(p.group, 0) + 1
    for q in cl.layout.qubits.values():
        if q.kind is QubitKind.ANCILLA and q.group not in (None, FILLER):
            balance[q.group] -= 1
    return balance


def test_worked_example_needs_three_groups(worked_example):
    cl = compile_with(worked_example)
    assert len(cl.groups) == 3
    assert cl.certificate["dims"] == [3, 3]
    assert cl.certificate["config"] == CompilerConfig().to_dict()
    report = verify_compiled(cl)
    assert report.passed, report.to_dict()


def test_worked_example_groups_are_constraints(worked_example):
    cl = compile_with(worked_example)
    space = constraint_space(worked_example)
    for constraint in cl.groups.values():
        assert constraint
        assert all(0 <= t < worked_example.num_terms for t in constraint)
    assert rowspace_equal(implied_space(cl.layout, worked_example.num_terms), space.basis)


def test_zero_dimensional_problem_is_a_bare_row():
    p = ProblemSpec(num_logical=3, terms=[Term(frozenset({1})), Term(frozenset({1, 2})), Term(frozenset({3}))])
    cl = compile_with(p)
    assert cl.layout.plaquettes == []
    assert sorted(q.position.col for q in cl.layout.qubits.values()) == [0, 1, 2]
    assert {q.position.row for q in cl.layout.qubits.values()} == {0}


def test_unconstrained_terms_are_appended_to_row_zero(worked_example):
    terms = list(worked_example.terms) + [Term(frozenset({5}))]
    p = ProblemSpec(num_logical=5, terms=terms)
    cl = compile_with(p)
    q = cl.layout.qubits[cl.layout.term_qubits()[7]]
    assert q.position.row == 0
    assert not cl.layout.plaquettes_of(q.id)


@pytest.mark.parametrize("seed", SUITE_SEEDS)
def test_random_suite_compiles_and_verifies(seed, random_problem):
    p = random_problem(seed)
    cl = compile_with(p, rng_seed=seed)
    space = constraint_space(p)

    assert len(cl.groups) == space.dimension
    assert all(value == 1 for value in group_balance(cl).values())
    assert not any(pl.shape is Shape.TRI_MISSING_LL for pl in cl.layout.plaquettes)

    exhaustive = len(cl.layout.qubits) <= ORACLE_CAP
    report = verify_compiled(cl, exhaustive=exhaustive, cap=ORACLE_CAP)
    assert report.passed, report.to_dict()
    if exhaustive:
        assert report.brute_force.passed is True
        assert report.energy.passed is True


def test_random_suite_cross_checks_enough_instances(random_problem):
    small = sum(
        1 for seed in SUITE_SEEDS
        if len(compile_with(random_problem(seed), rng_seed=seed).layout.qubits) <= ORACLE_CAP
    )
    assert small >= MIN_ORACLE_INSTANCES


def test_wide_beam_finds_the_single_ancilla_realisation(worked_example):
    cl = compile_with(worked_example, strategy="beam", beam_width=8, threads=2)
    assert cl.ancilla_cost() == (1, 4, 3)
    assert len(cl.groups) == 3
    assert verify_compiled(cl).passed


@pytest.mark.parametrize("seed", range(20))
def test_beam_never_uses_more_ancillas_than_greedy(seed, random_problem):
    p = random_problem(seed)
    greedy = compile_with(p, rng_seed=seed)
    beam = compile_with(p, strategy="beam", beam_width=3, rng_seed=seed, threads=2)
    assert beam.ancilla_cost()[0] <= greedy.ancilla_cost()[0]
    assert verify_compiled(beam, exhaustive=False).passed


@pytest.mark.parametrize("strategy", ["greedy", "beam"])
def test_compilation_is_deterministic(strategy, random_problem):
    p = random_problem(11)
    runs = [
        canonical_json(layout_to_dict(cl.layout, p, cl.layers))
        for cl in (compile_with(p, strategy=strategy, rng_seed=3, threads=4) for _ in range(2))
    ]
    assert runs[0] == runs[1]


def test_side_conditions_sit_contiguously_on_row_zero(side_condition_problem):
    p = side_condition_problem
    cl = compile_with(p)
    positions = {q.term: q.position for q in cl.layout.qubits.values() if q.kind is QubitKind.PARITY}
    for cond in p.side_conditions:
        cols = [positions[t].col for t in cond.term_indices]
        assert all(positions[t].row == 0 for t in cond.term_indices)
        assert max(cols) - min(cols) + 1 == len(cols)
    first = [positions[t].col for t in p.side_conditions[0].term_indices]
    second = [positions[t].col for t in p.side_conditions[1].term_indices]
    assert max(first) < min(second)
    assert verify_compiled(cl, exhaustive=False).passed


def test_place_side_conditions_layout(side_condition_problem):
    layout = CompilerService(CompilerConfig()).place_side_conditions(side_condition_problem)
    assert len(layout.qubits) == 4
    assert layout.height == 1
    assert layout.plaquettes == []


def place_row(keys, condition_terms):
    terms = [Term(frozenset(k)) for k in keys]
    conditions = [SideCondition(list(c), [1] * len(c), [0]) for c in condition_terms]
    layout = CompilerService(CompilerConfig()).place_side_conditions(
        ProblemSpec(num_logical=4, terms=terms, side_conditions=conditions)
    )
    return [layout.qubits[i].term for i in sorted(layout.qubits, key=lambda i: layout.qubits[i].position.col)]


def test_side_conditions_may_share_a_term_at_their_junction():
    assert place_row([(1, 2), (2, 3), (3, 4)], [[0, 1], [1, 2]]) == [0, 1, 2]


def test_nested_side_condition_is_accepted():
    assert place_row([(1, 2), (2, 3), (3, 4)], [[0, 1, 2], [0, 1]]) == [0, 1, 2]


def test_single_term_side_condition_inside_a_placed_run():
    assert place_row([(1, 2), (2, 3), (3, 4)], [[0, 1, 2], [1]]) == [0, 1, 2]


def test_side_condition_extends_the_row_on_the_left():
    assert place_row([(1, 2), (2, 3), (3, 4)], [[0, 1], [0, 2]]) == [2, 0, 1]


@pytest.mark.parametrize("conditions", [
    [[0, 1, 2], [0, 2]],
    [[0, 1, 2], [1, 3]],
])
def test_unsatisfiable_side_conditions(conditions):
    terms = [Term(frozenset(k)) for k in [(1, 2), (2, 3), (3, 4), (1, 4)]]
    p = ProblemSpec(
        num_logical=4,
        terms=terms,
        side_conditions=[SideCondition(list(c), [1] * len(c), [0]) for c in conditions],
    )
    with pytest.raises(SideConditionError, match="Unsatisfiable"):
        compile_with(p)


def test_layer_budget_exceeded(worked_example):
    with pytest.raises(CompilationError, match="Layer budget"):
        compile_with(worked_example, max_layers=1)


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        CompilerConfig(strategy="annealing")
    with pytest.raises(ValueError):
        CompilerConfig(beam_width=0)
