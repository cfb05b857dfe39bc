import json
import os
import sys
from itertools import combinations

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.problem_models import ProblemSpec, SideCondition, Term  # noqa: E402
from services.problem_service import parse_problem  # noqa: E402

# Terms 4, 12, 13, 14, 23, 34, 123 on four logical spins
WORKED_EXAMPLE = {
    "num_logical": 4,
    "terms": [
        {"qubits": [4], "coeff": 1.0},
        {"qubits": [1, 2], "coeff": 1.0},
        {"qubits": [1, 3], "coeff": 1.0},
        {"qubits": [1, 4], "coeff": 1.0},
        {"qubits": [2, 3], "coeff": 1.0},
        {"qubits": [3, 4], "coeff": 1.0},
        {"qubits": [1, 2, 3], "coeff": 1.0},
    ],
}


def make_random_problem(seed: int, max_size: int = 4) -> ProblemSpec:
    """N in [3, 8], K in [N, 2N + 4], distinct terms of at most max_size spins"""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    pool = [
        combo
        for size in range(1, min(max_size, n) + 1)
        for combo in combinations(range(1, n + 1), size)
    ]
    k = int(rng.integers(n, min(2 * n + 4, len(pool)) + 1))
    picked = sorted(rng.choice(len(pool), size=k, replace=False))
    terms = [
        Term(frozenset(pool[i]), float(rng.integers(-3, 4)))
        for i in picked
    ]
    return ProblemSpec(num_logical=n, terms=terms)


@pytest.fixture
def worked_example() -> ProblemSpec:
    return parse_problem(json.dumps(WORKED_EXAMPLE))


@pytest.fixture
def random_problem():
    return make_random_problem


@pytest.fixture
def side_condition_problem() -> ProblemSpec:
    """Six spins, sixteen terms, two side conditions of two terms each"""
    keys = [(q,) for q in range(1, 7)]
    keys += [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 6), (1, 3), (2, 4), (3, 5), (4, 6)]
    terms = [Term(frozenset(key), 1.0) for key in keys]
    index = {key: i for i, key in enumerate(keys)}
    conditions = [
        SideCondition([index[(1, 2)], index[(2, 3)]], [1.0, 1.0], [0]),
        SideCondition([index[(4, 5)], index[(5, 6)]], [1.0, 1.0], [-2, 0, 2]),
    ]
    return ProblemSpec(num_logical=6, terms=terms, side_conditions=conditions)
