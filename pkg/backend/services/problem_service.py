"""
Problem parsing and constraint-space derivation
"""
import json
import logging
from typing import Any, Dict, List

from models.errors import ProblemParseError
from models.problem_models import ConstraintSpace, ProblemSpec, SideCondition, Term
from services.gf2core import BitMatrix, eliminate_columns, rank

logger = logging.getLogger(__name__)


def logical_label(qubit: int) -> str:
    return f"s{qubit}"


# ================================================================
# Parsing and validation
# ================================================================
def _qubit_list(raw: Any, num_logical: int, path: str) -> List[int]:
    if not isinstance(raw, list) or not raw:
        raise ProblemParseError("Term must be a non-empty list of qubit indices", path=path)
    for q in raw:
        if isinstance(q, bool) or not isinstance(q, int):
            raise ProblemParseError(f"Qubit index {q!r} is not an integer", path=path)
        if q < 1 or q > num_logical:
            raise ProblemParseError(
                f"Qubit index {q} out of range [1, {num_logical}]", path=path
            )
    if len(set(raw)) != len(raw):
        raise ProblemParseError("Duplicate index inside a term", path=path)
    return raw


def _number(raw: Any, path: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ProblemParseError(f"Expected a number, got {raw!r}", path=path)
    return float(raw)


def parse_problem(text: str) -> ProblemSpec:
    """Parse and validate a problem file"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProblemParseError(f"Malformed JSON: {e.msg}", line=e.lineno, column=e.colno)

    if not isinstance(data, dict):
        raise ProblemParseError("Problem file must contain a JSON object", path="$")
    num_logical = data.get("num_logical")
    if isinstance(num_logical, bool) or not isinstance(num_logical, int) or num_logical < 0:
        raise ProblemParseError("num_logical must be a non-negative integer", path="num_logical")

    raw_terms = data.get("terms", [])
    if not isinstance(raw_terms, list):
        raise ProblemParseError("terms must be a list", path="terms")

    terms: List[Term] = []
    seen: Dict[tuple, int] = {}
    for i, raw in enumerate(raw_terms):
        path = f"terms[{i}]"
        if not isinstance(raw, dict):
            raise ProblemParseError("Term entry must be an object", path=path)
        qubits = _qubit_list(raw.get("qubits"), num_logical, f"{path}.qubits")
        key = tuple(sorted(qubits))
        if key in seen:
            raise ProblemParseError(f"Duplicate term {list(key)} (first at terms[{seen[key]}])", path=path)
        seen[key] = i
        coeff = _number(raw.get("coeff", 0.0), f"{path}.coeff")
        terms.append(Term(frozenset(qubits), coeff))

    raw_conditions = data.get("side_conditions", [])
    if not isinstance(raw_conditions, list):
        raise ProblemParseError("side_conditions must be a list", path="side_conditions")

    conditions: List[SideCondition] = []
    for c, raw in enumerate(raw_conditions):
        path = f"side_conditions[{c}]"
        if not isinstance(raw, dict):
            raise ProblemParseError("Side condition must be an object", path=path)
        cond_terms = raw.get("terms")
        if not isinstance(cond_terms, list) or not cond_terms:
            raise ProblemParseError("Side condition needs a non-empty term list", path=f"{path}.terms")
        coeffs = raw.get("coeffs", [1.0] * len(cond_terms))
        if not isinstance(coeffs, list) or len(coeffs) != len(cond_terms):
            raise ProblemParseError("coeffs must match terms in length", path=f"{path}.coeffs")
        values = raw.get("values")
        if not isinstance(values, list) or not values:
            raise ProblemParseError("values must be a non-empty list", path=f"{path}.values")
        for v in values:
            if isinstance(v, bool) or not isinstance(v, int):
                raise ProblemParseError(f"Constraint value {v!r} is not an integer", path=f"{path}.values")

        indices: List[int] = []
        for t, raw_qubits in enumerate(cond_terms):
            qubits = _qubit_list(raw_qubits, num_logical, f"{path}.terms[{t}]")
            key = tuple(sorted(qubits))
            if key not in seen:
                # Side-condition-only terms still need a parity qubit
                seen[key] = len(terms)
                terms.append(Term(frozenset(qubits), 0.0))
            if seen[key] in indices:
                raise ProblemParseError(f"Term {list(key)} repeated in side condition", path=path)
            indices.append(seen[key])
        conditions.append(SideCondition(
            term_indices=indices,
            coefficients=[_number(x, f"{path}.coeffs") for x in coeffs],
            values=list(values),
        ))

    problem = ProblemSpec(num_logical=num_logical, terms=terms, side_conditions=conditions)
    logger.info(
        f"Parsed problem: N={num_logical}, {len(terms)} terms, {len(conditions)} side conditions"
    )
    return problem


# ================================================================
# Constraint algebra
# ================================================================
def build_interaction_matrix(p: ProblemSpec) -> BitMatrix:
    """
    One row per term: ones on its logical qubits and on its own parity column

    Logical columns are labelled "s1".."sN", parity columns by term index.
    """
    labels = [logical_label(q) for q in range(1, p.num_logical + 1)]
    labels += list(range(p.num_terms))
    rows = [
        [logical_label(q) for q in term.key] + [k]
        for k, term in enumerate(p.terms)
    ]
    return BitMatrix.from_sets(rows, labels)


def logical_rank(p: ProblemSpec) -> int:
    """GF(2) rank of the logical block of the interaction matrix"""
    labels = [logical_label(q) for q in range(1, p.num_logical + 1)]
    rows = [[logical_label(q) for q in term.key] for term in p.terms]
    return rank(BitMatrix.from_sets(rows, labels))


def constraint_space(p: ProblemSpec) -> ConstraintSpace:
    """Cyclic constraints: the rows of the eliminated interaction matrix with zero logical part"""
    b = build_interaction_matrix(p)
    basis = eliminate_columns(b, [logical_label(q) for q in range(1, p.num_logical + 1)])
    logger.debug(f"Constraint space dimension {basis.num_rows} over {p.num_terms} terms")
    return ConstraintSpace(basis=basis)
