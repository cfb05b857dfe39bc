"""
Independent certification of compiled layouts

Every check starts from the layout JSON and the problem alone. Spin -1 is
bit 1 throughout, and a plaquette is satisfied when the XOR of its bits is 0.
"""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from config import Config
from models.compile_models import CheckResult, CompiledLayout, VerificationReport
from models.errors import BoundaryMapError, LayoutError
from models.layout_models import Position, QubitKind, Shape
from models.problem_models import ProblemSpec
from services.boundary_map import recompute_for_layout
from services.gf2core import BitMatrix, eliminate_columns, in_rowspace, rank, rref
from services.problem_service import constraint_space, logical_rank
from storage.json_store import layout_from_dict, layout_to_dict

logger = logging.getLogger(__name__)

CHUNK_BITS = 20
ENERGY_DECIMALS = 9


def _parity(words: np.ndarray) -> np.ndarray:
    """Bitwise parity of every uint64 entry"""
    v = words.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> np.uint64(shift)
    return v & np.uint64(1)


# ================================================================
# Rowspace
# ================================================================
def verify_rowspace(data: Dict, problem: ProblemSpec) -> CheckResult:
    """Implied ancilla-free constraints of the layout against the problem's constraint space"""
    target = constraint_space(problem).basis
    try:
        layout = layout_from_dict(data, problem)
    except (LayoutError, ValueError) as e:
        logger.error(f"ROWSPACE: layout rejected - {e}")
        return CheckResult(False, {"dims": [0, target.num_rows]}, {"error": str(e)})

    placed: Dict[int, List[int]] = {}
    for q in layout.qubits.values():
        if q.kind is QubitKind.PARITY:
            placed.setdefault(q.term, []).append(q.id)
    missing = [k for k in range(problem.num_terms) if k not in placed]
    doubled = [k for k, ids in placed.items() if len(ids) > 1]
    if missing or doubled:
        witness = {
            "missing_terms": [list(problem.terms[k].key) for k in missing],
            "repeated_terms": [list(problem.terms[k].key) for k in sorted(doubled)],
        }
        logger.error(f"ROWSPACE: term placement broken - {witness}")
        return CheckResult(False, {"dims": [0, target.num_rows]}, witness)

    reduced = eliminate_columns(layout.as_constraint_matrix(), layout.ancilla_ids())
    term_of = {ids[0]: k for k, ids in placed.items()}
    implied = rref(BitMatrix.from_sets(
        ([term_of[q] for q in row] for row in reduced.rows()),
        list(range(problem.num_terms)),
    ))
    dims = [implied.num_rows, target.num_rows]

    def labels(vector) -> List[List[int]]:
        return sorted(list(problem.terms[k].key) for k in vector)

    for row in target.rows():
        if not in_rowspace(implied, row):
            logger.error(f"ROWSPACE: required constraint not implied {labels(row)}")
            return CheckResult(False, {"dims": dims}, {"not_implied": labels(row)})
    for row in implied.rows():
        if not in_rowspace(target, row):
            logger.error(f"ROWSPACE: spurious constraint {labels(row)}")
            return CheckResult(False, {"dims": dims}, {"spurious": labels(row)})
    logger.info(f"ROWSPACE: pass, dimension {dims[0]}")
    return CheckResult(True, {"dims": dims})


# ================================================================
# Exhaustive oracles
# ================================================================
def _valid_patterns(data: Dict, problem: ProblemSpec) -> Tuple[int, int, np.ndarray]:
    """
    Enumerate every bit assignment of the placed qubits

    Returns the number of assignments satisfying all plaquettes and pins, the
    number predicted by the rank of the plaquette matrix, and the distinct term
    patterns of the survivors (bit k = term k).
    """
    layout = layout_from_dict(data, problem)
    ids = sorted(layout.qubits)
    column = {qubit_id: j for j, qubit_id in enumerate(ids)}
    n = len(ids)

    masks = []
    for p in layout.plaquettes:
        masks.append(sum(1 << column[q] for q in layout.corner_ids(p)))
    masks += [1 << column[pin] for pin in layout.pins]
    masks = np.array(masks, dtype=np.uint64)
    term_columns = sorted(
        (q.term, column[q.id]) for q in layout.qubits.values() if q.kind is QubitKind.PARITY
    )

    survivors = 0
    patterns = []
    total = 1 << n
    step = 1 << min(CHUNK_BITS, n)
    for start in range(0, total, step):
        x = np.arange(start, min(start + step, total), dtype=np.uint64)
        ok = np.ones(x.shape, dtype=bool)
        for mask in masks:
            ok &= _parity(x & mask) == 0
        good = x[ok]
        survivors += int(good.size)
        projected = np.zeros(good.shape, dtype=np.uint64)
        for k, j in term_columns:
            projected |= ((good >> np.uint64(j)) & np.uint64(1)) << np.uint64(k)
        patterns.append(np.unique(projected))

    expected = 1 << (n - rank(layout.as_constraint_matrix()))
    unique = np.unique(np.concatenate(patterns)) if patterns else np.zeros(0, dtype=np.uint64)
    return survivors, expected, unique


def _logical_images(problem: ProblemSpec) -> np.ndarray:
    """Term pattern of every logical state, one entry per state"""
    s = np.arange(1 << problem.num_logical, dtype=np.uint64)
    images = np.zeros(s.shape, dtype=np.uint64)
    for k, term in enumerate(problem.terms):
        mask = np.uint64(sum(1 << (q - 1) for q in term.qubits))
        images |= _parity(s & mask) << np.uint64(k)
    return images


def _energies(patterns: np.ndarray, problem: ProblemSpec) -> np.ndarray:
    couplings = np.array([term.coefficient for term in problem.terms], dtype=float)
    bits = np.array(
        [[(int(p) >> k) & 1 for k in range(problem.num_terms)] for p in patterns],
        dtype=float,
    ).reshape(len(patterns), problem.num_terms)
    return np.round((1.0 - 2.0 * bits) @ couplings, ENERGY_DECIMALS)


def _too_large(data: Dict, problem: ProblemSpec, cap: int) -> Optional[CheckResult]:
    n = len(data.get("qubits", []))
    if n > cap or problem.num_logical > cap:
        logger.info(f"Exhaustive check skipped: {n} qubits over the cap of {cap}")
        return CheckResult(None, {"qubits": n, "cap": cap})
    return None


def brute_force_check(data: Dict, problem: ProblemSpec, cap: Optional[int] = None) -> CheckResult:
    """Valid parity patterns of the layout against the images of all logical states"""
    cap = cap or Config.EXHAUSTIVE_CAP
    skipped = _too_large(data, problem, cap)
    if skipped:
        return skipped
    survivors, expected, physical = _valid_patterns(data, problem)
    logical = np.unique(_logical_images(problem))
    details = {"survivors": survivors, "expected": expected, "patterns": int(physical.size)}

    if survivors != expected:
        logger.error(f"BRUTE FORCE: {survivors} survivors, rank predicts {expected}")
        return CheckResult(False, details, {"survivors": survivors, "expected": expected})
    extra = np.setdiff1d(physical, logical)
    lacking = np.setdiff1d(logical, physical)
    if extra.size or lacking.size:
        pattern = int(extra[0]) if extra.size else int(lacking[0])
        witness = {
            "pattern": [(pattern >> k) & 1 for k in range(problem.num_terms)],
            "side": "physical only" if extra.size else "logical only",
        }
        logger.error(f"BRUTE FORCE: pattern sets differ - {witness}")
        return CheckResult(False, details, witness)
    logger.info(f"BRUTE FORCE: pass, {physical.size} patterns")
    return CheckResult(True, details)


def energy_equivalence_check(data: Dict, problem: ProblemSpec, cap: Optional[int] = None) -> CheckResult:
    """Energy spectrum over valid physical patterns against the logical spectrum"""
    cap = cap or Config.EXHAUSTIVE_CAP
    skipped = _too_large(data, problem, cap)
    if skipped:
        return skipped
    _, _, physical = _valid_patterns(data, problem)
    degeneracy = 1 << (problem.num_logical - logical_rank(problem))

    physical_energies = np.sort(np.repeat(_energies(physical, problem), degeneracy))
    logical_energies = np.sort(_energies(_logical_images(problem), problem))
    details = {"degeneracy": degeneracy}
    if physical_energies.size:
        details["ground_energy"] = float(physical_energies[0])

    if physical_energies.shape != logical_energies.shape:
        logger.error("ENERGY: spectra differ in size")
        return CheckResult(False, details, {
            "physical_states": int(physical_energies.size),
            "logical_states": int(logical_energies.size),
        })
    differ = np.nonzero(physical_energies != logical_energies)[0]
    if differ.size:
        i = int(differ[0])
        witness = {"physical": float(physical_energies[i]), "logical": float(logical_energies[i])}
        logger.error(f"ENERGY: spectra differ - {witness}")
        return CheckResult(False, details, witness)
    logger.info("ENERGY: pass")
    return CheckResult(True, details)


# ================================================================
# Geometry
# ================================================================
def geometry_check(data: Dict, problem: Optional[ProblemSpec] = None) -> List[str]:
    """Itemised geometric violations; an empty list means the layout is sound"""
    try:
        violations = _geometry_violations(data, problem)
    except (AttributeError, KeyError, TypeError, ValueError) as e:
        violations = [f"malformed layout entry: {e!r}"]

    if violations:
        logger.error(f"GEOMETRY: {len(violations)} violations")
    else:
        logger.info("GEOMETRY: pass")
    return violations


def _geometry_violations(data: Dict, problem: Optional[ProblemSpec]) -> List[str]:
    violations: List[str] = []
    occupied = {}
    for q in data.get("qubits", []):
        pos = (q["col"], q["row"])
        if pos in occupied:
            violations.append(f"qubits {occupied[pos]} and {q['id']} share position {list(pos)}")
        occupied[pos] = q["id"]

    cells = set()
    for p in data.get("plaquettes", []):
        col, row = p["cell"]
        try:
            shape = Shape(p["shape"])
        except ValueError:
            violations.append(f"unknown shape '{p['shape']}' on cell {[col, row]}")
            continue
        if shape is Shape.TRI_MISSING_LL:
            violations.append(f"forbidden orientation on cell {[col, row]}")
        if (col, row) in cells:
            violations.append(f"two plaquettes on cell {[col, row]}")
        cells.add((col, row))
        if shape is Shape.TRI_MISSING_LL:
            continue
        for corner in shape.corners(Position(col, row)):
            if (corner.col, corner.row) not in occupied:
                violations.append(f"cell {[col, row]} has no qubit at {[corner.col, corner.row]}")

    for col, row in sorted(cells):
        if col > 0 and (col - 1, row) not in cells:
            violations.append(f"cell {[col, row]} has no left neighbour")
        if row > 0 and (col, row - 1) not in cells:
            violations.append(f"cell {[col, row]} has no lower neighbour")

    if problem is not None:
        violations += _side_condition_violations(data, problem)

    if not violations:
        try:
            recompute_for_layout(layout_from_dict(data, problem))
        except (BoundaryMapError, LayoutError) as e:
            violations.append(f"boundary map: {e}")
    return violations


def _side_condition_violations(data: Dict, problem: ProblemSpec) -> List[str]:
    position = {
        tuple(sorted(q["term"])): (q["col"], q["row"])
        for q in data.get("qubits", []) if q.get("term") is not None
    }
    violations = []
    for n, cond in enumerate(problem.side_conditions):
        cols = []
        for k in cond.term_indices:
            key = problem.terms[k].key
            pos = position.get(key)
            if pos is None or pos[1] != 0:
                violations.append(f"side condition {n}: term {list(key)} not on row 0")
            else:
                cols.append(pos[0])
        if cols and max(cols) - min(cols) + 1 != len(cols):
            violations.append(f"side condition {n}: qubits not contiguous (columns {sorted(cols)})")
    return violations


# ================================================================
# Combined report
# ================================================================
def verify(data: Dict, problem: ProblemSpec, exhaustive: bool = True,
           cap: Optional[int] = None) -> VerificationReport:
    logger.info("VERIFY: checking layout against problem")
    report = VerificationReport(
        rowspace=verify_rowspace(data, problem),
        geometry=geometry_check(data, problem),
    )
    if exhaustive and report.rowspace.witness is None:
        report.brute_force = brute_force_check(data, problem, cap)
        report.energy = energy_equivalence_check(data, problem, cap)
    return report


def verify_compiled(cl: CompiledLayout, exhaustive: bool = True,
                    cap: Optional[int] = None) -> VerificationReport:
    """Verify a compiled layout through its serialized form"""
    return verify(layout_to_dict(cl.layout, cl.problem, cl.layers), cl.problem, exhaustive, cap)
