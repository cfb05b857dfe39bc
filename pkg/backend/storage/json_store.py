"""
JSON persistence of problems, layouts and verification reports

Layouts are written canonically: qubits sorted by id, plaquettes by cell,
keys sorted, so equal layouts produce equal bytes.
"""
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

from models.errors import LayoutError
from models.layout_models import FILLER, Layout, Position, QubitKind, Shape
from models.problem_models import ProblemSpec
from services.problem_service import parse_problem

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def canonical_json(data: Dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ================================================================
# Layouts
# ================================================================
def layout_to_dict(layout: Layout, problem: ProblemSpec, layers: Optional[int] = None) -> Dict:
    qubits = []
    for qubit_id in sorted(layout.qubits):
        q = layout.qubits[qubit_id]
        entry = {"id": q.id, "col": q.position.col, "row": q.position.row, "kind": q.kind.value}
        if q.kind is QubitKind.PARITY:
            entry["term"] = list(problem.terms[q.term].key)
        qubits.append(entry)
    plaquettes = [
        {"cell": [p.cell.col, p.cell.row], "shape": p.shape.value, "group": p.group}
        for p in sorted(layout.plaquettes, key=lambda p: (p.cell.row, p.cell.col))
    ]
    data = {"qubits": qubits, "plaquettes": plaquettes, "pins": sorted(layout.pins)}
    if layers is not None:
        data["layers"] = layers
    return data


def layout_from_dict(data: Dict, problem: Optional[ProblemSpec] = None) -> Layout:
    """
    Rebuild a layout from its JSON form

    With a problem, term qubit lists map to the problem's term indices; without
    one, indices follow the sorted distinct term lists of the file. Any malformed
    entry surfaces as LayoutError.
    """
    try:
        return _build_layout(data, problem)
    except LayoutError:
        raise
    except KeyError as e:
        raise LayoutError(f"Layout JSON entry lacks {e}") from e
    except (AttributeError, TypeError, ValueError) as e:
        raise LayoutError(f"Malformed layout JSON: {e}") from e


def _build_layout(data: Dict, problem: Optional[ProblemSpec]) -> Layout:
    raw_qubits = data["qubits"]
    raw_plaquettes = data["plaquettes"]

    keys = sorted({tuple(sorted(q["term"])) for q in raw_qubits if q.get("term") is not None})
    local_index = {key: i for i, key in enumerate(keys)}

    layout = Layout()
    for q in sorted(raw_qubits, key=lambda q: q["id"]):
        kind = QubitKind(q["kind"])
        term = None
        if kind is QubitKind.PARITY:
            key = tuple(sorted(q.get("term") or ()))
            if problem is None:
                term = local_index.get(key)
            else:
                term = problem.find_term(key)
                if term is None:
                    raise LayoutError(f"Qubit {q['id']} carries unknown term {list(key)}")
        # add_qubit records fixed ancillas as pins
        layout.add_qubit(Position(q["col"], q["row"]), kind, term=term, qubit_id=q["id"])

    for p in raw_plaquettes:
        col, row = p["cell"]
        group = p.get("group", FILLER)
        layout.add_plaquette(Position(col, row), Shape(p["shape"]), group)

    pins = sorted(data.get("pins", layout.pins))
    if pins != sorted(layout.pins):
        raise LayoutError(f"Pins {pins} disagree with the fixed ancillas {sorted(layout.pins)}")
    return layout


def term_labels(data: Dict) -> Dict[int, str]:
    """qubit id -> printable term label, e.g. "123" """
    labels = {}
    for q in data.get("qubits", []):
        if q.get("term") is not None:
            key = sorted(q["term"])
            sep = "" if all(i < 10 for i in key) else "_"
            labels[q["id"]] = sep.join(str(i) for i in key)
    return labels


# ================================================================
# Files
# ================================================================
def load_problem(path: PathLike) -> ProblemSpec:
    text = Path(path).read_text(encoding="utf-8")
    return parse_problem(text)


def load_json(path: PathLike) -> Dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def save_json(path: PathLike, data: Dict):
    Path(path).write_text(canonical_json(data), encoding="utf-8")
    logger.info(f"Wrote {path}")


def save_layout(path: PathLike, layout: Layout, problem: ProblemSpec, layers: Optional[int] = None):
    save_json(path, layout_to_dict(layout, problem, layers))


def group_constraints(problem: ProblemSpec, groups: Dict[int, frozenset]) -> List[Dict]:
    """Realised constraint of every group, as lists of term qubit lists"""
    return [
        {"group": g, "terms": sorted(list(problem.terms[t].key) for t in groups[g])}
        for g in sorted(groups)
    ]
