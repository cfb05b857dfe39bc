"""
Data models for compilation
Compiler settings, placement plans and compiled layouts
"""
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from config import Config
from models.layout_models import FILLER, GroupId, Layout, Position, QubitKind, Shape
from models.problem_models import ProblemSpec

STRATEGIES = ("greedy", "beam")


@dataclass
class CompilerConfig:
    """Knobs of one compilation run"""
    strategy: str = "greedy"
    beam_width: int = 4
    candidate_combination_depth: int = 2
    max_layers: int = 200
    rng_seed: int = 0
    trim: bool = True
    max_candidates: int = 512
    threads: int = 1

    def __post_init__(self):
        errors = []
        if self.strategy not in STRATEGIES:
            errors.append(f"unknown strategy '{self.strategy}'")
        if self.beam_width < 1:
            errors.append("beam width must be >= 1")
        if self.candidate_combination_depth < 1:
            errors.append("candidate depth must be >= 1")
        if self.max_layers < 1:
            errors.append("max_layers must be >= 1")
        if self.max_candidates < 1:
            errors.append("max_candidates must be >= 1")
        if errors:
            raise ValueError(f"Invalid compiler configuration: {', '.join(errors)}")

    @classmethod
    def from_config(cls, **overrides) -> "CompilerConfig":
        values = dict(
            strategy=Config.STRATEGY,
            beam_width=Config.BEAM_WIDTH,
            candidate_combination_depth=Config.DEPTH,
            max_layers=Config.MAX_LAYERS,
            threads=Config.threads(),
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def to_dict(self) -> Dict:
        return {
            "strategy": self.strategy,
            "beam_width": self.beam_width,
            "depth": self.candidate_combination_depth,
            "max_layers": self.max_layers,
            "seed": self.rng_seed,
            "trim": self.trim,
        }


@dataclass
class PlacementPlan:
    """Plaquettes, new qubits and ancillas realising one constraint in the open layer"""
    group: GroupId
    edge: str
    plaquettes: List[Tuple[Position, Shape]] = field(default_factory=list)
    new_parity_qubits: List[Tuple[Position, int]] = field(default_factory=list)
    free_ancillas: List[Position] = field(default_factory=list)
    fixed_ancillas: List[Position] = field(default_factory=list)
    # Fixed ancillas placed by an earlier group of the same layer and shared here
    shared_fixed: List[Position] = field(default_factory=list)
    # Lattice span touched on the old boundary: (first, last) column or row
    span: Tuple[int, int] = (0, 0)

    @property
    def footprint(self) -> int:
        return self.span[1] - self.span[0] + 1

    def score(self) -> Tuple[int, int, int, int]:
        return (
            len(self.plaquettes),
            len(self.free_ancillas),
            self.footprint,
            len(self.fixed_ancillas),
        )

    def corner_positions(self) -> List[Position]:
        corners = []
        for cell, shape in self.plaquettes:
            corners.extend(shape.corners(cell))
        return corners


@dataclass
class LayoutStats:
    qubits: Dict[str, int]
    plaquettes: Dict[str, int]
    groups: int
    fillers: int
    layers: int

    @classmethod
    def of(cls, layout: Layout, layers: int) -> "LayoutStats":
        qubits = {kind.value: 0 for kind in QubitKind}
        for q in layout.qubits.values():
            qubits[q.kind.value] += 1
        shapes = {shape.value: 0 for shape in Shape if shape is not Shape.TRI_MISSING_LL}
        for p in layout.plaquettes:
            shapes[p.shape.value] += 1
        return cls(
            qubits=qubits,
            plaquettes=shapes,
            groups=len(layout.group_ids()),
            fillers=sum(1 for p in layout.plaquettes if p.group == FILLER),
            layers=layers,
        )

    @property
    def free_ancillas(self) -> int:
        return self.qubits[QubitKind.ANCILLA.value]

    @property
    def fixed_ancillas(self) -> int:
        return self.qubits[QubitKind.FIXED.value]

    @property
    def total_plaquettes(self) -> int:
        return sum(self.plaquettes.values())

    def to_dict(self) -> Dict:
        return {
            "qubits": dict(self.qubits),
            "plaquettes": dict(self.plaquettes),
            "total_plaquettes": self.total_plaquettes,
            "free_ancillas": self.free_ancillas,
            "fixed_ancillas": self.fixed_ancillas,
            "groups": self.groups,
            "fillers": self.fillers,
            "layers": self.layers,
        }


@dataclass
class CompiledLayout:
    """Final layout plus the constraint realised by every group"""
    layout: Layout
    problem: ProblemSpec
    groups: Dict[int, FrozenSet[int]] = field(default_factory=dict)
    layers: int = 0
    config: Optional[CompilerConfig] = None
    certificate: Optional[Dict] = None

    @property
    def stats(self) -> LayoutStats:
        return LayoutStats.of(self.layout, self.layers)

    def ancilla_cost(self) -> Tuple[int, int, int]:
        s = self.stats
        return (s.free_ancillas + s.fixed_ancillas, s.total_plaquettes, self.layers)


@dataclass
class CheckResult:
    """Outcome of one verifier check; passed is None when the check was skipped"""
    passed: Optional[bool]
    details: Dict = field(default_factory=dict)
    witness: Optional[Dict] = None

    def to_dict(self) -> Dict:
        if self.passed is None:
            return {"status": "skipped", **self.details}
        data = {"status": "pass" if self.passed else "fail", **self.details}
        if self.witness is not None:
            data["witness"] = self.witness
        return data


@dataclass
class VerificationReport:
    rowspace: CheckResult
    geometry: List[str]
    brute_force: Optional[CheckResult] = None
    energy: Optional[CheckResult] = None

    @property
    def passed(self) -> bool:
        checks = [self.rowspace] + [c for c in (self.brute_force, self.energy) if c is not None]
        return all(c.passed is not False for c in checks) and not self.geometry

    def to_dict(self) -> Dict:
        skipped = {"status": "skipped"}
        return {
            "rowspace": "pass" if self.rowspace.passed else "fail",
            "dims": list(self.rowspace.details.get("dims", [0, 0])),
            "witness": self.rowspace.witness,
            "brute_force": self.brute_force.to_dict() if self.brute_force else skipped,
            "energy": self.energy.to_dict() if self.energy else skipped,
            "geometry": list(self.geometry),
            "passed": self.passed,
        }
