"""
Data models for optimization problems
Terms of the cost function, side conditions and the derived constraint space
"""
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from services.gf2core import BitMatrix


@dataclass(frozen=True)
class Term:
    """A k-body interaction; its parity qubit is the product of the listed logical spins"""
    qubits: FrozenSet[int]
    coefficient: float = 0.0

    @property
    def key(self) -> Tuple[int, ...]:
        return tuple(sorted(self.qubits))

    @property
    def label(self) -> str:
        # Single-digit indices concatenate like the usual "123" notation
        if all(q < 10 for q in self.qubits):
            return "".join(str(q) for q in self.key)
        return "_".join(str(q) for q in self.key)


@dataclass
class SideCondition:
    """Polynomial equality sum_i c_i * term_i = C_V with C_V in values"""
    term_indices: List[int]
    coefficients: List[float]
    values: List[int]


@dataclass
class ProblemSpec:
    """Input of the compiler"""
    num_logical: int
    terms: List[Term] = field(default_factory=list)
    side_conditions: List[SideCondition] = field(default_factory=list)

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    def term_index(self) -> Dict[Tuple[int, ...], int]:
        return {term.key: i for i, term in enumerate(self.terms)}

    def find_term(self, qubits) -> Optional[int]:
        return self.term_index().get(tuple(sorted(qubits)))


@dataclass
class ConstraintSpace:
    """Cyclic constraints over parity qubits; columns are term indices"""
    basis: BitMatrix

    @property
    def dimension(self) -> int:
        return self.basis.num_rows

    def constraints(self) -> List[FrozenSet[int]]:
        return self.basis.rows()
