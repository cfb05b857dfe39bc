import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from models.compile_models import CompiledLayout, CompilerConfig, PlacementPlan
from models.errors import BoundaryMapError, CompilationError, PlacementError, SideConditionError
from models.layout_models import Layout, Position, QubitKind
from models.problem_models import ConstraintSpace, ProblemSpec
from services.boundary_map import recompute_for_layout, to_boundary_form
from services.decomposer import (
    Frame,
    add_degree_of_freedom,
    apply_plan,
    decompose_corner,
    decompose_right,
    decompose_top,
    seal_layer,
)
from services.gf2core import BitMatrix, eliminate_columns, in_rowspace, rowspace_equal, rref, xor_sets
from services.problem_service import constraint_space

logger = logging.getLogger(__name__)


def implied_space(layout: Layout, num_terms: int) -> BitMatrix:
    """Ancilla-free constraints enforced by the layout, over term indices"""
    reduced = eliminate_columns(layout.as_constraint_matrix(), layout.ancilla_ids())
    terms = {q.id: q.term for q in layout.qubits.values() if q.kind is QubitKind.PARITY}
    rows = [[terms[qubit_id] for qubit_id in row] for row in reduced.rows()]
    return rref(BitMatrix.from_sets(rows, list(range(num_terms))))


# ================================================================
# Search state
# ================================================================
@dataclass(frozen=True)
class Choice:
    """A constraint together with the plan realising it in the open layer"""
    constraint: FrozenSet[int]
    plan: PlacementPlan
    # Terms put on row 0 first when the layout is still empty
    seed: Tuple[int, ...] = ()

    @property
    def key(self) -> Tuple:
        return self.plan.score() + (tuple(sorted(self.constraint)), self.plan.edge)


@dataclass(frozen=True)
class Action:
    kind: str  # "place", "seal" or "dof"
    choice: Optional[Choice] = None
    term: Optional[int] = None


@dataclass
class _Layer:
    # Occupied span of the new row / new column, None while unused
    top: Optional[Tuple[int, int]] = None
    right: Optional[Tuple[int, int]] = None

    @property
    def empty(self) -> bool:
        return self.top is None and self.right is None


@dataclass
class _State:
    layout: Layout
    frame: Optional[Frame]
    layer: _Layer = field(default_factory=_Layer)
    groups: Dict[int, FrozenSet[int]] = field(default_factory=dict)
    dimension: int = 0
    layers: int = 0
    steps: int = 0
    seq: Tuple[int, ...] = ()

    def copy(self) -> "_State":
        return replace(
            self,
            layout=self.layout.copy(),
            layer=replace(self.layer),
            groups=dict(self.groups),
        )

    def rank_key(self) -> Tuple:
        return (len(self.layout.ancilla_ids()), len(self.layout.plaquettes), self.seq)


def _merge_span(span: Optional[Tuple[int, int]], new: Tuple[int, int]) -> Tuple[int, int]:
    if span is None:
        return new
    return (min(span[0], new[0]), max(span[1], new[1]))


def _touches_chain(span: Optional[Tuple[int, int]], new: Tuple[int, int]) -> bool:
    """A group joins an existing chain only end to end"""
    return span is None or new[0] == span[1] or new[1] == span[0]


class CompilerService:
    """
    Layer-by-layer plaquette compiler

    Each placed group raises the dimension of the implied ancilla-free
    constraint space by exactly one; fillers and degree-of-freedom rows leave
    it unchanged. The run ends once the implied space equals the constraint
    space of the problem.
    """

    def __init__(self, cfg: Optional[CompilerConfig] = None):
        self.cfg = cfg or CompilerConfig.from_config()
        self.problem: Optional[ProblemSpec] = None
        self.space: Optional[ConstraintSpace] = None

    # ================================================================
    # Candidates
    # ================================================================
    def candidates(self, state: _State, implied: BitMatrix) -> List[FrozenSet[int]]:
        """XOR combinations of up to `depth` basis rows not yet implied by the layout"""
        basis = self.space.constraints()
        singles: List[FrozenSet[int]] = []
        combos: List[FrozenSet[int]] = []
        seen = set()
        for size in range(1, min(self.cfg.candidate_combination_depth, len(basis)) + 1):
            for rows in itertools.combinations(range(len(basis)), size):
                c = xor_sets(basis[i] for i in rows)
                key = tuple(sorted(c))
                if not c or key in seen:
                    continue
                seen.add(key)
                (singles if size == 1 else combos).append(c)

        room = self.cfg.max_candidates - len(singles)
        if len(combos) > max(room, 0):
            rng = np.random.default_rng([self.cfg.rng_seed, state.steps])
            keep = sorted(rng.choice(len(combos), size=max(room, 0), replace=False))
            combos = [combos[i] for i in keep]
        return [c for c in singles + combos if not in_rowspace(implied, c)]

    def _seed_choice(self, c: FrozenSet[int], group: int) -> Choice:
        """First constraint of an empty layout: part of it on row 0, the rest above"""
        terms = sorted(c)
        width = max(2, len(terms) - 2)
        seed, new = terms[:width], terms[width:]
        trial = Layout()
        ids = [trial.add_qubit(Position(col, 0), QubitKind.PARITY, term=t) for col, t in enumerate(seed)]
        plan = decompose_top(trial, Frame(width, 1), ids, new, group)
        return Choice(constraint=c, plan=plan, seed=tuple(seed))

    def _evaluate(self, state: _State, c: FrozenSet[int], bmap) -> List[Choice]:
        """Every plan that realises c in the open layer"""
        group = len(state.groups)
        if state.frame is None:
            try:
                return [self._seed_choice(c, group)]
            except PlacementError as e:
                logger.debug(f"Seed rejected for {sorted(c)}: {e}")
                return []

        layout = state.layout
        placed = layout.term_qubits()
        new_terms = sorted(t for t in c if t not in placed)
        targets = [placed[t] for t in c if t in placed]
        if not targets:
            return []
        cb = sorted(to_boundary_form(bmap, targets))
        if not cb:
            return []

        h, w = state.frame.top, state.frame.right
        positions = {q: layout.qubits[q].position for q in cb}
        on_top = all(pos.row == h and pos.col <= w for pos in positions.values())
        on_right = all(pos.col == w and pos.row <= h for pos in positions.values())
        on_edges = all(
            (pos.row == h and pos.col <= w) or (pos.col == w and pos.row <= h)
            for pos in positions.values()
        )

        choices = []
        attempts = []
        if on_top and len(new_terms) <= 2:
            attempts.append(("top", lambda: decompose_top(layout, state.frame, cb, new_terms, group)))
        if on_right and len(new_terms) <= 2:
            attempts.append(("right", lambda: decompose_right(layout, state.frame, cb, new_terms, group)))
        if on_edges and state.layer.empty and len(new_terms) <= 3:
            c_top = [q for q in cb if positions[q].row == h]
            c_right = [q for q in cb if positions[q].row != h]
            attempts.append(("corner", lambda: decompose_corner(
                layout, state.frame, c_top, c_right, new_terms, group)))

        for edge, build in attempts:
            try:
                plan = build()
            except PlacementError as e:
                logger.debug(f"{edge} rejected for {sorted(c)}: {e}")
                continue
            chain = {"top": state.layer.top, "right": state.layer.right}.get(edge)
            if not _touches_chain(chain, plan.span):
                continue
            choices.append(Choice(constraint=c, plan=plan))
        return choices

    def select_constraint(self, state: _State) -> Optional[Action]:
        """Best next step of a state, None once every constraint is implied"""
        actions = self._actions(state)
        return actions[0] if actions else None

    def _actions(self, state: _State) -> List[Action]:
        """Possible next steps, best first"""
        if state.dimension == self.space.dimension:
            return []
        implied = implied_space(state.layout, self.problem.num_terms)
        candidates = self.candidates(state, implied)
        if not candidates:
            raise CompilationError("Constraint space not implied but no candidate left")

        bmap = recompute_for_layout(state.layout) if state.frame is not None else None
        choices: List[Choice] = []
        for c in candidates:
            choices.extend(self._evaluate(state, c, bmap))
        if choices:
            choices.sort(key=lambda ch: ch.key)
            for ch in choices[:3]:
                logger.debug(f"Candidate {sorted(ch.constraint)} on {ch.plan.edge}: score {ch.plan.score()}")
            return [Action("place", choice=ch) for ch in choices]
        if not state.layer.empty:
            return [Action("seal")]
        return [Action("dof", term=self._dof_term(state, candidates))]

    def _dof_term(self, state: _State, candidates: Sequence[FrozenSet[int]]) -> int:
        placed = state.layout.term_qubits()
        pending = [
            (len([t for t in c if t not in placed]), tuple(sorted(c)))
            for c in candidates
            if any(t not in placed for t in c)
        ]
        if not pending:
            raise CompilationError("No candidate fits and none has an unplaced term")
        _, best = min(pending)
        return min(t for t in best if t not in placed)

    # ================================================================
    # State transitions
    # ================================================================
    def _advance(self, state: _State, action: Action, rank: int) -> _State:
        nxt = state.copy()
        nxt.steps += 1
        nxt.seq = state.seq + (rank,)
        if action.kind == "place":
            self._place(nxt, action.choice)
        elif action.kind == "seal":
            self._seal(nxt)
        else:
            self._add_degree_of_freedom(nxt, action.term)
        return nxt

    def _place(self, state: _State, choice: Choice):
        plan = choice.plan
        if choice.seed:
            for col, term in enumerate(choice.seed):
                state.layout.add_qubit(Position(col, 0), QubitKind.PARITY, term=term)
            state.frame = Frame(len(choice.seed), 1)
        if len(plan.free_ancillas) != len(plan.plaquettes) - 1:
            raise CompilationError(
                f"Group {plan.group}: {len(plan.plaquettes)} plaquettes over {len(plan.free_ancillas)} free ancillas"
            )
        apply_plan(state.layout, plan)
        state.groups[plan.group] = choice.constraint

        dimension = implied_space(state.layout, self.problem.num_terms).num_rows
        if dimension != state.dimension + 1:
            logger.error(f"Group {plan.group} moved the implied dimension {state.dimension} -> {dimension}")
            raise CompilationError(
                f"Group {plan.group} changed the implied dimension by {dimension - state.dimension}"
            )
        state.dimension = dimension
        logger.info(
            f"PLACE: group {plan.group} {sorted(choice.constraint)} on {plan.edge}, "
            f"{len(plan.plaquettes)} plaquettes, {len(plan.free_ancillas)} free, "
            f"{len(plan.fixed_ancillas)} fixed"
        )

        if plan.edge == "top":
            state.layer.top = _merge_span(state.layer.top, plan.span)
        elif plan.edge == "right":
            state.layer.right = _merge_span(state.layer.right, plan.span)
        else:
            # A corner group occupies both edges of its layer
            state.layer.top = state.layer.top or plan.span
            state.layer.right = state.layer.right or plan.span
            self._seal(state)

    def _seal(self, state: _State):
        top_used = state.layer.top is not None
        right_used = state.layer.right is not None
        plan = seal_layer(state.layout, state.frame, top_used, right_used)
        apply_plan(state.layout, plan)
        state.frame = Frame(
            state.frame.width + (1 if right_used else 0),
            state.frame.height + (1 if top_used else 0),
        )
        state.layer = _Layer()
        state.layers += 1
        logger.info(
            f"SEAL: layer {state.layers} closed with {len(plan.plaquettes)} fillers, "
            f"frame {state.frame.width}x{state.frame.height}"
        )
        if state.layers > self.cfg.max_layers:
            logger.error(f"Layer budget of {self.cfg.max_layers} exceeded")
            raise CompilationError(f"Layer budget exceeded ({self.cfg.max_layers} layers)")

    def _add_degree_of_freedom(self, state: _State, term: int):
        if state.frame is None:
            state.layout.add_qubit(Position(0, 0), QubitKind.PARITY, term=term)
            state.frame = Frame(1, 1)
            logger.info(f"DOF: term {term} starts the layout")
            return
        plan = add_degree_of_freedom(state.layout, state.frame, term)
        apply_plan(state.layout, plan)
        logger.info(f"DOF: term {term} placed with {len(plan.plaquettes)} squares")
        if plan.plaquettes:
            state.layer.top = plan.span
            self._seal(state)
        else:
            state.frame = Frame(state.frame.width + 1, state.frame.height)

    # ================================================================
    # Strategies
    # ================================================================
    def _run_greedy(self, state: _State) -> _State:
        while True:
            action = self.select_constraint(state)
            if action is None:
                return state
            state = self._advance(state, action, 0)

    def _expand(self, state: _State) -> Optional[List[_State]]:
        actions = self._actions(state)
        if not actions:
            return None
        return [
            self._advance(state, action, rank)
            for rank, action in enumerate(actions[:self.cfg.beam_width])
        ]

    def _run_beam(self, initial: _State) -> _State:
        """Keep the `beam_width` cheapest partial layouts at every step"""
        beam = [initial]
        finished: List[_State] = []
        with ThreadPoolExecutor(max_workers=max(self.cfg.threads, 1)) as pool:
            while beam:
                children: List[_State] = []
                # map keeps input order, so results do not depend on thread timing
                for state, kids in zip(beam, pool.map(self._expand, beam)):
                    if kids is None:
                        finished.append(state)
                    else:
                        children.extend(kids)
                children.sort(key=_State.rank_key)
                beam = children[:self.cfg.beam_width]
                logger.debug(f"Beam: {len(beam)} open, {len(finished)} finished")
        return min(finished, key=_State.rank_key)

    # ================================================================
    # Pipeline
    # ================================================================
    def place_side_conditions(self, p: ProblemSpec) -> Layout:
        """Side-condition terms on row 0, each condition contiguous, in input order"""
        layout = Layout()
        row: List[int] = []
        for n, cond in enumerate(p.side_conditions):
            fresh = list(dict.fromkeys(t for t in cond.term_indices if t not in row))
            shared = sorted(row.index(t) for t in set(cond.term_indices) if t in row)
            if not shared:
                row.extend(fresh)
                continue
            first, last = shared[0], shared[-1]
            contiguous = last - first + 1 == len(shared)
            # New terms can only extend a shared run that touches an end of the row
            if contiguous and not fresh:
                continue
            if contiguous and last == len(row) - 1:
                row.extend(fresh)
            elif contiguous and first == 0:
                row[:0] = fresh
            else:
                shared_terms = sorted(row[i] for i in shared)
                logger.error(f"Side condition {n} shares terms {shared_terms} that cannot stay contiguous")
                raise SideConditionError(
                    f"Unsatisfiable side-condition placement: condition {n} shares terms {shared_terms}"
                )
        for col, term in enumerate(row):
            layout.add_qubit(Position(col, 0), QubitKind.PARITY, term=term)
        if row:
            logger.info(f"SIDE CONDITIONS: {len(p.side_conditions)} conditions over {len(row)} bottom-row qubits")
        return layout

    def _append_unplaced(self, layout: Layout, num_terms: int) -> List[int]:
        placed = layout.term_qubits()
        col = 1 + max((q.position.col for q in layout.qubits.values() if q.position.row == 0), default=-1)
        added = []
        for term in range(num_terms):
            if term not in placed:
                layout.add_qubit(Position(col, 0), QubitKind.PARITY, term=term)
                added.append(term)
                col += 1
        return added

    def _finalize(self, state: _State) -> CompiledLayout:
        if not state.layer.empty:
            state = self._advance(state, Action("seal"), 0)
        cl = CompiledLayout(
            layout=state.layout,
            problem=self.problem,
            groups=dict(sorted(state.groups.items())),
            layers=state.layers,
            config=self.cfg,
        )
        return self.trim_layout(cl) if self.cfg.trim else cl

    def compile(self, p: ProblemSpec) -> CompiledLayout:
        """
        Compile a problem into a plaquette layout

        Raises CompilationError when the layer budget runs out or an
        invariant breaks, SideConditionError for side conditions that cannot
        share the bottom row.
        """
        start_time = time.time()
        logger.info("=" * 60)
        logger.info(
            f"COMPILE STARTED: N={p.num_logical}, K={p.num_terms}, strategy={self.cfg.strategy}"
        )
        logger.info("=" * 60)

        self.problem = p
        self.space = constraint_space(p)
        layout = self.place_side_conditions(p)
        frame = Frame(layout.width, 1) if layout.qubits else None
        initial = _State(layout=layout, frame=frame)

        try:
            cl = self._finalize(self._run_greedy(initial))
            if self.cfg.strategy == "beam":
                # The greedy lineage stays the fallback, so beam never does worse
                beam = self._finalize(self._run_beam(initial))
                if beam.ancilla_cost()[:2] < cl.ancilla_cost()[:2]:
                    cl = beam
        except (PlacementError, BoundaryMapError) as e:
            logger.error(f"COMPILE FAILED: {e}", exc_info=True)
            raise CompilationError(str(e)) from e

        hypertree = self._append_unplaced(cl.layout, p.num_terms)
        if hypertree:
            logger.info(f"Appended {len(hypertree)} unconstrained terms to row 0")

        implied = implied_space(cl.layout, p.num_terms)
        if not rowspace_equal(implied, self.space.basis):
            logger.error("Compiled layout does not realise the constraint space")
            raise CompilationError("Compiled layout does not realise the constraint space")
        cl.certificate = {"dims": [implied.num_rows, self.space.dimension], "config": self.cfg.to_dict()}

        stats = cl.stats
        duration = time.time() - start_time
        logger.info("=" * 60)
        logger.info("COMPILE COMPLETED")
        logger.info(
            f"Groups: {len(cl.groups)} | Plaquettes: {stats.total_plaquettes} | "
            f"Free: {stats.free_ancillas} | Fixed: {stats.fixed_ancillas} | Layers: {cl.layers}"
        )
        logger.info(f"Duration: {duration:.3f}s")
        logger.info("=" * 60)
        return cl

    # ================================================================
    # Trimming
    # ================================================================
    def trim_layout(self, cl: CompiledLayout) -> CompiledLayout:
        """
        Remove redundant filler plaquettes from the outside in

        Only fillers with no cell above and none to the right are candidates;
        each removal is kept only if the layout still realises the constraint
        space. Ancillas left in no plaquette go afterwards.
        """
        num_terms = cl.problem.num_terms
        target = constraint_space(cl.problem).basis
        layout = cl.layout.copy()
        removed = 0
        changed = True
        while changed:
            changed = False
            fillers = sorted(
                (p.cell for p in layout.plaquettes if p.is_filler),
                key=lambda cell: (-cell.row, -cell.col),
            )
            for cell in fillers:
                if cell.shifted(0, 1) in layout.cells or cell.shifted(1, 0) in layout.cells:
                    continue
                trial = layout.copy()
                trial.remove_plaquette(cell)
                _drop_orphans(trial)
                if rowspace_equal(implied_space(trial, num_terms), target):
                    layout = trial
                    removed += 1
                    changed = True
        dropped = _drop_orphans(layout)
        logger.info(f"TRIM: removed {removed} filler plaquettes and {dropped} idle ancillas")
        return replace(cl, layout=layout)


def _drop_orphans(layout: Layout) -> int:
    """Remove ancillas that sit in no plaquette"""
    used = set()
    for p in layout.plaquettes:
        used.update(p.shape.corners(p.cell))
    orphans = [q for q in layout.ancilla_ids() if layout.qubits[q].position not in used]
    for qubit_id in orphans:
        layout.remove_qubit(qubit_id)
    return len(orphans)


def trim_layout(cl: CompiledLayout) -> CompiledLayout:
    return CompilerService(cl.config).trim_layout(cl)
