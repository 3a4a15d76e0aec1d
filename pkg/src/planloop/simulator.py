"""Symbolic plan executor: schema preconditions and effects over the state graph.

Execution is transactional: steps run against a working copy of the state
graph, committed back to the knowledge base only when every step applies.
Failures are fail-fast; nothing after the first failed step leaves a trace
in the final state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .actions import ActionSchema, ActionSequence, Atom, schema_index
from .knowledge import AGENT, HOLDING, KnowledgeBase, OBJ_LOCATION, OBJ_NAME
from .triples import BoolLiteral, Graph, Iri, RDF_TYPE, StringLiteral, Triple, ex


@dataclass(frozen=True)
class ExecError:
    kind: str  # precondition_failed | unknown_verb_at_execution | missing_instance
    step_index: int  # 1-based
    detail: str

    def describe(self) -> str:
        return f"step {self.step_index}: {self.kind} ({self.detail})"


@dataclass(frozen=True)
class StepOutcome:
    action_text: str
    status: str  # applied | failed
    reason: str = ""


@dataclass(frozen=True)
class ProgressEntry:
    step_index: int
    location: Iri
    flags: tuple[tuple[str, bool], ...]


@dataclass(frozen=True)
class ProgressLine:
    object: Iri
    timeline: tuple[ProgressEntry, ...]


@dataclass(frozen=True)
class ExecutionTrace:
    steps: tuple[StepOutcome, ...]
    final_state: Graph
    progress: tuple[ProgressLine, ...]
    error: Optional[ExecError] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class GoalSpec:
    """State triples that must hold in the final state graph."""

    required: frozenset[Triple] = frozenset()


class _StepFailure(Exception):
    def __init__(self, error: ExecError):
        self.error = error


def _resolve_word(state: Graph, word: str) -> Optional[Iri]:
    hits = state.match(None, OBJ_NAME, StringLiteral(word))
    return hits[0].subject if hits else None


def _state_flags(state: Graph, obj: Iri, flag_names: set[str]) -> tuple[tuple[str, bool], ...]:
    out = []
    for t in state.match(obj, None, None):
        if t.predicate.local in flag_names and isinstance(t.object, BoolLiteral):
            out.append((t.predicate.local, t.object.value))
    return tuple(sorted(out))


def _term_iri(term: str, args: list[Iri], state: Graph, step_index: int) -> Iri:
    if term == "agent":
        return AGENT
    if term.startswith("?"):
        return args[int(term[1:])]
    iri = _resolve_word(state, term)
    if iri is None:
        raise _StepFailure(ExecError("precondition_failed", step_index, f"no instance named '{term}'"))
    return iri


def _check(atom: Atom, args: list[Iri], state: Graph, capacity: int, step_index: int) -> None:
    def fail() -> None:
        raise _StepFailure(ExecError("precondition_failed", step_index, atom.render()))

    if atom.op == "capacity":
        if len(state.match(AGENT, HOLDING, None)) >= capacity:
            fail()
        return
    first = _term_iri(atom.terms[0], args, state, step_index)
    if atom.op == "holding":
        if not state.ask(Triple(AGENT, HOLDING, first)):
            fail()
    elif atom.op == "not_holding":
        if state.ask(Triple(AGENT, HOLDING, first)):
            fail()
    elif atom.op == "state":
        wanted = BoolLiteral(atom.terms[2] == "true")
        if not state.ask(Triple(first, ex(atom.terms[1]), wanted)):
            fail()
    elif atom.op == "at":
        place = _term_iri(atom.terms[1], args, state, step_index)
        if not state.ask(Triple(first, OBJ_LOCATION, place)):
            fail()


def _apply(atom: Atom, args: list[Iri], state: Graph, step_index: int) -> None:
    first = _term_iri(atom.terms[0], args, state, step_index)
    if atom.op == "hold":
        state.insert(Triple(AGENT, HOLDING, first))
    elif atom.op == "release":
        state.remove(Triple(AGENT, HOLDING, first))
    elif atom.op == "set_location":
        place = _term_iri(atom.terms[1], args, state, step_index)
        state.set_value(first, OBJ_LOCATION, place)
    elif atom.op == "set_state":
        state.set_value(first, ex(atom.terms[1]), BoolLiteral(atom.terms[2] == "true"))


def execute(
    seq: ActionSequence,
    kb: KnowledgeBase,
    schemas: Sequence[ActionSchema],
    holding_capacity: int = 2,
    fail_step: Optional[int] = None,
) -> tuple[ExecutionTrace, Optional[ExecError]]:
    """Run the plan against kb's state graph.

    On full success the working copy is committed into kb.state; on failure
    kb is untouched and the trace's final_state shows the state at the halt.
    `fail_step` is a test hook forcing the given 1-based step to fail.
    """
    idx = schema_index(list(schemas))
    working = kb.state.copy()
    flag_names = set(kb.capability_state_map.values())

    tracked: list[Iri] = []
    seen: set[Iri] = set()
    for action in seq.steps:
        for arg in action.args:
            iri = _resolve_word(working, arg)
            if iri is not None and iri not in seen:
                seen.add(iri)
                tracked.append(iri)
    timelines: dict[Iri, list[ProgressEntry]] = {
        obj: [ProgressEntry(0, working.value(obj, OBJ_LOCATION), _state_flags(working, obj, flag_names))]
        for obj in tracked
    }

    outcomes: list[StepOutcome] = []
    error: Optional[ExecError] = None
    for step_index, action in enumerate(seq.steps, start=1):
        try:
            if fail_step == step_index:
                raise _StepFailure(ExecError("precondition_failed", step_index, "injected fault"))
            schema = idx.get(action.verb)
            if schema is None or schema.arity != len(action.args):
                raise _StepFailure(
                    ExecError("unknown_verb_at_execution", step_index, action.render())
                )
            args: list[Iri] = []
            for arg in action.args:
                iri = _resolve_word(working, arg)
                if iri is None:
                    raise _StepFailure(ExecError("missing_instance", step_index, arg))
                args.append(iri)
            for atom in schema.preconditions:
                _check(atom, args, working, holding_capacity, step_index)
            for atom in schema.effects:
                _apply(atom, args, working, step_index)
        except _StepFailure as failure:
            error = failure.error
            outcomes.append(StepOutcome(action.render(), "failed", failure.error.describe()))
            break
        outcomes.append(StepOutcome(action.render(), "applied"))
        for obj in tracked:
            timelines[obj].append(
                ProgressEntry(step_index, working.value(obj, OBJ_LOCATION), _state_flags(working, obj, flag_names))
            )

    if error is None:
        kb.state = working
    progress = tuple(
        ProgressLine(obj, tuple(timelines[obj])) for obj in sorted(tracked, key=Iri.n3)
    )
    trace = ExecutionTrace(tuple(outcomes), working.copy(), progress, error)
    return trace, error


def check_goal(trace: ExecutionTrace, goal: GoalSpec) -> bool:
    """True iff execution completed and every goal triple holds."""
    if not trace.ok:
        return False
    return all(trace.final_state.ask(t) for t in goal.required)


def missing_goal_triples(trace: ExecutionTrace, goal: GoalSpec) -> list[Triple]:
    return sorted(
        (t for t in goal.required if not trace.final_state.ask(t)), key=Triple.sort_key
    )


def render_progress(trace: ExecutionTrace) -> str:
    """Fixed-width table: one row per tracked object, one column per step.

    Cells show the object's location plus any state flags currently true.
    Identical traces render byte-identically.
    """
    if not trace.progress:
        return "(no tracked objects)\n"
    n_steps = len(trace.progress[0].timeline) - 1
    header = ["object", "0:init"]
    for i in range(1, n_steps + 1):
        verb = trace.steps[i - 1].action_text.split("(", 1)[0]
        header.append(f"{i}:{verb}")

    def cell(entry: ProgressEntry) -> str:
        loc = entry.location.local if entry.location is not None else "?"
        extras = "".join(f"+{name}" for name, value in entry.flags if value)
        return loc + extras

    rows = [header]
    for line in trace.progress:
        rows.append([line.object.local] + [cell(e) for e in line.timeline])
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    out_lines = [
        "  ".join(val.ljust(widths[c]) for c, val in enumerate(row)).rstrip() for row in rows
    ]
    return "\n".join(out_lines) + "\n"
