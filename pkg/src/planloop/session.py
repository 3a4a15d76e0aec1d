"""The planning session: LLM, refinement, execution and the human oracle.

One session drives one task end to end. The flow: ask the LLM for a plan,
refine it against the knowledge base, execute; on unresolved mismatches or
execution problems, re-prompt the LLM up to a feedback budget; when
mismatches persist at the budget (human configuration only), pause for the
human existence-check protocol and, for confirmed new entities, elicit
attributes slot by slot and expand the knowledge graph permanently.

step() advances exactly one transition, so the event log doubles as a
transition-level trace that tests compare against hand-written oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Sequence, Union

from .actions import Action, ActionSchema, ActionSequence, EmptyPlanError, parse_plan
from .knowledge import (
    KnowledgeBase,
    Mismatch,
    apply_expansion,
    entity_exists,
    expansion_for_capabilities,
)
from .llm import LlmClient, PromptSpec, build_feedback_prompt, build_initial_prompt
from .refine import Lexicon, refine_sequence
from .simulator import (
    ExecError,
    ExecutionTrace,
    GoalSpec,
    check_goal,
    execute,
    missing_goal_triples,
    render_progress,
)
from .triples import Triple

# phases
PLANNING = "Planning"
REFINING = "Refining"
EXECUTING = "Executing"
AWAITING_HUMAN = "AwaitingHuman"
DONE = "Done"
FAILED = "Failed"

# configurations
LLM_ONLY = "LLM_only"
LLM_KG = "LLM_KG"
LLM_KG_HUMAN = "LLM_KG_Human"
CONFIGURATIONS = (LLM_ONLY, LLM_KG, LLM_KG_HUMAN)


class SessionStateError(Exception):
    """An operation was attempted in a phase that does not allow it."""


class InvalidAnswerError(Exception):
    pass


@dataclass(frozen=True)
class SessionConfig:
    configuration: str = LLM_KG_HUMAN
    feedback_budget: int = 3  # re-prompts allowed before escalation/failure
    goal: GoalSpec = GoalSpec()
    step_limit: int = 200
    holding_capacity: int = 2
    #: execution attempts (1-based) forced to fail; testing hook
    exec_fault_attempts: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if self.configuration not in CONFIGURATIONS:
            raise ValueError(f"unknown configuration {self.configuration!r}")
        if self.feedback_budget < 1:
            raise ValueError("feedback_budget must be >= 1")


@dataclass(frozen=True)
class ExistenceCheck:
    token: str
    mismatch: Mismatch


@dataclass(frozen=True)
class AttributeElicitation:
    entity: str
    slot: str  # "type" | "capability:<Predicate>" | "location"


HumanQuery = Union[ExistenceCheck, AttributeElicitation]


@dataclass(frozen=True)
class Correction:
    word: str


@dataclass(frozen=True)
class DeniesExistence:
    pass


@dataclass(frozen=True)
class ConfirmsNew:
    pass


@dataclass(frozen=True)
class AttributeValue:
    value: Union[bool, str]


HumanAnswer = Union[Correction, DeniesExistence, ConfirmsNew, AttributeValue]


@dataclass(frozen=True)
class GoalShortfall:
    """Execution completed but the goal predicates do not all hold."""

    missing: tuple[Triple, ...]

    def describe(self) -> str:
        missing = "; ".join(t.n3() for t in self.missing) or "(none)"
        return f"execution completed but the goal was not reached, missing: {missing}"


def _mismatch_brief(m: Mismatch) -> dict:
    return {"kind": m.kind, "token": m.token, "step": m.step_index}


class Session:
    """State machine over one task; see module docstring for the flow."""

    def __init__(
        self,
        config: SessionConfig,
        kb: KnowledgeBase,
        schemas: Sequence[ActionSchema],
        lexicon: Lexicon,
        client: LlmClient,
        task: str,
    ):
        self.config = config
        self.kb = kb
        self.schemas = list(schemas)
        self.lexicon = lexicon
        self.client = client
        self.task = task

        self.phase = PLANNING
        self.feedback_count = 0
        self.tokens_total = 0
        self.current_seq: Optional[ActionSequence] = None
        self.unresolved: tuple[Mismatch, ...] = ()
        self.rewrites: list[tuple[str, str]] = []
        self.pending_query: Optional[HumanQuery] = None
        self.last_trace: Optional[ExecutionTrace] = None
        self.trace_log: list[dict] = []
        self.failure_cause: Optional[str] = None
        self.stats_before = kb.stats()

        self._pending_problem: Optional[Union[ExecError, GoalShortfall]] = None
        self._unkn_origin = "initial"
        self._post_human = False
        self._exec_attempts = 0
        self._steps_taken = 0
        self._elicit: Optional[dict] = None

    # --- events -------------------------------------------------------------

    def _emit(self, event: str, **fields) -> None:
        self.trace_log.append({"event": event, **fields})

    def _set_phase(self, to: str, cause: Optional[str] = None) -> None:
        self.phase = to
        if cause is None:
            self._emit("phase", to=to)
        else:
            self._emit("phase", to=to, cause=cause)

    def _fail(self, cause: str) -> None:
        self.failure_cause = cause
        self._set_phase(FAILED, cause=cause)

    # --- lifecycle ----------------------------------------------------------

    def start(self) -> "Session":
        if self.phase != PLANNING or self.trace_log:
            raise SessionStateError("session already started")
        self._emit(
            "session_started",
            task=self.task,
            configuration=self.config.configuration,
            feedback_budget=self.config.feedback_budget,
        )
        spec = PromptSpec(
            task=self.task,
            domain_objects=tuple(sorted(self._domain_objects())),
            action_set=tuple(s.verb for s in self.schemas),
        )
        reply = self.client.call(build_initial_prompt(spec))
        self.tokens_total += reply.token_count
        self._emit("llm_call", kind="initial", reply_index=self._reply_index())
        if not self._ingest_plan(reply.text, source="initial_llm"):
            return self
        if self.config.configuration == LLM_ONLY:
            self._set_phase(EXECUTING)
        else:
            self._refine()
            self._unkn_origin = "initial"
            self._set_phase(REFINING if self.unresolved else EXECUTING)
        return self

    def step(self) -> "Session":
        if self.phase not in (REFINING, EXECUTING):
            raise SessionStateError(f"cannot step in phase {self.phase}")
        self._steps_taken += 1
        if self._steps_taken > self.config.step_limit:
            self._fail("step_limit_exceeded")
            return self
        if self.phase == REFINING:
            self._step_refining()
        else:
            self._step_executing()
        return self

    def _step_refining(self) -> None:
        budget = self.config.feedback_budget
        if self.feedback_count < budget:
            self._reprompt(self.unresolved[0], origin="mismatch_feedback")
        elif self._unkn_origin == "exec_feedback":
            # mismatches appeared via the exec-error re-prompt exactly at the
            # budget: the outer guard exits without human escalation
            self._fail("feedback_budget_exhausted")
        elif self.config.configuration == LLM_KG_HUMAN:
            self._escalate()
        else:
            self._fail("unresolved_mismatches_at_budget")

    def _step_executing(self) -> None:
        if self._pending_problem is None:
            self._execute()
        elif self._post_human:
            self._fail("problem_after_human_break")
        elif self.feedback_count < self.config.feedback_budget:
            self._reprompt(self._pending_problem, origin="exec_feedback")
        else:
            self._fail("feedback_budget_exhausted")

    # --- transitions ----------------------------------------------------------

    def _domain_objects(self) -> list[str]:
        from .knowledge import OBJ_NAME
        from .triples import StringLiteral

        return [
            t.object.value
            for t in self.kb.state.match(None, OBJ_NAME, None)
            if isinstance(t.object, StringLiteral)
        ]

    def _reply_index(self) -> int:
        cursor = getattr(self.client, "cursor", None)
        return cursor if cursor is not None else -1

    def _ingest_plan(self, text: str, source: str) -> bool:
        try:
            seq = parse_plan(text, source=source)
        except EmptyPlanError:
            self._emit("plan_rejected", reason="empty_plan")
            self._fail("empty_plan")
            return False
        self.current_seq = seq
        self.last_trace = None
        self._emit("plan_parsed", steps=len(seq), warnings=list(seq.warnings))
        return True

    def _refine(self) -> None:
        assert self.current_seq is not None
        result = refine_sequence(self.current_seq, self.kb, self.lexicon, self.schemas)
        self.current_seq = result.refined
        self.unresolved = result.unresolved
        self.rewrites.extend(result.rewrites)
        self._emit(
            "refine",
            rewrites=[list(r) for r in result.rewrites],
            unresolved=[_mismatch_brief(m) for m in result.unresolved],
        )

    def _reprompt(self, problem, origin: str) -> None:
        assert self.current_seq is not None
        reply = self.client.call(build_feedback_prompt(self.current_seq, problem))
        self.tokens_total += reply.token_count
        self.feedback_count += 1
        self._emit("llm_call", kind="feedback", reply_index=self._reply_index())
        self._emit("feedback_counter", count=self.feedback_count)
        self._pending_problem = None
        if not self._ingest_plan(reply.text, source="feedback_llm"):
            return
        if self.config.configuration == LLM_ONLY:
            if self.phase != EXECUTING:
                self._set_phase(EXECUTING)
            return
        self._refine()
        self._unkn_origin = origin
        target = REFINING if self.unresolved else EXECUTING
        if target != self.phase:
            self._set_phase(target)

    def _execute(self) -> None:
        assert self.current_seq is not None
        self._exec_attempts += 1
        fail_step = 1 if self._exec_attempts in self.config.exec_fault_attempts else None
        working = self.kb.copy()
        trace, error = execute(
            self.current_seq,
            working,
            self.schemas,
            holding_capacity=self.config.holding_capacity,
            fail_step=fail_step,
        )
        self.last_trace = trace
        applied = sum(1 for s in trace.steps if s.status == "applied")
        self._emit(
            "execution",
            applied=applied,
            error=None
            if error is None
            else {"kind": error.kind, "step": error.step_index, "detail": error.detail},
        )
        if error is not None:
            if self._post_human:
                self._fail("problem_after_human_break")
            else:
                self._pending_problem = error
            return
        holds = check_goal(trace, self.config.goal)
        self._emit("goal_check", holds=holds)
        if holds:
            self.kb = working  # execution effects become the session's state
            self._set_phase(DONE)
        elif self._post_human:
            self._fail("problem_after_human_break")
        else:
            self._pending_problem = GoalShortfall(tuple(missing_goal_triples(trace, self.config.goal)))

    def _escalate(self) -> None:
        first = self.unresolved[0]
        self.pending_query = ExistenceCheck(first.token, first)
        self._set_phase(AWAITING_HUMAN)
        self._emit("human_query", kind="existence_check", token=first.token)

    # --- the human protocol ---------------------------------------------------

    def submit_answer(self, answer: HumanAnswer) -> "Session":
        if self.phase != AWAITING_HUMAN or self.pending_query is None:
            raise SessionStateError("no pending human query")
        query = self.pending_query
        if isinstance(query, ExistenceCheck):
            self._answer_existence(query, answer)
        else:
            self._answer_attribute(query, answer)
        return self

    def _answer_existence(self, query: ExistenceCheck, answer: HumanAnswer) -> None:
        if isinstance(answer, Correction):
            word = answer.word
            if query.mismatch.kind == "unknown_action":
                if word not in {s.verb for s in self.schemas}:
                    raise InvalidAnswerError(f"correction {word!r} is not a known action")
            elif entity_exists(self.kb, word) is None:
                raise InvalidAnswerError(f"correction {word!r} does not resolve in the knowledge base")
            self._emit("human_answer", kind="correction", word=word)
            self._rewrite_token(query.token, word, query.mismatch.kind == "unknown_action")
            self._resume_after_human()
        elif isinstance(answer, DeniesExistence):
            self._emit("human_answer", kind="denies_existence")
            self._remove_step(query.mismatch.step_index)
            if self.phase != FAILED:
                self._resume_after_human()
        elif isinstance(answer, ConfirmsNew):
            self._emit("human_answer", kind="confirms_new")
            slots = ["type"]
            slots += [f"capability:{cap}" for cap in self.kb.capability_vocabulary()]
            slots += ["location"]
            self._elicit = {"entity": query.token, "slots": slots, "answers": []}
            self._next_slot()
        else:
            raise InvalidAnswerError("existence check expects correction/denies_existence/confirms_new")

    def _next_slot(self) -> None:
        assert self._elicit is not None
        taken = len(self._elicit["answers"])
        slot = self._elicit["slots"][taken]
        self.pending_query = AttributeElicitation(self._elicit["entity"], slot)
        self._emit("human_query", kind="attribute_elicitation", entity=self._elicit["entity"], slot=slot)

    def _answer_attribute(self, query: AttributeElicitation, answer: HumanAnswer) -> None:
        if not isinstance(answer, AttributeValue):
            raise InvalidAnswerError("attribute elicitation expects a typed value")
        value = answer.value
        if query.slot.startswith("capability:"):
            if not isinstance(value, bool):
                raise InvalidAnswerError(f"slot {query.slot} expects a boolean")
        else:
            if not isinstance(value, str) or not value:
                raise InvalidAnswerError(f"slot {query.slot} expects a word")
            if query.slot == "location" and entity_exists(self.kb, value) is None:
                raise InvalidAnswerError(f"location {value!r} does not resolve in the knowledge base")
        assert self._elicit is not None
        self._elicit["answers"].append((query.slot, value))
        self._emit("human_answer", kind="attribute", slot=query.slot, value=value)
        if len(self._elicit["answers"]) < len(self._elicit["slots"]):
            self._next_slot()
            return
        self._finish_expansion()

    def _finish_expansion(self) -> None:
        assert self._elicit is not None
        answers = dict(self._elicit["answers"])
        entity = self._elicit["entity"]
        location_ref = entity_exists(self.kb, answers["location"])
        assert location_ref is not None  # validated on receipt
        capabilities = [
            (slot.split(":", 1)[1], value)
            for slot, value in self._elicit["answers"]
            if slot.startswith("capability:")
        ]
        expansion = expansion_for_capabilities(
            self.kb, entity, answers["type"], capabilities, location_ref.iri
        )
        apply_expansion(self.kb, expansion)
        nodes, edges = self.kb.stats()
        self._emit("expansion_applied", entity=entity, nodes=nodes, edges=edges)
        self._elicit = None
        self._resume_after_human()

    def _rewrite_token(self, token: str, word: str, is_action: bool) -> None:
        assert self.current_seq is not None
        steps = []
        for action in self.current_seq.steps:
            verb = word if is_action and action.verb == token else action.verb
            args = tuple(word if (not is_action and a == token) else a for a in action.args)
            steps.append(Action(verb, args))
        self.current_seq = ActionSequence(tuple(steps), source="human_patched")
        self.last_trace = None
        self.rewrites.append((token, word))
        self._emit("plan_rewritten", **{"from": token, "to": word})

    def _remove_step(self, step_index: int) -> None:
        assert self.current_seq is not None
        steps = tuple(
            a for i, a in enumerate(self.current_seq.steps, start=1) if i != step_index
        )
        self._emit("step_removed", index=step_index)
        if not steps:
            self._fail("plan_empty_after_denial")
            return
        self.current_seq = ActionSequence(steps, source="human_patched")
        self.last_trace = None

    def _resume_after_human(self) -> None:
        self.pending_query = None
        self._refine()
        if self.unresolved:
            self._escalate()
        else:
            self._post_human = True
            self._set_phase(EXECUTING)

    # --- observation ----------------------------------------------------------

    def abort(self, cause: str) -> None:
        """External failure report (e.g. a scripted oracle ran dry)."""
        if self.phase in (DONE, FAILED):
            raise SessionStateError("session already terminal")
        self.pending_query = None
        self._fail(cause)

    @property
    def terminal(self) -> bool:
        return self.phase in (DONE, FAILED)

    def goal_reached(self) -> bool:
        return (
            self.phase == DONE
            and self.last_trace is not None
            and check_goal(self.last_trace, self.config.goal)
        )

    def progress_text(self) -> str:
        if self.last_trace is None:
            return "(no execution yet)\n"
        return render_progress(self.last_trace)

    def snapshot(self) -> dict:
        """Point-in-time view; safe to serialize and ship across threads."""
        nodes, edges = self.kb.stats()
        plan_steps = []
        if self.current_seq is not None:
            statuses = {}
            if self.last_trace is not None:
                for i, outcome in enumerate(self.last_trace.steps, start=1):
                    statuses[i] = outcome.status
            for i, action in enumerate(self.current_seq.steps, start=1):
                plan_steps.append(
                    {"index": i, "text": action.render(), "status": statuses.get(i, "pending")}
                )
        pending = None
        if isinstance(self.pending_query, ExistenceCheck):
            pending = {
                "kind": "existence_check",
                "token": self.pending_query.token,
                "mismatch": _mismatch_brief(self.pending_query.mismatch),
            }
        elif isinstance(self.pending_query, AttributeElicitation):
            pending = {
                "kind": "attribute_elicitation",
                "entity": self.pending_query.entity,
                "slot": self.pending_query.slot,
            }
        return {
            "task": self.task,
            "configuration": self.config.configuration,
            "phase": self.phase,
            "feedback_count": self.feedback_count,
            "feedback_budget": self.config.feedback_budget,
            "tokens_total": self.tokens_total,
            "plan": {
                "source": self.current_seq.source if self.current_seq else None,
                "steps": plan_steps,
            },
            "pending_query": pending,
            "unresolved": [_mismatch_brief(m) for m in self.unresolved],
            "rewrites": [list(r) for r in self.rewrites],
            "kb_stats": {"nodes": nodes, "edges": edges},
            "failure_cause": self.failure_cause,
            "events": len(self.trace_log),
        }


def run_to_completion(
    session: Session,
    answers: Optional[Iterator[HumanAnswer]] = None,
    max_iterations: int = 500,
) -> Session:
    """Drive a started session to a terminal phase.

    Human queries are answered from `answers`; running dry is a reported
    failure, never a hang.
    """
    for _ in range(max_iterations):
        if session.terminal:
            return session
        if session.phase == AWAITING_HUMAN:
            answer = next(answers, None) if answers is not None else None
            if answer is None:
                session.abort("oracle_answers_exhausted")
            else:
                session.submit_answer(answer)
        else:
            session.step()
    raise SessionStateError("session did not terminate within the iteration bound")
