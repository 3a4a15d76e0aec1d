"""Scenario and manifest files, plus the headless corpus runner.

A scenario JSON names the task, the knowledge-graph/schema/lexicon files,
the LLM reply script, an optional human-oracle answer script, the goal
triples, and the run configuration. A manifest lists scenarios and the
configurations to run them under; within one run each configuration keeps
one knowledge base across scenarios, so human-driven expansions accumulate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .actions import ActionSchema, load_schemas, render_plan
from .knowledge import KnowledgeBase, load_knowledge_base
from .llm import ScriptedLlm, load_script
from .metrics import extract_ingredients
from .refine import Lexicon, load_lexicon
from .session import (
    AttributeValue,
    ConfirmsNew,
    Correction,
    DeniesExistence,
    HumanAnswer,
    LLM_KG_HUMAN,
    Session,
    SessionConfig,
    run_to_completion,
)
from .simulator import GoalSpec
from .triples import BoolLiteral, Term, Triple, ex


class ManifestError(Exception):
    pass


def _goal_term(value) -> Term:
    if isinstance(value, bool):
        return BoolLiteral(value)
    if isinstance(value, str) and value:
        return ex(value)
    raise ManifestError(f"goal object must be a bool or entity name, got {value!r}")


def parse_goal(rows: Sequence[Sequence]) -> GoalSpec:
    triples = set()
    for row in rows:
        if len(row) != 3:
            raise ManifestError(f"goal rows are [subject, predicate, object], got {row!r}")
        subject, predicate, obj = row
        triples.add(Triple(ex(subject), ex(predicate), _goal_term(obj)))
    return GoalSpec(frozenset(triples))


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    task: str
    state_path: Path
    attributes_path: Path
    capability_map_path: Path
    schemas_path: Path
    lexicon_path: Path
    replies: tuple[str, ...]
    oracle_answers: tuple[HumanAnswer, ...]
    goal: GoalSpec
    configuration: str
    feedback_budget: int
    holding_capacity: int
    exec_fault_attempts: frozenset[int]

    def kg_key(self) -> tuple[str, str, str]:
        return (str(self.state_path), str(self.attributes_path), str(self.capability_map_path))

    def load_kb(self) -> KnowledgeBase:
        return load_knowledge_base(self.state_path, self.attributes_path, self.capability_map_path)

    def load_schemas(self) -> list[ActionSchema]:
        return load_schemas(self.schemas_path)

    def load_lexicon(self) -> Lexicon:
        return load_lexicon(self.lexicon_path)


def parse_oracle_script(text: str) -> list[HumanAnswer]:
    """Ordered human answers: 'correction <word>' | 'deny' | 'confirm' | a value."""
    answers: list[HumanAnswer] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "correction":
            if len(tokens) != 2:
                raise ManifestError(f"oracle line {line_no}: expected 'correction <word>'")
            answers.append(Correction(tokens[1]))
        elif tokens == ["deny"]:
            answers.append(DeniesExistence())
        elif tokens == ["confirm"]:
            answers.append(ConfirmsNew())
        elif len(tokens) == 1:
            if tokens[0] in ("true", "false"):
                answers.append(AttributeValue(tokens[0] == "true"))
            else:
                answers.append(AttributeValue(tokens[0]))
        else:
            raise ManifestError(f"oracle line {line_no}: cannot parse {line!r}")
    return answers


def scenario_from_dict(raw: dict, base: Path, scenario_id: str) -> Scenario:
    def resolve(key: str, required: bool = True) -> Optional[Path]:
        value = raw.get(key)
        if value is None:
            if required:
                raise ManifestError(f"scenario {scenario_id}: missing key {key!r}")
            return None
        p = (base / value).resolve()
        if not p.exists():
            raise ManifestError(f"scenario {scenario_id}: {key} file not found: {p}")
        return p

    oracle_path = resolve("oracle_script", required=False)
    replies = tuple(load_script(resolve("llm_script")))
    if not replies:
        raise ManifestError(f"scenario {scenario_id}: llm_script has no replies")
    return Scenario(
        scenario_id=scenario_id,
        task=raw.get("task") or "",
        state_path=resolve("state_graph"),
        attributes_path=resolve("attribute_graph"),
        capability_map_path=resolve("capability_map"),
        schemas_path=resolve("schemas"),
        lexicon_path=resolve("lexicon"),
        replies=replies,
        oracle_answers=tuple(parse_oracle_script(oracle_path.read_text())) if oracle_path else (),
        goal=parse_goal(raw.get("goal", [])),
        configuration=raw.get("configuration", LLM_KG_HUMAN),
        feedback_budget=int(raw.get("feedback_budget", 3)),
        holding_capacity=int(raw.get("holding_capacity", 2)),
        exec_fault_attempts=frozenset(raw.get("exec_fault_attempts", [])),
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read scenario {path}: {exc}") from exc
    return scenario_from_dict(raw, path.parent, path.stem)


@dataclass(frozen=True)
class Manifest:
    scenarios: tuple[Scenario, ...]
    configurations: tuple[str, ...]


def load_manifest(path: str | Path, configurations: Optional[Sequence[str]] = None) -> Manifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    entries = raw.get("scenarios", [])
    if not entries:
        raise ManifestError(f"{path}: manifest lists no scenarios")
    scenarios = tuple(load_scenario(path.parent / entry) for entry in entries)
    configs = tuple(configurations or raw.get("configurations") or [LLM_KG_HUMAN])
    return Manifest(scenarios=scenarios, configurations=configs)


@dataclass(frozen=True)
class SessionResult:
    scenario_id: str
    task: str
    configuration: str
    phase: str
    goal_success: bool
    tokens: int
    stats_before: tuple[int, int]
    stats_after: tuple[int, int]
    ingredients: frozenset[str]
    events: tuple[dict, ...]
    progress_text: str
    plan_text: str
    failure_cause: Optional[str]
    consumed_replies: tuple[str, ...]


def build_session(
    scenario: Scenario,
    configuration: Optional[str] = None,
    feedback_budget: Optional[int] = None,
    kb: Optional[KnowledgeBase] = None,
) -> Session:
    config = SessionConfig(
        configuration=configuration or scenario.configuration,
        feedback_budget=feedback_budget or scenario.feedback_budget,
        goal=scenario.goal,
        holding_capacity=scenario.holding_capacity,
        exec_fault_attempts=scenario.exec_fault_attempts,
    )
    return Session(
        config,
        kb if kb is not None else scenario.load_kb(),
        scenario.load_schemas(),
        scenario.load_lexicon(),
        ScriptedLlm(scenario.replies),
        scenario.task,
    )


def run_scenario(
    scenario: Scenario,
    configuration: Optional[str] = None,
    feedback_budget: Optional[int] = None,
    kb: Optional[KnowledgeBase] = None,
) -> tuple[SessionResult, KnowledgeBase]:
    """Run one scenario headlessly; returns the result and the session's KB
    (carrying any human-driven expansion) for reuse by subsequent scenarios."""
    session = build_session(scenario, configuration, feedback_budget, kb)
    stats_before = session.kb.stats()
    session.start()
    answers = iter(scenario.oracle_answers)
    run_to_completion(session, answers=answers)
    lexicon = scenario.load_lexicon()
    ingredients = (
        extract_ingredients(session.current_seq, session.kb, lexicon)
        if session.current_seq is not None
        else frozenset()
    )
    result = SessionResult(
        scenario_id=scenario.scenario_id,
        task=scenario.task,
        configuration=session.config.configuration,
        phase=session.phase,
        goal_success=session.goal_reached(),
        tokens=session.tokens_total,
        stats_before=stats_before,
        stats_after=session.kb.stats(),
        ingredients=ingredients,
        events=tuple(session.trace_log),
        progress_text=session.progress_text(),
        plan_text=render_plan(session.current_seq) if session.current_seq else "",
        failure_cause=session.failure_cause,
        consumed_replies=tuple(session.client.consumed),
    )
    return result, session.kb


def run_manifest(manifest: Manifest, feedback_budget: Optional[int] = None) -> list[SessionResult]:
    """Run every scenario under every configuration (configuration-major, so
    each configuration's knowledge base persists across its scenarios)."""
    by_key: dict[tuple[str, str], SessionResult] = {}
    for configuration in manifest.configurations:
        kbs: dict[tuple[str, str, str], KnowledgeBase] = {}
        for scenario in manifest.scenarios:
            kb = kbs.get(scenario.kg_key())
            result, kb_after = run_scenario(scenario, configuration, feedback_budget, kb)
            kbs[scenario.kg_key()] = kb_after
            by_key[(scenario.scenario_id, configuration)] = result
    return [
        by_key[(scenario.scenario_id, configuration)]
        for scenario in manifest.scenarios
        for configuration in manifest.configurations
    ]
