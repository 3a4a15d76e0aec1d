"""Action vocabulary: plan parsing/rendering and data-driven action schemas.

A plan is a numbered list of ``N. verb(arg, arg)`` lines. Schemas live in a
flat text file, one ``action <verb>`` ... ``end`` block per verb, carrying
the arity, per-argument capability requirements, preconditions and effects
interpreted by the simulator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path


class EmptyPlanError(Exception):
    """No line of the text matched the plan grammar."""


class DuplicateVerbError(Exception):
    pass


class MalformedSchemaError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Atom:
    """One precondition or effect: an operator over argument slots.

    Terms are raw tokens: ``?N`` (argument reference), ``agent``, or a bare
    entity name resolved against the state graph at execution time.
    """

    op: str
    terms: tuple[str, ...]

    def render(self) -> str:
        return " ".join((self.op,) + self.terms)


#: op -> number of term tokens it takes
PRE_OPS = {"holding": 1, "not_holding": 1, "capacity": 0, "state": 3, "at": 2}
EFF_OPS = {"hold": 1, "release": 1, "set_location": 2, "set_state": 3}

_TERM_RE = re.compile(r"\?\d+\Z|agent\Z|[a-z_]\w*\Z")
_PRED_RE = re.compile(r"[A-Za-z_]\w*\Z")


@dataclass(frozen=True)
class ActionSchema:
    verb: str
    arity: int
    required_capabilities: tuple[tuple[int, str], ...] = ()
    preconditions: tuple[Atom, ...] = ()
    effects: tuple[Atom, ...] = ()


@dataclass(frozen=True)
class Action:
    verb: str
    args: tuple[str, ...] = ()

    def render(self) -> str:
        return f"{self.verb}({', '.join(self.args)})"


@dataclass(frozen=True)
class ActionSequence:
    steps: tuple[Action, ...]
    source: str = "initial_llm"  # initial_llm | feedback_llm | refined | human_patched
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)


_STEP_RE = re.compile(r"^\s*(\d+)[.)]\s*([A-Za-z_]\w*)\s*\(([^()]*)\)\s*\.?\s*$")
_TOKEN_OK = re.compile(r"[a-z_]\w*\Z")


def parse_plan(text: str, source: str = "initial_llm") -> ActionSequence:
    """Extract ``N. verb(args)`` lines from LLM output; prose lines are ignored.

    Step numbers are renumbered densely; duplicate numbers are tolerated but
    recorded as a warning. Raises EmptyPlanError when nothing matches.
    """
    steps: list[Action] = []
    seen_numbers: set[int] = set()
    warnings: list[str] = []
    for line in text.splitlines():
        m = _STEP_RE.match(line)
        if not m:
            continue
        number = int(m.group(1))
        verb = m.group(2).lower()
        raw_args = m.group(3).strip()
        args: list[str] = []
        ok = True
        if raw_args:
            for piece in raw_args.split(","):
                token = piece.strip().lower()
                if not _TOKEN_OK.match(token):
                    ok = False
                    break
                args.append(token)
        if not ok:
            continue
        if number in seen_numbers:
            warnings.append(f"duplicate step number {number} (renumbered)")
        seen_numbers.add(number)
        steps.append(Action(verb, tuple(args)))
    if not steps:
        raise EmptyPlanError("no plan line of the form 'N. verb(args)' found")
    return ActionSequence(tuple(steps), source=source, warnings=tuple(warnings))


def render_plan(seq: ActionSequence) -> str:
    """Canonical numbered-line form; parse_plan inverts it on its image."""
    return "\n".join(f"{i}. {a.render()}" for i, a in enumerate(seq.steps, start=1))


def _parse_atom(kind: str, tokens: list[str], arity: int, line_no: int) -> Atom:
    ops = PRE_OPS if kind == "pre" else EFF_OPS
    if not tokens:
        raise MalformedSchemaError(f"{kind} needs an operator", line_no)
    op, terms = tokens[0], tokens[1:]
    if op not in ops:
        raise MalformedSchemaError(f"unknown {kind} operator {op!r}", line_no)
    if len(terms) != ops[op]:
        raise MalformedSchemaError(f"{op} takes {ops[op]} term(s), got {len(terms)}", line_no)
    if op in ("state", "set_state"):
        subject, predicate, value = terms
        if not _TERM_RE.match(subject):
            raise MalformedSchemaError(f"bad term {subject!r}", line_no)
        if not _PRED_RE.match(predicate):
            raise MalformedSchemaError(f"bad state predicate {predicate!r}", line_no)
        if value not in ("true", "false"):
            raise MalformedSchemaError(f"state value must be true/false, got {value!r}", line_no)
    else:
        for term in terms:
            if not _TERM_RE.match(term):
                raise MalformedSchemaError(f"bad term {term!r}", line_no)
    for term in terms:
        if term.startswith("?") and int(term[1:]) >= arity:
            raise MalformedSchemaError(f"argument reference {term} exceeds arity {arity}", line_no)
    return Atom(op, tuple(terms))


def parse_schemas(text: str) -> list[ActionSchema]:
    schemas: list[ActionSchema] = []
    verbs: set[str] = set()
    current: dict | None = None

    def finish(line_no: int) -> None:
        nonlocal current
        assert current is not None
        if current["arity"] is None:
            raise MalformedSchemaError(f"action {current['verb']!r} missing arity", line_no)
        schemas.append(
            ActionSchema(
                verb=current["verb"],
                arity=current["arity"],
                required_capabilities=tuple(current["require"]),
                preconditions=tuple(current["pre"]),
                effects=tuple(current["eff"]),
            )
        )
        current = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]
        if keyword == "action":
            if current is not None:
                raise MalformedSchemaError("nested 'action' (missing 'end'?)", line_no)
            if len(tokens) != 2 or not _TOKEN_OK.match(tokens[1]):
                raise MalformedSchemaError("expected 'action <verb>'", line_no)
            if tokens[1] in verbs:
                raise DuplicateVerbError(f"duplicate action verb {tokens[1]!r} at line {line_no}")
            verbs.add(tokens[1])
            current = {"verb": tokens[1], "arity": None, "require": [], "pre": [], "eff": []}
        elif current is None:
            raise MalformedSchemaError(f"{keyword!r} outside an action block", line_no)
        elif keyword == "arity":
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise MalformedSchemaError("expected 'arity <count>'", line_no)
            current["arity"] = int(tokens[1])
        elif keyword == "require":
            if len(tokens) != 3 or not tokens[1].isdigit() or not _PRED_RE.match(tokens[2]):
                raise MalformedSchemaError("expected 'require <arg-index> <CapabilityPredicate>'", line_no)
            if current["arity"] is not None and int(tokens[1]) >= current["arity"]:
                raise MalformedSchemaError(f"require index {tokens[1]} exceeds arity", line_no)
            current["require"].append((int(tokens[1]), tokens[2]))
        elif keyword in ("pre", "eff"):
            if current["arity"] is None:
                raise MalformedSchemaError("arity must come before pre/eff", line_no)
            current[keyword].append(_parse_atom(keyword, tokens[1:], current["arity"], line_no))
        elif keyword == "end":
            finish(line_no)
        else:
            raise MalformedSchemaError(f"unknown keyword {keyword!r}", line_no)
    if current is not None:
        raise MalformedSchemaError(f"action {current['verb']!r} not closed with 'end'", len(text.splitlines()))
    return schemas


def load_schemas(path: str | Path) -> list[ActionSchema]:
    """Load action schemas from a schema file; verbs must be unique."""
    return parse_schemas(Path(path).read_text())


def schema_index(schemas: list[ActionSchema]) -> dict[str, ActionSchema]:
    return {s.verb: s for s in schemas}
