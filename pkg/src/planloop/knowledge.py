"""Domain layer over two graphs: class capabilities and instance state.

The attribute graph holds class-level capabilities ((apple, IsSliceable,
true) means apples can be sliced); the state graph holds instances with
their location and current state flags. Capability semantics are closed
world: an absent capability triple means false.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .actions import Action, ActionSchema, schema_index
from .triples import (
    BoolLiteral,
    Graph,
    Iri,
    RDF_TYPE,
    StringLiteral,
    Term,
    Triple,
    ex,
    parse_turtle,
    stats,
)

OBJ_NAME = ex("obj_name")
OBJ_LOCATION = ex("obj_location")
HOLDING = ex("holding")
AGENT = ex("agent")

#: predicates with structural meaning; everything else in the state graph
#: must be a state flag declared in the capability map
_STRUCTURAL = {RDF_TYPE, OBJ_NAME, OBJ_LOCATION, HOLDING}


class UnknownEntityError(Exception):
    pass


class ConflictingTypeError(Exception):
    pass


class InvalidKnowledgeBaseError(Exception):
    pass


class InvalidExpansionError(Exception):
    pass


@dataclass(frozen=True)
class EntityRef:
    kind: str  # "instance" | "class"
    iri: Iri


@dataclass(frozen=True)
class Mismatch:
    """A plan token the knowledge base cannot validate."""

    kind: str  # unknown_action | unknown_object | capability_violation
    token: str
    step_index: int  # 1-based plan step
    arg_index: Optional[int] = None  # None for unknown_action
    capability: Optional[str] = None  # violated predicate, for capability_violation

    def describe(self) -> str:
        if self.kind == "unknown_action":
            return f"unknown action '{self.token}' at step {self.step_index}"
        if self.kind == "unknown_object":
            return f"unknown object '{self.token}' at step {self.step_index}"
        return (
            f"'{self.token}' at step {self.step_index} does not support "
            f"{self.capability}"
        )


@dataclass
class KnowledgeBase:
    state: Graph
    attributes: Graph
    capability_state_map: dict[str, str]  # capability predicate -> state predicate

    def copy(self) -> "KnowledgeBase":
        return KnowledgeBase(self.state.copy(), self.attributes.copy(), dict(self.capability_state_map))

    def stats(self) -> tuple[int, int]:
        return stats(self.state, self.attributes)

    def capability_vocabulary(self) -> tuple[str, ...]:
        return tuple(self.capability_state_map)


def load_capability_map(path: str | Path) -> dict[str, str]:
    """key=value lines pairing capability predicates with state predicates."""
    out: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidKnowledgeBaseError(f"{path}: line {line_no}: expected 'Capability=state_flag'")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def load_knowledge_base(
    state_path: str | Path,
    attributes_path: str | Path,
    capability_map_path: str | Path,
) -> KnowledgeBase:
    kb = KnowledgeBase(
        state=parse_turtle(Path(state_path).read_text()),
        attributes=parse_turtle(Path(attributes_path).read_text()),
        capability_state_map=load_capability_map(capability_map_path),
    )
    validate_knowledge_base(kb)
    return kb


def validate_knowledge_base(kb: KnowledgeBase) -> None:
    """Instance invariants: one rdf:type and one obj_location each; state
    flags must come from the capability map's range."""
    flags = set(kb.capability_state_map.values())
    for subject in kb.state.subjects():
        if len(kb.state.match(subject, RDF_TYPE, None)) != 1:
            raise InvalidKnowledgeBaseError(f"{subject.n3()} must have exactly one rdf:type")
        if len(kb.state.match(subject, OBJ_LOCATION, None)) != 1:
            raise InvalidKnowledgeBaseError(f"{subject.n3()} must have exactly one obj_location")
    for t in kb.state:
        if t.predicate not in _STRUCTURAL and t.predicate.local not in flags:
            raise InvalidKnowledgeBaseError(
                f"state predicate {t.predicate.n3()} not in the capability map's range"
            )


_NAME_RE = re.compile(r"[a-z_]\w*\Z")


def entity_exists(kb: KnowledgeBase, name: str) -> Optional[EntityRef]:
    """Resolve a word to an instance (state graph) or class (attribute graph)."""
    if not name or not _NAME_RE.match(name):
        return None
    hits = kb.state.match(None, OBJ_NAME, StringLiteral(name))
    if hits:
        return EntityRef("instance", hits[0].subject)
    hits = kb.attributes.match(None, OBJ_NAME, StringLiteral(name))
    if hits:
        return EntityRef("class", hits[0].subject)
    return None


def class_of(kb: KnowledgeBase, entity: Iri) -> Optional[Iri]:
    """Class Iri for an entity; instances resolve by name, then by stripping
    a numeric suffix (apple1 -> apple)."""
    if kb.attributes.match(entity, None, None):
        return entity
    stripped = entity.local.rstrip("0123456789")
    if stripped and stripped != entity.local:
        candidate = Iri(entity.prefix, stripped)
        if kb.attributes.match(candidate, None, None):
            return candidate
    return None


def capability(kb: KnowledgeBase, entity: Iri, predicate: str | Iri) -> bool:
    """True iff the entity's class declares the capability as true."""
    pred = ex(predicate) if isinstance(predicate, str) else predicate
    cls = class_of(kb, entity)
    if cls is None:
        if not kb.state.match(entity, None, None):
            raise UnknownEntityError(entity.n3())
        return False  # instance without a class block: closed-world default
    return kb.attributes.ask(Triple(cls, pred, BoolLiteral(True)))


def action_mismatches(
    kb: KnowledgeBase, action: Action, schemas: Sequence[ActionSchema], step_index: int
) -> list[Mismatch]:
    """All mismatches for one plan step, action first, then argument order."""
    idx = schema_index(list(schemas))
    out: list[Mismatch] = []
    schema = idx.get(action.verb)
    if schema is None or schema.arity != len(action.args):
        # a verb used with the wrong arity is just as unknown to the schema
        out.append(Mismatch("unknown_action", action.verb, step_index))
    resolved: dict[int, EntityRef] = {}
    for i, arg in enumerate(action.args):
        ref = entity_exists(kb, arg)
        if ref is None:
            out.append(Mismatch("unknown_object", arg, step_index, arg_index=i))
        else:
            resolved[i] = ref
    if schema is not None and schema.arity == len(action.args):
        for i, cap in sorted(schema.required_capabilities):
            ref = resolved.get(i)
            if ref is not None and not capability(kb, ref.iri, cap):
                out.append(
                    Mismatch(
                        "capability_violation",
                        action.args[i],
                        step_index,
                        arg_index=i,
                        capability=cap,
                    )
                )
    return out


def feasibility(
    kb: KnowledgeBase, action: Action, schemas: Sequence[ActionSchema], step_index: int = 1
) -> Optional[Mismatch]:
    """None when the action passes every check, else the first mismatch."""
    found = action_mismatches(kb, action, schemas, step_index)
    return found[0] if found else None


@dataclass(frozen=True)
class Expansion:
    """A human-confirmed new entity plus its elicited attributes.

    class_attributes become the new class block; location and state_flags
    become the new instance block.
    """

    entity: Iri
    location: Iri
    class_attributes: tuple[tuple[str, bool], ...] = ()
    state_flags: tuple[tuple[str, bool], ...] = ()
    entity_type: str = "object"
    allow_new_predicates: bool = False
    allow_retype: bool = False


def validate_expansion(kb: KnowledgeBase, expansion: Expansion) -> None:
    if not expansion.entity.local:
        raise InvalidExpansionError("entity name must be non-empty")
    if not expansion.allow_new_predicates:
        vocab = set(kb.capability_state_map)
        for pred, _ in expansion.class_attributes:
            if pred not in vocab:
                raise InvalidExpansionError(
                    f"attribute predicate {pred!r} is not in the declared capability vocabulary"
                )


def apply_expansion(kb: KnowledgeBase, expansion: Expansion) -> KnowledgeBase:
    """Grow the knowledge base with one class block and one instance block.

    Value updates replace the object of an existing (s, p, .) triple, so
    node/edge counts never decrease. Raises ConflictingTypeError when the
    entity already has a different rdf:type and no override flag is set.
    """
    validate_expansion(kb, expansion)
    entity = expansion.entity
    type_iri = ex(expansion.entity_type)
    for g in (kb.attributes, kb.state):
        existing = g.value(entity, RDF_TYPE)
        if existing is not None and existing != type_iri and not expansion.allow_retype:
            raise ConflictingTypeError(
                f"{entity.n3()} already has type {existing.n3()}, expansion says {type_iri.n3()}"
            )
    name = StringLiteral(entity.local)
    kb.attributes.set_value(entity, RDF_TYPE, type_iri)
    kb.attributes.set_value(entity, OBJ_NAME, name)
    for pred, value in expansion.class_attributes:
        kb.attributes.set_value(entity, ex(pred), BoolLiteral(value))
    kb.state.set_value(entity, RDF_TYPE, type_iri)
    kb.state.set_value(entity, OBJ_NAME, name)
    kb.state.set_value(entity, OBJ_LOCATION, expansion.location)
    for pred, value in expansion.state_flags:
        kb.state.set_value(entity, ex(pred), BoolLiteral(value))
    return kb


def expansion_for_capabilities(
    kb: KnowledgeBase,
    entity_name: str,
    entity_type: str,
    capabilities: Sequence[tuple[str, bool]],
    location: Iri,
) -> Expansion:
    """Build an Expansion from elicited capability answers.

    Only capabilities answered true become class attributes (closed world);
    each such capability initialises its mapped state flag to false.
    """
    true_caps = tuple((pred, True) for pred, value in capabilities if value)
    flags = tuple((kb.capability_state_map[pred], False) for pred, _ in true_caps)
    return Expansion(
        entity=ex(entity_name),
        location=location,
        class_attributes=true_caps,
        state_flags=flags,
        entity_type=entity_type,
    )
