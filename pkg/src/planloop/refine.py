"""Mismatch detection and lexical repair of plans against the knowledge base.

Repair is direct word matching through a hypernym/hyponym lexicon: exact
match first, then siblings under a shared immediate hypernym, then direct
hyponyms, then direct hypernyms, with lexicographic tie-breaks. Every
replacement must already resolve in the knowledge base (or schema verb
list); nothing is invented.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .actions import Action, ActionSchema, ActionSequence
from .knowledge import (
    KnowledgeBase,
    Mismatch,
    action_mismatches,
    capability,
    entity_exists,
)

CATEGORIES = {"object", "action", "tool", "receptacle", "ingredient"}

#: refinement passes are bounded; each pass must rewrite something to continue
_MAX_PASSES = 5


class MalformedLexiconError(Exception):
    pass


class LexiconCycleError(Exception):
    pass


@dataclass(frozen=True)
class Lexicon:
    """Directed acyclic hypernym graph with per-word category tags."""

    categories: dict[str, frozenset[str]]
    hypernyms: dict[str, frozenset[str]]
    hyponyms: dict[str, frozenset[str]]

    def __contains__(self, word: str) -> bool:
        return word in self.categories

    def categories_of(self, word: str) -> frozenset[str]:
        return self.categories.get(word, frozenset())

    def words(self) -> list[str]:
        return sorted(self.categories)

    def siblings(self, word: str) -> set[str]:
        """Words sharing an immediate hypernym with `word`."""
        out: set[str] = set()
        for parent in self.hypernyms.get(word, frozenset()):
            out |= self.hyponyms.get(parent, frozenset())
        out.discard(word)
        return out


def parse_lexicon(text: str) -> Lexicon:
    categories: dict[str, set[str]] = {}
    hypernyms: dict[str, set[str]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise MalformedLexiconError(f"line {line_no}: expected 'word category hypernym'")
        word, category, hypernym = fields
        if category not in CATEGORIES:
            raise MalformedLexiconError(f"line {line_no}: unknown category {category!r}")
        categories.setdefault(word, set()).add(category)
        hypernyms.setdefault(word, set())
        if hypernym != "-":
            hypernyms[word].add(hypernym)
    for word, parents in hypernyms.items():
        for parent in parents:
            if parent not in categories:
                raise MalformedLexiconError(f"hypernym {parent!r} of {word!r} has no own entry")
    _check_acyclic(hypernyms)
    hyponyms: dict[str, set[str]] = {}
    for word, parents in hypernyms.items():
        for parent in parents:
            hyponyms.setdefault(parent, set()).add(word)
    return Lexicon(
        categories={w: frozenset(c) for w, c in categories.items()},
        hypernyms={w: frozenset(p) for w, p in hypernyms.items()},
        hyponyms={w: frozenset(c) for w, c in hyponyms.items()},
    )


def _check_acyclic(hypernyms: dict[str, set[str]]) -> None:
    state: dict[str, int] = {}  # 1 = visiting, 2 = done

    def visit(word: str, trail: list[str]) -> None:
        if state.get(word) == 2:
            return
        if state.get(word) == 1:
            raise LexiconCycleError(" -> ".join(trail + [word]))
        state[word] = 1
        for parent in hypernyms.get(word, set()):
            visit(parent, trail + [word])
        state[word] = 2

    for word in hypernyms:
        visit(word, [])


def load_lexicon(path: str | Path) -> Lexicon:
    return parse_lexicon(Path(path).read_text())


def detect_mismatches(
    seq: ActionSequence, kb: KnowledgeBase, schemas: Sequence[ActionSchema]
) -> list[Mismatch]:
    """All mismatches over the sequence in (step, arg) order; [] iff feasible."""
    out: list[Mismatch] = []
    for step_index, action in enumerate(seq.steps, start=1):
        out.extend(action_mismatches(kb, action, schemas, step_index))
    return out


def propose_replacement(
    mismatch: Mismatch,
    kb: KnowledgeBase,
    lexicon: Lexicon,
    schemas: Sequence[ActionSchema],
) -> Optional[str]:
    """Best same-category replacement for a mismatch token, or None.

    Preference: exact match > sibling via shared immediate hypernym >
    hyponym of the token > hypernym of the token; ties break
    lexicographically. Candidates must resolve in the KB (schema verbs for
    action mismatches); capability violations additionally require the
    candidate's class to hold the violated capability.
    """
    token = mismatch.token
    token_cats = lexicon.categories_of(token)
    if not token_cats:
        return None

    if mismatch.kind == "unknown_action":
        verbs = {s.verb for s in schemas}

        def usable(word: str) -> bool:
            return word in verbs

    elif mismatch.kind == "capability_violation":
        needed = mismatch.capability or ""

        def usable(word: str) -> bool:
            ref = entity_exists(kb, word)
            return ref is not None and capability(kb, ref.iri, needed)

    else:

        def usable(word: str) -> bool:
            return entity_exists(kb, word) is not None

    def shares_category(word: str) -> bool:
        return bool(lexicon.categories_of(word) & token_cats)

    if usable(token):
        return token
    buckets = [
        lexicon.siblings(token),
        set(lexicon.hyponyms.get(token, frozenset())),
        set(lexicon.hypernyms.get(token, frozenset())),
    ]
    for bucket in buckets:
        found = sorted(w for w in bucket if w != token and shares_category(w) and usable(w))
        if found:
            return found[0]
    return None


@dataclass(frozen=True)
class RefineResult:
    refined: ActionSequence
    unresolved: tuple[Mismatch, ...]
    rewrites: tuple[tuple[str, str], ...]


def refine_sequence(
    seq: ActionSequence,
    kb: KnowledgeBase,
    lexicon: Lexicon,
    schemas: Sequence[ActionSchema],
) -> RefineResult:
    """Repair every repairable mismatch; report the rest as unresolved.

    Pure: the knowledge base is never modified here. Deterministic: the
    rewrite log lists (from, to) pairs in application order.
    """
    current = seq
    rewrites: list[tuple[str, str]] = []
    for _ in range(_MAX_PASSES):
        mismatches = detect_mismatches(current, kb, schemas)
        if not mismatches:
            break
        steps = list(current.steps)
        applied = False
        for m in mismatches:
            replacement = propose_replacement(m, kb, lexicon, schemas)
            if replacement is None or replacement == m.token:
                continue
            action = steps[m.step_index - 1]
            if m.kind == "unknown_action":
                steps[m.step_index - 1] = Action(replacement, action.args)
            else:
                args = list(action.args)
                args[m.arg_index] = replacement
                steps[m.step_index - 1] = Action(action.verb, tuple(args))
            rewrites.append((m.token, replacement))
            applied = True
        if not applied:
            break
        current = ActionSequence(tuple(steps), source="refined", warnings=current.warnings)
    unresolved = tuple(detect_mismatches(current, kb, schemas))
    return RefineResult(current, unresolved, tuple(rewrites))
