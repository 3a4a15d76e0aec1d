"""Evaluation measures: ingredient overlap, token totals, KG growth, success.

Success here is goal-predicate based (a desk-scale proxy; the original
measure was human scoring, which is out of scope), so the numbers are
interpretable but deliberately never compared one-to-one against published
percentages.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .actions import ActionSequence
from .knowledge import KnowledgeBase, entity_exists
from .refine import Lexicon


class EmptyGroundTruthError(Exception):
    pass


class EmptyCorpusError(Exception):
    pass


def ingredient_overlap(required: set[str], used: set[str]) -> float:
    """|required ∩ used| / |required|."""
    if not required:
        raise EmptyGroundTruthError("ground-truth ingredient set is empty")
    return len(required & used) / len(required)


def mean_ingredient_overlap(pairs: Sequence[tuple[set[str], set[str]]]) -> float:
    if not pairs:
        raise EmptyCorpusError("no recipe pairs")
    return sum(ingredient_overlap(m, l) for m, l in pairs) / len(pairs)


def normalize_word(word: str, lexicon: Lexicon) -> str:
    """Lexicon-based singularization: strip a plural 's' when the stem is known."""
    if word in lexicon:
        return word
    if word.endswith("s") and word[:-1] in lexicon:
        return word[:-1]
    return word


def extract_ingredients(seq: ActionSequence, kb: KnowledgeBase, lexicon: Lexicon) -> frozenset[str]:
    """Argument words that resolve in the KB and are lexicon-tagged ingredients."""
    out: set[str] = set()
    for action in seq.steps:
        for arg in action.args:
            word = normalize_word(arg, lexicon)
            if "ingredient" in lexicon.categories_of(word) and entity_exists(kb, arg) is not None:
                out.add(word)
    return frozenset(out)


def load_ground_truth(path: str | Path) -> dict[str, frozenset[str]]:
    """Recipe file: one 'id: word, word, ...' entry per line."""
    out: dict[str, frozenset[str]] = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise EmptyGroundTruthError(f"line {line_no}: expected 'id: ingredients'")
        rid, _, rest = line.partition(":")
        words = frozenset(w.strip() for w in rest.split(",") if w.strip())
        if not words:
            raise EmptyGroundTruthError(f"line {line_no}: recipe {rid!r} lists no ingredients")
        out[rid.strip()] = words
    return out


@dataclass(frozen=True)
class TaskRow:
    scenario_id: str
    configuration: str
    success: bool
    tokens: int
    overlap: Optional[float]
    kg_before: tuple[int, int]
    kg_after: tuple[int, int]


@dataclass(frozen=True)
class ConfigurationSummary:
    configuration: str
    tasks: int
    successes: int
    success_rate: float
    avg_tokens: float
    mean_overlap: Optional[float]
    final_kg: tuple[int, int]


@dataclass(frozen=True)
class CorpusReport:
    rows: tuple[TaskRow, ...]
    summaries: tuple[ConfigurationSummary, ...]

    def to_dict(self) -> dict:
        return {
            "rows": [
                {
                    "scenario": r.scenario_id,
                    "configuration": r.configuration,
                    "success": r.success,
                    "tokens": r.tokens,
                    "overlap": r.overlap,
                    "kg_before": list(r.kg_before),
                    "kg_after": list(r.kg_after),
                }
                for r in self.rows
            ],
            "summaries": [
                {
                    "configuration": s.configuration,
                    "tasks": s.tasks,
                    "successes": s.successes,
                    "success_rate": s.success_rate,
                    "avg_tokens": s.avg_tokens,
                    "mean_overlap": s.mean_overlap,
                    "final_kg": list(s.final_kg),
                }
                for s in self.summaries
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def render(self) -> str:
        def fmt_overlap(value: Optional[float]) -> str:
            return "-" if value is None else f"{value:.4f}"

        header = ["scenario", "configuration", "success", "tokens", "overlap", "kg_before", "kg_after"]
        table = [header]
        for r in self.rows:
            table.append(
                [
                    r.scenario_id,
                    r.configuration,
                    "yes" if r.success else "no",
                    str(r.tokens),
                    fmt_overlap(r.overlap),
                    str(r.kg_before),
                    str(r.kg_after),
                ]
            )
        lines = _align(table)
        lines.append("")
        summary_table = [
            ["configuration", "tasks", "successes", "success_rate", "avg_tokens", "mean_overlap", "final_kg"]
        ]
        for s in self.summaries:
            summary_table.append(
                [
                    s.configuration,
                    str(s.tasks),
                    str(s.successes),
                    f"{100.0 * s.success_rate:.1f}%",
                    f"{s.avg_tokens:.1f}",
                    fmt_overlap(s.mean_overlap),
                    str(s.final_kg),
                ]
            )
        lines.extend(_align(summary_table))
        return "\n".join(lines) + "\n"


def _align(table: list[list[str]]) -> list[str]:
    widths = [max(len(row[c]) for row in table) for c in range(len(table[0]))]
    return ["  ".join(v.ljust(widths[c]) for c, v in enumerate(row)).rstrip() for row in table]


def build_report(
    results: Sequence,  # SessionResult
    ground_truth: Optional[dict[str, frozenset[str]]] = None,
    lexicon: Optional[Lexicon] = None,
) -> CorpusReport:
    """Per-task rows plus per-configuration aggregates.

    Overlap is filled for tasks with a ground-truth recipe entry; aggregates
    are recomputable from the rows (and tests do recompute them).
    """
    if not results:
        raise EmptyCorpusError("no session results")
    rows: list[TaskRow] = []
    for r in results:
        overlap: Optional[float] = None
        if ground_truth and r.scenario_id in ground_truth:
            truth = ground_truth[r.scenario_id]
            if lexicon is not None:
                truth = frozenset(normalize_word(w, lexicon) for w in truth)
            overlap = ingredient_overlap(set(truth), set(r.ingredients))
        rows.append(
            TaskRow(
                scenario_id=r.scenario_id,
                configuration=r.configuration,
                success=r.goal_success,
                tokens=r.tokens,
                overlap=overlap,
                kg_before=r.stats_before,
                kg_after=r.stats_after,
            )
        )
    configurations: list[str] = []
    for row in rows:
        if row.configuration not in configurations:
            configurations.append(row.configuration)
    summaries: list[ConfigurationSummary] = []
    for configuration in configurations:
        group = [row for row in rows if row.configuration == configuration]
        overlaps = [row.overlap for row in group if row.overlap is not None]
        summaries.append(
            ConfigurationSummary(
                configuration=configuration,
                tasks=len(group),
                successes=sum(row.success for row in group),
                success_rate=sum(row.success for row in group) / len(group),
                avg_tokens=sum(row.tokens for row in group) / len(group),
                mean_overlap=(sum(overlaps) / len(overlaps)) if overlaps else None,
                final_kg=group[-1].kg_after,
            )
        )
    return CorpusReport(tuple(rows), tuple(summaries))
