"""Prompt construction and pluggable LLM clients.

The scripted client replays canned plans in call order, which keeps trials
linked: every run configuration consumes the identical reply sequence no
matter how its prompts differ. The remote adapter speaks an OpenAI-style
chat endpoint and is entirely optional; nothing in the test suite needs it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol, Sequence

from .actions import ActionSequence, render_plan

#: worked example embedded in every initial prompt
DEFAULT_EXAMPLE_TASK = "make coffee"
DEFAULT_EXAMPLE_PLAN = """1. move(pantry)
2. pick_up(coffee_powder)
3. move(counter)
4. put_down(coffee_powder, counter)
5. toggle_on(stove)
6. boil(water)
7. pick_up(coffee_powder)
8. pour(coffee_powder, cup)
9. serve(cup, counter)"""


class ScriptExhaustedError(Exception):
    """The scenario script provided fewer replies than the session consumed."""


class TransportError(Exception):
    pass


@dataclass(frozen=True)
class PromptSpec:
    task: str
    domain_objects: tuple[str, ...]
    action_set: tuple[str, ...]
    example_task: str = DEFAULT_EXAMPLE_TASK
    example_plan: str = DEFAULT_EXAMPLE_PLAN


@dataclass(frozen=True)
class LlmReply:
    text: str
    token_count: int  # prompt + completion


def count_tokens(text: str) -> int:
    """Whitespace token count: the scripted client's accounting rule.

    A proxy for provider token counts, never compared against them.
    """
    return len(text.split())


def build_initial_prompt(spec: PromptSpec) -> str:
    """Deterministic chain-of-thought style prompt with one worked example."""
    objects = ", ".join(spec.domain_objects)
    actions = ", ".join(spec.action_set)
    return (
        "You are a household assistant robot. Decompose the task below into a\n"
        "sequence of abstract actions, thinking through the steps in order.\n"
        f"Available objects: {objects}.\n"
        f"Available actions: {actions}.\n"
        "Reply only with a numbered action sequence, one step per line, in the\n"
        "form 'N. verb(arg, arg)'.\n"
        "\n"
        f"Example task: {spec.example_task}\n"
        "Example plan:\n"
        f"{spec.example_plan}\n"
        "\n"
        f"Task: {spec.task}\n"
        "Plan:"
    )


def build_feedback_prompt(prior: ActionSequence, problem) -> str:
    """Re-prompt embedding the prior plan and a one-line problem description.

    `problem` is anything with a describe() method (a mismatch, an execution
    error, or a goal shortfall).
    """
    return (
        "The previous plan was:\n"
        f"{render_plan(prior)}\n"
        f"Problem: {problem.describe()}\n"
        "Provide a corrected numbered action sequence, one 'N. verb(arg, arg)'\n"
        "per line, using only available objects and actions."
    )


class LlmClient(Protocol):
    def call(self, prompt: str) -> LlmReply: ...


class ScriptedLlm:
    """Replays canned replies in call order; raises when over-consumed."""

    def __init__(self, replies: Sequence[str]):
        self._replies = list(replies)
        self.consumed: list[str] = []

    @property
    def cursor(self) -> int:
        return len(self.consumed)

    def call(self, prompt: str) -> LlmReply:
        if self.cursor >= len(self._replies):
            raise ScriptExhaustedError(
                f"script exhausted after {len(self._replies)} replies"
            )
        text = self._replies[self.cursor]
        self.consumed.append(text)
        return LlmReply(text, count_tokens(prompt) + count_tokens(text))


SCRIPT_DELIMITER = "---"


def parse_script(text: str) -> list[str]:
    """Reply blocks separated by lines containing only '---'."""
    blocks: list[list[str]] = [[]]
    for line in text.splitlines():
        if line.strip() == SCRIPT_DELIMITER:
            blocks.append([])
        else:
            blocks[-1].append(line)
    replies = ["\n".join(b).strip() for b in blocks]
    return [r for r in replies if r]


def load_script(path: str | Path) -> list[str]:
    return parse_script(Path(path).read_text())


class RemoteLlm:
    """OpenAI-style chat-completions adapter, configured via environment.

    Env vars: LLM_ENDPOINT (base URL), LLM_MODEL, LLM_API_KEY. Token counts
    are the provider-reported totals.
    """

    def __init__(self, endpoint: str, model: str, api_key: str = "", transport=None):
        import httpx

        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self._headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(transport=transport, timeout=60.0)

    @classmethod
    def from_env(cls) -> "RemoteLlm":
        endpoint = os.environ.get("LLM_ENDPOINT")
        model = os.environ.get("LLM_MODEL")
        if not endpoint or not model:
            raise TransportError("LLM_ENDPOINT and LLM_MODEL must be set for the remote adapter")
        return cls(endpoint, model, os.environ.get("LLM_API_KEY", ""))

    def call(self, prompt: str) -> LlmReply:
        import httpx

        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            response = self._client.post(
                f"{self.endpoint}/chat/completions", json=payload, headers=self._headers
            )
            response.raise_for_status()
            body = response.json()
            text = body["choices"][0]["message"]["content"]
            tokens = int(body.get("usage", {}).get("total_tokens", 0))
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise TransportError(str(exc)) from exc
        return LlmReply(text, tokens)
