"""In-memory triple store with a small Turtle subset parser and serializer.

The store holds RDF-style (subject, predicate, object) facts. Supported
Turtle subset: ``@prefix`` declarations, subject blocks with ``;``-separated
predicate-object pairs terminated by ``.``, prefixed names, bare ``true`` /
``false`` booleans and single-quoted strings. No blank nodes, collections,
datatypes or language tags.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Union

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
EX_NS = "http://example.org/domain#"

#: Prefix table a fresh Graph starts with.
DEFAULT_PREFIXES = {"ex": EX_NS, "rdf": RDF_NS}


class TurtleSyntaxError(Exception):
    """Malformed Turtle input; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownPrefixError(Exception):
    """A prefixed name used a prefix that was never declared."""

    def __init__(self, prefix: str, line: int = 0, column: int = 0):
        super().__init__(f"undeclared prefix '{prefix}:' (line {line}, column {column})")
        self.prefix = prefix
        self.line = line
        self.column = column


_LOCAL_RE = re.compile(r"\S+\Z")


@dataclass(frozen=True)
class Iri:
    """A prefixed name such as ``ex:onion``."""

    prefix: str
    local: str

    def __post_init__(self) -> None:
        if not self.local or not _LOCAL_RE.match(self.local):
            raise ValueError(f"bad IRI local name: {self.local!r}")

    def n3(self) -> str:
        return f"{self.prefix}:{self.local}"


@dataclass(frozen=True)
class BoolLiteral:
    value: bool

    def n3(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class StringLiteral:
    value: str

    def __post_init__(self) -> None:
        if "'" in self.value or "\n" in self.value:
            raise ValueError("string literals may not contain quotes or newlines")

    def n3(self) -> str:
        return f"'{self.value}'"


Term = Union[Iri, BoolLiteral, StringLiteral]


def ex(local: str) -> Iri:
    """Shorthand for an Iri in the project namespace."""
    return Iri("ex", local)


RDF_TYPE = Iri("rdf", "type")


@dataclass(frozen=True)
class Triple:
    subject: Iri
    predicate: Iri
    object: Term

    def sort_key(self) -> tuple[str, str, str]:
        return (self.subject.n3(), self.predicate.n3(), self.object.n3())

    def __lt__(self, other: "Triple") -> bool:
        return self.sort_key() < other.sort_key()

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


class Graph:
    """A set of triples plus the prefix table used to read/write them.

    Set semantics: inserting an existing triple is a no-op. A Graph is a
    value owned by one session; callers that need a cross-thread view take
    a ``copy()``.
    """

    def __init__(self, prefixes: Optional[dict[str, str]] = None):
        self._triples: set[Triple] = set()
        self.prefixes: dict[str, str] = dict(DEFAULT_PREFIXES if prefixes is None else prefixes)

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(sorted(self._triples, key=Triple.sort_key))

    def __contains__(self, t: Triple) -> bool:
        return t in self._triples

    def insert(self, t: Triple) -> bool:
        """Add a triple; returns True if the graph changed."""
        if t in self._triples:
            return False
        self._triples.add(t)
        return True

    def remove(self, t: Triple) -> bool:
        """Remove a triple; removing an absent triple is a no-op."""
        if t not in self._triples:
            return False
        self._triples.discard(t)
        return True

    def ask(self, t: Triple) -> bool:
        return t in self._triples

    def match(
        self,
        s: Optional[Iri] = None,
        p: Optional[Iri] = None,
        o: Optional[Term] = None,
    ) -> list[Triple]:
        """All triples agreeing with every bound position, canonically ordered."""
        out = [
            t
            for t in self._triples
            if (s is None or t.subject == s)
            and (p is None or t.predicate == p)
            and (o is None or t.object == o)
        ]
        out.sort(key=Triple.sort_key)
        return out

    def value(self, s: Iri, p: Iri) -> Optional[Term]:
        """Object of the unique (s, p, ·) triple, or None."""
        hits = self.match(s, p, None)
        return hits[0].object if hits else None

    def set_value(self, s: Iri, p: Iri, o: Term) -> bool:
        """Replace the object of (s, p, ·), keeping the predicate single-valued."""
        changed = False
        for t in self.match(s, p, None):
            if t.object != o:
                self._triples.discard(t)
                changed = True
        return self.insert(Triple(s, p, o)) or changed

    def subjects(self) -> list[Iri]:
        return sorted({t.subject for t in self._triples}, key=Iri.n3)

    def copy(self) -> "Graph":
        g = Graph(self.prefixes)
        g._triples = set(self._triples)
        return g

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self._triples == other._triples

    def __repr__(self) -> str:
        return f"Graph({len(self._triples)} triples)"


# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<prefix_kw>@prefix\b)
  | (?P<iriref><[^<>\s]*>)
  | (?P<string>'[^'\n]*')
  | (?P<semi>;)
  | (?P<dot>\.(?=\s|$))
  | (?P<pname>[A-Za-z_]\w*:[A-Za-z_]\w*)
  | (?P<pname_ns>[A-Za-z_]\w*:)
  | (?P<word>[A-Za-z_]\w*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise TurtleSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or ""
        tok = m.group()
        if kind == "nl":
            line += 1
            col = 1
        else:
            if kind not in ("ws", "comment"):
                tokens.append(_Token(kind, tok, line, col))
            col += len(tok)
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0
        self.graph = Graph(prefixes={})

    def _peek(self) -> Optional[_Token]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self, expected: str) -> _Token:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", "", 1, 1)
            raise TurtleSyntaxError(f"unexpected end of input, expected {expected}", last.line, last.column)
        self.i += 1
        return tok

    def _iri(self, tok: _Token) -> Iri:
        prefix, local = tok.text.split(":", 1)
        if prefix not in self.graph.prefixes:
            raise UnknownPrefixError(prefix, tok.line, tok.column)
        return Iri(prefix, local)

    def _term(self, tok: _Token) -> Term:
        if tok.kind == "pname":
            return self._iri(tok)
        if tok.kind == "string":
            return StringLiteral(tok.text[1:-1])
        if tok.kind == "word" and tok.text in ("true", "false"):
            return BoolLiteral(tok.text == "true")
        raise TurtleSyntaxError(f"expected IRI or literal, got {tok.text!r}", tok.line, tok.column)

    def _prefix_decl(self) -> None:
        ns_tok = self._next("prefix name")
        if ns_tok.kind not in ("pname_ns",):
            raise TurtleSyntaxError(f"expected 'name:' after @prefix, got {ns_tok.text!r}", ns_tok.line, ns_tok.column)
        iri_tok = self._next("namespace IRI")
        if iri_tok.kind != "iriref":
            raise TurtleSyntaxError(f"expected <IRI>, got {iri_tok.text!r}", iri_tok.line, iri_tok.column)
        dot = self._next("'.'")
        if dot.kind != "dot":
            raise TurtleSyntaxError(f"expected '.' after prefix declaration, got {dot.text!r}", dot.line, dot.column)
        self.graph.prefixes[ns_tok.text[:-1]] = iri_tok.text[1:-1]

    def _subject_block(self, subj_tok: _Token) -> None:
        if subj_tok.kind != "pname":
            raise TurtleSyntaxError(f"expected subject IRI, got {subj_tok.text!r}", subj_tok.line, subj_tok.column)
        subject = self._iri(subj_tok)
        while True:
            pred_tok = self._next("predicate IRI")
            if pred_tok.kind != "pname":
                raise TurtleSyntaxError(
                    f"expected predicate IRI, got {pred_tok.text!r}", pred_tok.line, pred_tok.column
                )
            predicate = self._iri(pred_tok)
            obj = self._term(self._next("object term"))
            self.graph.insert(Triple(subject, predicate, obj))
            sep = self._next("';' or '.'")
            if sep.kind == "dot":
                return
            if sep.kind != "semi":
                raise TurtleSyntaxError(f"expected ';' or '.', got {sep.text!r}", sep.line, sep.column)
            # tolerate a trailing ';' before the terminating '.'
            nxt = self._peek()
            if nxt is not None and nxt.kind == "dot":
                self.i += 1
                return

    def parse(self) -> Graph:
        while True:
            tok = self._peek()
            if tok is None:
                return self.graph
            self.i += 1
            if tok.kind == "prefix_kw":
                self._prefix_decl()
            else:
                self._subject_block(tok)


def parse_turtle(text: str) -> Graph:
    """Parse a Turtle-subset document into a Graph.

    Raises TurtleSyntaxError (with line/column) on malformed input and
    UnknownPrefixError on use of an undeclared prefix.
    """
    return _Parser(_tokenize(text)).parse()


def serialize_turtle(g: Graph) -> str:
    """Canonical Turtle form: prefixes, then subject blocks, all sorted.

    parse_turtle(serialize_turtle(g)) has the same triple set as g.
    """
    for t in g:
        for term in (t.subject, t.predicate, t.object):
            if isinstance(term, Iri) and term.prefix not in g.prefixes:
                raise UnknownPrefixError(term.prefix)
    lines = [f"@prefix {p}: <{ns}> ." for p, ns in sorted(g.prefixes.items())]
    blocks: list[str] = []
    triples = list(g)  # canonically sorted
    i = 0
    while i < len(triples):
        subject = triples[i].subject
        rows = []
        while i < len(triples) and triples[i].subject == subject:
            rows.append(f"{triples[i].predicate.n3()} {triples[i].object.n3()}")
            i += 1
        body = f"{subject.n3()} " + " ;\n    ".join(rows) + " ."
        blocks.append(body)
    doc = "\n".join(lines)
    if blocks:
        doc += "\n\n" + "\n\n".join(blocks)
    return doc + "\n"


def stats(state_graph: Graph, attribute_graph: Graph) -> tuple[int, int]:
    """(node count, edge count) across the state and attribute graphs.

    Edges = total triples. Nodes = distinct entity Iris in subject or
    object position, excluding predicate Iris and the class scaffold
    (objects of rdf:type triples).
    """
    edges = len(state_graph) + len(attribute_graph)
    nodes: set[Iri] = set()
    predicates: set[Iri] = set()
    for g in (state_graph, attribute_graph):
        for t in g:
            predicates.add(t.predicate)
            nodes.add(t.subject)
            if isinstance(t.object, Iri) and t.predicate != RDF_TYPE:
                nodes.add(t.object)
    return (len(nodes - predicates), edges)
