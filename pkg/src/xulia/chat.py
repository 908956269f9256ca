"""Conversational pattern matcher with macro-invoking templates.

A small AIML-flavoured dialect: category patterns are literal words plus
`*` wildcards (each matching one or more tokens), templates interleave
text with star references and may carry one command element that invokes
a macro with parameters bound to the captures.  Natural-language phrases
can therefore drive parameterized commands.

Brain files:

    <brain default="no te he entendido">
      <category>
        <pattern>BUSCA *</pattern>
        <template>buscando <star index="1"/>
          <command name="web.search"><param star="1"/></command>
        </template>
      </category>
    </brain>
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .recognition import normalize

DEFAULT_RESPONSE = "no te he entendido"

# knowledge lookups a template command may name instead of a macro
KNOWLEDGE_KINDS = {"@weather": "weather", "@who-is": "who-is", "@what-is": "what-is"}


class BrainError(ValueError):
    pass


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class StarPart:
    index: int  # 1-based wildcard reference


@dataclass(frozen=True)
class CommandPart:
    macro: str
    params: tuple[TextPart | StarPart, ...] = ()


@dataclass(frozen=True)
class ChatCategory:
    pattern: tuple[str, ...]  # normalized literals and "*"
    parts: tuple[TextPart | StarPart | CommandPart, ...]

    def __post_init__(self) -> None:
        if not self.pattern:
            raise BrainError("pattern must be non-empty")
        stars = sum(1 for t in self.pattern if t == "*")
        for part in self.parts:
            refs: Iterable[StarPart] = ()
            if isinstance(part, StarPart):
                refs = (part,)
            elif isinstance(part, CommandPart):
                refs = (p for p in part.params if isinstance(p, StarPart))
            for ref in refs:
                if not 1 <= ref.index <= stars:
                    raise BrainError(
                        f"star reference {ref.index} exceeds the {stars} wildcard(s) in pattern"
                    )

    @property
    def literal_count(self) -> int:
        return sum(1 for t in self.pattern if t != "*")

    @property
    def is_exact(self) -> bool:
        return "*" not in self.pattern


@dataclass(frozen=True)
class CommandInvocation:
    macro: str
    params: tuple[str, ...] = ()


@dataclass(frozen=True)
class Reply:
    speech: str
    command: CommandInvocation | None = None


@dataclass(frozen=True)
class ChatBrain:
    categories: tuple[ChatCategory, ...] = ()
    default_response: str = DEFAULT_RESPONSE

    def __post_init__(self) -> None:
        seen = set()
        for cat in self.categories:
            if cat.pattern in seen:
                raise BrainError(f"duplicate pattern {' '.join(cat.pattern)!r}")
            seen.add(cat.pattern)


def match_pattern(input_text: str, pattern: tuple[str, ...] | str) -> list[str] | None:
    """Match tokens against a pattern; `*` captures one or more tokens.

    Stars are as short as possible, anchoring literals leftmost.
    Returns the captured token groups (space-joined) or None.
    """
    if isinstance(pattern, str):
        pattern = tuple(normalize(pattern).split())
    tokens = normalize(input_text).split()

    def walk(ti: int, pi: int, captures: list[str]) -> list[str] | None:
        if pi == len(pattern):
            return list(captures) if ti == len(tokens) else None
        pat = pattern[pi]
        if pat != "*":
            if ti < len(tokens) and tokens[ti] == pat:
                return walk(ti + 1, pi + 1, captures)
            return None
        for take in range(1, len(tokens) - ti + 1):
            captures.append(" ".join(tokens[ti : ti + take]))
            result = walk(ti + take, pi + 1, captures)
            if result is not None:
                return result
            captures.pop()
        return None

    return walk(0, 0, [])


def _render(parts, captures: list[str]) -> tuple[str, CommandInvocation | None]:
    words: list[str] = []
    command: CommandInvocation | None = None
    for part in parts:
        if isinstance(part, TextPart):
            words.append(part.text)
        elif isinstance(part, StarPart):
            words.append(captures[part.index - 1])
        else:
            params = tuple(
                p.text if isinstance(p, TextPart) else captures[p.index - 1] for p in part.params
            )
            command = CommandInvocation(part.macro, params)
    return " ".join(w for w in words if w), command


def respond(brain: ChatBrain, input_text: str) -> Reply:
    """Best-matching category: exact beats wildcard, then most literals,

    then definition order.  Unmatched input gets the default response.
    """
    best: tuple[int, int, int] | None = None  # (exactness, literals, -position)
    best_captures: list[str] | None = None
    best_cat: ChatCategory | None = None
    for pos, cat in enumerate(brain.categories):
        captures = match_pattern(input_text, cat.pattern)
        if captures is None:
            continue
        rank = (1 if cat.is_exact else 0, cat.literal_count, -pos)
        if best is None or rank > best:
            best, best_captures, best_cat = rank, captures, cat
    if best_cat is None:
        return Reply(brain.default_response)
    speech, command = _render(best_cat.parts, best_captures or [])
    return Reply(speech, command)


# --- brain files -----------------------------------------------------------------


def _parse_template(el: ET.Element) -> tuple[TextPart | StarPart | CommandPart, ...]:
    parts: list[TextPart | StarPart | CommandPart] = []

    def add_text(raw: str | None) -> None:
        if raw and raw.strip():
            parts.append(TextPart(" ".join(raw.split())))

    add_text(el.text)
    for child in el:
        if child.tag == "star":
            parts.append(StarPart(int(child.get("index", "1"))))
        elif child.tag == "command":
            name = child.get("name")
            if not name:
                raise BrainError("command element needs a name")
            params: list[TextPart | StarPart] = []
            for p in child:
                if p.tag != "param":
                    raise BrainError(f"unexpected element <{p.tag}> in command")
                if p.get("star") is not None:
                    params.append(StarPart(int(p.get("star"))))
                elif p.get("text") is not None:
                    params.append(TextPart(p.get("text")))
                else:
                    raise BrainError("param needs star=<k> or text=<value>")
            parts.append(CommandPart(name, tuple(params)))
        else:
            raise BrainError(f"unexpected element <{child.tag}> in template")
        add_text(child.tail)
    return tuple(parts)


def load_brain(doc: str, known_macros: Iterable[str] | None = None) -> ChatBrain:
    """Parse a brain file; command names are checked against the macro

    catalog when one is supplied (knowledge lookups are always valid).
    """
    try:
        root = ET.fromstring(doc)
    except ET.ParseError as e:
        raise BrainError(f"not well-formed XML: {e}") from None
    if root.tag != "brain":
        raise BrainError(f"root element must be <brain>, got <{root.tag}>")
    categories = []
    for el in root:
        if el.tag != "category":
            raise BrainError(f"unexpected element <{el.tag}>")
        pattern_el = el.find("pattern")
        template_el = el.find("template")
        if pattern_el is None or template_el is None:
            raise BrainError("category needs <pattern> and <template>")
        pattern = tuple(normalize(pattern_el.text or "").split())
        categories.append(ChatCategory(pattern, _parse_template(template_el)))
    brain = ChatBrain(tuple(categories), root.get("default", DEFAULT_RESPONSE))
    if known_macros is not None:
        known = set(known_macros)
        for cat in brain.categories:
            for part in cat.parts:
                if isinstance(part, CommandPart):
                    if part.macro not in known and part.macro not in KNOWLEDGE_KINDS:
                        raise BrainError(f"command references undefined macro {part.macro!r}")
    return brain


def load_brain_file(path: str, known_macros: Iterable[str] | None = None) -> ChatBrain:
    with open(path, encoding="utf-8") as f:
        return load_brain(f.read(), known_macros)


# --- knowledge fetching ------------------------------------------------------------


KnowledgeFetcher = Callable[[str, str], str | None]


@dataclass(frozen=True)
class FixtureKnowledge:
    """Canned lookups from a flat `kind:query=text` file."""

    entries: dict[str, str] = field(default_factory=dict)

    def __call__(self, kind: str, query: str) -> str | None:
        return self.entries.get(f"{kind}:{normalize(query)}")


def load_knowledge(text: str) -> FixtureKnowledge:
    entries = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line or ":" not in line.split("=", 1)[0]:
            raise ValueError(f"expected kind:query=text, got {line!r}")
        key, value = line.split("=", 1)
        kind, query = key.split(":", 1)
        entries[f"{kind.strip()}:{normalize(query)}"] = value.strip()
    return FixtureKnowledge(entries)


def load_knowledge_file(path: str) -> FixtureKnowledge:
    with open(path, encoding="utf-8") as f:
        return load_knowledge(f.read())


def fetch_knowledge(kind: str, query: str, fetcher: KnowledgeFetcher | None) -> str | None:
    """Ask the configured adapter; failures degrade to None."""
    if fetcher is None:
        return None
    try:
        return fetcher(kind, query)
    except Exception:
        return None
