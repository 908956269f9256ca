"""Continuous-dictation text pipeline.

Substitution chains rewrite spoken phrases into punctuation, control
characters or canned text; "literal" escapes exactly one rewrite.  The
correction session numbers the words of the last emitted sentence so a
single spoken index can select a word to fix or delete, and commit
replaces the whole sentence in the target (backspace everything, retype).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .events import KEY, TEXT, SyntheticEvent
from .recognition import normalize

DEFAULT_LITERAL_WORD = "literal"


class RuleClass(Enum):
    PUNCTUATION = "punctuation"  # attaches to the preceding output, no space
    CONTROL = "control"  # emitted verbatim, no surrounding spaces
    PLAIN = "plain"  # behaves like an ordinary word


@dataclass(frozen=True)
class SubstitutionRule:
    match: str  # one or more words, matched case-insensitively
    replace: str
    rule_class: RuleClass = RuleClass.PLAIN

    def __post_init__(self) -> None:
        if not normalize(self.match):
            raise ValueError("rule match phrase must be non-empty")

    @property
    def match_tokens(self) -> tuple[str, ...]:
        return tuple(normalize(self.match).split())


def _longest_match(
    tokens: list[str], pos: int, rules: list[SubstitutionRule]
) -> SubstitutionRule | None:
    """The longest rule matching at `pos`, or None."""
    best: SubstitutionRule | None = None
    for rule in rules:
        mt = rule.match_tokens
        if len(mt) > len(tokens) - pos:
            continue
        if tuple(normalize(t) for t in tokens[pos : pos + len(mt)]) == mt:
            if best is None or len(mt) > len(best.match_tokens):
                best = rule
    return best


class _Output:
    """Assembles words and replacements with the class-specific spacing."""

    def __init__(self) -> None:
        self.parts: list[str] = []
        self.needs_space = False

    def word(self, w: str) -> None:
        if self.parts and self.needs_space:
            self.parts.append(" ")
        self.parts.append(w)
        self.needs_space = True

    def replacement(self, rule: SubstitutionRule) -> None:
        if rule.rule_class is RuleClass.PUNCTUATION:
            self.parts.append(rule.replace)
            self.needs_space = True
        elif rule.rule_class is RuleClass.CONTROL:
            self.parts.append(rule.replace)
            self.needs_space = False
        else:
            self.word(rule.replace)

    def text(self) -> str:
        return "".join(self.parts)


def apply_substitutions(
    text: str,
    rules: list[SubstitutionRule],
    literal_word: str = DEFAULT_LITERAL_WORD,
) -> str:
    """Left-to-right, longest-match, non-overlapping rewriting.

    A literal word is removed and suppresses the one rule match (or the
    one literal word) immediately after it.  Replacements are never
    re-scanned, so rules cannot cascade.
    """
    tokens = text.split()
    literal = normalize(literal_word)
    out = _Output()
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if normalize(tok) == literal:
            i += 1
            suppressed = _longest_match(tokens, i, rules)
            if suppressed is not None:
                for t in tokens[i : i + len(suppressed.match_tokens)]:
                    out.word(t)
                i += len(suppressed.match_tokens)
            elif i < len(tokens) and normalize(tokens[i]) == literal:
                out.word(tokens[i])
                i += 1
            continue
        rule = _longest_match(tokens, i, rules)
        if rule is not None:
            out.replacement(rule)
            i += len(rule.match_tokens)
        else:
            out.word(tok)
            i += 1
    return out.text()


# --- correction sessions ------------------------------------------------------


class NoUtteranceError(RuntimeError):
    pass


class CorrectionIndexError(IndexError):
    pass


@dataclass(frozen=True)
class Token:
    index: int  # 1-based, contiguous
    text: str


@dataclass(frozen=True)
class CorrectionSession:
    tokens: tuple[Token, ...]
    original_tokens: tuple[str, ...]
    original_emitted_length: int
    edits: tuple[str, ...] = ()  # human-readable edit log


def _renumber(texts: list[str]) -> tuple[Token, ...]:
    return tuple(Token(i, t) for i, t in enumerate(texts, start=1))


def begin_correction(emitted_text: str | None) -> CorrectionSession:
    """Open a session over the last emitted sentence.

    Tokens are the whitespace-separated words of the text as it was sent
    to the target (post-substitution), numbered from 1, matching what
    the correction window shows the user.
    """
    if emitted_text is None:
        raise NoUtteranceError("no dictated utterance to correct")
    words = emitted_text.split()
    return CorrectionSession(
        tokens=_renumber(words),
        original_tokens=tuple(words),
        original_emitted_length=len(emitted_text),
    )


def _check_index(session: CorrectionSession, index: int) -> None:
    if not 1 <= index <= len(session.tokens):
        raise CorrectionIndexError(f"token index {index} outside 1..{len(session.tokens)}")


def replace_token(session: CorrectionSession, index: int, replacement: str) -> CorrectionSession:
    _check_index(session, index)
    texts = [t.text for t in session.tokens]
    texts[index - 1] = replacement
    return replace(
        session,
        tokens=_renumber(texts),
        edits=session.edits + (f"replace {index} {replacement!r}",),
    )


def delete_token(session: CorrectionSession, index: int) -> CorrectionSession:
    _check_index(session, index)
    texts = [t.text for t in session.tokens]
    del texts[index - 1]
    return replace(session, tokens=_renumber(texts), edits=session.edits + (f"delete {index}",))


def commit_correction(session: CorrectionSession, now: int = 0) -> list[SyntheticEvent]:
    """Erase the original sentence and retype the corrected one.

    No edits, or edits that land back on the original tokens, commit
    nothing.  Substitutions are NOT re-applied to the corrected text.
    """
    current = tuple(t.text for t in session.tokens)
    if not session.edits or current == session.original_tokens:
        return []
    events = [
        SyntheticEvent(now, KEY, ("BACKSPACE",)) for _ in range(session.original_emitted_length)
    ]
    events.append(SyntheticEvent(now, TEXT, (" ".join(current),)))
    return events


# --- spelling -----------------------------------------------------------------


@dataclass(frozen=True)
class SpellingTable:
    """Spoken code words mapped to the characters they emit."""

    entries: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        normalized = {normalize(k): v for k, v in self.entries.items()}
        if len(set(normalized.values())) != len(normalized):
            raise ValueError("spelling table must be injective (one word per character)")
        object.__setattr__(self, "entries", normalized)

    def lookup(self, word: str) -> str | None:
        return self.entries.get(normalize(word))


def spell(word: str, table: SpellingTable, now: int = 0) -> SyntheticEvent | None:
    """Emit the character for a code word; unknown words are ignored."""
    char = table.lookup(word)
    if char is None:
        return None
    return SyntheticEvent(now, TEXT, (char,))
