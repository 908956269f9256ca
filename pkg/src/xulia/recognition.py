"""Utterance matching and the scripted recognizer.

Matching is deterministic exact-phrase lookup after normalization: the
recognizer is trusted for acoustic fuzziness, the orchestrator is not
allowed any of its own.  A command fires only when its confidence
reaches the binding's threshold (inclusive).

The scripted recognizer replays a line-based scenario file, which is how
every deterministic test and golden log drives the engine:

    # comment
    @t=1200 hear "rejilla" conf=0.97
    @t=2000 transcript final "olá ponto" conf=0.92
    @t=2500 focus "editor"
    @t=3000 tick
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional

from .events import RecognitionEvent, Source

if TYPE_CHECKING:  # pragma: no cover
    from .grammar import ActiveCommandSet, CommandBinding


def normalize(text: str) -> str:
    """Case-fold, trim and collapse internal whitespace."""
    return " ".join(text.casefold().split())


class MatchKind(Enum):
    MATCHED = "matched"
    REJECTED_LOW_CONFIDENCE = "rejected-low-confidence"
    UNMATCHED = "unmatched"


@dataclass(frozen=True)
class MatchOutcome:
    kind: MatchKind
    binding: Optional["CommandBinding"]
    measured_confidence: float

    def __post_init__(self) -> None:
        if (self.kind is MatchKind.MATCHED) != (self.binding is not None):
            raise ValueError("binding present iff matched")


def match_utterance(event: RecognitionEvent, active: "ActiveCommandSet") -> MatchOutcome:
    """Match one event against the active command set.  Total function.

    Interim hypotheses never match; they exist only for display.
    """
    if not event.final:
        return MatchOutcome(MatchKind.UNMATCHED, None, event.confidence)
    binding = active.lookup(normalize(event.text))
    if binding is None:
        return MatchOutcome(MatchKind.UNMATCHED, None, event.confidence)
    if event.confidence >= active.threshold_for(binding):
        return MatchOutcome(MatchKind.MATCHED, binding, event.confidence)
    return MatchOutcome(MatchKind.REJECTED_LOW_CONFIDENCE, None, event.confidence)


# --- scenario scripts --------------------------------------------------------


class ScriptError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Hear:
    timestamp: int
    text: str
    confidence: float


@dataclass(frozen=True)
class Transcript:
    timestamp: int
    text: str
    confidence: float
    final: bool


@dataclass(frozen=True)
class Focus:
    timestamp: int
    app: str


@dataclass(frozen=True)
class Tick:
    timestamp: int


Directive = Hear | Transcript | Focus | Tick

_HEAD_RE = re.compile(r"@t=(\d+)\s+(\w+)\s*(.*)$")
_STRING = r'"((?:[^"\\]|\\.)*)"'
_HEAR_RE = re.compile(rf"{_STRING}\s+conf=([0-9.]+)$")
_TRANSCRIPT_RE = re.compile(rf"(interim|final)\s+{_STRING}\s+conf=([0-9.]+)$")
_FOCUS_RE = re.compile(rf"{_STRING}$")


def _unescape(s: str) -> str:
    return s.replace('\\"', '"').replace("\\\\", "\\")


def _parse_conf(raw: str, lineno: int) -> float:
    try:
        conf = float(raw)
    except ValueError:
        raise ScriptError(f"bad confidence {raw!r}", lineno) from None
    if not 0.0 <= conf <= 1.0:
        raise ScriptError(f"confidence {conf} outside [0,1]", lineno)
    return conf


@dataclass(frozen=True)
class ScenarioScript:
    directives: tuple[Directive, ...]

    def next_event(self, cursor: int) -> tuple[RecognitionEvent | None, int]:
        """Next hear/transcript directive as an event, skipping the rest.

        Returns (event, new_cursor); (None, cursor) once exhausted.
        Replays identically on every run: the script is pure data.
        """
        i = cursor
        while i < len(self.directives):
            d = self.directives[i]
            i += 1
            if isinstance(d, Hear):
                return RecognitionEvent(d.timestamp, d.text, d.confidence, Source.COMMAND), i
            if isinstance(d, Transcript):
                return (
                    RecognitionEvent(d.timestamp, d.text, d.confidence, Source.DICTATION, d.final),
                    i,
                )
        return None, i

    def events(self) -> list[RecognitionEvent]:
        out = []
        cursor = 0
        while True:
            event, cursor = self.next_event(cursor)
            if event is None:
                return out
            out.append(event)


def parse_script(text: str) -> ScenarioScript:
    """Parse a scenario; malformed directives fail with their line number."""
    directives: list[Directive] = []
    last_t = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head = _HEAD_RE.match(line)
        if head is None:
            raise ScriptError(f"expected @t=<ms> directive, got {line!r}", lineno)
        t, verb, rest = int(head.group(1)), head.group(2), head.group(3).strip()
        if t < last_t:
            raise ScriptError(f"timestamp {t} goes backwards (last was {last_t})", lineno)
        last_t = t
        if verb == "hear":
            m = _HEAR_RE.match(rest)
            if m is None:
                raise ScriptError('hear needs "<text>" conf=<0..1>', lineno)
            directives.append(Hear(t, _unescape(m.group(1)), _parse_conf(m.group(2), lineno)))
        elif verb == "transcript":
            m = _TRANSCRIPT_RE.match(rest)
            if m is None:
                raise ScriptError('transcript needs <interim|final> "<text>" conf=<0..1>', lineno)
            directives.append(
                Transcript(
                    t,
                    _unescape(m.group(2)),
                    _parse_conf(m.group(3), lineno),
                    m.group(1) == "final",
                )
            )
        elif verb == "focus":
            m = _FOCUS_RE.match(rest)
            if m is None:
                raise ScriptError('focus needs "<app-id>"', lineno)
            directives.append(Focus(t, _unescape(m.group(1))))
        elif verb == "tick":
            if rest:
                raise ScriptError("tick takes no arguments", lineno)
            directives.append(Tick(t))
        else:
            raise ScriptError(f"unknown directive {verb!r}", lineno)
    return ScenarioScript(tuple(directives))
