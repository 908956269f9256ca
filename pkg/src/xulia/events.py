"""Event types shared across the engine.

Two event families exist: recognition events coming *in* (from the
command engine, the local dictation engine or the browser bridge) and
synthetic events going *out* (the keyboard/mouse/mode actions the engine
emits instead of touching the OS directly).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum


class Source(Enum):
    """Where a recognition result came from."""

    COMMAND = "command-engine"
    DICTATION = "dictation-engine"
    BRIDGE = "bridge"


@dataclass(frozen=True)
class RecognitionEvent:
    """A timed utterance with a confidence score.

    `final` distinguishes settled results from interim hypotheses;
    interim events are display-only and never trigger commands.
    """

    timestamp: int  # ms since session start
    text: str
    confidence: float
    source: Source
    final: bool = True

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("recognition event text must be non-empty")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0,1]")
        if self.timestamp < 0:
            raise ValueError("timestamp must be >= 0")


@dataclass(frozen=True)
class EngineCapabilities:
    """What a speech engine can do and under which constraints."""

    supports_command_grammar: bool
    supports_continuous_dictation: bool
    requires_foreground_focus: bool = False
    languages: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not (self.supports_command_grammar or self.supports_continuous_dictation):
            raise ValueError("engine must support command grammars or dictation")


class CapabilityError(RuntimeError):
    pass


def check_background_operation(caps: EngineCapabilities) -> None:
    """Refuse engines that halt as soon as the host loses foreground focus.

    The host runs in the background and reflects its actions in other
    applications, so a foreground-only engine can never drive it.
    """
    if caps.requires_foreground_focus:
        raise CapabilityError(
            "engine requires foreground focus; host operates in background"
        )


# Synthetic event kinds.  Only these appear in emitted logs; grammar
# stack changes, clipboard writes and waits are internal effects.
KEY = "key"
CHORD = "chord"
TEXT = "text"
MOUSE_MOVE_REL = "mouse_move_rel"
MOUSE_MOVE_ABS = "mouse_move_abs"
MOUSE_CLICK = "mouse_click"
MODE = "mode"
SPEAK = "speak"
LAUNCH = "launch"
OVERLAY = "overlay"

_QUOTED_KINDS = {TEXT, SPEAK}


@dataclass(frozen=True)
class SyntheticEvent:
    """One keyboard/mouse/mode action emitted by the engine."""

    timestamp: int
    kind: str
    args: tuple = field(default_factory=tuple)


def format_event(event: SyntheticEvent) -> str:
    """Serialize one event as a log line: `<t_ms> <kind> <payload...>`.

    Free text payloads are JSON-quoted so control characters stay on one
    line and logs remain byte-stable.
    """
    parts = [str(event.timestamp), event.kind]
    if event.kind in _QUOTED_KINDS:
        parts.extend(json.dumps(a, ensure_ascii=False) for a in event.args)
    else:
        parts.extend(str(a) for a in event.args)
    return " ".join(parts)


def format_log(events: list[SyntheticEvent]) -> str:
    """Full log text, one line per event, trailing newline when non-empty."""
    if not events:
        return ""
    return "\n".join(format_event(e) for e in events) + "\n"
