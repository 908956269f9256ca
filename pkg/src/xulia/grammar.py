"""Active-command algebra: grammar stacks, app grammars, TTLs, protected mode.

A grammar is a named set of phrase->macro bindings.  At any instant the
resolvable commands come from layering, in priority order: the app
grammar of the focused application, then stack frames top-down until and
including the topmost substitutive frame, then (if nothing masked it)
the base grammar.  A small always-on navigation grammar sits underneath
everything and survives any substitutive push, so the user can never
strand themselves without a way back.

Stacks are immutable values; every operation returns a new stack.  Time
is always an injected parameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping

from .recognition import normalize

DEFAULT_PROTECTED_TIMEOUT_MS = 3000


class ActivationMode(Enum):
    ADDITIVE = "additive"
    SUBSTITUTIVE = "substitutive"


class UnknownGrammarError(KeyError):
    pass


@dataclass(frozen=True)
class CommandBinding:
    phrase: str  # normalized utterance
    macro: str  # macro id; "@"-prefixed ids are engine builtins
    threshold: float | None = None
    protected: bool = False
    repeatable: bool = True

    def __post_init__(self) -> None:
        if not self.phrase:
            raise ValueError("binding phrase must be non-empty")
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold {self.threshold} outside [0,1]")


@dataclass(frozen=True)
class Grammar:
    id: str
    bindings: tuple[CommandBinding, ...] = ()
    ttl_ms: int | None = None  # auto-deactivation once pushed

    def __post_init__(self) -> None:
        # kept phrase-sorted so serialized configs are canonical
        object.__setattr__(self, "bindings", tuple(sorted(self.bindings, key=lambda b: b.phrase)))
        seen = set()
        for b in self.bindings:
            if b.phrase in seen:
                raise ValueError(f"duplicate phrase {b.phrase!r} in grammar {self.id!r}")
            seen.add(b.phrase)
        if self.ttl_ms is not None and self.ttl_ms <= 0:
            raise ValueError("grammar ttl must be positive")


@dataclass(frozen=True)
class Frame:
    grammar_id: str
    mode: ActivationMode
    activated_at: int


@dataclass(frozen=True)
class GrammarStack:
    base: str
    frames: tuple[Frame, ...] = ()
    app_grammar: str | None = None
    protected_until: int | None = None


@dataclass(frozen=True)
class ActiveCommandSet:
    """Snapshot of the resolvable bindings at one instant."""

    bindings: Mapping[str, CommandBinding]
    default_threshold: float = 0.0
    protected_live: bool = False

    def lookup(self, phrase: str) -> CommandBinding | None:
        return self.bindings.get(normalize(phrase))

    def threshold_for(self, binding: CommandBinding) -> float:
        return binding.threshold if binding.threshold is not None else self.default_threshold

    def phrases(self) -> frozenset[str]:
        return frozenset(self.bindings)

    def __contains__(self, phrase: str) -> bool:
        return normalize(phrase) in self.bindings


@dataclass(frozen=True)
class GrammarSystem:
    """The configured universe of grammars the stack operations act on."""

    grammars: Mapping[str, Grammar]
    base_id: str
    navigation: Grammar = field(default_factory=lambda: Grammar("@navigation"))
    app_registry: Mapping[str, str] = field(default_factory=dict)  # app id -> grammar id
    default_threshold: float = 0.0
    protected_timeout_ms: int = DEFAULT_PROTECTED_TIMEOUT_MS

    def __post_init__(self) -> None:
        if self.base_id not in self.grammars:
            raise UnknownGrammarError(self.base_id)
        for gid in self.app_registry.values():
            if gid not in self.grammars:
                raise UnknownGrammarError(gid)
        if self.protected_timeout_ms <= 0:
            raise ValueError("protected timeout must be positive")

    def new_stack(self) -> GrammarStack:
        return GrammarStack(base=self.base_id)

    # --- stack operations, all returning new stacks ---

    def activate(
        self, stack: GrammarStack, grammar_id: str, mode: ActivationMode, now: int
    ) -> GrammarStack:
        if grammar_id not in self.grammars:
            raise UnknownGrammarError(grammar_id)
        if stack.frames and now < stack.frames[-1].activated_at:
            raise ValueError("activation time precedes the top frame")
        frame = Frame(grammar_id, mode, now)
        return replace(stack, frames=stack.frames + (frame,))

    def pop(self, stack: GrammarStack) -> GrammarStack:
        if not stack.frames:
            return stack
        return replace(stack, frames=stack.frames[:-1])

    def reset_to_base(self, stack: GrammarStack) -> GrammarStack:
        """Empty the stack and leave every transient context, app grammar aside."""
        return replace(stack, frames=(), protected_until=None)

    def on_focus_change(self, stack: GrammarStack, app: str) -> GrammarStack:
        return replace(stack, app_grammar=self.app_registry.get(app))

    def enter_protected(self, stack: GrammarStack, now: int) -> GrammarStack:
        return replace(stack, protected_until=now + self.protected_timeout_ms)

    def clear_protected(self, stack: GrammarStack) -> GrammarStack:
        return replace(stack, protected_until=None)

    # --- time ---

    def _frame_live(self, frame: Frame, now: int) -> bool:
        ttl = self.grammars[frame.grammar_id].ttl_ms
        return ttl is None or now < frame.activated_at + ttl

    def _protected_live(self, stack: GrammarStack, now: int) -> bool:
        return stack.protected_until is not None and now < stack.protected_until

    def pruned(self, stack: GrammarStack, now: int) -> GrammarStack:
        """Drop expired TTL frames and expired protected mode.

        Expiry behaves exactly like popping the frame at its deadline.
        """
        frames = tuple(f for f in stack.frames if self._frame_live(f, now))
        protected = stack.protected_until if self._protected_live(stack, now) else None
        if frames == stack.frames and protected == stack.protected_until:
            return stack
        return replace(stack, frames=frames, protected_until=protected)

    # --- resolution ---

    def _layers(self, stack: GrammarStack) -> list[Grammar]:
        """Grammars in lookup priority order (highest first)."""
        layers: list[Grammar] = []
        if stack.app_grammar is not None:
            layers.append(self.grammars[stack.app_grammar])
        masked_base = False
        for frame in reversed(stack.frames):
            layers.append(self.grammars[frame.grammar_id])
            if frame.mode is ActivationMode.SUBSTITUTIVE:
                masked_base = True
                break
        if not masked_base:
            layers.append(self.grammars[self.base_id])
        # navigation commands resolve last but can never be masked away
        layers.append(self.navigation)
        return layers

    def active_command_set(self, stack: GrammarStack, now: int) -> ActiveCommandSet:
        live = self.pruned(stack, now)
        protected_live = self._protected_live(live, now)
        bindings: dict[str, CommandBinding] = {}
        for layer in self._layers(live):
            for binding in layer.bindings:
                if binding.protected and not protected_live:
                    continue
                bindings.setdefault(binding.phrase, binding)
        return ActiveCommandSet(bindings, self.default_threshold, protected_live)

    def resolve(self, phrase: str, stack: GrammarStack, now: int) -> CommandBinding | None:
        return self.active_command_set(stack, now).lookup(phrase)
