"""The mode state machine: routes recognition events, emits synthetic events.

Seven operating modes share one grammar stack (modes gate routing, not
grammar state).  Every step is total: unrecognized input is dropped and
logged, never fatal, so the user can never be stranded waiting on a
dialog they cannot answer.

Time is event-driven: the virtual clock only advances with incoming
timestamps and wait() offsets, so identical scripts produce identical
logs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

from . import chat as chat_mod
from .chat import ChatBrain, KnowledgeFetcher, Reply, fetch_knowledge, respond
from .config import Config
from .dictation import (
    CorrectionIndexError,
    CorrectionSession,
    apply_substitutions,
    begin_correction,
    commit_correction,
    delete_token,
    replace_token,
    spell,
)
from .events import (
    MODE,
    MOUSE_MOVE_ABS,
    MOUSE_MOVE_REL,
    OVERLAY,
    SPEAK,
    TEXT,
    RecognitionEvent,
    Source,
    SyntheticEvent,
)
from .grammar import ActivationMode, GrammarStack
from .grid import LETTERS, GridTarget, Screen, clamp_to_screen, target_point
from .macros import (
    ClipboardEmptyError,
    Clipboards,
    MacroProgram,
    MultiplierRangeError,
    MultiplierState,
    execute,
    set_multiplier,
)
from .recognition import (
    Focus,
    MatchKind,
    ScenarioScript,
    Tick,
    Transcript,
    Hear,
    match_utterance,
    normalize,
)

log = logging.getLogger("xulia.engine")

KNOWLEDGE_FALLBACK = "no tengo esa información"


class Mode(Enum):
    COMMAND = "command"
    CONVERSATION = "conversation"
    DICTATION_BRIDGE = "dictation-bridge"
    DICTATION_LOCAL = "dictation-local"
    GRID = "grid"
    CORRECTION = "correction"
    SPELLING = "spelling"


DICTATION_MODES = (Mode.DICTATION_BRIDGE, Mode.DICTATION_LOCAL)

_GRID_LETTERS = set(LETTERS.lower())


@dataclass
class EngineState:
    mode: Mode
    stack: GrammarStack
    clipboards: Clipboards
    pointer: tuple[int, int]
    multiplier: MultiplierState = MultiplierState()
    clock: int = 0
    selection: str = ""  # current selection fed to clip_copy
    last_transcript: str | None = None
    last_interim: str | None = None
    last_dictation: str | None = None  # post-substitution text, as emitted
    correction: CorrectionSession | None = None
    correction_selected: int | None = None
    return_mode: Mode = Mode.COMMAND  # where commit_correction goes back to
    grid_selector: int | None = None
    grid_letters: list[str] = field(default_factory=list)


class Engine:
    """Single-threaded event interpreter over one configuration."""

    def __init__(
        self,
        config: Config,
        *,
        screen: Screen = Screen(1920, 1080),
        brain: ChatBrain | None = None,
        knowledge: KnowledgeFetcher | None = None,
        bridge=None,  # anything with enqueue_control(action, lang=None)
    ):
        self.config = config
        self.system = config.grammar_system()
        self.screen = screen
        self.brain = brain
        self.knowledge = knowledge
        self.bridge = bridge

    def new_state(self) -> EngineState:
        return EngineState(
            mode=Mode.COMMAND,
            stack=self.system.new_stack(),
            clipboards=Clipboards(self.config.settings.clipboard_slots),
            pointer=(self.screen.width // 2, self.screen.height // 2),
        )

    # --- stepping ---

    def step(self, state: EngineState, item) -> list[SyntheticEvent]:
        """Process one recognition event, focus change or tick.

        Mutates `state`; returns the synthetic events emitted.  Total
        over all inputs.
        """
        out: list[SyntheticEvent] = []
        if isinstance(item, Hear):
            item = RecognitionEvent(item.timestamp, item.text, item.confidence, Source.COMMAND)
        elif isinstance(item, Transcript):
            item = RecognitionEvent(
                item.timestamp, item.text, item.confidence, Source.DICTATION, item.final
            )
        if isinstance(item, Focus):
            self._advance(state, item.timestamp)
            state.stack = self.system.on_focus_change(state.stack, item.app)
            return out
        if isinstance(item, Tick):
            self._advance(state, item.timestamp)
            return out

        event: RecognitionEvent = item
        self._advance(state, event.timestamp)
        if not event.final:
            state.last_interim = event.text
            return out
        state.last_interim = None
        state.last_transcript = event.text

        mode = state.mode
        if mode is Mode.COMMAND:
            if not self._try_command(state, event, out):
                log.info("dropped in command mode: %r", event.text)
        elif mode is Mode.GRID:
            if not self._try_command(state, event, out) and not self._try_grid(state, event, out):
                log.info("dropped in grid mode: %r", event.text)
        elif mode is Mode.SPELLING:
            if not self._try_command(state, event, out):
                self._spell_tokens(state, event, out)
        elif mode in DICTATION_MODES:
            if event.source is Source.COMMAND:
                if not self._try_command(state, event, out):
                    log.info("dropped command-engine input in dictation: %r", event.text)
            else:
                self._type_transcript(state, event, out)
        elif mode is Mode.CONVERSATION:
            if not self._try_navigation(state, event, out):
                self._converse(state, event, out)
        elif mode is Mode.CORRECTION:
            if not self._try_navigation(state, event, out):
                self._correct(state, event, out)
        return out

    def _advance(self, state: EngineState, timestamp: int) -> None:
        state.clock = max(state.clock, timestamp)
        state.stack = self.system.pruned(state.stack, state.clock)

    # --- command path ---

    def _try_command(self, state: EngineState, event: RecognitionEvent, out) -> bool:
        if self._try_multiplier(state, event):
            return True
        active = self.system.active_command_set(state.stack, state.clock)
        outcome = match_utterance(event, active)
        if outcome.kind is MatchKind.REJECTED_LOW_CONFIDENCE:
            log.info(
                "rejected %r: confidence %.2f below threshold",
                event.text,
                outcome.measured_confidence,
            )
            return True
        if outcome.kind is not MatchKind.MATCHED:
            return False
        binding = outcome.binding
        if binding.protected:
            # the window is one-shot: a protected command consumes it
            state.stack = self.system.clear_protected(state.stack)
        if binding.macro.startswith("@"):
            self._builtin(state, binding.macro, out)
        else:
            self._run_macro(state, self.config.macros[binding.macro], binding.repeatable, out)
        return True

    def _try_multiplier(self, state: EngineState, event: RecognitionEvent) -> bool:
        if state.mode is not Mode.COMMAND:
            return False
        tokens = normalize(event.text).split()
        word = normalize(self.config.navigation.multiplier_word)
        if len(tokens) != 2 or tokens[0] != word or not tokens[1].isdigit():
            return False
        try:
            state.multiplier = set_multiplier(int(tokens[1]))
        except MultiplierRangeError as e:
            log.info("multiplier rejected: %s", e)
        return True

    def _try_navigation(self, state: EngineState, event: RecognitionEvent, out) -> bool:
        """Match only the always-on navigation commands."""
        active = self.system.active_command_set(state.stack, state.clock)
        outcome = match_utterance(event, active)
        if outcome.kind is MatchKind.MATCHED and outcome.binding.macro.startswith("@"):
            self._builtin(state, outcome.binding.macro, out)
            return True
        return False

    def _builtin(self, state: EngineState, name: str, out) -> None:
        if name == "@back":
            state.stack = self.system.pop(state.stack)
        elif name == "@command-mode":
            state.stack = self.system.reset_to_base(state.stack)
            self._change_mode(state, Mode.COMMAND, out, state.clock)
        elif name == "@protected":
            state.stack = self.system.enter_protected(state.stack, state.clock)
        elif name == "@grid":
            self._change_mode(state, Mode.GRID, out, state.clock)
        else:
            log.warning("unknown builtin %r", name)
        state.multiplier = MultiplierState()

    def _run_macro(
        self,
        state: EngineState,
        program: MacroProgram,
        repeatable: bool,
        out,
        params: tuple[str, ...] = (),
    ) -> None:
        def on_grammar(op: str, gid: str | None, gmode: str | None) -> None:
            if op == "push":
                state.stack = self.system.activate(
                    state.stack, gid, ActivationMode(gmode), state.clock
                )
            elif op == "pop":
                state.stack = self.system.pop(state.stack)
            else:
                state.stack = self.system.reset_to_base(state.stack)

        collected: list[SyntheticEvent] = []
        try:
            execute(
                program,
                now=state.clock,
                clipboards=state.clipboards,
                multiplier=state.multiplier,
                repeatable=repeatable,
                sink=collected.append,
                selection=state.selection,
                params=params,
                grammar_handler=on_grammar,
            )
        except ClipboardEmptyError as e:
            log.warning("macro %r aborted: %s", program.id, e)
        state.multiplier = MultiplierState()
        self._absorb(state, collected, out)

    def _absorb(self, state: EngineState, events: list[SyntheticEvent], out) -> None:
        """Apply macro-emitted events to engine state, filtering mode requests."""
        for ev in events:
            if ev.kind == MODE:
                self._change_mode(state, Mode(ev.args[0]), out, ev.timestamp)
                continue
            out.append(ev)
            if ev.kind == MOUSE_MOVE_REL:
                state.pointer = clamp_to_screen(
                    state.pointer[0] + ev.args[0], state.pointer[1] + ev.args[1], self.screen
                )
            elif ev.kind == MOUSE_MOVE_ABS:
                state.pointer = clamp_to_screen(ev.args[0], ev.args[1], self.screen)
        if events:
            state.clock = max(state.clock, max(e.timestamp for e in events))

    # --- mode changes ---

    def _change_mode(self, state: EngineState, target: Mode, out, at: int) -> bool:
        if target is state.mode:
            return False
        if target is Mode.CORRECTION and state.last_dictation is None:
            log.warning("cannot enter correction mode: nothing was dictated")
            return False
        old = state.mode
        state.mode = target
        out.append(SyntheticEvent(at, MODE, (target.value,)))
        # leave effects
        if old is Mode.GRID:
            out.append(SyntheticEvent(at, OVERLAY, ("off",)))
            state.grid_selector = None
            state.grid_letters = []
        if old is Mode.DICTATION_BRIDGE and self.bridge is not None:
            self.bridge.enqueue_control("stop")
        if old is Mode.CORRECTION:
            state.correction = None
            state.correction_selected = None
        # enter effects
        if target is Mode.GRID:
            out.append(SyntheticEvent(at, OVERLAY, ("on",)))
        if target is Mode.DICTATION_BRIDGE and self.bridge is not None:
            self.bridge.enqueue_control("start")
        if target is Mode.CORRECTION:
            state.return_mode = old
            state.correction = begin_correction(state.last_dictation)
            state.correction_selected = None
        return True

    # --- grid mode ---

    def _try_grid(self, state: EngineState, event: RecognitionEvent, out) -> bool:
        tokens = normalize(event.text).split()
        if not tokens:
            return False
        for tok in tokens:
            if not (len(tok) == 1 and (tok.isdigit() or tok in _GRID_LETTERS)):
                return False
        for tok in tokens:
            if tok.isdigit():
                state.grid_selector = int(tok)
            else:
                state.grid_letters.append(tok)
                if len(state.grid_letters) == 2:
                    self._grid_move(state, out)
        return True

    def _grid_move(self, state: EngineState, out) -> None:
        row = LETTERS.lower().index(state.grid_letters[0])
        col = LETTERS.lower().index(state.grid_letters[1])
        point = target_point(GridTarget(row, col, state.grid_selector), self.screen)
        out.append(SyntheticEvent(state.clock, MOUSE_MOVE_ABS, point))
        state.pointer = point
        state.grid_selector = None
        state.grid_letters = []

    # --- spelling / dictation / conversation / correction ---

    def _spell_tokens(self, state: EngineState, event: RecognitionEvent, out) -> None:
        for tok in normalize(event.text).split():
            ev = spell(tok, self.config.spelling, state.clock)
            if ev is not None:
                out.append(ev)
            else:
                log.info("unknown spelling word %r", tok)

    def _type_transcript(self, state: EngineState, event: RecognitionEvent, out) -> None:
        subs = self.config.rules_for_mode(state.mode.value)
        rendered = apply_substitutions(event.text, list(subs.rules), subs.literal_word)
        if rendered:
            out.append(SyntheticEvent(state.clock, TEXT, (rendered,)))
            state.last_dictation = rendered

    def _converse(self, state: EngineState, event: RecognitionEvent, out) -> None:
        if self.brain is None:
            reply = Reply(chat_mod.DEFAULT_RESPONSE)
        else:
            reply = respond(self.brain, event.text)
        if reply.speech:
            out.append(SyntheticEvent(state.clock, SPEAK, (reply.speech,)))
        if reply.command is None:
            return
        name, params = reply.command.macro, reply.command.params
        if name in chat_mod.KNOWLEDGE_KINDS:
            query = params[0] if params else ""
            answer = fetch_knowledge(chat_mod.KNOWLEDGE_KINDS[name], query, self.knowledge)
            out.append(SyntheticEvent(state.clock, SPEAK, (answer or KNOWLEDGE_FALLBACK,)))
        elif name in self.config.macros:
            self._run_macro(state, self.config.macros[name], True, out, params=params)
        else:
            log.warning("chat command references unknown macro %r", name)

    def _correct(self, state: EngineState, event: RecognitionEvent, out) -> None:
        nav = self.config.navigation
        text = normalize(event.text)
        session = state.correction
        assert session is not None  # mode invariant
        if text == normalize(nav.correction_accept):
            out.extend(commit_correction(session, now=state.clock))
            self._change_mode(state, state.return_mode, out, state.clock)
        elif text == normalize(nav.correction_delete):
            if state.correction_selected is None:
                log.info("delete with no selected token")
                return
            state.correction = delete_token(session, state.correction_selected)
            state.correction_selected = None
        elif text.isdigit():
            n = int(text)
            if 1 <= n <= len(session.tokens):
                state.correction_selected = n
            else:
                log.info("token index %d out of range", n)
        elif state.correction_selected is not None:
            try:
                state.correction = replace_token(
                    session, state.correction_selected, event.text.strip()
                )
            except CorrectionIndexError:
                log.info("replace lost its selection")
            state.correction_selected = None
        else:
            log.info("correction input with no selected token: %r", event.text)

    # --- display snapshot (served by the bridge as GET /state) ---

    def snapshot(self, state: EngineState) -> dict:
        correction = None
        if state.correction is not None:
            correction = {
                "tokens": [{"index": t.index, "text": t.text} for t in state.correction.tokens],
                "selected": state.correction_selected,
            }
        return {
            "mode": state.mode.value,
            "clock": state.clock,
            "language": self.config.language,
            "screen": [self.screen.width, self.screen.height],
            "pointer": list(state.pointer),
            "stack": {
                "base": state.stack.base,
                "frames": [
                    {
                        "grammar": f.grammar_id,
                        "mode": f.mode.value,
                        "activated_at": f.activated_at,
                    }
                    for f in state.stack.frames
                ],
                "app_grammar": state.stack.app_grammar,
                "protected_until": state.stack.protected_until,
            },
            "multiplier": state.multiplier.pending,
            "last_transcript": state.last_transcript,
            "last_interim": state.last_interim,
            "last_dictation": state.last_dictation,
            "correction": correction,
        }


def run(
    config: Config,
    script: ScenarioScript,
    *,
    screen: Screen = Screen(1920, 1080),
    brain: ChatBrain | None = None,
    knowledge: KnowledgeFetcher | None = None,
    bridge=None,
) -> tuple[list[SyntheticEvent], EngineState]:
    """Fold the engine over a scripted scenario; deterministic."""
    engine = Engine(config, screen=screen, brain=brain, knowledge=knowledge, bridge=bridge)
    state = engine.new_state()
    events: list[SyntheticEvent] = []
    for directive in script.directives:
        events.extend(engine.step(state, directive))
    return events, state
