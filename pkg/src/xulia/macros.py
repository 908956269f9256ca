"""Macro programs: the action mini-language and its executor.

Programs are semicolon-separated instruction calls, e.g.

    key(ENTER); text("ok"); wait(250); mouse_click(left, 2)

Executing a program emits synthetic keyboard/mouse/mode events.  Grammar
stack changes, clipboard writes and waits are internal effects and never
appear in the emitted event stream.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .events import (
    CHORD,
    KEY,
    LAUNCH,
    MODE,
    MOUSE_CLICK,
    MOUSE_MOVE_ABS,
    MOUSE_MOVE_REL,
    SPEAK,
    TEXT,
    SyntheticEvent,
)

MODE_NAMES = frozenset(
    {
        "command",
        "conversation",
        "dictation-bridge",
        "dictation-local",
        "grid",
        "correction",
        "spelling",
    }
)

MOUSE_BUTTONS = frozenset({"left", "right", "middle"})

MULTIPLIER_MIN = 1
MULTIPLIER_MAX = 99


class MacroParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class MultiplierRangeError(ValueError):
    pass


class ClipboardEmptyError(RuntimeError):
    def __init__(self, slot: int):
        super().__init__(f"clipboard slot {slot} has never been written")
        self.slot = slot


@dataclass(frozen=True)
class Instruction:
    op: str
    args: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class MacroProgram:
    id: str
    instructions: tuple[Instruction, ...]

    def __post_init__(self) -> None:
        if not self.instructions:
            raise ValueError("empty program")


@dataclass(frozen=True)
class MultiplierState:
    """Pending repetition count set by the spoken multiplier prefix."""

    pending: int | None = None


def set_multiplier(n: int) -> MultiplierState:
    """Arm the multiplier; counts outside 1..99 are rejected unchanged."""
    if not MULTIPLIER_MIN <= n <= MULTIPLIER_MAX:
        raise MultiplierRangeError(f"multiplier {n} outside {MULTIPLIER_MIN}..{MULTIPLIER_MAX}")
    return MultiplierState(n)


class Clipboards:
    """Numbered clipboard slots; reading an unwritten slot is an error."""

    def __init__(self, slot_count: int = 10):
        if slot_count <= 0:
            raise ValueError("slot_count must be positive")
        self._slots: list[str | None] = [None] * slot_count

    @property
    def slot_count(self) -> int:
        return len(self._slots)

    def _check(self, slot: int) -> None:
        if not 0 <= slot < len(self._slots):
            raise ValueError(f"slot {slot} outside 0..{len(self._slots) - 1}")

    def copy(self, slot: int, text: str) -> None:
        self._check(slot)
        self._slots[slot] = text

    def paste(self, slot: int) -> str:
        self._check(slot)
        value = self._slots[slot]
        if value is None:
            raise ClipboardEmptyError(slot)
        return value


# --- parsing ---------------------------------------------------------------

_WORD_CHARS = re.compile(r"[A-Za-z0-9_+.\-]")
_INT_RE = re.compile(r"-?[0-9]+$")
_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}

# slot kinds: "int", "word" (bare identifier-ish string), "text" (free string)
_ARG_SPECS: dict[str, tuple[int, int, tuple[str, ...]]] = {
    # op: (min args, max args, slot kinds; last kind repeats for variadics)
    "key": (1, 1, ("word",)),
    "chord": (2, 8, ("word",)),
    "text": (1, 1, ("text",)),
    "mouse_move_rel": (2, 2, ("int", "int")),
    "mouse_move_abs": (2, 2, ("int", "int")),
    "mouse_click": (1, 2, ("word", "int")),
    "mode": (1, 1, ("word",)),
    "grammar": (1, 3, ("word",)),
    "clip_copy": (1, 1, ("int",)),
    "clip_paste": (1, 1, ("int",)),
    "speak": (1, 1, ("text",)),
    "launch": (1, 1, ("word",)),
    "wait": (1, 1, ("int",)),
}


class _Tokenizer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str) -> MacroParseError:
        return MacroParseError(message, self.line, self.col)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.source) and self.source[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def tokens(self):
        """Yield (kind, value, line, col); kinds: punct, int, word, str."""
        src = self.source
        while self.pos < len(src):
            ch = src[self.pos]
            if ch.isspace():
                self._advance()
                continue
            line, col = self.line, self.col
            if ch in ";(),":
                self._advance()
                yield ("punct", ch, line, col)
            elif ch == '"':
                self._advance()
                chars: list[str] = []
                while True:
                    if self.pos >= len(src) or src[self.pos] == "\n":
                        raise MacroParseError("unterminated string", line, col)
                    c = src[self.pos]
                    if c == '"':
                        self._advance()
                        break
                    if c == "\\":
                        self._advance()
                        if self.pos >= len(src):
                            raise MacroParseError("unterminated escape", line, col)
                        esc = src[self.pos]
                        if esc not in _ESCAPES:
                            raise MacroParseError(f"unknown escape \\{esc}", self.line, self.col)
                        chars.append(_ESCAPES[esc])
                        self._advance()
                    else:
                        chars.append(c)
                        self._advance()
                yield ("str", "".join(chars), line, col)
            elif _WORD_CHARS.match(ch):
                start = self.pos
                while self.pos < len(src) and _WORD_CHARS.match(src[self.pos]):
                    self._advance()
                word = src[start : self.pos]
                if _INT_RE.match(word):
                    yield ("int", int(word), line, col)
                else:
                    yield ("word", word, line, col)
            else:
                raise self.error(f"unexpected character {ch!r}")


def _validate_instruction(ins: Instruction, line: int, col: int, slot_count: int) -> None:
    op = ins.op
    spec = _ARG_SPECS.get(op)
    if spec is None:
        raise MacroParseError(f"unknown instruction {op!r}", line, col)
    lo, hi, kinds = spec
    if not lo <= len(ins.args) <= hi:
        raise MacroParseError(
            f"{op} takes {lo}" + (f"..{hi}" if hi != lo else "") + f" arguments, got {len(ins.args)}",
            line,
            col,
        )
    for i, arg in enumerate(ins.args):
        kind = kinds[min(i, len(kinds) - 1)]
        if kind == "int" and not isinstance(arg, int):
            raise MacroParseError(f"{op} argument {i + 1} must be an integer", line, col)
        if kind in ("word", "text") and not isinstance(arg, str):
            raise MacroParseError(f"{op} argument {i + 1} must be a word or string", line, col)
    if op == "mouse_click":
        if ins.args[0] not in MOUSE_BUTTONS:
            raise MacroParseError(f"unknown mouse button {ins.args[0]!r}", line, col)
        if len(ins.args) == 2 and ins.args[1] < 1:
            raise MacroParseError("click count must be >= 1", line, col)
    elif op == "mode":
        if ins.args[0] not in MODE_NAMES:
            raise MacroParseError(f"unknown mode {ins.args[0]!r}", line, col)
    elif op == "grammar":
        verb = ins.args[0]
        if verb == "push":
            if len(ins.args) != 3 or ins.args[2] not in ("additive", "substitutive"):
                raise MacroParseError(
                    "grammar push takes (push, <id>, additive|substitutive)", line, col
                )
        elif verb in ("pop", "reset"):
            if len(ins.args) != 1:
                raise MacroParseError(f"grammar {verb} takes no further arguments", line, col)
        else:
            raise MacroParseError(f"grammar verb must be push, pop or reset, not {verb!r}", line, col)
    elif op in ("clip_copy", "clip_paste"):
        if not 0 <= ins.args[0] < slot_count:
            raise MacroParseError(
                f"clipboard slot {ins.args[0]} outside 0..{slot_count - 1}", line, col
            )
    elif op == "wait":
        if ins.args[0] < 0:
            raise MacroParseError("wait must be >= 0", line, col)


def parse_macro(source: str, macro_id: str = "macro", slot_count: int = 10) -> MacroProgram:
    """Parse a program; errors carry line/column positions."""
    toks = list(_Tokenizer(source).tokens())
    if not toks:
        raise MacroParseError("empty program", 1, 1)
    instructions: list[Instruction] = []
    i = 0

    def expect_punct(ch: str):
        nonlocal i
        if i >= len(toks) or toks[i][0] != "punct" or toks[i][1] != ch:
            line, col = (toks[i][2], toks[i][3]) if i < len(toks) else (toks[-1][2], toks[-1][3])
            raise MacroParseError(f"expected {ch!r}", line, col)
        i += 1

    while i < len(toks):
        kind, value, line, col = toks[i]
        if kind != "word":
            raise MacroParseError("expected instruction name", line, col)
        i += 1
        expect_punct("(")
        args: list = []
        if i < len(toks) and not (toks[i][0] == "punct" and toks[i][1] == ")"):
            while True:
                akind, avalue, aline, acol = toks[i] if i < len(toks) else ("", "", line, col)
                if akind not in ("int", "word", "str"):
                    raise MacroParseError("expected argument value", aline, acol)
                args.append(avalue)
                i += 1
                if i < len(toks) and toks[i][0] == "punct" and toks[i][1] == ",":
                    i += 1
                    continue
                break
        expect_punct(")")
        ins = Instruction(value, tuple(args))
        _validate_instruction(ins, line, col, slot_count)
        instructions.append(ins)
        if i < len(toks):
            expect_punct(";")
    return MacroProgram(macro_id, tuple(instructions))


def _print_arg(op: str, index: int, arg) -> str:
    if isinstance(arg, int):
        return str(arg)
    kinds = _ARG_SPECS[op][2]
    kind = kinds[min(index, len(kinds) - 1)]
    bare = arg and all(_WORD_CHARS.match(c) for c in arg) and not _INT_RE.match(arg)
    if kind == "word" and bare:
        return arg
    escaped = arg.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'


def print_program(program: MacroProgram) -> str:
    """Canonical single-line rendering; parse(print(p)) == p."""
    parts = []
    for ins in program.instructions:
        rendered = ", ".join(_print_arg(ins.op, i, a) for i, a in enumerate(ins.args))
        parts.append(f"{ins.op}({rendered})")
    return "; ".join(parts)


# --- execution ---------------------------------------------------------------

_PARAM_RE = re.compile(r"\$([1-9])")


def _subst_params(text: str, params: tuple[str, ...]) -> str:
    def repl(m: re.Match) -> str:
        k = int(m.group(1))
        return params[k - 1] if k <= len(params) else m.group(0)

    return _PARAM_RE.sub(repl, text)


@dataclass
class ExecResult:
    events: list[SyntheticEvent]
    multiplier: MultiplierState  # cleared after every execution


def execute(
    program: MacroProgram,
    *,
    now: int,
    clipboards: Clipboards,
    multiplier: MultiplierState = MultiplierState(),
    repeatable: bool = True,
    sink=None,
    selection: str = "",
    params: tuple[str, ...] = (),
    grammar_handler=None,
) -> ExecResult:
    """Run a program, repeating it when the multiplier is armed.

    Only repeatable bindings honour the multiplier; either way it is
    cleared after exactly one command.  Events are timestamped from
    `now`, with wait() advancing the virtual emission offset.  A paste
    from an unwritten slot aborts the program at that instruction; the
    events already handed to `sink` stand.
    """
    reps = multiplier.pending if (multiplier.pending is not None and repeatable) else 1
    events: list[SyntheticEvent] = []
    offset = 0

    def emit(kind: str, *args) -> None:
        ev = SyntheticEvent(now + offset, kind, args)
        events.append(ev)
        if sink is not None:
            sink(ev)

    for _ in range(reps):
        for ins in program.instructions:
            op, args = ins.op, ins.args
            if op == "key":
                emit(KEY, args[0])
            elif op == "chord":
                emit(CHORD, "+".join(args))
            elif op == "text":
                emit(TEXT, _subst_params(args[0], params))
            elif op == "mouse_move_rel":
                emit(MOUSE_MOVE_REL, args[0], args[1])
            elif op == "mouse_move_abs":
                emit(MOUSE_MOVE_ABS, args[0], args[1])
            elif op == "mouse_click":
                emit(MOUSE_CLICK, args[0], args[1] if len(args) > 1 else 1)
            elif op == "mode":
                emit(MODE, args[0])
            elif op == "grammar":
                if grammar_handler is not None:
                    if args[0] == "push":
                        grammar_handler("push", args[1], args[2])
                    else:
                        grammar_handler(args[0], None, None)
            elif op == "clip_copy":
                clipboards.copy(args[0], selection)
            elif op == "clip_paste":
                emit(TEXT, clipboards.paste(args[0]))
            elif op == "speak":
                emit(SPEAK, _subst_params(args[0], params))
            elif op == "launch":
                emit(LAUNCH, _subst_params(args[0], params))
            elif op == "wait":
                offset += args[0]
    return ExecResult(events, MultiplierState(None))
