"""Shared builders for randomized grammar, macro and config checks."""

from __future__ import annotations

import random
import string

from xulia.config import Config, NavigationPhrases, Settings, SubstitutionList
from xulia.dictation import RuleClass, SpellingTable, SubstitutionRule
from xulia.grammar import (
    ActivationMode,
    CommandBinding,
    Grammar,
    GrammarSystem,
)
from xulia.macros import Instruction, MacroProgram


def build_system(
    rng: random.Random,
    n_grammars: int = 5,
    protected_timeout_ms: int = 3000,
) -> GrammarSystem:
    """A small random universe of grammars, some with TTLs."""
    grammars = {}
    for gi in range(n_grammars):
        gid = f"g{gi}"
        bindings = tuple(
            CommandBinding(
                phrase=f"cmd {gi} {bi}" if rng.random() < 0.5 else f"shared {bi}",
                macro=f"m{gi}_{bi}",
                threshold=round(rng.random(), 2) if rng.random() < 0.3 else None,
                protected=rng.random() < 0.15,
            )
            for bi in range(rng.randint(1, 4))
        )
        ttl = rng.choice([None, None, 2000, 5000])
        grammars[gid] = Grammar(gid, bindings, ttl)
    grammars["base"] = Grammar(
        "base",
        tuple(CommandBinding(f"base cmd {i}", f"mb{i}") for i in range(3)),
    )
    navigation = Grammar(
        "@navigation",
        (
            CommandBinding("volver", "@back", repeatable=False),
            CommandBinding("modo comando", "@command-mode", repeatable=False),
        ),
    )
    return GrammarSystem(
        grammars=grammars,
        base_id="base",
        navigation=navigation,
        app_registry={"editor": "g0"},
        protected_timeout_ms=protected_timeout_ms,
    )


def random_ops(rng: random.Random, system: GrammarSystem, length: int):
    """A random operation sequence with strictly advancing timestamps.

    Yields (op_name, arg, now) tuples; `apply_op` executes them.
    """
    ids = [g for g in system.grammars]
    now = 0
    ops = []
    for _ in range(length):
        now += rng.randint(1, 1500)
        op = rng.choice(["activate", "activate", "pop", "reset", "focus", "protect"])
        if op == "activate":
            mode = rng.choice([ActivationMode.ADDITIVE, ActivationMode.SUBSTITUTIVE])
            ops.append(("activate", (rng.choice(ids), mode), now))
        elif op == "focus":
            ops.append(("focus", rng.choice(["editor", "unknown-app"]), now))
        else:
            ops.append((op, None, now))
    return ops


def apply_op(system: GrammarSystem, stack, op):
    name, arg, now = op
    if name == "activate":
        gid, mode = arg
        return system.activate(stack, gid, mode, now)
    if name == "pop":
        return system.pop(stack)
    if name == "reset":
        return system.reset_to_base(stack)
    if name == "focus":
        return system.on_focus_change(stack, arg)
    if name == "protect":
        return system.enter_protected(stack, now)
    raise AssertionError(name)


def expiring_substitutive_between(system: GrammarSystem, stack, t1: int, t2: int) -> bool:
    """True when a masking frame lapses in (t1, t2], which may unmask

    lower layers and legitimately grow the active set.
    """
    for frame in stack.frames:
        ttl = system.grammars[frame.grammar_id].ttl_ms
        if ttl is None:
            continue
        deadline = frame.activated_at + ttl
        if t1 < deadline <= t2 and frame.mode is ActivationMode.SUBSTITUTIVE:
            return True
    return False


# --- random configurations for round-trip checks -----------------------------


def _word(rng: random.Random, n=None) -> str:
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(n or rng.randint(2, 8)))


def _phrase(rng: random.Random, words=None) -> str:
    return " ".join(_word(rng) for _ in range(words or rng.randint(1, 3)))


def random_program(rng: random.Random, macro_id: str, grammar_ids=()) -> MacroProgram:
    pool = [
        lambda: Instruction("key", (rng.choice(["ENTER", "DELETE", "TAB", "F2"]),)),
        lambda: Instruction("chord", ("CTRL", rng.choice(["C", "V", "S"]))),
        lambda: Instruction("text", (rng.choice(["hola", "adiós!", "línea\nnueva", 'con "comillas"']),)),
        lambda: Instruction("mouse_move_rel", (rng.randint(-64, 64), rng.randint(-64, 64))),
        lambda: Instruction("mouse_move_abs", (rng.randint(0, 1919), rng.randint(0, 1079))),
        lambda: Instruction("mouse_click", (rng.choice(["left", "right", "middle"]), rng.randint(1, 2))),
        lambda: Instruction("mode", (rng.choice(["command", "grid", "spelling", "dictation-bridge"]),)),
        lambda: Instruction("clip_copy", (rng.randrange(4),)),
        lambda: Instruction("speak", (_phrase(rng),)),
        lambda: Instruction("launch", (_word(rng),)),
        lambda: Instruction("wait", (rng.randrange(0, 3000),)),
        lambda: Instruction("grammar", ("pop",)),
    ]
    if grammar_ids:
        pool.append(
            lambda: Instruction(
                "grammar",
                ("push", rng.choice(list(grammar_ids)), rng.choice(["additive", "substitutive"])),
            )
        )
    return MacroProgram(macro_id, tuple(rng.choice(pool)() for _ in range(rng.randint(1, 5))))


def random_config(rng: random.Random) -> Config:
    """A structurally valid random configuration built from values."""
    grammar_ids = ["main"] + [f"g{_word(rng, 4)}" for _ in range(rng.randint(0, 3))]
    macro_ids = [f"m{_word(rng, 5)}" for _ in range(rng.randint(1, 6))]
    macros = {mid: random_program(rng, mid, grammar_ids) for mid in macro_ids}

    def bindings() -> tuple[CommandBinding, ...]:
        phrases = set()
        out = []
        for _ in range(rng.randint(1, 5)):
            phrase = _phrase(rng)
            if phrase in phrases:
                continue
            phrases.add(phrase)
            out.append(
                CommandBinding(
                    phrase,
                    rng.choice(macro_ids),
                    round(rng.random(), 2) if rng.random() < 0.4 else None,
                    rng.random() < 0.2,
                    rng.random() < 0.8,
                )
            )
        return tuple(out)

    grammars = {
        gid: Grammar(gid, bindings(), rng.choice([None, None, 1000, 30000]))
        for gid in grammar_ids
    }
    app_grammars = {}
    for _ in range(rng.randint(0, 2)):
        app = _word(rng, 6)
        app_grammars[app] = Grammar(f"app:{app}", bindings())

    def rules() -> tuple[SubstitutionRule, ...]:
        seen = set()
        out = []
        for _ in range(rng.randint(0, 4)):
            match = _phrase(rng, rng.randint(1, 2))
            if match in seen:
                continue
            seen.add(match)
            out.append(
                SubstitutionRule(
                    match,
                    rng.choice([".", ",", "\n", "?", _word(rng)]),
                    rng.choice(list(RuleClass)),
                )
            )
        return tuple(out)

    substitutions = {
        mode: SubstitutionList(mode, rules(), _word(rng))
        for mode in rng.sample(["dictation-bridge", "dictation-local"], rng.randint(0, 2))
    }

    alphabet = list(string.ascii_lowercase)
    rng.shuffle(alphabet)
    spelling_words = rng.sample([_word(rng) for _ in range(26)], rng.randint(0, 8))
    spelling = SpellingTable(
        {w: alphabet[i] for i, w in enumerate(dict.fromkeys(spelling_words))}
    )

    nav_words = []
    while len(nav_words) < 7:
        w = _phrase(rng, rng.randint(1, 2))
        if w not in nav_words:
            nav_words.append(w)

    return Config(
        language=rng.choice(["pt-BR", "es-ES", "en-US", "gl-ES"]),
        settings=Settings(
            port=rng.randint(1024, 65535),
            protected_timeout_ms=rng.randint(500, 8000),
            default_confidence=round(rng.random(), 2),
            clipboard_slots=rng.randint(4, 16),
            speed_steps=tuple(sorted(rng.sample(range(1, 200), 4))),
        ),
        grammars=grammars,
        base_id="main",
        app_grammars=app_grammars,
        macros=macros,
        substitutions=substitutions,
        spelling=spelling,
        navigation=NavigationPhrases(*nav_words),
    )
