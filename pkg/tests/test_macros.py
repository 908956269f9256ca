import random

import pytest

from xulia.macros import (
    ClipboardEmptyError,
    Clipboards,
    Instruction,
    MacroParseError,
    MacroProgram,
    MultiplierRangeError,
    MultiplierState,
    execute,
    parse_macro,
    print_program,
    set_multiplier,
)


def test_parse_basic():
    program = parse_macro('key(ENTER); text("ok")')
    assert [i.op for i in program.instructions] == ["key", "text"]
    assert program.instructions[0].args == ("ENTER",)
    assert program.instructions[1].args == ("ok",)


def test_parse_empty_program():
    with pytest.raises(MacroParseError, match="empty program"):
        parse_macro("")


def test_parse_clip_slot_range():
    assert len(parse_macro("clip_copy(3)", slot_count=10).instructions) == 1
    with pytest.raises(MacroParseError, match="slot 12"):
        parse_macro("clip_copy(12)", slot_count=10)


def test_parse_errors_carry_position():
    with pytest.raises(MacroParseError, match="line 1"):
        parse_macro("frobnicate(1)")
    err = None
    try:
        parse_macro('key(ENTER);\nwait("soon")')
    except MacroParseError as e:
        err = e
    assert err is not None and err.line == 2


@pytest.mark.parametrize(
    "source",
    [
        "key()",  # arity
        "key(1)",  # type
        "mouse_click(top)",  # unknown button
        "mouse_click(left, 0)",  # count < 1
        "mode(flying)",  # unknown mode
        "grammar(push, spell)",  # missing activation mode
        "grammar(drop)",  # unknown verb
        "wait(-1)",
        'text("a", "b")',
        'key(ENTER) text("x")',  # missing separator
        'text("unterminated',
    ],
)
def test_parse_rejects(source):
    with pytest.raises(MacroParseError):
        parse_macro(source)


def test_parse_string_escapes():
    program = parse_macro(r'text("line\nbreak \"q\" \\")')
    assert program.instructions[0].args == ('line\nbreak "q" \\',)


def test_roundtrip_examples():
    sources = [
        'key(ENTER); text("ok")',
        "chord(CTRL, SHIFT, S)",
        "mouse_move_rel(-5, 12); mouse_click(left, 2); wait(100)",
        "grammar(push, spell, substitutive); grammar(pop); grammar(reset)",
        'mode(dictation-bridge); speak("olá\\nmundo"); launch(browser)',
        "clip_copy(0); clip_paste(9)",
    ]
    for source in sources:
        program = parse_macro(source)
        assert parse_macro(print_program(program)) == program


def _random_program(rng: random.Random) -> MacroProgram:
    pool = [
        lambda: Instruction("key", (rng.choice(["ENTER", "DELETE", "F5", "A"]),)),
        lambda: Instruction("chord", ("CTRL", rng.choice(["C", "V", "Z"]))),
        lambda: Instruction("text", (rng.choice(["hola", 'quo"te', "new\nline", "áé í", ""]),)),
        lambda: Instruction("mouse_move_rel", (rng.randint(-99, 99), rng.randint(-99, 99))),
        lambda: Instruction("mouse_move_abs", (rng.randint(0, 1919), rng.randint(0, 1079))),
        lambda: Instruction("mouse_click", (rng.choice(["left", "right", "middle"]), rng.randint(1, 3))),
        lambda: Instruction("mode", (rng.choice(["command", "grid", "spelling"]),)),
        lambda: Instruction("grammar", ("push", f"g{rng.randrange(4)}", rng.choice(["additive", "substitutive"]))),
        lambda: Instruction("grammar", ("pop",)),
        lambda: Instruction("clip_copy", (rng.randrange(10),)),
        lambda: Instruction("clip_paste", (rng.randrange(10),)),
        lambda: Instruction("speak", ("hecho",)),
        lambda: Instruction("launch", (rng.choice(["browser", "mail client"]),)),
        lambda: Instruction("wait", (rng.randrange(0, 2000),)),
    ]
    return MacroProgram("macro", tuple(rng.choice(pool)() for _ in range(rng.randint(1, 8))))


def test_roundtrip_random_programs():
    rng = random.Random(42)
    for _ in range(300):
        program = _random_program(rng)
        assert parse_macro(print_program(program)) == program


def test_multiplier_repeats_program():
    program = parse_macro("key(DELETE)")
    res = execute(program, now=0, clipboards=Clipboards(), multiplier=MultiplierState(3))
    assert [e.kind for e in res.events] == ["key"] * 3
    assert res.multiplier == MultiplierState(None)


def test_multiplier_identity_when_unset():
    program = parse_macro("key(DELETE)")
    res = execute(program, now=0, clipboards=Clipboards())
    assert len(res.events) == 1


def test_multiplier_ignored_for_non_repeatable():
    program = parse_macro("mode(grid)")
    res = execute(
        program, now=0, clipboards=Clipboards(), multiplier=MultiplierState(5), repeatable=False
    )
    assert len(res.events) == 1
    assert res.multiplier == MultiplierState(None)


def test_multiplier_log_is_concatenation():
    rng = random.Random(5)
    for _ in range(50):
        program = _random_program(rng)
        if any(i.op == "clip_paste" for i in program.instructions):
            continue
        n = rng.randint(1, 6)
        clips = Clipboards()
        single = execute(program, now=0, clipboards=clips).events
        clips = Clipboards()
        repeated = execute(program, now=0, clipboards=clips, multiplier=MultiplierState(n)).events
        assert [(e.kind, e.args) for e in repeated] == [(e.kind, e.args) for e in single] * n


def test_set_multiplier_range():
    assert set_multiplier(7) == MultiplierState(7)
    assert set_multiplier(99) == MultiplierState(99)
    for bad in (0, 100, -3):
        with pytest.raises(MultiplierRangeError):
            set_multiplier(bad)


def test_clipboard_copy_paste():
    clips = Clipboards()
    clips.copy(2, "abc")
    assert clips.paste(2) == "abc"
    clips.copy(1, "x")
    clips.copy(1, "y")
    assert clips.paste(1) == "y"
    with pytest.raises(ClipboardEmptyError):
        clips.paste(4)


def test_clipboard_slots_independent():
    clips = Clipboards()
    clips.copy(3, "three")
    clips.copy(7, "seven")
    clips.copy(3, "replaced")
    assert clips.paste(7) == "seven"
    assert clips.paste(3) == "replaced"


def test_paste_unwritten_aborts_but_prior_events_stand():
    program = parse_macro('key(A); clip_paste(4); key(B)')
    seen = []
    with pytest.raises(ClipboardEmptyError):
        execute(program, now=0, clipboards=Clipboards(), sink=seen.append)
    assert [e.args for e in seen] == [("A",)]


def test_copy_uses_selection_and_paste_emits_text():
    program = parse_macro("clip_copy(0); clip_paste(0)")
    res = execute(program, now=10, clipboards=Clipboards(), selection="recorte")
    assert [(e.kind, e.args) for e in res.events] == [("text", ("recorte",))]


def test_wait_advances_timestamps():
    program = parse_macro("key(A); wait(500); key(B); wait(250); key(C)")
    res = execute(program, now=1000, clipboards=Clipboards())
    assert [e.timestamp for e in res.events] == [1000, 1500, 1750]
    # repetitions keep accumulating the offset
    res = execute(program, now=0, clipboards=Clipboards(), multiplier=MultiplierState(2))
    assert [e.timestamp for e in res.events] == [0, 500, 750, 750, 1250, 1500]


def test_param_substitution():
    program = parse_macro('speak("buscando $1"); text("$1 y $2"); launch(browser)')
    res = execute(program, now=0, clipboards=Clipboards(), params=("gatos",))
    assert res.events[0].args == ("buscando gatos",)
    assert res.events[1].args == ("gatos y $2",)  # missing params stay visible


def test_grammar_handler_receives_ops_in_order():
    program = parse_macro("grammar(push, spell, substitutive); key(A); grammar(pop)")
    calls = []
    execute(
        program,
        now=0,
        clipboards=Clipboards(),
        grammar_handler=lambda *a: calls.append(a),
    )
    assert calls == [("push", "spell", "substitutive"), ("pop", None, None)]


def test_chord_event_joined():
    res = execute(parse_macro("chord(CTRL, ALT, DEL)"), now=0, clipboards=Clipboards())
    assert res.events[0].kind == "chord"
    assert res.events[0].args == ("CTRL+ALT+DEL",)
