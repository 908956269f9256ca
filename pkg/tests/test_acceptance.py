"""Acceptance suite: one test per release criterion, one PASS line each.

Run with `pytest tests/test_acceptance.py -s` to see the criterion lines.
"""

import json
import random
import time
import urllib.request
from contextlib import contextmanager
from pathlib import Path

import pytest

from helpers import (
    apply_op,
    build_system,
    expiring_substitutive_between,
    random_config,
    random_ops,
)
from xulia import engine as engine_mod
from xulia.bridge import BridgeSession
from xulia.config import ConfigError, load_config, save_config
from xulia.dictation import (
    RuleClass,
    SubstitutionRule,
    apply_substitutions,
    begin_correction,
    commit_correction,
    delete_token,
    replace_token,
)
from xulia.events import format_log
from xulia.grammar import ActivationMode
from xulia.grid import GridTarget, Screen, count_addressable, target_point
from xulia.host import EngineHost
from xulia.macros import MultiplierState
from xulia.recognition import parse_script

GOLDEN = Path(__file__).resolve().parent / "golden"


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {name}: FAIL")
        raise
    print(f"\nACCEPTANCE {name}: PASS")


def test_grid_constants():
    with criterion("grid-constants"):
        started = time.monotonic()
        counts = count_addressable(Screen(1920, 1080))
        assert counts.cells == 576
        assert counts.subcell_targets == 5184
        assert counts.total_with_corner == 5760
        counts = count_addressable(Screen(2160, 2160))
        assert counts.distinct_points == 5760  # exhaustive, pairwise distinct
        assert time.monotonic() - started < 1.0


def test_grid_spot_values():
    with criterion("grid-spot-values"):
        assert target_point(GridTarget(0, 0, 0), Screen(1920, 1080)) == (0, 0)
        assert target_point(GridTarget(0, 0, None), Screen(1920, 1080)) == (40, 22)
        rng = random.Random(5760)
        for _ in range(1000):
            screen = Screen(rng.randint(24, 7680), rng.randint(24, 4320))
            row, col = rng.randrange(24), rng.randrange(24)
            assert target_point(GridTarget(row, col, 5), screen) == target_point(
                GridTarget(row, col, None), screen
            )


def test_protected_mode_window(sample_config):
    with criterion("protected-mode"):
        accept = parse_script(
            '@t=0 hear "modo protegido" conf=0.99\n'
            '@t=2999 hear "desactivar xulia" conf=0.99'
        )
        events, _ = engine_mod.run(sample_config, accept)
        assert [(e.kind, e.args) for e in events] == [("speak", ("xulia desactivada",))]

        reject = parse_script(
            '@t=0 hear "modo protegido" conf=0.99\n'
            '@t=3000 hear "desactivar xulia" conf=0.99'
        )
        events, _ = engine_mod.run(sample_config, reject)
        assert events == []


def test_grammar_algebra_properties():
    with criterion("grammar-algebra"):
        rng = random.Random(140_000)
        counts = {"pop_activate": 0, "reset": 0, "shrink": 0, "ttl_pop": 0}
        for _ in range(1000):
            system = build_system(rng)
            stack = system.new_stack()
            ops = random_ops(rng, system, rng.randint(0, 10))
            now = 0
            for op in ops:
                stack = apply_op(system, stack, op)
                now = op[2]

            # pop . activate is the identity on the active command set
            gid = rng.choice(list(system.grammars))
            mode = rng.choice([ActivationMode.ADDITIVE, ActivationMode.SUBSTITUTIVE])
            t = now + rng.randint(0, 2000)
            pushed = system.activate(stack, gid, mode, t)
            assert (
                system.active_command_set(system.pop(pushed), t).bindings
                == system.active_command_set(stack, t).bindings
            )
            counts["pop_activate"] += 1

            # reset_to_base is idempotent
            once = system.reset_to_base(stack)
            assert system.reset_to_base(once) == once
            counts["reset"] += 1

            # time only removes (when no masking frame lapses in the window)
            t1 = now + rng.randint(0, 4000)
            t2 = t1 + rng.randint(0, 6000)
            if not expiring_substitutive_between(system, stack, t1, t2):
                assert (
                    system.active_command_set(stack, t2).phrases()
                    <= system.active_command_set(stack, t1).phrases()
                )
                counts["shrink"] += 1

            # TTL expiry of the top frame is exactly an explicit pop
            clean = system.clear_protected(stack)
            if clean.frames:
                top = clean.frames[-1]
                ttl = system.grammars[top.grammar_id].ttl_ms
                if ttl is not None:
                    deadline = top.activated_at + ttl
                    others = [
                        f
                        for f in clean.frames[:-1]
                        if (t := system.grammars[f.grammar_id].ttl_ms) is not None
                        and f.activated_at + t <= deadline
                    ]
                    if not others:
                        assert system.pruned(clean, deadline) == system.pop(clean)
                        counts["ttl_pop"] += 1
        assert counts["pop_activate"] == counts["reset"] == 1000
        assert counts["shrink"] >= 800
        assert counts["ttl_pop"] >= 100


def test_multiplier_range(sample_config):
    with criterion("multiplier"):
        for n in range(1, 100):
            script = parse_script(
                f'@t=0 hear "por {n}" conf=0.99\n@t=100 hear "borrar" conf=0.99'
            )
            events, state = engine_mod.run(sample_config, script)
            assert [e.kind for e in events] == ["key"] * n
            assert state.multiplier == MultiplierState(None)
        for bad in (0, 100):
            script = parse_script(
                f'@t=0 hear "por {bad}" conf=0.99\n@t=100 hear "borrar" conf=0.99'
            )
            events, state = engine_mod.run(sample_config, script)
            assert [e.kind for e in events] == ["key"]  # rejected: runs once
            assert state.multiplier == MultiplierState(None)


def _oracle_substitute(text, rules, literal_word="literal"):
    """Straightforward longest-match scan, written independently."""

    def norm(s):
        return " ".join(s.casefold().split())

    tokens = text.split()
    by_length = sorted(rules, key=lambda r: -len(norm(r.match).split()))

    def match_at(j):
        for rule in by_length:
            mt = norm(rule.match).split()
            if j + len(mt) <= len(tokens) and [norm(t) for t in tokens[j : j + len(mt)]] == mt:
                return rule
        return None

    pieces = []  # (kind, text)
    i = 0
    while i < len(tokens):
        if norm(tokens[i]) == norm(literal_word):
            rule = match_at(i + 1)
            if rule is not None:
                n = len(norm(rule.match).split())
                pieces.extend(("word", t) for t in tokens[i + 1 : i + 1 + n])
                i += 1 + n
            elif i + 1 < len(tokens) and norm(tokens[i + 1]) == norm(literal_word):
                pieces.append(("word", tokens[i + 1]))
                i += 2
            else:
                i += 1
            continue
        rule = match_at(i)
        if rule is not None:
            pieces.append((rule.rule_class.value, rule.replace))
            i += len(norm(rule.match).split())
        else:
            pieces.append(("word", tokens[i]))
            i += 1

    out = ""
    prev_control = False
    for k, (kind, piece) in enumerate(pieces):
        if kind == "punctuation":
            out += piece
            prev_control = False
        elif kind == "control":
            out += piece
            prev_control = True
        else:
            if k > 0 and not prev_control:
                out += " "
            out += piece
            prev_control = False
    return out


def test_substitutions():
    with criterion("substitutions"):
        ponto = SubstitutionRule("ponto", ".", RuleClass.PUNCTUATION)
        assert apply_substitutions("olá ponto", [ponto]) == "olá."
        assert apply_substitutions("olá literal ponto", [ponto]) == "olá ponto"
        assert apply_substitutions("hola  mundo", []) == "hola mundo"

        rng = random.Random(1555)
        vocab = ["olá", "ponto", "nova", "linha", "sí", "b", "vírgula", "x"]
        replacements = [".", ",", "\n", "¡!", "palabra"]
        for _ in range(500):
            rules = []
            seen = set()
            for _ in range(rng.randint(0, 4)):
                match = " ".join(rng.sample(vocab, rng.randint(1, 2)))
                if match in seen:
                    continue
                seen.add(match)
                rules.append(
                    SubstitutionRule(match, rng.choice(replacements), rng.choice(list(RuleClass)))
                )
            words = [rng.choice(vocab + ["literal"]) for _ in range(rng.randint(0, 10))]
            text = " ".join(words)
            assert apply_substitutions(text, rules) == _oracle_substitute(text, rules), (
                text,
                [(r.match, r.replace, r.rule_class) for r in rules],
            )


def test_correction():
    with criterion("correction"):
        session = begin_correction("hola mundo cruel")
        assert [(t.index, t.text) for t in session.tokens] == [
            (1, "hola"),
            (2, "mundo"),
            (3, "cruel"),
        ]
        assert session.original_emitted_length == 16

        edited = delete_token(session, 2)
        assert [(t.index, t.text) for t in edited.tokens] == [(1, "hola"), (2, "cruel")]
        events = commit_correction(edited)
        assert len(events) == 17
        assert all(e.kind == "key" and e.args == ("BACKSPACE",) for e in events[:16])
        assert events[16].kind == "text" and events[16].args == ("hola cruel",)

        assert commit_correction(session) == []  # no edits, no events
        same = replace_token(session, 1, "hola")
        assert commit_correction(same) == []  # identical result, no events

        renamed = replace_token(session, 1, "adiós")
        assert [t.text for t in renamed.tokens] == ["adiós", "mundo", "cruel"]


def test_bridge_protocol(sample_config):
    with criterion("bridge-protocol"):
        host = EngineHost(sample_config, port=0)
        host.start()
        try:
            base = f"http://127.0.0.1:{host.port}"

            def get_control(last):
                with urllib.request.urlopen(f"{base}/control?last={last}", timeout=5) as r:
                    return json.loads(r.read())

            host.session.enqueue_control("start")
            assert get_control(0) == {"seq": 1, "action": "start"}
            assert get_control(1) == {"seq": 1, "action": "none"}

            before = len(host.log_snapshot())
            body = json.dumps({"text": "borrar", "final": True, "confidence": 0.95}).encode()
            req = urllib.request.Request(
                f"{base}/transcript",
                data=body,
                headers={"Content-Type": "application/json"},
                method="POST",
            )
            with urllib.request.urlopen(req, timeout=5) as r:
                assert json.loads(r.read()) == {"accepted": True}
            host.drain()
            after = host.log_snapshot()
            assert len(after) == before + 1  # exactly one event
        finally:
            host.stop()

        rng = random.Random(8080)
        for _ in range(100):
            session = BridgeSession()
            enqueued, observed, last = [], [], 0
            for _ in range(rng.randint(1, 30)):
                if rng.random() < 0.5:
                    seq = session.enqueue_control(rng.choice(["start", "stop"]))
                    enqueued.append(seq)
                else:
                    action = session.poll_control(last)
                    if action.action != "none":
                        observed.append(action.seq)
                        last = action.seq
            while (action := session.poll_control(last)).action != "none":
                observed.append(action.seq)
                last = action.seq
            assert enqueued == list(range(1, len(enqueued) + 1))  # gapless
            assert observed == enqueued  # each exactly once, in order

        host = EngineHost(sample_config)  # default port from config
        try:
            assert host.port == 8080
        finally:
            host.server.server_close()


def test_config_round_trip():
    with criterion("config-round-trip"):
        rng = random.Random(58)
        for _ in range(50):
            config = random_config(rng)
            assert load_config(save_config(config)) == config

        minimal = (
            '<xulia language="es"><grammar base="true" id="m">'
            '<command macro="go" phrase="ir"/></grammar>'
            '<macro id="go">key(ENTER)</macro></xulia>'
        )
        failures = {
            "dangling macro": minimal.replace('macro="go" phrase', 'macro="nope" phrase'),
            "duplicate phrase": minimal.replace(
                '<command macro="go" phrase="ir"/>',
                '<command macro="go" phrase="ir"/><command macro="go" phrase="IR"/>',
            ),
            "multiple base": minimal.replace(
                "<macro", '<grammar base="true" id="m2"/><macro'
            ),
            "threshold range": minimal.replace('phrase="ir"', 'phrase="ir" confidence="2"'),
            "schema violation": minimal.replace("<macro", "<mystery/><macro"),
        }
        for name, doc in failures.items():
            with pytest.raises(ConfigError) as err:
                load_config(doc)
            assert err.value.path.startswith("xulia"), name


def test_end_to_end_determinism(sample_config):
    with criterion("end-to-end-determinism"):
        for name in ("grid-click", "dictate-and-correct", "spell-word"):
            script = parse_script((GOLDEN / f"{name}.script").read_text("utf-8"))
            expected = (GOLDEN / f"{name}.log").read_text("utf-8")
            logs = [
                format_log(engine_mod.run(sample_config, script)[0]) for _ in range(5)
            ]
            assert all(log == expected for log in logs), name
