"""XML configuration: phrases, grammars, macros, substitutions, settings.

Everything the user says is configurable, so commands can be adapted to
any language (or around phonemes a user cannot produce).  The same
format doubles as a profile-exchange format: fragments of one user's
file can be merged over another's.

Serialization is canonical (elements ordered by kind then id, attributes
alphabetical, control characters as XML references), so saving the same
configuration twice yields byte-identical documents and golden files
stay stable.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace as dc_replace

from .dictation import DEFAULT_LITERAL_WORD, RuleClass, SpellingTable, SubstitutionRule
from .grammar import CommandBinding, Grammar, GrammarSystem
from .macros import MacroParseError, MacroProgram, parse_macro, print_program
from .recognition import normalize

DEFAULT_PORT = 8080


class ConfigError(ValueError):
    def __init__(self, message: str, path: str = "xulia"):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Settings:
    port: int = DEFAULT_PORT
    protected_timeout_ms: int = 3000
    default_confidence: float = 0.0
    clipboard_slots: int = 10
    speed_steps: tuple[int, int, int, int] = (2, 8, 24, 64)


@dataclass(frozen=True)
class NavigationPhrases:
    """The always-available phrases a substitutive grammar cannot hide."""

    back: str = "volver"
    command_mode: str = "modo comando"
    protected_entry: str = "modo protegido"
    multiplier_word: str = "por"
    grid_entry: str = "rejilla"
    correction_delete: str = "eliminar"
    correction_accept: str = "aceptar"


@dataclass(frozen=True)
class SubstitutionList:
    mode: str  # dictation-bridge | dictation-local
    rules: tuple[SubstitutionRule, ...] = ()
    literal_word: str = DEFAULT_LITERAL_WORD

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "rules", tuple(sorted(self.rules, key=lambda r: normalize(r.match)))
        )


@dataclass(frozen=True)
class Config:
    language: str
    settings: Settings = field(default_factory=Settings)
    grammars: dict[str, Grammar] = field(default_factory=dict)
    base_id: str = "main"
    app_grammars: dict[str, Grammar] = field(default_factory=dict)  # app id -> grammar
    macros: dict[str, MacroProgram] = field(default_factory=dict)
    substitutions: dict[str, SubstitutionList] = field(default_factory=dict)
    spelling: SpellingTable = field(default_factory=SpellingTable)
    navigation: NavigationPhrases = field(default_factory=NavigationPhrases)

    def rules_for_mode(self, mode: str) -> SubstitutionList:
        return self.substitutions.get(mode, SubstitutionList(mode))

    def grammar_system(self) -> GrammarSystem:
        grammars = dict(self.grammars)
        registry = {}
        for app, grammar in self.app_grammars.items():
            grammars[grammar.id] = grammar
            registry[app] = grammar.id
        nav = self.navigation
        navigation = Grammar(
            "@navigation",
            (
                CommandBinding(normalize(nav.back), "@back", repeatable=False),
                CommandBinding(normalize(nav.command_mode), "@command-mode", repeatable=False),
                CommandBinding(normalize(nav.protected_entry), "@protected", repeatable=False),
                CommandBinding(normalize(nav.grid_entry), "@grid", repeatable=False),
            ),
        )
        return GrammarSystem(
            grammars=grammars,
            base_id=self.base_id,
            navigation=navigation,
            app_registry=registry,
            default_threshold=self.settings.default_confidence,
            protected_timeout_ms=self.settings.protected_timeout_ms,
        )


# --- raw (unvalidated) form used by both loading and merging -----------------


@dataclass
class _RawCommand:
    phrase: str
    macro: str
    confidence: str | None
    protected: str | None
    repeatable: str | None
    path: str


@dataclass
class _RawGrammar:
    id: str
    base: bool
    ttl: str | None
    commands: list[_RawCommand]
    path: str


@dataclass
class _RawSubs:
    mode: str
    literal: str
    rules: list[tuple[str, str, str, str]]  # match, replace, class, path
    path: str


@dataclass
class _Raw:
    language: str | None = None
    settings: dict[str, str] = field(default_factory=dict)
    navigation: dict[str, str] = field(default_factory=dict)
    grammars: dict[str, _RawGrammar] = field(default_factory=dict)
    app_grammars: dict[str, _RawGrammar] = field(default_factory=dict)
    macros: dict[str, tuple[str, str]] = field(default_factory=dict)  # id -> (text, path)
    substitutions: dict[str, _RawSubs] = field(default_factory=dict)
    spelling: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ConfigFragment:
    """A partial configuration used as a merge overlay."""

    raw: _Raw


_SETTINGS_ATTRS = {
    "port",
    "protected-timeout-ms",
    "default-confidence",
    "clipboard-slots",
    "speed-steps",
}
_NAV_ATTRS = {
    "back",
    "command-mode",
    "protected-entry",
    "multiplier-word",
    "grid-entry",
    "correction-delete",
    "correction-accept",
}
_COMMAND_ATTRS = {"phrase", "macro", "confidence", "protected", "repeatable"}
_SUB_MODES = {"dictation-bridge", "dictation-local"}


def _check_attrs(el: ET.Element, allowed: set[str], path: str) -> None:
    for name in el.attrib:
        if name not in allowed:
            raise ConfigError(f"unknown attribute {name!r}", path)


def _parse_commands(el: ET.Element, path: str) -> list[_RawCommand]:
    commands = []
    for child in el:
        if child.tag != "command":
            raise ConfigError(f"unexpected element <{child.tag}>", path)
        phrase = child.get("phrase")
        cpath = f"{path}/command[@phrase={phrase!r}]"
        _check_attrs(child, _COMMAND_ATTRS, cpath)
        if not phrase or not normalize(phrase):
            raise ConfigError("command needs a non-empty phrase", path + "/command")
        macro = child.get("macro")
        if not macro:
            raise ConfigError("command needs a macro reference", cpath)
        commands.append(
            _RawCommand(
                phrase,
                macro,
                child.get("confidence"),
                child.get("protected"),
                child.get("repeatable"),
                cpath,
            )
        )
    return commands


def _parse_doc(doc: str) -> _Raw:
    try:
        root = ET.fromstring(doc)
    except ET.ParseError as e:
        raise ConfigError(f"not well-formed XML: {e}") from None
    if root.tag != "xulia":
        raise ConfigError(f"root element must be <xulia>, got <{root.tag}>")
    _check_attrs(root, {"language"}, "xulia")
    raw = _Raw(language=root.get("language"))
    for el in root:
        if el.tag == "settings":
            _check_attrs(el, _SETTINGS_ATTRS, "xulia/settings")
            raw.settings.update(el.attrib)
        elif el.tag == "navigation":
            _check_attrs(el, _NAV_ATTRS, "xulia/navigation")
            raw.navigation.update(el.attrib)
        elif el.tag == "grammar":
            gid = el.get("id")
            if not gid:
                raise ConfigError("grammar needs an id", "xulia/grammar")
            path = f"xulia/grammar[@id={gid!r}]"
            _check_attrs(el, {"id", "base", "ttl-ms"}, path)
            if gid in raw.grammars:
                raise ConfigError("duplicate grammar id", path)
            raw.grammars[gid] = _RawGrammar(
                gid,
                _parse_bool(el.get("base", "false"), path),
                el.get("ttl-ms"),
                _parse_commands(el, path),
                path,
            )
        elif el.tag == "appGrammar":
            app = el.get("app")
            if not app:
                raise ConfigError("appGrammar needs an app id", "xulia/appGrammar")
            path = f"xulia/appGrammar[@app={app!r}]"
            _check_attrs(el, {"app"}, path)
            if app in raw.app_grammars:
                raise ConfigError("duplicate appGrammar", path)
            raw.app_grammars[app] = _RawGrammar(
                f"app:{app}", False, None, _parse_commands(el, path), path
            )
        elif el.tag == "macro":
            mid = el.get("id")
            if not mid:
                raise ConfigError("macro needs an id", "xulia/macro")
            path = f"xulia/macro[@id={mid!r}]"
            _check_attrs(el, {"id"}, path)
            if mid in raw.macros:
                raise ConfigError("duplicate macro id", path)
            raw.macros[mid] = ((el.text or "").strip(), path)
        elif el.tag == "substitutions":
            mode = el.get("mode")
            path = f"xulia/substitutions[@mode={mode!r}]"
            _check_attrs(el, {"mode", "literal"}, path)
            if mode not in _SUB_MODES:
                raise ConfigError(f"mode must be one of {sorted(_SUB_MODES)}", path)
            if mode in raw.substitutions:
                raise ConfigError("duplicate substitutions mode", path)
            rules = []
            for child in el:
                if child.tag != "rule":
                    raise ConfigError(f"unexpected element <{child.tag}>", path)
                rpath = f"{path}/rule[@match={child.get('match')!r}]"
                _check_attrs(child, {"match", "replace", "class"}, rpath)
                match = child.get("match")
                if match is None or child.get("replace") is None:
                    raise ConfigError("rule needs match and replace", rpath)
                rules.append((match, child.get("replace"), child.get("class", "plain"), rpath))
            raw.substitutions[mode] = _RawSubs(
                mode, el.get("literal", DEFAULT_LITERAL_WORD), rules, path
            )
        elif el.tag == "spelling":
            path = "xulia/spelling"
            for child in el:
                if child.tag != "map":
                    raise ConfigError(f"unexpected element <{child.tag}>", path)
                word, char = child.get("word"), child.get("char")
                mpath = f"{path}/map[@word={word!r}]"
                _check_attrs(child, {"word", "char"}, mpath)
                if not word or not char:
                    raise ConfigError("map needs word and char", mpath)
                if normalize(word) in raw.spelling:
                    raise ConfigError("duplicate spelling word", mpath)
                raw.spelling[normalize(word)] = char
        else:
            raise ConfigError(f"unexpected element <{el.tag}>", "xulia")
    return raw


def _parse_bool(value: str, path: str) -> bool:
    if value in ("true", "1"):
        return True
    if value in ("false", "0"):
        return False
    raise ConfigError(f"expected true/false, got {value!r}", path)


def _parse_int(value: str, path: str, minimum: int | None = None) -> int:
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"expected an integer, got {value!r}", path) from None
    if minimum is not None and n < minimum:
        raise ConfigError(f"value {n} below minimum {minimum}", path)
    return n


def _parse_fraction(value: str, path: str) -> float:
    try:
        f = float(value)
    except ValueError:
        raise ConfigError(f"expected a number, got {value!r}", path) from None
    if not 0.0 <= f <= 1.0:
        raise ConfigError(f"value {f} outside [0,1]", path)
    return f


def _build_settings(attrs: dict[str, str]) -> Settings:
    path = "xulia/settings"
    settings = Settings()
    if "port" in attrs:
        port = _parse_int(attrs["port"], path, 1)
        if port > 65535:
            raise ConfigError(f"port {port} outside 1..65535", path)
        settings = dc_replace(settings, port=port)
    if "protected-timeout-ms" in attrs:
        settings = dc_replace(
            settings, protected_timeout_ms=_parse_int(attrs["protected-timeout-ms"], path, 1)
        )
    if "default-confidence" in attrs:
        settings = dc_replace(settings, default_confidence=_parse_fraction(attrs["default-confidence"], path))
    if "clipboard-slots" in attrs:
        settings = dc_replace(settings, clipboard_slots=_parse_int(attrs["clipboard-slots"], path, 1))
    if "speed-steps" in attrs:
        parts = attrs["speed-steps"].split(",")
        if len(parts) != 4:
            raise ConfigError("speed-steps needs exactly 4 comma-separated values", path)
        settings = dc_replace(
            settings, speed_steps=tuple(_parse_int(p.strip(), path, 1) for p in parts)
        )
    return settings


def _build_grammar(rg: _RawGrammar, settings: Settings) -> Grammar:
    bindings = []
    seen = set()
    for rc in rg.commands:
        phrase = normalize(rc.phrase)
        if phrase in seen:
            raise ConfigError(f"duplicate phrase {phrase!r}", rc.path)
        seen.add(phrase)
        bindings.append(
            CommandBinding(
                phrase,
                rc.macro,
                _parse_fraction(rc.confidence, rc.path) if rc.confidence is not None else None,
                _parse_bool(rc.protected, rc.path) if rc.protected is not None else False,
                _parse_bool(rc.repeatable, rc.path) if rc.repeatable is not None else True,
            )
        )
    ttl = _parse_int(rg.ttl, rg.path, 1) if rg.ttl is not None else None
    return Grammar(rg.id, tuple(bindings), ttl)


def _build(raw: _Raw) -> Config:
    if raw.language is None or not raw.language.strip():
        raise ConfigError("missing language attribute")
    settings = _build_settings(raw.settings)

    nav = NavigationPhrases()
    nav_map = {
        "back": "back",
        "command-mode": "command_mode",
        "protected-entry": "protected_entry",
        "multiplier-word": "multiplier_word",
        "grid-entry": "grid_entry",
        "correction-delete": "correction_delete",
        "correction-accept": "correction_accept",
    }
    for attr, field_name in nav_map.items():
        if attr in raw.navigation:
            value = raw.navigation[attr]
            if not normalize(value):
                raise ConfigError(f"navigation {attr} must be non-empty", "xulia/navigation")
            nav = dc_replace(nav, **{field_name: value})
    nav_phrases = [normalize(getattr(nav, f)) for f in nav_map.values()]
    if len(set(nav_phrases)) != len(nav_phrases):
        raise ConfigError("navigation phrases must be distinct", "xulia/navigation")

    macros = {}
    for mid, (text, path) in raw.macros.items():
        try:
            macros[mid] = parse_macro(text, mid, settings.clipboard_slots)
        except MacroParseError as e:
            raise ConfigError(f"bad macro program: {e}", path) from None

    bases = [g for g in raw.grammars.values() if g.base]
    if len(bases) > 1:
        raise ConfigError(
            "multiple base grammars: " + ", ".join(sorted(g.id for g in bases)),
            bases[1].path,
        )
    if not bases:
        raise ConfigError("exactly one grammar must set base=\"true\"")
    grammars = {gid: _build_grammar(rg, settings) for gid, rg in raw.grammars.items()}
    app_grammars = {app: _build_grammar(rg, settings) for app, rg in raw.app_grammars.items()}

    for rg in list(raw.grammars.values()) + list(raw.app_grammars.values()):
        for rc in rg.commands:
            if rc.macro not in macros:
                raise ConfigError(f"reference to undefined macro {rc.macro!r}", rc.path)
    for mid, program in macros.items():
        for ins in program.instructions:
            if ins.op == "grammar" and ins.args[0] == "push" and ins.args[1] not in grammars:
                raise ConfigError(
                    f"grammar push references undefined grammar {ins.args[1]!r}",
                    raw.macros[mid][1],
                )

    substitutions = {}
    for mode, rs in raw.substitutions.items():
        rules = []
        seen = set()
        for match, replacement, cls, rpath in rs.rules:
            if not normalize(match):
                raise ConfigError("rule match must be non-empty", rpath)
            if normalize(match) in seen:
                raise ConfigError("duplicate rule match", rpath)
            seen.add(normalize(match))
            try:
                rule_class = RuleClass(cls)
            except ValueError:
                raise ConfigError(f"unknown rule class {cls!r}", rpath) from None
            rules.append(SubstitutionRule(match, replacement, rule_class))
        if not normalize(rs.literal):
            raise ConfigError("literal word must be non-empty", rs.path)
        substitutions[mode] = SubstitutionList(mode, tuple(rules), rs.literal)

    try:
        spelling = SpellingTable(dict(raw.spelling))
    except ValueError as e:
        raise ConfigError(str(e), "xulia/spelling") from None

    return Config(
        language=raw.language,
        settings=settings,
        grammars=grammars,
        base_id=bases[0].id,
        app_grammars=app_grammars,
        macros=macros,
        substitutions=substitutions,
        spelling=spelling,
        navigation=nav,
    )


def load_config(doc: str) -> Config:
    """Parse and fully validate a configuration document."""
    return _build(_parse_doc(doc))


def load_config_file(path: str) -> Config:
    with open(path, encoding="utf-8") as f:
        return load_config(f.read())


def load_fragment(doc: str) -> ConfigFragment:
    """Parse a partial configuration for use as a merge overlay."""
    return ConfigFragment(_parse_doc(doc))


# --- canonical serialization ---------------------------------------------------


def _set_sorted_attrs(el: ET.Element, attrs: dict[str, str]) -> None:
    for key in sorted(attrs):
        el.set(key, attrs[key])


def _grammar_element(tag: str, grammar: Grammar, extra: dict[str, str]) -> ET.Element:
    el = ET.Element(tag)
    _set_sorted_attrs(el, extra)
    for b in grammar.bindings:  # already phrase-sorted
        attrs = {"macro": b.macro, "phrase": b.phrase}
        if b.threshold is not None:
            attrs["confidence"] = repr(b.threshold)
        if b.protected:
            attrs["protected"] = "true"
        if not b.repeatable:
            attrs["repeatable"] = "false"
        _set_sorted_attrs(ET.SubElement(el, "command"), attrs)
    return el


def save_config(config: Config) -> str:
    """Canonical serialization; load(save(c)) == c and bytes are stable."""
    root = ET.Element("xulia")
    root.set("language", config.language)

    s = config.settings
    _set_sorted_attrs(
        ET.SubElement(root, "settings"),
        {
            "clipboard-slots": str(s.clipboard_slots),
            "default-confidence": repr(s.default_confidence),
            "port": str(s.port),
            "protected-timeout-ms": str(s.protected_timeout_ms),
            "speed-steps": ",".join(str(v) for v in s.speed_steps),
        },
    )
    n = config.navigation
    _set_sorted_attrs(
        ET.SubElement(root, "navigation"),
        {
            "back": n.back,
            "command-mode": n.command_mode,
            "correction-accept": n.correction_accept,
            "correction-delete": n.correction_delete,
            "grid-entry": n.grid_entry,
            "multiplier-word": n.multiplier_word,
            "protected-entry": n.protected_entry,
        },
    )
    for gid in sorted(config.grammars):
        grammar = config.grammars[gid]
        attrs = {"id": gid}
        if gid == config.base_id:
            attrs["base"] = "true"
        if grammar.ttl_ms is not None:
            attrs["ttl-ms"] = str(grammar.ttl_ms)
        root.append(_grammar_element("grammar", grammar, attrs))
    for app in sorted(config.app_grammars):
        root.append(_grammar_element("appGrammar", config.app_grammars[app], {"app": app}))
    for mid in sorted(config.macros):
        el = ET.SubElement(root, "macro")
        el.set("id", mid)
        el.text = print_program(config.macros[mid])
    for mode in sorted(config.substitutions):
        subs = config.substitutions[mode]
        el = ET.SubElement(root, "substitutions")
        _set_sorted_attrs(el, {"literal": subs.literal_word, "mode": mode})
        for rule in subs.rules:  # already match-sorted
            _set_sorted_attrs(
                ET.SubElement(el, "rule"),
                {"class": rule.rule_class.value, "match": rule.match, "replace": rule.replace},
            )
    if config.spelling.entries:
        el = ET.SubElement(root, "spelling")
        for word in sorted(config.spelling.entries):
            _set_sorted_attrs(
                ET.SubElement(el, "map"), {"char": config.spelling.entries[word], "word": word}
            )

    ET.indent(root, "  ")
    body = ET.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


# --- profile merging ------------------------------------------------------------


def _raw_from_config(config: Config) -> _Raw:
    raw = _parse_doc(save_config(config))
    return raw


def merge_profiles(base: Config, overlay: ConfigFragment) -> Config:
    """Overlay same-id entries over a base profile and revalidate.

    Grammars, app grammars, macros and substitution lists replace whole
    entries keyed by id/app/mode; spelling maps merge word by word;
    settings and navigation merge attribute by attribute.
    """
    raw = _raw_from_config(base)
    over = overlay.raw
    if over.language is not None:
        raw.language = over.language
    raw.settings.update(over.settings)
    raw.navigation.update(over.navigation)
    overlay_declares_base = any(g.base for g in over.grammars.values())
    if overlay_declares_base:
        # an overlay declaring a base grammar takes over the role
        raw.grammars = {gid: dc_replace(g, base=False) for gid, g in raw.grammars.items()}
    raw.grammars.update({gid: dc_replace(g) for gid, g in over.grammars.items()})
    if not overlay_declares_base and base.base_id in raw.grammars:
        # replacing the base grammar's content keeps its role
        raw.grammars[base.base_id] = dc_replace(raw.grammars[base.base_id], base=True)
    raw.app_grammars.update(over.app_grammars)
    raw.macros.update(over.macros)
    raw.substitutions.update(over.substitutions)
    raw.spelling.update(over.spelling)
    return _build(raw)
