"""Command-line entry points.

    xulia run   --config c.xml --script s.txt [--out log.txt] [--screen WxH]
    xulia serve --config c.xml [--port N]
    xulia grid  --screen WxH --target 5AA
    xulia check --config c.xml

Exit codes: 0 ok, 2 config error, 3 script error, 4 port busy,
5 malformed grid target.  Diagnostics go to stderr, data to stdout.
The config path may also come from the XULIA_CONFIG environment
variable; the flag wins.
"""

from __future__ import annotations

import argparse
import errno
import os
import sys
import time

from . import engine as engine_mod
from .config import Config, ConfigError, load_config_file
from .events import format_log
from .grid import Screen, TargetParseError, parse_target, target_point
from .host import EngineHost
from .recognition import ScriptError, parse_script

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SCRIPT = 3
EXIT_PORT = 4
EXIT_TARGET = 5


def _screen_type(value: str) -> Screen:
    try:
        w, h = value.lower().split("x")
        return Screen(int(w), int(h))
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(f"screen must be WxH, got {value!r}") from None


def _resolve_config_path(args) -> str | None:
    return args.config or os.environ.get("XULIA_CONFIG")


def _load_config_or_fail(args) -> Config | int:
    path = _resolve_config_path(args)
    if not path:
        print("error: no config given (use --config or XULIA_CONFIG)", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return load_config_file(path)
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as e:
        print(f"error: invalid config: {e}", file=sys.stderr)
        return EXIT_CONFIG


def cmd_run(args) -> int:
    config = _load_config_or_fail(args)
    if isinstance(config, int):
        return config
    try:
        with open(args.script, encoding="utf-8") as f:
            script = parse_script(f.read())
    except OSError as e:
        print(f"error: cannot read script: {e}", file=sys.stderr)
        return EXIT_SCRIPT
    except ScriptError as e:
        print(f"error: invalid script: {e}", file=sys.stderr)
        return EXIT_SCRIPT
    events, _ = engine_mod.run(config, script, screen=args.screen)
    log_text = format_log(events)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(log_text)
    else:
        sys.stdout.write(log_text)
    return EXIT_OK


def cmd_serve(args) -> int:
    config = _load_config_or_fail(args)
    if isinstance(config, int):
        return config
    try:
        host = EngineHost(config, port=args.port, log_file=sys.stdout)
    except OSError as e:
        if e.errno in (errno.EADDRINUSE, errno.EACCES):
            print(f"error: port unavailable: {e}", file=sys.stderr)
            return EXIT_PORT
        raise
    host.start()
    print(f"serving on 127.0.0.1:{host.port} (interrupt to stop)", file=sys.stderr)
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        host.stop()
    return EXIT_OK


def cmd_grid(args) -> int:
    try:
        target = parse_target(args.target)
    except TargetParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_TARGET
    x, y = target_point(target, args.screen)
    print(f"{x} {y}")
    return EXIT_OK


def cmd_check(args) -> int:
    path = _resolve_config_path(args)
    if not path:
        print("error: no config given (use --config or XULIA_CONFIG)", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with open(path, encoding="utf-8") as f:
            doc = f.read()
    except OSError as e:
        print(f"cannot read config: {e}")
        return 1
    try:
        from .config import load_config

        config = load_config(doc)
    except ConfigError as e:
        print(f"invalid: {e}")
        return 1
    print(
        "ok: language={} grammars={} app-grammars={} macros={} "
        "substitution-lists={} spelling-words={}".format(
            config.language,
            len(config.grammars),
            len(config.app_grammars),
            len(config.macros),
            len(config.substitutions),
            len(config.spelling.entries),
        )
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xulia", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="replay a scenario script and write the event log")
    run_p.add_argument("--config")
    run_p.add_argument("--script", required=True)
    run_p.add_argument("--out")
    run_p.add_argument("--screen", type=_screen_type, default=Screen(1920, 1080))
    run_p.set_defaults(func=cmd_run)

    serve_p = sub.add_parser("serve", help="serve the browser bridge and run the engine")
    serve_p.add_argument("--config")
    serve_p.add_argument("--port", type=int, default=None)
    serve_p.set_defaults(func=cmd_serve)

    grid_p = sub.add_parser("grid", help="print the pixel point of a grid target")
    grid_p.add_argument("--screen", type=_screen_type, required=True)
    grid_p.add_argument("--target", required=True)
    grid_p.set_defaults(func=cmd_grid)

    check_p = sub.add_parser("check", help="validate a configuration file")
    check_p.add_argument("--config")
    check_p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
