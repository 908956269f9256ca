"""Wires a live engine loop to the HTTP bridge.

All engine-bound effects (bridge transcripts, control couplings) are
serialized through one queue into a single engine thread, matching the
single-writer model the rest of the package assumes.
"""

from __future__ import annotations

import queue
import threading

from .bridge import BridgeServer, BridgeSession
from .chat import ChatBrain, KnowledgeFetcher
from .config import Config
from .engine import Engine
from .events import SyntheticEvent, format_event
from .grid import Screen


class EngineHost:
    """A running engine fed by the bridge; the log accumulates in order."""

    def __init__(
        self,
        config: Config,
        *,
        screen: Screen = Screen(1920, 1080),
        brain: ChatBrain | None = None,
        knowledge: KnowledgeFetcher | None = None,
        host: str = "127.0.0.1",
        port: int | None = None,
        log_file=None,
    ):
        self.session = BridgeSession(
            port=config.settings.port if port is None else port,
            language=config.language,
        )
        self.engine = Engine(
            config, screen=screen, brain=brain, knowledge=knowledge, bridge=self.session
        )
        self.state = self.engine.new_state()
        self._queue: queue.Queue = queue.Queue()
        self._log: list[SyntheticEvent] = []
        self._state_lock = threading.Lock()
        self._log_file = log_file
        self.server = BridgeServer(
            self.session,
            self._queue.put,
            state_provider=self._snapshot,
            host=host,
            port=port if port is not None else config.settings.port,
        )
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.server.port

    def _snapshot(self) -> dict:
        # the same lock serializes stepping, so reads never see a torn state
        with self._state_lock:
            return self.engine.snapshot(self.state)

    def _loop(self) -> None:
        while True:
            item = self._queue.get()
            try:
                if item is None:
                    return
                with self._state_lock:
                    events = self.engine.step(self.state, item)
                    self._log.extend(events)
                if self._log_file is not None:
                    for ev in events:
                        self._log_file.write(format_event(ev) + "\n")
                    self._log_file.flush()
            finally:
                self._queue.task_done()

    def start(self) -> None:
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()
        self.server.start_background()

    def submit(self, item) -> None:
        """Feed an event directly (tests, CLI stdin)."""
        self._queue.put(item)

    def drain(self) -> None:
        """Block until every queued event has been processed."""
        self._queue.join()

    def log_snapshot(self) -> list[SyntheticEvent]:
        with self._state_lock:
            return list(self._log)

    def stop(self) -> None:
        self.server.shutdown()
        self.server.server_close()
        self._queue.put(None)
        if self._thread is not None:
            self._thread.join(timeout=5)
