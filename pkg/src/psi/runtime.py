"""Runtime wiring: store + bus + built-ins + dynamic registry.

One Runtime instance backs the gateway, the chat dispatcher, the CLI,
and each eval sandbox. The clock can be frozen for deterministic runs.
"""
from __future__ import annotations

import os
from datetime import datetime
from pathlib import Path
from typing import Callable

from .bus import ContextBus
from .dynamic import DynamicModuleRegistry
from .instruments import BUILTIN_CLASSES
from .store import StateStore
from .timeutil import get_tz, parse_ts, utcnow

ENV_DATA_DIR = "PSI_DATA_DIR"
ENV_TZ = "PSI_TZ"


class Runtime:
    def __init__(
        self,
        data_dir: str | Path,
        tz: str | None = None,
        clock: Callable[[], datetime] | datetime | str | None = None,
        include_actions: bool = False,
        max_context_bytes: int | None = None,
    ):
        if isinstance(clock, (datetime, str)):
            frozen = parse_ts(clock)
            clock = lambda: frozen  # noqa: E731
        self.clock: Callable[[], datetime] = clock or utcnow
        self.tz = get_tz(tz or os.environ.get(ENV_TZ))
        self.data_dir = Path(data_dir)
        self.store = StateStore(self.data_dir, clock=self.clock)
        self.bus = ContextBus(include_actions=include_actions, max_bytes=max_context_bytes)
        for cls in BUILTIN_CLASSES:
            self.bus.register(cls(self.store, self.tz, self.clock))
        self.dynamic = DynamicModuleRegistry(
            self.store, self.bus, self.data_dir, self.tz, self.clock
        )
        self.dynamic.load_persisted()

    def now(self) -> datetime:
        return self.clock()

    def assemble(self, as_of: datetime | None = None):
        return self.bus.assemble_context(as_of or self.now())

    def execute_action(self, toolkit_id: str, endpoint: str, params: dict) -> dict:
        """Single write path shared by chat tool calls, REST actions, and
        the GUI: provider-validated, store-serialized."""
        provider = self.bus.get_provider(toolkit_id)
        return provider.execute(endpoint, params)
