"""Person-scoped persistence: one JSON document per module.

Each module owns a single file ``<data_dir>/<toolkit_id>.json`` holding
the current document plus a per-module version counter. Writes go
through a temp file and an atomic rename, so readers never observe a
torn document. Snapshots are deep copies used by the eval harness to
validate write-backs by diffing.
"""
from __future__ import annotations

import copy
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

from .timeutil import format_ts, utcnow


class StoreError(Exception):
    pass


class UnknownModuleError(StoreError):
    def __init__(self, toolkit_id: str):
        super().__init__(f"unknown module: {toolkit_id!r}")
        self.toolkit_id = toolkit_id


class IntegrityError(StoreError):
    def __init__(self, path: Path, cause: Exception):
        super().__init__(f"corrupt state file {path}: {cause}")
        self.path = path


@dataclass
class ModuleState:
    toolkit_id: str
    version: int
    updated_at: str
    body: dict


@dataclass(frozen=True)
class StateSnapshot:
    taken_at: str
    states: Mapping[str, ModuleState]


@dataclass(frozen=True)
class DiffEntry:
    toolkit_id: str
    path: str
    before: Any
    after: Any


def _leaf_diff(toolkit_id: str, path: str, before: Any, after: Any, out: list[DiffEntry]) -> None:
    if isinstance(before, dict) and isinstance(after, dict):
        for key in sorted(set(before) | set(after)):
            sub = f"{path}.{key}" if path else key
            _leaf_diff(toolkit_id, sub, before.get(key), after.get(key), out)
        return
    if before != after:
        out.append(DiffEntry(toolkit_id, path, before, after))


def diff_snapshots(a: StateSnapshot, b: StateSnapshot) -> list[DiffEntry]:
    """Changed leaf paths between two snapshots (dicts recurse; lists and
    scalars compare as leaves)."""
    entries: list[DiffEntry] = []
    for toolkit_id in sorted(set(a.states) | set(b.states)):
        before = a.states[toolkit_id].body if toolkit_id in a.states else {}
        after = b.states[toolkit_id].body if toolkit_id in b.states else {}
        _leaf_diff(toolkit_id, "", before, after, entries)
    return entries


class StateStore:
    """One JSON file per known module, per-module write serialization.

    ``crash_hook`` is a fault-injection point for tests: it runs after
    the temp file is written and before the atomic rename.
    """

    def __init__(self, data_dir: str | Path, clock: Callable[[], Any] = utcnow):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._clock = clock
        self._locks: dict[str, threading.Lock] = {}
        self._known: set[str] = set()
        self._registry_lock = threading.Lock()
        self._write_listeners: list[Callable[[str, int], None]] = []
        self.crash_hook: Callable[[str], None] | None = None

    # -- module registry ---------------------------------------------------

    def ensure_module(self, toolkit_id: str) -> None:
        with self._registry_lock:
            self._known.add(toolkit_id)
            self._locks.setdefault(toolkit_id, threading.Lock())

    def known_modules(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._known)

    def _check_known(self, toolkit_id: str) -> None:
        with self._registry_lock:
            if toolkit_id not in self._known:
                raise UnknownModuleError(toolkit_id)

    def subscribe_writes(self, listener: Callable[[str, int], None]) -> None:
        self._write_listeners.append(listener)

    # -- I/O ----------------------------------------------------------------

    def _path(self, toolkit_id: str) -> Path:
        return self.data_dir / f"{toolkit_id}.json"

    def read_state(self, toolkit_id: str) -> ModuleState:
        self._check_known(toolkit_id)
        path = self._path(toolkit_id)
        if not path.exists():
            return ModuleState(toolkit_id, 0, format_ts(self._clock()), {})
        try:
            with path.open("r", encoding="utf-8") as f:
                doc = json.load(f)
            return ModuleState(toolkit_id, doc["version"], doc["updated_at"], doc["body"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise IntegrityError(path, exc)

    def write_state(self, toolkit_id: str, body: dict) -> int:
        self._check_known(toolkit_id)
        lock = self._locks[toolkit_id]
        with lock:
            current = self.read_state(toolkit_id)
            version = current.version + 1
            doc = {
                "toolkit_id": toolkit_id,
                "version": version,
                "updated_at": format_ts(self._clock()),
                "body": body,
            }
            payload = json.dumps(doc, ensure_ascii=False, indent=1)
            path = self._path(toolkit_id)
            tmp = path.with_suffix(".json.tmp")
            with tmp.open("w", encoding="utf-8") as f:
                f.write(payload)
                f.flush()
                os.fsync(f.fileno())
            if self.crash_hook is not None:
                self.crash_hook(toolkit_id)
            os.replace(tmp, path)
        for listener in list(self._write_listeners):
            listener(toolkit_id, version)
        return version

    def update_state(self, toolkit_id: str, fn: Callable[[dict], dict]) -> int:
        """Read-modify-write under the module lock; fn returns the new body."""
        self._check_known(toolkit_id)
        body = fn(self.read_state(toolkit_id).body)
        return self.write_state(toolkit_id, body)

    # -- snapshots ----------------------------------------------------------

    def snapshot_all(self) -> StateSnapshot:
        states = {tid: copy.deepcopy(self.read_state(tid)) for tid in self.known_modules()}
        return StateSnapshot(taken_at=format_ts(self._clock()), states=states)
