"""Manifest-driven dynamic modules.

A manifest is a declarative description of a self-tracking module: its
fields, per-field daily aggregation, and one generic log endpoint. The
registry validates a manifest, persists it under
``<data_dir>/manifests/``, and registers a generic provider on the bus,
so a new module participates in context assembly, chat actions, and the
GUI without touching any existing module.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable
from zoneinfo import ZoneInfo

from .bus import ContextBus, EndpointDescriptor, ParamSpec, ProviderDescriptor
from .errors import UnknownEndpointError, ValidationError
from .store import StateStore
from .timeutil import fmt_num, format_ts, same_local_day, utcnow

_ID_RE = re.compile(r"^[a-z0-9_]+$")

FIELD_TYPES = {"number", "duration", "text", "rating", "boolean"}
NUMERIC_TYPES = {"number", "duration", "rating"}
AGGREGATES = {"sum", "count", "last", "mean"}
SUMMARY_KINDS = {"fields", "dashboard"}


@dataclass(frozen=True)
class ManifestField:
    name: str
    type: str
    unit: str = ""
    required: bool = True
    aggregate: str = "last"


@dataclass(frozen=True)
class DynamicModuleManifest:
    toolkit_id: str
    display_name: str
    keywords: frozenset[str]
    fields: tuple[ManifestField, ...]
    log_endpoint_name: str = "log"
    summary_template: str | None = None
    summary_kind: str = "fields"

    @classmethod
    def from_dict(cls, raw: dict) -> "DynamicModuleManifest":
        fields = tuple(
            ManifestField(
                name=f.get("name", ""),
                type=f.get("type", ""),
                unit=f.get("unit", ""),
                required=bool(f.get("required", True)),
                aggregate=f.get("aggregate", "last"),
            )
            for f in raw.get("fields", [])
        )
        return cls(
            toolkit_id=raw.get("toolkit_id", ""),
            display_name=raw.get("display_name", ""),
            keywords=frozenset(raw.get("keywords", [])),
            fields=fields,
            log_endpoint_name=raw.get("log_endpoint_name", "log"),
            summary_template=raw.get("summary_template"),
            summary_kind=raw.get("summary_kind", "fields"),
        )

    def to_dict(self) -> dict:
        return {
            "toolkit_id": self.toolkit_id,
            "display_name": self.display_name,
            "keywords": sorted(self.keywords),
            "fields": [
                {
                    "name": f.name,
                    "type": f.type,
                    "unit": f.unit,
                    "required": f.required,
                    "aggregate": f.aggregate,
                }
                for f in self.fields
            ],
            "log_endpoint_name": self.log_endpoint_name,
            "summary_template": self.summary_template,
            "summary_kind": self.summary_kind,
        }


def validate_manifest(manifest: DynamicModuleManifest, bus: ContextBus | None = None) -> list[str]:
    """All invariant violations, empty when the manifest is registrable."""
    violations: list[str] = []
    if not _ID_RE.match(manifest.toolkit_id or ""):
        violations.append(f"toolkit_id must match [a-z0-9_]+: {manifest.toolkit_id!r}")
    if not manifest.display_name:
        violations.append("display_name must be non-empty")
    if not manifest.keywords:
        violations.append("keywords must be non-empty")
    if not manifest.fields:
        violations.append("manifest declares no fields")
    names = [f.name for f in manifest.fields]
    if len(names) != len(set(names)):
        violations.append("field names must be unique")
    for f in manifest.fields:
        if not f.name:
            violations.append("field with empty name")
        if f.type not in FIELD_TYPES:
            violations.append(f"field {f.name}: unknown type {f.type!r}")
        elif f.type in NUMERIC_TYPES and f.aggregate not in AGGREGATES:
            violations.append(f"field {f.name}: numeric field needs aggregate in {sorted(AGGREGATES)}")
    if manifest.summary_kind not in SUMMARY_KINDS:
        violations.append(f"unknown summary_kind {manifest.summary_kind!r}")
    if manifest.log_endpoint_name and not _ID_RE.match(manifest.log_endpoint_name):
        violations.append(f"log_endpoint_name must match [a-z0-9_]+: {manifest.log_endpoint_name!r}")
    if bus is not None and manifest.toolkit_id and bus.has_provider(manifest.toolkit_id):
        violations.append(f"toolkit_id collides with a registered module: {manifest.toolkit_id!r}")
    return violations


_PARAM_TYPE = {"number": "number", "duration": "duration", "text": "text",
               "rating": "rating", "boolean": "boolean"}


class DynamicProvider:
    """Generic provider backed by a manifest: one log endpoint, daily
    per-field aggregation in the summary."""

    def __init__(
        self,
        manifest: DynamicModuleManifest,
        store: StateStore,
        tz: ZoneInfo,
        clock: Callable[[], datetime] = utcnow,
        bus: ContextBus | None = None,
    ):
        self.manifest = manifest
        self.store = store
        self.tz = tz
        self.clock = clock
        self.bus = bus
        endpoints: tuple[EndpointDescriptor, ...] = ()
        if manifest.log_endpoint_name:
            params = tuple(
                ParamSpec(f.name, _PARAM_TYPE[f.type], f.required, f.unit or None)
                for f in manifest.fields
            )
            endpoints = (EndpointDescriptor(
                manifest.log_endpoint_name, params,
                f"Record a {manifest.display_name} entry.",
            ),)
        self.descriptor = ProviderDescriptor(
            toolkit_id=manifest.toolkit_id,
            display_name=manifest.display_name,
            keywords=manifest.keywords,
            endpoints=endpoints,
            summary_source="manifest",
        )
        store.ensure_module(manifest.toolkit_id)

    # -- logging ---------------------------------------------------------------

    def _check_payload(self, payload: dict) -> dict:
        by_name = {f.name: f for f in self.manifest.fields}
        extra = set(payload) - set(by_name)
        if extra:
            raise ValidationError(f"unknown fields: {sorted(extra)}")
        entry: dict[str, Any] = {}
        for f in self.manifest.fields:
            if f.name not in payload or payload[f.name] is None:
                if f.required:
                    raise ValidationError(f"missing required field: {f.name}")
                continue
            value = payload[f.name]
            if f.type in NUMERIC_TYPES:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ValidationError(f"field {f.name} must be a number, got {value!r}")
            elif f.type == "text":
                if not isinstance(value, str):
                    raise ValidationError(f"field {f.name} must be text, got {value!r}")
            elif f.type == "boolean":
                if not isinstance(value, bool):
                    raise ValidationError(f"field {f.name} must be a boolean, got {value!r}")
            entry[f.name] = value
        return entry

    def execute(self, endpoint: str, params: dict) -> dict:
        if not self.manifest.log_endpoint_name or endpoint != self.manifest.log_endpoint_name:
            raise UnknownEndpointError(self.manifest.toolkit_id, endpoint)
        return self.generic_log(params)

    def generic_log(self, payload: dict) -> dict:
        entry = self._check_payload(payload)
        body = self.store.read_state(self.manifest.toolkit_id).body
        entries = list(body.get("entries", []))
        entry["id"] = len(entries) + 1
        entry["at"] = format_ts(self.clock())
        entries.append(entry)
        version = self.store.write_state(self.manifest.toolkit_id, {**body, "entries": entries})
        return {"entry_id": entry["id"], "version": version}

    # -- summary ------------------------------------------------------------------

    def _aggregate(self, f: ManifestField, entries: list[dict]) -> Any:
        values = [e[f.name] for e in entries if f.name in e]
        if not values:
            return None
        if f.type in NUMERIC_TYPES:
            if f.aggregate == "sum":
                return sum(values)
            if f.aggregate == "count":
                return len(values)
            if f.aggregate == "mean":
                return sum(values) / len(values)
        return values[-1]

    def summary_lines(self, as_of: datetime) -> list[str] | None:
        body = self.store.read_state(self.manifest.toolkit_id).body
        today = [
            e for e in body.get("entries", [])
            if same_local_day(e["at"], as_of, self.tz)
        ]
        lines: list[str] = []
        if self.manifest.summary_kind == "dashboard" and self.bus is not None:
            if not today:
                return None
            count = self.bus.count_active_blocks(as_of, exclude={self.manifest.toolkit_id})
            lines.append(f"Modules reporting today: {count}")
        elif not today:
            return None
        values = {f.name: self._aggregate(f, today) for f in self.manifest.fields}
        if self.manifest.summary_template is not None:
            rendered = {
                name: (fmt_num(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else ("" if v is None else str(v)))
                for name, v in values.items()
            }
            lines.append(self.manifest.summary_template.format(**rendered))
        else:
            for f in self.manifest.fields:
                v = values.get(f.name)
                if v is None:
                    continue
                shown = fmt_num(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else str(v)
                unit = f" {f.unit}" if f.unit else ""
                lines.append(f"{f.name}: {shown}{unit}")
        lines.append(f"Entries today: {len(today)}")
        return lines


class DynamicModuleRegistry:
    """Validates, persists, and registers manifest-driven modules."""

    def __init__(
        self,
        store: StateStore,
        bus: ContextBus,
        data_dir: str | Path,
        tz: ZoneInfo,
        clock: Callable[[], datetime] = utcnow,
    ):
        self.store = store
        self.bus = bus
        self.manifests_dir = Path(data_dir) / "manifests"
        self.tz = tz
        self.clock = clock

    def validate(self, manifest: DynamicModuleManifest | dict) -> list[str]:
        if isinstance(manifest, dict):
            manifest = DynamicModuleManifest.from_dict(manifest)
        return validate_manifest(manifest, self.bus)

    def register(self, manifest: DynamicModuleManifest | dict, persist: bool = True) -> ProviderDescriptor:
        if isinstance(manifest, dict):
            manifest = DynamicModuleManifest.from_dict(manifest)
        violations = validate_manifest(manifest, self.bus)
        if violations:
            raise ValidationError("; ".join(violations))
        provider = DynamicProvider(manifest, self.store, self.tz, self.clock, bus=self.bus)
        self.bus.register(provider)
        if persist:
            self.manifests_dir.mkdir(parents=True, exist_ok=True)
            path = self.manifests_dir / f"{manifest.toolkit_id}.json"
            path.write_text(json.dumps(manifest.to_dict(), indent=1), encoding="utf-8")
        return provider.descriptor

    def load_persisted(self) -> int:
        """Re-register all persisted manifests (bootstrap); returns count."""
        if not self.manifests_dir.is_dir():
            return 0
        count = 0
        for path in sorted(self.manifests_dir.glob("*.json")):
            raw = json.loads(path.read_text(encoding="utf-8"))
            self.register(raw, persist=False)
            count += 1
        return count
