"""Shared machinery for built-in instrument modules."""
from __future__ import annotations

from datetime import datetime
from typing import Any, Callable
from zoneinfo import ZoneInfo

from ..bus import EndpointDescriptor, ParamSpec, ProviderDescriptor
from ..errors import UnknownEndpointError, ValidationError
from ..store import StateStore
from ..timeutil import parse_date, utcnow


def check_params(endpoint: EndpointDescriptor, params: dict) -> dict:
    """Validate a parameter document against an endpoint schema.

    Returns the coerced params. Unknown keys are rejected so typos fail
    loudly rather than silently dropping data.
    """
    known = {p.name for p in endpoint.params}
    extra = set(params) - known
    if extra:
        raise ValidationError(f"unknown parameters: {sorted(extra)}")
    out: dict[str, Any] = {}
    for spec in endpoint.params:
        if spec.name not in params or params[spec.name] is None:
            if spec.required:
                raise ValidationError(f"missing required parameter: {spec.name}")
            continue
        out[spec.name] = _coerce(spec, params[spec.name])
    return out


def _coerce(spec: ParamSpec, value: Any) -> Any:
    if spec.type in ("number", "duration", "rating"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"parameter {spec.name} must be a number, got {value!r}")
        return value
    if spec.type == "boolean":
        if not isinstance(value, bool):
            raise ValidationError(f"parameter {spec.name} must be a boolean, got {value!r}")
        return value
    if spec.type == "text":
        if not isinstance(value, str):
            raise ValidationError(f"parameter {spec.name} must be text, got {value!r}")
        return value
    if spec.type == "date":
        if not isinstance(value, str):
            raise ValidationError(f"parameter {spec.name} must be YYYY-MM-DD, got {value!r}")
        try:
            parse_date(value)
        except ValueError:
            raise ValidationError(f"parameter {spec.name} is not a valid date: {value!r}")
        return value
    if spec.type == "timestamp":
        if not isinstance(value, str):
            raise ValidationError(f"parameter {spec.name} must be RFC 3339, got {value!r}")
        return value
    raise ValidationError(f"parameter {spec.name} has unsupported type {spec.type!r}")


class Instrument:
    """Base class: binds a descriptor to the state store and dispatches
    endpoint calls to ``op_<endpoint>`` methods after schema validation."""

    descriptor: ProviderDescriptor

    def __init__(self, store: StateStore, tz: ZoneInfo, clock: Callable[[], datetime] = utcnow):
        self.store = store
        self.tz = tz
        self.clock = clock
        store.ensure_module(self.descriptor.toolkit_id)

    # -- state access (own module only) --------------------------------------

    def _body(self) -> dict:
        return self.store.read_state(self.descriptor.toolkit_id).body

    def _write(self, body: dict) -> int:
        return self.store.write_state(self.descriptor.toolkit_id, body)

    # -- provider contract ----------------------------------------------------

    def summary_lines(self, as_of: datetime) -> list[str] | None:
        raise NotImplementedError

    def execute(self, endpoint: str, params: dict) -> dict:
        desc = next((e for e in self.descriptor.endpoints if e.name == endpoint), None)
        if desc is None:
            raise UnknownEndpointError(self.descriptor.toolkit_id, endpoint)
        handler = getattr(self, f"op_{endpoint}")
        return handler(**check_params(desc, params))
