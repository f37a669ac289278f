"""BoBo: behavioral sensing timeline (motion, steps, heart rate, sleep,
noise, location). Sensor ingestion is fixture-driven in this runtime."""
from __future__ import annotations

from datetime import datetime

from ..bus import EndpointDescriptor, ParamSpec, ProviderDescriptor
from ..errors import ValidationError
from ..timeutil import fmt_num, parse_ts, same_local_day
from .base import Instrument

KIND_UNITS = {
    "motion": "min",
    "steps": "steps",
    "heart_rate": "bpm",
    "sleep": "hours",
    "noise": "dB",
    "location": "latlon",
}

DESCRIPTOR = ProviderDescriptor(
    toolkit_id="bobo",
    display_name="BoBo",
    keywords=frozenset({
        "bobo", "timeline", "sensing", "sensed", "steps", "heart", "bpm",
        "motion", "noise", "noisy", "location", "stress", "signals", "slept",
        "tired", "drained", "day",
    }),
    endpoints=(
        EndpointDescriptor(
            "ingest_events",
            (ParamSpec("events", "events", True),),
            "Append a batch of timeline events.",
        ),
    ),
)


def _validate_event(event: dict) -> dict:
    for key in ("start", "end", "kind", "value"):
        if key not in event:
            raise ValidationError(f"timeline event missing field: {key}")
    kind = event["kind"]
    if kind not in KIND_UNITS:
        raise ValidationError(f"unknown event kind: {kind!r}")
    unit = event.get("unit", KIND_UNITS[kind])
    if unit != KIND_UNITS[kind]:
        raise ValidationError(f"unit {unit!r} does not match kind {kind!r}")
    if parse_ts(event["start"]) > parse_ts(event["end"]):
        raise ValidationError("event start is after end")
    value = event["value"]
    if kind == "location":
        ok = isinstance(value, (list, tuple)) and len(value) == 2
    else:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    if not ok:
        raise ValidationError(f"value {value!r} invalid for kind {kind!r}")
    return {
        "start": event["start"],
        "end": event["end"],
        "kind": kind,
        "value": list(value) if kind == "location" else value,
        "unit": unit,
        "label": event.get("label", ""),
    }


class BoboInstrument(Instrument):
    descriptor = DESCRIPTOR

    def execute(self, endpoint: str, params: dict) -> dict:
        # ingest_events carries a nested list, which the flat param
        # checker does not model; validate per-event here.
        if endpoint == "ingest_events":
            events = params.get("events")
            if not isinstance(events, list):
                raise ValidationError("events must be a list")
            return self.op_ingest_events(events)
        return super().execute(endpoint, params)

    def op_ingest_events(self, events: list[dict]) -> dict:
        validated = [_validate_event(e) for e in events]
        body = self._body()
        all_events = [*body.get("events", []), *validated]
        version = self._write({**body, "events": all_events})
        return {"ingested": len(validated), "version": version}

    def summary_lines(self, as_of: datetime) -> list[str] | None:
        events = [
            e for e in self._body().get("events", [])
            if same_local_day(e["start"], as_of, self.tz)
        ]
        if not events:
            return None
        events.sort(key=lambda e: parse_ts(e["start"]))
        lines = []
        for e in events:
            start = parse_ts(e["start"]).astimezone(self.tz).strftime("%H:%M")
            end = parse_ts(e["end"]).astimezone(self.tz).strftime("%H:%M")
            if e["kind"] == "location":
                value = f"{e['value'][0]:.4f},{e['value'][1]:.4f}"
            else:
                value = f"{fmt_num(e['value'])} {e['unit']}"
            label = f" ({e['label']})" if e.get("label") else ""
            lines.append(f"{start}-{end} {e['kind']}: {value}{label}")
        return lines
