"""Calendar module: upcoming = remaining events today plus tomorrow."""
from __future__ import annotations

from datetime import datetime, timedelta

from ..bus import EndpointDescriptor, ParamSpec, ProviderDescriptor
from ..errors import ValidationError
from ..timeutil import parse_ts, local_date
from .base import Instrument

DESCRIPTOR = ProviderDescriptor(
    toolkit_id="calendar",
    display_name="Calendar",
    keywords=frozenset({
        "calendar", "schedule", "scheduled", "meeting", "meetings", "event",
        "events", "appointment", "appointments", "agenda", "tomorrow",
        "afternoon", "evening", "plan", "week", "upcoming", "busy",
    }),
    endpoints=(
        EndpointDescriptor(
            "add_event",
            (
                ParamSpec("title", "text", True),
                ParamSpec("start", "timestamp", True),
                ParamSpec("end", "timestamp", True),
                ParamSpec("location", "text", False),
            ),
            "Add a calendar event.",
        ),
    ),
)


class CalendarInstrument(Instrument):
    descriptor = DESCRIPTOR

    def op_add_event(self, title: str, start: str, end: str, location: str | None = None) -> dict:
        if not title:
            raise ValidationError("title must be non-empty")
        if parse_ts(start) >= parse_ts(end):
            raise ValidationError("event start must precede end")
        body = self._body()
        events = [*body.get("events", []), {
            "title": title, "start": start, "end": end, "location": location or "",
        }]
        version = self._write({**body, "events": events})
        return {"count": len(events), "version": version}

    def summary_lines(self, as_of: datetime) -> list[str] | None:
        today = as_of.astimezone(self.tz).date()
        tomorrow = today + timedelta(days=1)
        upcoming = []
        for e in self._body().get("events", []):
            day = local_date(e["start"], self.tz)
            if day == today and parse_ts(e["end"]) >= as_of:
                upcoming.append(("Today", e))
            elif day == tomorrow:
                upcoming.append(("Tomorrow", e))
        if not upcoming:
            return None
        upcoming.sort(key=lambda pair: parse_ts(pair[1]["start"]))
        lines = []
        for day_word, e in upcoming:
            start = parse_ts(e["start"]).astimezone(self.tz).strftime("%H:%M")
            end = parse_ts(e["end"]).astimezone(self.tz).strftime("%H:%M")
            where = f" @ {e['location']}" if e.get("location") else ""
            lines.append(f"{day_word} {start}-{end}: {e['title']}{where}")
        return lines
