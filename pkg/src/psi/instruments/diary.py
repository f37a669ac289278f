"""Diary module: free-text daily entries."""
from __future__ import annotations

from datetime import datetime

from ..bus import EndpointDescriptor, ParamSpec, ProviderDescriptor
from ..errors import ValidationError
from ..timeutil import format_ts, same_local_day
from .base import Instrument

DESCRIPTOR = ProviderDescriptor(
    toolkit_id="diary",
    display_name="Diary",
    keywords=frozenset({"diary", "entry", "entries", "wrote", "journaled"}),
    endpoints=(
        EndpointDescriptor(
            "add_entry",
            (ParamSpec("text", "text", True),),
            "Append a diary entry.",
        ),
    ),
)


class DiaryInstrument(Instrument):
    descriptor = DESCRIPTOR

    def op_add_entry(self, text: str) -> dict:
        if not text.strip():
            raise ValidationError("diary text must be non-empty")
        body = self._body()
        entries = [*body.get("entries", []), {"at": format_ts(self.clock()), "text": text}]
        version = self._write({**body, "entries": entries})
        return {"entry_id": len(entries), "version": version}

    def summary_lines(self, as_of: datetime) -> list[str] | None:
        today = [
            e for e in self._body().get("entries", [])
            if same_local_day(e["at"], as_of, self.tz)
        ]
        if not today:
            return None
        return [
            f"Entries today: {len(today)}",
            f"Latest: {today[-1]['text']}",
        ]
