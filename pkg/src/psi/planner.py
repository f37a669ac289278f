"""Deterministic planner: the test backend standing in for a remote LLM.

Selects modules by keyword overlap between the query and each visible
provider's relevance keywords, and parses write-back intents with
per-endpoint pattern rules. Dates resolve against the session clock, so
identical (query, state, clock) always yields the identical plan.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from zoneinfo import ZoneInfo

from .bus import Provider

LOG_VERBS = {
    "log", "track", "record", "add", "journal", "note", "write", "pin",
    "slept", "drank", "took", "spent", "read",
}
MEAL_WORDS = {"lunch", "dinner", "breakfast", "snack", "meal", "food"}
ACTIVITY_WORDS = {"run", "walk", "workout", "gym", "ride", "swim", "jog", "exercise", "session"}
DONE_WORDS = {"done", "yes", "complete", "completed", "finished"}
FREE_TEXT_FIELDS = {"name", "note", "text", "item", "title", "habit", "medication", "label", "book", "word"}
WEEKDAYS = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class PlannedCall:
    toolkit_id: str
    endpoint: str
    params: dict


@dataclass
class Plan:
    modules_used: set[str] = field(default_factory=set)
    calls: list[PlannedCall] = field(default_factory=list)
    reply: str = ""


# -- date phrases ----------------------------------------------------------------


def _next_weekday(today: date, target: int, skip_current_week: bool) -> date:
    ahead = (target - today.weekday()) % 7
    if skip_current_week:
        ahead = ahead + 7 if ahead == 0 else ahead + 7
    return today + timedelta(days=ahead)


def resolve_date_phrase(query_lower: str, today: date) -> dict:
    """Recognized grammar: today/tonight/this morning/this evening,
    tomorrow, this <weekday>, next <weekday>, next week, last week."""
    if "next week" in query_lower:
        monday = today + timedelta(days=(7 - today.weekday()))
        return {"range": (monday, monday + timedelta(days=4))}
    if "last week" in query_lower:
        monday = today - timedelta(days=today.weekday() + 7)
        return {"range": (monday, monday + timedelta(days=6))}
    if "tomorrow" in query_lower:
        return {"date": today + timedelta(days=1)}
    m = re.search(r"\b(this|next|on)\s+(" + "|".join(WEEKDAYS) + r")\b", query_lower)
    if m:
        target = WEEKDAYS.index(m.group(2))
        return {"date": _next_weekday(today, target, m.group(1) == "next")}
    if re.search(r"\btoday\b|\btonight\b|\bthis morning\b|\bthis evening\b", query_lower):
        return {"date": today}
    return {}


_DATE_PHRASE_RE = re.compile(
    r"\b(?:next week|last week|tomorrow|today|tonight|this morning|this evening|"
    r"(?:this|next|on)\s+(?:" + "|".join(WEEKDAYS) + r"))\b",
    re.IGNORECASE,
)


def _strip_date_phrases(text: str) -> str:
    return _DATE_PHRASE_RE.sub("", text)


# -- intent rules ------------------------------------------------------------------


def _numbers(query: str) -> list[float]:
    return [float(n) for n in _NUMBER_RE.findall(query)]


def _after_colon(query: str) -> str | None:
    if ":" not in query:
        return None
    return query.split(":", 1)[1].strip()


def _text_note(segment: str) -> str:
    """Comma-separated segments that carry no digits, joined back."""
    parts = [p.strip() for p in segment.split(",")]
    kept = [p for p in parts if p and not any(ch.isdigit() for ch in p)]
    return ", ".join(kept).rstrip(".").strip()


class Planner:
    def __init__(self, tz: ZoneInfo):
        self.tz = tz

    def plan(self, query: str, visible: list[Provider], clock: datetime) -> Plan:
        ql = query.lower()
        tokens = set(tokenize(query))
        today = clock.astimezone(self.tz).date()

        by_id = {p.descriptor.toolkit_id: p for p in visible}
        selected: set[str] = set()
        hits: dict[str, int] = {}
        for p in visible:
            desc = p.descriptor
            words = set(desc.keywords) | {desc.toolkit_id}
            n = len(words & tokens)
            if n:
                selected.add(desc.toolkit_id)
                hits[desc.toolkit_id] = n

        plan = Plan(modules_used=set(selected))
        call, clarification = self._parse_intent(query, ql, tokens, by_id, selected, hits, today)
        if clarification:
            plan.reply = clarification
            return plan
        if call is not None:
            plan.calls.append(call)
            plan.modules_used.add(call.toolkit_id)

        lines: list[str] = []
        for c in plan.calls:
            lines.append(f"Executed {c.toolkit_id}.{c.endpoint}.")
        for p in visible:
            tid = p.descriptor.toolkit_id
            if tid in plan.modules_used:
                try:
                    block = p.summary_lines(clock)
                except Exception:
                    block = None
                if block:
                    lines.append(f"[{p.descriptor.display_name}]")
                    lines.extend(block)
        if not lines:
            lines.append("No matching personal context.")
        plan.reply = "\n".join(lines)
        return plan

    # The first matching rule wins; every bundled action task maps to
    # exactly one endpoint call.
    def _parse_intent(self, query, ql, tokens, by_id, selected, hits, today):
        if query.strip().endswith("?"):
            # Questions are informational; never execute write-backs.
            return None, None
        has_verb = bool(tokens & LOG_VERBS)

        if "parking" in by_id and ("parking" in tokens or "park" in tokens):
            got = resolve_date_phrase(ql, today)
            if "restore" in tokens:
                if "date" not in got:
                    return None, "Please provide a date to restore parking for."
                return PlannedCall("parking", "restore_date", {"date": got["date"].isoformat()}), None
            if "skip" in tokens or re.search(r"\bno parking\b", ql):
                if "range" in got:
                    start, end = got["range"]
                    return PlannedCall("parking", "skip_range", {
                        "start": start.isoformat(), "end": end.isoformat(),
                    }), None
                if "date" not in got:
                    return None, "Please provide a date to skip parking on."
                return PlannedCall("parking", "skip_date", {"date": got["date"].isoformat()}), None
            if tokens & {"purchase", "buy", "book", "reserve"}:
                d = got.get("date", today)
                return PlannedCall("parking", "purchase", {"date": d.isoformat()}), None

        if "health" in by_id and has_verb:
            if "weight" in tokens:
                nums = _numbers(query)
                if not nums:
                    return None, "Please provide the weight in kg."
                return PlannedCall("health", "log_weight", {"weight_kg": nums[0]}), None
            minutes = re.search(r"(\d+(?:\.\d+)?)[ -]?(?:minute|min)s?\b", ql)
            if minutes and tokens & ACTIVITY_WORDS:
                params = {"minutes": float(minutes.group(1))}
                burned = re.search(r"(\d+(?:\.\d+)?)\s*cal(?:orie)?s?\b", ql)
                if burned:
                    params["calories_burned"] = float(burned.group(1))
                note = sorted(tokens & ACTIVITY_WORDS)[0]
                params["note"] = note
                return PlannedCall("health", "log_activity", params), None
            if tokens & MEAL_WORDS:
                cal = re.search(r"(\d+(?:\.\d+)?)\s*cal(?:orie)?s?\b", ql)
                if not cal:
                    return None, "Please provide the calories for this meal."
                params = {"calories": float(cal.group(1))}
                protein = re.search(r"(\d+(?:\.\d+)?)\s*g(?:rams)?\s*(?:of\s+)?protein\b", ql)
                if protein:
                    params["protein_g"] = float(protein.group(1))
                rest = _after_colon(query)
                if rest:
                    note = _text_note(rest)
                    if note:
                        params["note"] = note
                return PlannedCall("health", "log_food", params), None

        if "diary" in by_id and "diary" in tokens and has_verb:
            rest = _after_colon(query)
            if not rest:
                return None, "Please provide the diary text after a colon."
            return PlannedCall("diary", "add_entry", {"text": rest.rstrip(".").strip()}), None

        # Generic dynamic-module logging: strongest keyword match wins.
        dynamic_hits = [
            (tid, hits[tid]) for tid in selected
            if by_id[tid].descriptor.summary_source == "manifest"
        ]
        if dynamic_hits and has_verb:
            dynamic_hits.sort(key=lambda pair: (-pair[1], pair[0]))
            tid = dynamic_hits[0][0]
            provider = by_id[tid]
            manifest = provider.manifest
            if manifest.log_endpoint_name:
                payload, clarification = self._dynamic_payload(query, ql, tokens, manifest)
                if clarification:
                    return None, clarification
                return PlannedCall(tid, manifest.log_endpoint_name, payload), None

        return None, None

    def _dynamic_payload(self, query, ql, tokens, manifest):
        from .dynamic import NUMERIC_TYPES  # local import to avoid a cycle

        stripped = _strip_date_phrases(query)
        numbers = _numbers(stripped)
        # Drop rating denominators ("4 out of 5" keeps only the 4).
        out_of = re.search(r"out of (\d+)", ql)
        if out_of and len(numbers) >= 2:
            numbers = numbers[:-1]
        payload: dict = {}
        for f in manifest.fields:
            if f.type in NUMERIC_TYPES:
                if numbers:
                    payload[f.name] = numbers.pop(0)
                elif f.required:
                    return None, f"Please provide a value for '{f.name}'."
            elif f.type == "boolean":
                if tokens & DONE_WORDS:
                    payload[f.name] = True
                elif f.required:
                    payload[f.name] = False
            elif f.type == "text":
                value = self._text_value(query, ql, f.name)
                if value:
                    value = self._strip_done_words(value) or value
                    payload[f.name] = value
                elif f.required:
                    return None, f"Please provide a value for '{f.name}'."
        return payload, None

    def _text_value(self, query: str, ql: str, name: str) -> str | None:
        m = re.search(rf"\b{re.escape(name)}[:\s]+([a-z]+)", ql)
        if m and m.group(1) not in WEEKDAYS:
            return m.group(1)
        rest = _after_colon(query)
        if rest:
            value = _text_note(_strip_date_phrases(rest))
            if value:
                return value
        if name in FREE_TEXT_FIELDS:
            m = re.search(r"\b(?:log|track|record|add|pin|took|note)\b\s+(.*)", query, re.IGNORECASE)
            if m:
                value = _text_note(_strip_date_phrases(m.group(1)))
                if value:
                    return value
        return None

    @staticmethod
    def _strip_done_words(value: str) -> str:
        words = value.split()
        while words and words[-1].lower() in DONE_WORDS:
            words.pop()
        return " ".join(words)
