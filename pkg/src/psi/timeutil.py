"""Clock and calendar-day helpers.

All timestamps are RFC 3339 strings on the wire and timezone-aware
datetimes in memory. "Today" means the local calendar day of the
configured timezone (default UTC).
"""
from __future__ import annotations

from datetime import date, datetime, timedelta, timezone
from zoneinfo import ZoneInfo

DEFAULT_TZ = "UTC"


def get_tz(name: str | None) -> ZoneInfo:
    return ZoneInfo(name or DEFAULT_TZ)


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


def parse_ts(value: str | datetime) -> datetime:
    """Parse an RFC 3339 timestamp; naive values are taken as UTC."""
    if isinstance(value, datetime):
        dt = value
    else:
        dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


def format_ts(dt: datetime) -> str:
    return dt.isoformat()


def local_date(ts: str | datetime, tz: ZoneInfo) -> date:
    return parse_ts(ts).astimezone(tz).date()


def same_local_day(ts: str | datetime, as_of: datetime, tz: ZoneInfo) -> bool:
    return local_date(ts, tz) == as_of.astimezone(tz).date()


def parse_date(value: str) -> date:
    """Strict YYYY-MM-DD parse."""
    return date.fromisoformat(value)


def date_range(start: date, end: date) -> list[date]:
    """Inclusive range of calendar dates."""
    if end < start:
        return []
    return [start + timedelta(days=i) for i in range((end - start).days + 1)]


def fmt_num(value: float) -> str:
    """Render integral floats without a trailing .0 (1030.0 -> "1030")."""
    if isinstance(value, bool):
        return str(value)
    if float(value) == int(value):
        return str(int(value))
    return f"{value:g}"
