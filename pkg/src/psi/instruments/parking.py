"""Parking module: weekday reservation schedule, skip dates, and a
sandboxed purchase stub standing in for real web automation."""
from __future__ import annotations

from datetime import datetime, time, timedelta

from ..bus import EndpointDescriptor, ParamSpec, ProviderDescriptor
from ..errors import ValidationError
from ..timeutil import date_range, fmt_num, parse_date, parse_ts
from .base import Instrument

WEEKDAY_KEYS = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"]
DEFAULT_RESERVE_TIME = "06:45"
SESSION_END = time(18, 0)

DESCRIPTOR = ProviderDescriptor(
    toolkit_id="parking",
    display_name="Parking",
    keywords=frozenset({
        "parking", "park", "parkmobile", "zone", "spot", "skip", "reservation",
        "garage", "vehicle",
    }),
    endpoints=(
        EndpointDescriptor(
            "skip_date",
            (ParamSpec("date", "date", True),),
            "Skip the automatic reservation on one date.",
        ),
        EndpointDescriptor(
            "restore_date",
            (ParamSpec("date", "date", True),),
            "Undo a skip so the reservation fires again.",
        ),
        EndpointDescriptor(
            "skip_range",
            (ParamSpec("start", "date", True), ParamSpec("end", "date", True)),
            "Skip every date in an inclusive range.",
        ),
        EndpointDescriptor(
            "purchase",
            (ParamSpec("date", "date", True),),
            "Simulated purchase for one date (sandbox stub).",
        ),
    ),
)


class ParkingInstrument(Instrument):
    descriptor = DESCRIPTOR

    def _today(self):
        return self.clock().astimezone(self.tz).date()

    def _require_not_past(self, d) -> None:
        if d < self._today():
            raise ValidationError(f"date {d.isoformat()} is in the past")

    def op_skip_date(self, date: str) -> dict:
        d = parse_date(date)
        self._require_not_past(d)
        body = self._body()
        skips = list(body.get("skip_dates", []))
        if date in skips:
            return {"changed": False, "no_op": True, "skip_dates": sorted(skips)}
        skips.append(date)
        version = self._write({**body, "skip_dates": sorted(skips)})
        return {"changed": True, "skip_dates": sorted(skips), "version": version}

    def op_restore_date(self, date: str) -> dict:
        parse_date(date)
        body = self._body()
        skips = list(body.get("skip_dates", []))
        if date not in skips:
            return {"changed": False, "no_op": True, "skip_dates": sorted(skips)}
        skips.remove(date)
        version = self._write({**body, "skip_dates": sorted(skips)})
        return {"changed": True, "skip_dates": sorted(skips), "version": version}

    def op_skip_range(self, start: str, end: str) -> dict:
        d0, d1 = parse_date(start), parse_date(end)
        if d1 < d0:
            raise ValidationError("end date precedes start date")
        self._require_not_past(d0)
        body = self._body()
        skips = set(body.get("skip_dates", []))
        added = [d.isoformat() for d in date_range(d0, d1) if d.isoformat() not in skips]
        if not added:
            return {"changed": False, "no_op": True, "skip_dates": sorted(skips)}
        skips.update(added)
        version = self._write({**body, "skip_dates": sorted(skips)})
        return {"changed": True, "added": added, "skip_dates": sorted(skips), "version": version}

    def op_purchase(self, date: str) -> dict:
        d = parse_date(date)
        body = self._body()
        if date in body.get("skip_dates", []):
            raise ValidationError(f"date {date} is skipped; purchase refused")
        if any(p["date"] == date for p in body.get("purchases", [])):
            raise ValidationError(f"purchase already recorded for {date}")
        purchase = {
            "date": date,
            "zone": body.get("zone", ""),
            "amount": body.get("price", 2.5),
            "status": "simulated",
        }
        purchases = [*body.get("purchases", []), purchase]
        new_body = {**body, "purchases": purchases}
        if d == self._today():
            expires = datetime.combine(d, SESSION_END, tzinfo=self.tz)
            new_body["active_session"] = {
                "started_at": self.clock().isoformat(),
                "expires_at": expires.isoformat(),
            }
        version = self._write(new_body)
        return {"changed": True, "purchase": purchase, "version": version}

    # -- summary ---------------------------------------------------------------

    def _next_purchase_date(self, body: dict, start):
        schedule = body.get("schedule") or {}
        weekdays = set(schedule.get("weekdays", []))
        if not weekdays:
            return None
        skips = set(body.get("skip_dates", []))
        purchased = {p["date"] for p in body.get("purchases", [])}
        d = start
        for _ in range(14):
            key = WEEKDAY_KEYS[d.weekday()]
            if key in weekdays and d.isoformat() not in skips and d.isoformat() not in purchased:
                return d
            d += timedelta(days=1)
        return None

    def summary_lines(self, as_of: datetime) -> list[str] | None:
        body = self._body()
        if not body:
            return None
        today = as_of.astimezone(self.tz).date()
        lines: list[str] = []
        nxt = self._next_purchase_date(body, today)
        if nxt is not None:
            at = (body.get("schedule") or {}).get("reserve_time", DEFAULT_RESERVE_TIME)
            zone = body.get("zone", "")
            suffix = f" (zone {zone})" if zone else ""
            lines.append(f"Next purchase: {nxt.isoformat()} at {at}{suffix}")
        skips = set(body.get("skip_dates", []))
        if today.isoformat() in skips:
            lines.append(f"Today ({today.isoformat()}): skipped")
        tomorrow = today + timedelta(days=1)
        if tomorrow.isoformat() in skips:
            lines.append(f"Tomorrow ({tomorrow.isoformat()}): skipped")
        session = body.get("active_session")
        if session:
            state = "expired" if parse_ts(session["expires_at"]) < as_of else "expires"
            lines.append(f"Active session: {state} {session['expires_at']}")
        return lines or None
