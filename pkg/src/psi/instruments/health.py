"""Health module: food, activity, and weight logging with daily totals."""
from __future__ import annotations

from datetime import datetime

from ..bus import EndpointDescriptor, ParamSpec, ProviderDescriptor
from ..errors import ValidationError
from ..timeutil import fmt_num, format_ts, same_local_day
from .base import Instrument

DESCRIPTOR = ProviderDescriptor(
    toolkit_id="health",
    display_name="Health",
    keywords=frozenset({
        "health", "food", "meal", "meals", "eat", "ate", "eaten", "calorie",
        "calories", "cal", "protein", "gym", "workout", "exercise", "exercising",
        "activity", "run", "ran", "walk", "weight", "intake", "lunch", "dinner",
        "breakfast", "snack", "burned",
    }),
    endpoints=(
        EndpointDescriptor(
            "log_food",
            (
                ParamSpec("calories", "number", True, "kcal"),
                ParamSpec("protein_g", "number", False, "g"),
                ParamSpec("note", "text", False),
            ),
            "Record a meal with calories and optional protein grams.",
        ),
        EndpointDescriptor(
            "log_activity",
            (
                ParamSpec("minutes", "duration", True, "min"),
                ParamSpec("calories_burned", "number", False, "kcal"),
                ParamSpec("note", "text", False),
            ),
            "Record a physical activity session.",
        ),
        EndpointDescriptor(
            "log_weight",
            (ParamSpec("weight_kg", "number", True, "kg"),),
            "Record a body-weight measurement.",
        ),
    ),
)


class HealthInstrument(Instrument):
    descriptor = DESCRIPTOR

    def _append(self, entry: dict) -> dict:
        body = self._body()
        entries = list(body.get("entries", []))
        entry["id"] = len(entries) + 1
        entry["at"] = format_ts(self.clock())
        entries.append(entry)
        version = self._write({**body, "entries": entries})
        return {"entry_id": entry["id"], "version": version}

    def op_log_food(self, calories: float, protein_g: float | None = None, note: str | None = None) -> dict:
        if calories <= 0:
            raise ValidationError("calories must be positive")
        if protein_g is not None and protein_g < 0:
            raise ValidationError("protein_g must be non-negative")
        return self._append({
            "kind": "food",
            "calories": calories,
            "protein_g": protein_g or 0,
            "note": note or "",
        })

    def op_log_activity(self, minutes: float, calories_burned: float | None = None, note: str | None = None) -> dict:
        if minutes <= 0:
            raise ValidationError("minutes must be positive")
        if calories_burned is not None and calories_burned < 0:
            raise ValidationError("calories_burned must be non-negative")
        return self._append({
            "kind": "activity",
            "minutes": minutes,
            "calories_burned": calories_burned or 0,
            "note": note or "",
        })

    def op_log_weight(self, weight_kg: float) -> dict:
        if weight_kg <= 0:
            raise ValidationError("weight_kg must be positive")
        return self._append({"kind": "weight", "weight_kg": weight_kg})

    def summary_lines(self, as_of: datetime) -> list[str] | None:
        today = [
            e for e in self._body().get("entries", [])
            if same_local_day(e["at"], as_of, self.tz)
        ]
        if not today:
            return None
        lines: list[str] = []
        food = [e for e in today if e["kind"] == "food"]
        if food:
            cal = sum(e["calories"] for e in food)
            protein = sum(e.get("protein_g") or 0 for e in food)
            lines.append(f"Today: {fmt_num(cal)} cal, {fmt_num(protein)}g protein")
        activity = [e for e in today if e["kind"] == "activity"]
        if activity:
            minutes = sum(e["minutes"] for e in activity)
            burned = sum(e.get("calories_burned") or 0 for e in activity)
            lines.append(f"Gym: {fmt_num(minutes)} min, {fmt_num(burned)} cal burned")
        weights = [e for e in today if e["kind"] == "weight"]
        if weights:
            lines.append(f"Weight: {fmt_num(weights[-1]['weight_kg'])} kg")
        return lines or None
