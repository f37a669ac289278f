"""Seed fixtures: deterministic data directories for demos and the
benchmark. Each fixture has a frozen reference clock so golden outputs
are reproducible."""
from __future__ import annotations

import json
import shutil
from importlib import resources
from pathlib import Path

from .runtime import Runtime

POST_PILOT_MANIFESTS = [
    "sleep", "medication", "spending", "mood",
    "hydration", "habit", "reading", "dashboard",
]
PILOT_DYNAMIC_MANIFESTS = ["bookfactory", "fluent"]

FROZEN_CLOCKS = {
    "empty": "2025-11-05T12:00:00+00:00",
    "appendix_d": "2025-11-05T12:00:00+00:00",
    "pilot_week": "2025-11-05T12:00:00+00:00",
}


def load_bundled_manifest(name: str) -> dict:
    path = resources.files("psi.data.manifests") / f"{name}.json"
    return json.loads(path.read_text(encoding="utf-8"))


def bundled_task_file(name: str) -> Path:
    return Path(str(resources.files("psi.data.tasks") / f"{name}.json"))


def _seed_appendix_d(rt: Runtime) -> None:
    rt.store.write_state("health", {"entries": [
        {"id": 1, "kind": "food", "at": "2025-11-05T08:00:00+00:00",
         "calories": 600, "protein_g": 40, "note": "oatmeal with banana"},
        {"id": 2, "kind": "food", "at": "2025-11-05T11:30:00+00:00",
         "calories": 430, "protein_g": 22, "note": "turkey sandwich"},
        {"id": 3, "kind": "activity", "at": "2025-11-05T07:00:00+00:00",
         "minutes": 12, "calories_burned": 65, "note": "gym"},
    ]})


def _seed_pilot_week(rt: Runtime) -> None:
    _seed_appendix_d(rt)
    rt.store.write_state("bobo", {"events": [
        {"start": "2025-11-05T00:00:00+00:00", "end": "2025-11-05T06:30:00+00:00",
         "kind": "sleep", "value": 6.5, "unit": "hours", "label": "short night"},
        {"start": "2025-11-05T07:00:00+00:00", "end": "2025-11-05T07:30:00+00:00",
         "kind": "steps", "value": 3200, "unit": "steps", "label": "morning walk"},
        {"start": "2025-11-05T10:05:00+00:00", "end": "2025-11-05T10:06:00+00:00",
         "kind": "heart_rate", "value": 112, "unit": "bpm", "label": "spike"},
        {"start": "2025-11-05T11:00:00+00:00", "end": "2025-11-05T11:30:00+00:00",
         "kind": "noise", "value": 78, "unit": "dB", "label": "open office"},
    ]})
    rt.store.write_state("calendar", {"events": [
        {"title": "Interview", "start": "2025-11-05T09:00:00+00:00",
         "end": "2025-11-05T10:00:00+00:00", "location": ""},
        {"title": "Standup", "start": "2025-11-05T15:00:00+00:00",
         "end": "2025-11-05T15:30:00+00:00", "location": "Room 2"},
        {"title": "Dentist", "start": "2025-11-06T14:00:00+00:00",
         "end": "2025-11-06T15:00:00+00:00", "location": "Downtown clinic"},
    ]})
    rt.store.write_state("parking", {
        "schedule": {"weekdays": ["mon", "tue", "wed", "thu", "fri"], "reserve_time": "06:45"},
        "zone": "310", "vehicle": "UVA-1", "price": 2.5,
        "skip_dates": ["2025-11-07"],
        "purchases": [
            {"date": "2025-11-03", "zone": "310", "amount": 2.5, "status": "simulated"},
            {"date": "2025-11-04", "zone": "310", "amount": 2.5, "status": "simulated"},
            {"date": "2025-11-05", "zone": "310", "amount": 2.5, "status": "simulated"},
        ],
        "active_session": None,
    })
    rt.store.write_state("diary", {"entries": [
        {"at": "2025-11-04T21:00:00+00:00", "text": "Long interview day."},
        {"at": "2025-11-05T08:10:00+00:00", "text": "Felt focused this morning."},
    ]})
    for name in PILOT_DYNAMIC_MANIFESTS + POST_PILOT_MANIFESTS:
        rt.dynamic.register(load_bundled_manifest(name))
    seed_logs = {
        "hydration": [{"glasses": 2, "id": 1, "at": "2025-11-05T08:30:00+00:00"},
                      {"glasses": 1, "id": 2, "at": "2025-11-05T11:00:00+00:00"}],
        "sleep": [{"hours": 6.5, "quality": "poor", "id": 1, "at": "2025-11-05T06:45:00+00:00"}],
        "medication": [{"name": "vitamin C", "id": 1, "at": "2025-11-05T08:05:00+00:00"}],
        "spending": [{"amount": 8.4, "note": "coffee beans", "id": 1, "at": "2025-11-05T09:15:00+00:00"}],
        "mood": [{"rating": 3, "id": 1, "at": "2025-11-05T09:00:00+00:00"}],
        "habit": [{"name": "meditation", "done": True, "id": 1, "at": "2025-11-05T07:45:00+00:00"}],
        "reading": [{"pages": 10, "id": 1, "at": "2025-11-05T07:50:00+00:00"}],
        "fluent": [{"word": "saudade", "language": "portuguese", "id": 1, "at": "2025-11-05T10:30:00+00:00"}],
        "bookfactory": [{"title": "Pachinko", "pages": 12, "id": 1, "at": "2025-11-05T11:40:00+00:00"}],
    }
    for toolkit_id, entries in seed_logs.items():
        rt.store.write_state(toolkit_id, {"entries": entries})


SEEDERS = {
    "empty": lambda rt: None,
    "appendix_d": _seed_appendix_d,
    "pilot_week": _seed_pilot_week,
}


def seed(data_dir: str | Path, fixture: str, tz: str | None = None) -> Runtime:
    """Wipe data_dir and seed the named fixture; returns a runtime frozen
    at the fixture clock."""
    if fixture not in SEEDERS:
        raise KeyError(f"unknown fixture: {fixture!r} (have {sorted(SEEDERS)})")
    data_dir = Path(data_dir)
    if data_dir.exists():
        shutil.rmtree(data_dir)
    rt = Runtime(data_dir, tz=tz, clock=FROZEN_CLOCKS[fixture])
    SEEDERS[fixture](rt)
    return rt
