from __future__ import annotations

import pytest

from psi.errors import UnknownEndpointError, ValidationError
from psi.timeutil import parse_ts

AS_OF = parse_ts("2025-11-05T12:00:00+00:00")


def _summary(runtime, toolkit_id, as_of=AS_OF):
    return runtime.bus.get_provider(toolkit_id).summary_lines(as_of)


# -- health --------------------------------------------------------------------


def test_health_food_totals_sum_across_meals(runtime):
    runtime.execute_action("health", "log_food", {"calories": 250, "protein_g": 10})
    runtime.execute_action("health", "log_food", {"calories": 320, "note": "soup"})
    # derived: 250 + 320 = 570 cal; 10 + 0 = 10 g
    assert _summary(runtime, "health") == ["Today: 570 cal, 10g protein"]


def test_health_activity_and_weight_lines(runtime):
    runtime.execute_action("health", "log_activity", {"minutes": 25, "calories_burned": 180})
    runtime.execute_action("health", "log_weight", {"weight_kg": 80.5})
    runtime.execute_action("health", "log_weight", {"weight_kg": 80.1})
    lines = _summary(runtime, "health")
    assert lines == ["Gym: 25 min, 180 cal burned", "Weight: 80.1 kg"]


def test_health_empty_day_is_none(runtime):
    assert _summary(runtime, "health") is None
    runtime.execute_action("health", "log_food", {"calories": 100})
    # entries from a different local day do not surface
    assert _summary(runtime, "health", parse_ts("2025-11-06T12:00:00+00:00")) is None


@pytest.mark.parametrize(
    ("endpoint", "params"),
    [
        ("log_food", {"calories": -5}),
        ("log_food", {"calories": 100, "protein_g": -1}),
        ("log_food", {}),
        ("log_food", {"calories": "many"}),
        ("log_food", {"calories": 100, "bogus": 1}),
        ("log_activity", {"minutes": 0}),
        ("log_weight", {"weight_kg": 0}),
    ],
)
def test_health_rejects_invalid_params(runtime, endpoint, params):
    with pytest.raises(ValidationError):
        runtime.execute_action("health", endpoint, params)


def test_unknown_endpoint_raises(runtime):
    with pytest.raises(UnknownEndpointError):
        runtime.execute_action("health", "log_everything", {})


def test_health_entries_get_ids_and_timestamps(runtime):
    runtime.execute_action("health", "log_food", {"calories": 100})
    runtime.execute_action("health", "log_food", {"calories": 200})
    entries = runtime.store.read_state("health").body["entries"]
    assert [e["id"] for e in entries] == [1, 2]
    assert all(e["at"] == "2025-11-05T12:00:00+00:00" for e in entries)


# -- parking --------------------------------------------------------------------


def _seed_parking(runtime, **overrides):
    body = {
        "schedule": {"weekdays": ["mon", "tue", "wed", "thu", "fri"], "reserve_time": "06:45"},
        "zone": "310",
        "price": 2.5,
        "skip_dates": [],
        "purchases": [],
        "active_session": None,
    }
    body.update(overrides)
    runtime.store.write_state("parking", body)


def test_parking_skip_and_restore(runtime):
    _seed_parking(runtime)
    result = runtime.execute_action("parking", "skip_date", {"date": "2025-11-06"})
    assert result["changed"] is True
    assert "2025-11-06" in runtime.store.read_state("parking").body["skip_dates"]
    result = runtime.execute_action("parking", "restore_date", {"date": "2025-11-06"})
    assert result["changed"] is True
    assert runtime.store.read_state("parking").body["skip_dates"] == []


def test_parking_idempotent_no_ops_do_not_bump_version(runtime):
    _seed_parking(runtime)
    runtime.execute_action("parking", "skip_date", {"date": "2025-11-06"})
    version = runtime.store.read_state("parking").version
    result = runtime.execute_action("parking", "skip_date", {"date": "2025-11-06"})
    assert result == {"changed": False, "no_op": True, "skip_dates": ["2025-11-06"]}
    assert runtime.store.read_state("parking").version == version
    assert runtime.execute_action("parking", "restore_date", {"date": "2025-11-09"})["no_op"] is True


def test_parking_rejects_past_dates_and_bad_ranges(runtime):
    _seed_parking(runtime)
    with pytest.raises(ValidationError):
        runtime.execute_action("parking", "skip_date", {"date": "2025-11-04"})
    with pytest.raises(ValidationError):
        runtime.execute_action("parking", "skip_range", {"start": "2025-11-12", "end": "2025-11-10"})
    with pytest.raises(ValidationError):
        runtime.execute_action("parking", "skip_date", {"date": "not-a-date"})


def test_parking_skip_range_inclusive(runtime):
    _seed_parking(runtime)
    result = runtime.execute_action(
        "parking", "skip_range", {"start": "2025-11-10", "end": "2025-11-14"}
    )
    assert result["added"] == [
        "2025-11-10", "2025-11-11", "2025-11-12", "2025-11-13", "2025-11-14",
    ]


def test_parking_purchase_today_opens_session_until_1800(runtime):
    _seed_parking(runtime)
    result = runtime.execute_action("parking", "purchase", {"date": "2025-11-05"})
    assert result["purchase"]["amount"] == 2.5
    session = runtime.store.read_state("parking").body["active_session"]
    assert session["expires_at"] == "2025-11-05T18:00:00+00:00"
    lines = _summary(runtime, "parking")
    assert "Active session: expires 2025-11-05T18:00:00+00:00" in lines


def test_parking_purchase_refuses_skipped_and_duplicate_dates(runtime):
    _seed_parking(runtime, skip_dates=["2025-11-06"])
    with pytest.raises(ValidationError):
        runtime.execute_action("parking", "purchase", {"date": "2025-11-06"})
    runtime.execute_action("parking", "purchase", {"date": "2025-11-07"})
    with pytest.raises(ValidationError):
        runtime.execute_action("parking", "purchase", {"date": "2025-11-07"})


def test_parking_next_purchase_skips_skipped_and_purchased_days(runtime):
    # Wed 2025-11-05 purchased, Thu skipped -> next open weekday is Fri 11-07
    _seed_parking(
        runtime,
        skip_dates=["2025-11-06"],
        purchases=[{"date": "2025-11-05", "zone": "310", "amount": 2.5, "status": "simulated"}],
    )
    lines = _summary(runtime, "parking")
    assert lines[0] == "Next purchase: 2025-11-07 at 06:45 (zone 310)"


def test_parking_summary_marks_today_and_tomorrow_skips(runtime):
    _seed_parking(runtime, skip_dates=["2025-11-05", "2025-11-06"])
    lines = _summary(runtime, "parking")
    assert "Today (2025-11-05): skipped" in lines
    assert "Tomorrow (2025-11-06): skipped" in lines


def test_parking_empty_state_renders_nothing(runtime):
    assert _summary(runtime, "parking") is None


# -- bobo ------------------------------------------------------------------------


def test_bobo_summary_sorts_chronologically(runtime):
    runtime.execute_action("bobo", "ingest_events", {"events": [
        {"start": "2025-11-05T10:00:00+00:00", "end": "2025-11-05T10:30:00+00:00",
         "kind": "steps", "value": 900, "label": "walk"},
        {"start": "2025-11-05T07:00:00+00:00", "end": "2025-11-05T07:01:00+00:00",
         "kind": "heart_rate", "value": 88},
    ]})
    assert _summary(runtime, "bobo") == [
        "07:00-07:01 heart_rate: 88 bpm",
        "10:00-10:30 steps: 900 steps (walk)",
    ]


def test_bobo_location_events_render_latlon(runtime):
    runtime.execute_action("bobo", "ingest_events", {"events": [
        {"start": "2025-11-05T09:00:00+00:00", "end": "2025-11-05T09:05:00+00:00",
         "kind": "location", "value": [38.7223, -9.1393]},
    ]})
    assert _summary(runtime, "bobo") == ["09:00-09:05 location: 38.7223,-9.1393"]


@pytest.mark.parametrize(
    "event",
    [
        {"start": "2025-11-05T10:00:00+00:00", "end": "2025-11-05T10:30:00+00:00",
         "kind": "teleport", "value": 1},
        {"start": "2025-11-05T10:00:00+00:00", "end": "2025-11-05T10:30:00+00:00",
         "kind": "steps", "value": 900, "unit": "km"},
        {"start": "2025-11-05T11:00:00+00:00", "end": "2025-11-05T10:00:00+00:00",
         "kind": "steps", "value": 900},
        {"start": "2025-11-05T10:00:00+00:00", "end": "2025-11-05T10:30:00+00:00",
         "kind": "steps", "value": "lots"},
        {"kind": "steps", "value": 900},
    ],
)
def test_bobo_rejects_malformed_events(runtime, event):
    with pytest.raises(ValidationError):
        runtime.execute_action("bobo", "ingest_events", {"events": [event]})


def test_bobo_events_must_be_a_list(runtime):
    with pytest.raises(ValidationError):
        runtime.execute_action("bobo", "ingest_events", {"events": "nope"})


# -- calendar ----------------------------------------------------------------------


def test_calendar_shows_remaining_today_and_all_tomorrow(runtime):
    runtime.execute_action("calendar", "add_event", {
        "title": "Past", "start": "2025-11-05T08:00:00+00:00", "end": "2025-11-05T09:00:00+00:00",
    })
    runtime.execute_action("calendar", "add_event", {
        "title": "Standup", "start": "2025-11-05T15:00:00+00:00",
        "end": "2025-11-05T15:30:00+00:00", "location": "Room 2",
    })
    runtime.execute_action("calendar", "add_event", {
        "title": "Dentist", "start": "2025-11-06T14:00:00+00:00", "end": "2025-11-06T15:00:00+00:00",
    })
    assert _summary(runtime, "calendar") == [
        "Today 15:00-15:30: Standup @ Room 2",
        "Tomorrow 14:00-15:00: Dentist",
    ]


def test_calendar_rejects_inverted_and_empty_events(runtime):
    with pytest.raises(ValidationError):
        runtime.execute_action("calendar", "add_event", {
            "title": "", "start": "2025-11-05T10:00:00+00:00", "end": "2025-11-05T11:00:00+00:00",
        })
    with pytest.raises(ValidationError):
        runtime.execute_action("calendar", "add_event", {
            "title": "X", "start": "2025-11-05T11:00:00+00:00", "end": "2025-11-05T10:00:00+00:00",
        })


# -- diary ---------------------------------------------------------------------------


def test_diary_summary_counts_today_and_shows_latest(runtime):
    runtime.execute_action("diary", "add_entry", {"text": "first"})
    runtime.execute_action("diary", "add_entry", {"text": "second"})
    assert _summary(runtime, "diary") == ["Entries today: 2", "Latest: second"]


def test_diary_rejects_blank_text(runtime):
    with pytest.raises(ValidationError):
        runtime.execute_action("diary", "add_entry", {"text": "   "})
