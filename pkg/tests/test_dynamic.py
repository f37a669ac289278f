from __future__ import annotations

import pytest

from psi import Runtime
from psi.dynamic import DynamicModuleManifest, validate_manifest
from psi.errors import UnknownEndpointError, ValidationError
from psi.timeutil import parse_ts

CLOCK = "2025-11-05T12:00:00+00:00"
AS_OF = parse_ts(CLOCK)


def manifest_dict(**overrides):
    base = {
        "toolkit_id": "steps",
        "display_name": "Step Counter",
        "keywords": ["steps"],
        "fields": [
            {"name": "count", "type": "number", "unit": "steps", "aggregate": "sum"},
            {"name": "note", "type": "text", "required": False},
        ],
        "log_endpoint_name": "log_steps",
    }
    base.update(overrides)
    return base


def test_valid_manifest_has_no_violations(runtime):
    assert runtime.dynamic.validate(manifest_dict()) == []


@pytest.mark.parametrize(
    ("overrides", "needle"),
    [
        ({"toolkit_id": "Bad Id"}, "toolkit_id"),
        ({"display_name": ""}, "display_name"),
        ({"keywords": []}, "keywords"),
        ({"fields": []}, "no fields"),
        ({"fields": [{"name": "x", "type": "number", "aggregate": "sum"},
                     {"name": "x", "type": "number", "aggregate": "sum"}]}, "unique"),
        ({"fields": [{"name": "x", "type": "blob"}]}, "unknown type"),
        ({"fields": [{"name": "x", "type": "number", "aggregate": "median"}]}, "aggregate"),
        ({"summary_kind": "carousel"}, "summary_kind"),
        ({"log_endpoint_name": "Bad Name"}, "log_endpoint_name"),
    ],
)
def test_manifest_violations(runtime, overrides, needle):
    violations = runtime.dynamic.validate(manifest_dict(**overrides))
    assert any(needle in v for v in violations), violations


def test_toolkit_id_collision_detected(runtime):
    assert any(
        "collides" in v
        for v in runtime.dynamic.validate(manifest_dict(toolkit_id="health"))
    )


def test_register_rejects_invalid_manifest(runtime):
    with pytest.raises(ValidationError):
        runtime.dynamic.register(manifest_dict(keywords=[]))


def test_registered_module_logs_and_summarizes(runtime):
    runtime.dynamic.register(manifest_dict())
    runtime.execute_action("steps", "log_steps", {"count": 4000})
    runtime.execute_action("steps", "log_steps", {"count": 2500, "note": "evening"})
    lines = runtime.bus.get_provider("steps").summary_lines(AS_OF)
    # sum aggregate: 4000 + 2500; text aggregate: last value
    assert lines == ["count: 6500 steps", "note: evening", "Entries today: 2"]


def test_summary_template_overrides_field_lines(runtime):
    runtime.dynamic.register(manifest_dict(
        summary_template="Walked {count} steps",
    ))
    runtime.execute_action("steps", "log_steps", {"count": 1200})
    lines = runtime.bus.get_provider("steps").summary_lines(AS_OF)
    assert lines == ["Walked 1200 steps", "Entries today: 1"]


@pytest.mark.parametrize(
    ("aggregate", "expected"),
    [("sum", "9"), ("last", "5"), ("mean", "3"), ("count", "3")],
)
def test_numeric_aggregates(runtime, aggregate, expected):
    runtime.dynamic.register(manifest_dict(
        toolkit_id=f"agg_{aggregate}",
        fields=[{"name": "v", "type": "number", "aggregate": aggregate}],
        log_endpoint_name="log_v",
    ))
    for v in (1, 3, 5):
        runtime.execute_action(f"agg_{aggregate}", "log_v", {"v": v})
    lines = runtime.bus.get_provider(f"agg_{aggregate}").summary_lines(AS_OF)
    assert lines[0] == f"v: {expected}"


def test_generic_log_validation(runtime):
    runtime.dynamic.register(manifest_dict())
    with pytest.raises(ValidationError):
        runtime.execute_action("steps", "log_steps", {})  # required count missing
    with pytest.raises(ValidationError):
        runtime.execute_action("steps", "log_steps", {"count": "lots"})
    with pytest.raises(ValidationError):
        runtime.execute_action("steps", "log_steps", {"count": 5, "bogus": 1})
    with pytest.raises(UnknownEndpointError):
        runtime.execute_action("steps", "other_endpoint", {})


def test_boolean_field_type_checked(runtime):
    runtime.dynamic.register(manifest_dict(
        toolkit_id="flags",
        fields=[{"name": "done", "type": "boolean"}],
        log_endpoint_name="log_flag",
    ))
    with pytest.raises(ValidationError):
        runtime.execute_action("flags", "log_flag", {"done": 1})
    runtime.execute_action("flags", "log_flag", {"done": True})


def test_entries_scope_to_local_day(runtime):
    runtime.dynamic.register(manifest_dict())
    runtime.execute_action("steps", "log_steps", {"count": 100})
    provider = runtime.bus.get_provider("steps")
    assert provider.summary_lines(parse_ts("2025-11-06T12:00:00+00:00")) is None


def test_manifest_persists_and_survives_restart(tmp_path):
    data_dir = tmp_path / "data"
    rt = Runtime(data_dir, clock=CLOCK)
    rt.dynamic.register(manifest_dict())
    rt.execute_action("steps", "log_steps", {"count": 777})
    assert (data_dir / "manifests" / "steps.json").exists()

    rt2 = Runtime(data_dir, clock=CLOCK)
    assert rt2.bus.has_provider("steps")
    lines = rt2.bus.get_provider("steps").summary_lines(AS_OF)
    assert lines[0] == "count: 777 steps"


def test_dashboard_kind_counts_other_active_modules(runtime):
    runtime.dynamic.register({
        "toolkit_id": "board",
        "display_name": "Board",
        "keywords": ["board"],
        "fields": [{"name": "note", "type": "text"}],
        "log_endpoint_name": "pin",
        "summary_kind": "dashboard",
    })
    # silent until it has an entry of its own
    assert runtime.bus.get_provider("board").summary_lines(AS_OF) is None
    runtime.execute_action("health", "log_food", {"calories": 300})
    runtime.execute_action("diary", "add_entry", {"text": "hi"})
    runtime.execute_action("board", "pin", {"note": "check in"})
    lines = runtime.bus.get_provider("board").summary_lines(AS_OF)
    assert lines[0] == "Modules reporting today: 2"  # health + diary, not itself
    assert "note: check in" in lines


def test_roundtrip_from_dict_to_dict():
    raw = manifest_dict(summary_template="x {count}")
    manifest = DynamicModuleManifest.from_dict(raw)
    again = DynamicModuleManifest.from_dict(manifest.to_dict())
    assert manifest == again
    assert validate_manifest(again) == []
