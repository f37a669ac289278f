"""End-to-end acceptance checks.

Each test prints one ``[ACCEPTANCE] <name>: PASS`` line on success so a
run of this file doubles as a release checklist.
"""
from __future__ import annotations

import itertools
import time

from fastapi.testclient import TestClient
from hypothesis import given, settings
from hypothesis import strategies as st

from psi import Runtime
from psi.bus import ContextBus, ProviderDescriptor
from psi.dispatcher import Condition, Dispatcher
from psi.fixtures import POST_PILOT_MANIFESTS, bundled_task_file, load_bundled_manifest, seed
from psi.gateway import create_app
from psi.harness import EvalHarness, fulfillment, hash_dir, load_tasks, task_success
from psi.store import diff_snapshots
from psi.timeutil import parse_ts

CLOCK = "2025-11-05T12:00:00+00:00"
AS_OF = parse_ts(CLOCK)

GOLDEN = (
    "[Personal Context]\n"
    "[Health Data]\n"
    "Today: 1030 cal, 62g protein\n"
    "Gym: 12 min, 65 cal burned\n"
    "[End Health Data]\n"
    "[End Personal Context]"
)


def _pass(name: str) -> None:
    print(f"[ACCEPTANCE] {name}: PASS")


# 1. ---------------------------------------------------------------------------


def test_golden_context_block(tmp_path):
    runtime = seed(tmp_path / "data", "appendix_d")
    start = time.perf_counter()
    rendered = runtime.assemble(AS_OF).rendered
    elapsed = time.perf_counter() - start
    assert rendered == GOLDEN
    assert rendered.encode("utf-8") == GOLDEN.encode("utf-8")
    assert elapsed < 1.0
    _pass("golden_context_block")


# 2. ---------------------------------------------------------------------------


class _StubProvider:
    def __init__(self, index: int, lines: list[str] | None):
        self.descriptor = ProviderDescriptor(
            toolkit_id=f"mod{index}",
            display_name=f"Mod{index}",
            keywords=frozenset({f"mod{index}"}),
        )
        self._lines = lines

    def summary_lines(self, as_of):
        return self._lines

    def execute(self, endpoint, params):
        return {}


@st.composite
def _provider_sets(draw):
    count = draw(st.integers(min_value=0, max_value=14))
    providers = []
    for i in range(count):
        if draw(st.booleans()):
            lines = None
        else:
            lines = draw(st.lists(
                st.text(alphabet="abcz ", min_size=1, max_size=12),
                min_size=1, max_size=3,
            ))
        providers.append(_StubProvider(i, lines))
    return providers


@settings(max_examples=60, deadline=None)
@given(providers=_provider_sets(), extra_lines=st.lists(
    st.text(alphabet="abcz ", min_size=1, max_size=12), min_size=1, max_size=2,
))
def test_silent_omission_and_locality_property(providers, extra_lines):
    bus = ContextBus()
    for p in providers:
        bus.register(p)
    ctx = bus.assemble_context(AS_OF)
    named = {tid for tid, _ in ctx.blocks}
    for p in providers:
        tid = p.descriptor.toolkit_id
        if not p.summary_lines(AS_OF):
            assert tid not in named
            assert f"[{p.descriptor.display_name} Data]" not in ctx.rendered
        else:
            assert tid in named
    # deterministic: same inputs, same bytes
    assert bus.assemble_context(AS_OF).rendered == ctx.rendered
    # locality: adding a provider never alters earlier blocks
    bus.register(_StubProvider(99, extra_lines))
    grown = bus.assemble_context(AS_OF)
    assert grown.blocks[: len(ctx.blocks)] == ctx.blocks


def test_silent_omission_suite_budget():
    start = time.perf_counter()
    test_silent_omission_and_locality_property()
    assert time.perf_counter() - start < 5.0
    _pass("silent_omission_and_locality")


# 3. ---------------------------------------------------------------------------


def test_metric_oracle_exhaustive():
    modules = ["m1", "m2", "m3", "m4", "m5"]
    subsets = [
        frozenset(c)
        for n in range(len(modules) + 1)
        for c in itertools.combinations(modules, n)
    ]
    checked = 0
    for selected in subsets:
        for gold in subsets:
            if not gold:
                continue
            overlap = sum(1 for m in gold if m in selected)  # independent count
            assert fulfillment(selected, gold) == overlap / len(gold)
            assert task_success(selected, gold) is (overlap == len(gold))
            checked += 1
    assert checked == 32 * 31
    # spot values: one missing module out of |gold| = 3, 4, 2
    assert round(fulfillment({"a", "b"}, {"a", "b", "c"}), 2) == 0.67
    assert round(fulfillment({"a", "b", "c"}, {"a", "b", "c", "d"}), 2) == 0.75
    assert round(fulfillment({"a"}, {"a", "b"}), 2) == 0.50
    _pass("metric_oracle")


# 4. ---------------------------------------------------------------------------


def test_condition_ordering_on_reasoning_suite():
    tasks = load_tasks(bundled_task_file("reasoning_50"))
    assert len(tasks) == 50
    start = time.perf_counter()
    report = EvalHarness().run_suite(tasks, ["shared", "search", "single"])
    elapsed = time.perf_counter() - start
    means = {
        cond: data["reasoning"]["mean_fulfillment"]
        for cond, data in report["conditions"].items()
    }
    assert means["shared_context"] > means["search_only"] > means["single_module"]
    successes = {
        cond: data["reasoning"]["task_success_rate"]
        for cond, data in report["conditions"].items()
    }
    assert successes["shared_context"] > successes["search_only"] > successes["single_module"]
    by_id = {t.task_id: t for t in tasks}
    for row in report["conditions"]["single_module"]["tasks"]:
        gold = by_id[row["task_id"]].gold_modules
        assert row["fulfillment"] == 1 / len(gold)
    assert elapsed < 120.0
    _pass("condition_ordering")


# 5. ---------------------------------------------------------------------------


def test_write_back_validation_on_action_suite():
    tasks = load_tasks(bundled_task_file("actions_20"))
    assert len(tasks) == 20
    start = time.perf_counter()
    report = EvalHarness().run_suite(tasks, ["shared", "search"])
    elapsed = time.perf_counter() - start
    shared = report["conditions"]["shared_context"]["actions"]
    search = report["conditions"]["search_only"]["actions"]
    assert shared == {"n": 20, "validated": 20}
    assert search["validated"] < shared["validated"]
    assert elapsed < 60.0
    _pass("write_back_validation")


# 6. ---------------------------------------------------------------------------


DUAL_PATH_ACTIONS = [
    ("Skip parking for tomorrow.",
     "parking", "skip_date", {"date": "2025-11-06"}, CLOCK),
    ("Log lunch: 650 calories, 35 g protein, egg curry with rice.",
     "health", "log_food",
     {"calories": 650.0, "protein_g": 35.0, "note": "egg curry with rice"}, CLOCK),
    ("Log water: 8 glasses.",
     "hydration", "log_water", {"glasses": 8.0}, CLOCK),
    ("Track habit: meditation done.",
     "habit", "log_habit", {"name": "meditation", "done": True}, CLOCK),
    ("Buy parking for today.",
     "parking", "purchase", {"date": "2025-11-06"}, "2025-11-06T05:00:00+00:00"),
]


def test_dual_path_state_diff_equivalence(tmp_path):
    for i, (query, toolkit_id, endpoint, params, clock) in enumerate(DUAL_PATH_ACTIONS):
        # path A: chat
        seed(tmp_path / f"chat{i}", "pilot_week")
        chat_rt = Runtime(tmp_path / f"chat{i}", clock=clock)
        dispatcher = Dispatcher(chat_rt)
        before = chat_rt.store.snapshot_all()
        session = dispatcher.open_session(Condition.shared(), clock)
        resp = dispatcher.handle_message(session, query)
        assert [(c.toolkit_id, c.endpoint, c.params) for c in resp.tool_calls] == [
            (toolkit_id, endpoint, params)
        ]
        chat_diff = diff_snapshots(before, chat_rt.store.snapshot_all())

        # path B: direct REST action on a fresh clone
        seed(tmp_path / f"rest{i}", "pilot_week")
        rest_rt = Runtime(tmp_path / f"rest{i}", clock=clock)
        before = rest_rt.store.snapshot_all()
        with TestClient(create_app(rest_rt, role="rest")) as client:
            r = client.post(f"/actions/{toolkit_id}/{endpoint}", json=params)
            assert r.status_code == 200, r.text
        rest_diff = diff_snapshots(before, rest_rt.store.snapshot_all())

        assert chat_diff == rest_diff
        assert chat_diff, f"action {endpoint} produced no state change"
    _pass("dual_path_equivalence")


# 7. ---------------------------------------------------------------------------


POST_PILOT_SAMPLE_LOGS = {
    "sleep": {"hours": 7.0},
    "medication": {"name": "ibuprofen"},
    "spending": {"amount": 3.2},
    "mood": {"rating": 4},
    "hydration": {"glasses": 2},
    "habit": {"name": "stretch"},
    "reading": {"pages": 5},
    "dashboard": {"note": "weekly review"},
}


def test_post_pilot_manifests_register_at_runtime(tmp_path):
    runtime = Runtime(tmp_path / "data", clock=CLOCK)
    baseline = {d.toolkit_id for d in runtime.bus.list_providers()}
    for name in POST_PILOT_MANIFESTS:
        runtime.dynamic.register(load_bundled_manifest(name))
    assert len(POST_PILOT_MANIFESTS) == 8
    for name in POST_PILOT_MANIFESTS:
        display = runtime.bus.get_provider(name).descriptor.display_name
        tag = f"[{display} Data]"
        assert tag not in runtime.assemble(AS_OF).rendered  # silent before any log
        before = runtime.store.snapshot_all()
        runtime.execute_action(name, runtime.bus.get_provider(name)
                               .descriptor.endpoints[0].name,
                               POST_PILOT_SAMPLE_LOGS[name])
        # Ctx coverage: the module now publishes a block
        assert tag in runtime.assemble(AS_OF).rendered
        # Write coverage: only this module's state changed, and the entry landed
        diff = diff_snapshots(before, runtime.store.snapshot_all())
        assert {d.toolkit_id for d in diff} == {name}
        entries = runtime.store.read_state(name).body["entries"]
        assert len(entries) == 1
    # zero modifications elsewhere: the built-in set is untouched
    assert baseline <= {d.toolkit_id for d in runtime.bus.list_providers()}
    _pass("dynamic_extensibility")


# 8. ---------------------------------------------------------------------------


def test_sandbox_isolation_over_full_eval(tmp_path):
    live = tmp_path / "live"
    seed(live, "pilot_week")
    before = hash_dir(live)
    tasks = load_tasks(bundled_task_file("reasoning_50")) + load_tasks(
        bundled_task_file("actions_20")
    )
    EvalHarness(source_data_dir=live).run_suite(tasks, ["shared", "search", "single"])
    assert hash_dir(live) == before
    _pass("sandbox_isolation")
