"""Benchmark harness: three-condition runs over sandboxed state clones.

Reasoning tasks score module identification (fulfillment = proportion of
ground-truth modules selected; task success = all of them selected).
Action tasks validate write-backs by snapshot diffing: every expected
predicate must hold on the after-state and no unexpected module may
change. Every task runs in a cloned data directory with a frozen clock,
so the live directory is never touched.
"""
from __future__ import annotations

import hashlib
import json
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from . import fixtures
from .dispatcher import Condition, Dispatcher
from .runtime import Runtime
from .store import diff_snapshots

CONDITION_ALIASES = {
    "shared": "shared_context",
    "shared_context": "shared_context",
    "search": "search_only",
    "search_only": "search_only",
    "single": "single_module",
    "single_module": "single_module",
}

REASONING_FAMILIES = {"synthesis", "temporal", "chain"}


class TaskFileError(Exception):
    pass


@dataclass(frozen=True)
class DiffExpectation:
    toolkit_id: str
    path: str
    op: str  # exists | equals | contains | not_contains | count_eq | count_ge | gte
    value: Any = None


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    kind: str  # reasoning | action
    family: str
    query: str
    gold_modules: frozenset[str]
    frozen_clock: str
    fixture: str
    expected_diff: tuple[DiffExpectation, ...] = ()


# -- metrics -----------------------------------------------------------------


def fulfillment(selected: set[str], gold: set[str]) -> float:
    """|selected ∩ gold| / |gold|."""
    if not gold:
        raise ValueError("gold module set must be non-empty")
    return len(set(selected) & set(gold)) / len(gold)


def task_success(selected: set[str], gold: set[str]) -> bool:
    """True iff every ground-truth module was selected."""
    if not gold:
        raise ValueError("gold module set must be non-empty")
    return set(gold) <= set(selected)


# -- task file ----------------------------------------------------------------


def load_tasks(path: str | Path) -> list[TaskSpec]:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TaskFileError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")
    if not isinstance(raw, list):
        raise TaskFileError(f"{path}: task file must be a JSON array")
    tasks: list[TaskSpec] = []
    for i, item in enumerate(raw):
        where = f"{path}: task #{i + 1}"
        for key in ("task_id", "kind", "family", "query", "gold_modules", "frozen_clock", "fixture"):
            if key not in item:
                raise TaskFileError(f"{where}: missing field {key!r}")
        kind = item["kind"]
        if kind not in ("reasoning", "action"):
            raise TaskFileError(f"{where}: kind must be reasoning|action, got {kind!r}")
        if kind == "reasoning" and item["family"] not in REASONING_FAMILIES:
            raise TaskFileError(f"{where}: reasoning family must be one of {sorted(REASONING_FAMILIES)}")
        if not item["gold_modules"]:
            raise TaskFileError(f"{where}: gold_modules must be non-empty")
        expected = tuple(
            DiffExpectation(e["toolkit_id"], e["path"], e["op"], e.get("value"))
            for e in item.get("expected_diff", [])
        )
        if kind == "action" and not expected:
            raise TaskFileError(f"{where}: action task needs expected_diff")
        if kind == "reasoning" and expected:
            raise TaskFileError(f"{where}: reasoning task must not carry expected_diff")
        tasks.append(TaskSpec(
            task_id=item["task_id"],
            kind=kind,
            family=item["family"],
            query=item["query"],
            gold_modules=frozenset(item["gold_modules"]),
            frozen_clock=item["frozen_clock"],
            fixture=item["fixture"],
            expected_diff=expected,
        ))
    return tasks


# -- predicates ------------------------------------------------------------------


def _resolve_path(body: dict, path: str) -> Any:
    value: Any = body
    for part in path.split("."):
        if isinstance(value, list) and part.isdigit():
            idx = int(part)
            if idx >= len(value):
                return None
            value = value[idx]
        elif isinstance(value, dict) and part in value:
            value = value[part]
        else:
            return None
    return value


def check_expectation(exp: DiffExpectation, after_body: dict) -> bool:
    value = _resolve_path(after_body, exp.path)
    if exp.op == "exists":
        return value is not None
    if exp.op == "equals":
        return value == exp.value
    if exp.op == "contains":
        return value is not None and exp.value in value
    if exp.op == "not_contains":
        return value is None or exp.value not in value
    if exp.op == "count_eq":
        return value is not None and len(value) == exp.value
    if exp.op == "count_ge":
        return value is not None and len(value) >= exp.value
    if exp.op == "gte":
        return isinstance(value, (int, float)) and value >= exp.value
    raise TaskFileError(f"unknown expectation op: {exp.op!r}")


# -- utilities ----------------------------------------------------------------------


def hash_dir(path: str | Path) -> str:
    """Stable content hash of a directory tree."""
    h = hashlib.sha256()
    root = Path(path)
    for f in sorted(p for p in root.rglob("*") if p.is_file()):
        h.update(str(f.relative_to(root)).encode())
        h.update(f.read_bytes())
    return h.hexdigest()


# -- harness -------------------------------------------------------------------------


class EvalHarness:
    def __init__(
        self,
        source_data_dir: str | Path | None = None,
        tz: str | None = None,
        backend: str = "deterministic",
        search_budget: int | None = None,
    ):
        self.source_data_dir = Path(source_data_dir) if source_data_dir else None
        self.tz = tz
        self.backend = backend
        self.search_budget = search_budget

    def _sandbox(self, task: TaskSpec, tmp_root: Path) -> Path:
        clone = Path(tempfile.mkdtemp(prefix=f"{task.task_id}_", dir=tmp_root))
        clone.rmdir()
        if self.source_data_dir is not None:
            shutil.copytree(self.source_data_dir, clone)
        else:
            fixtures.seed(clone, task.fixture, tz=self.tz)
        return clone

    def _dispatcher(self, data_dir: Path, clock: str) -> Dispatcher:
        rt = Runtime(data_dir, tz=self.tz, clock=clock)
        kwargs = {}
        if self.search_budget is not None:
            kwargs["search_budget"] = self.search_budget
        return Dispatcher(rt, backend=self.backend, **kwargs)

    # -- single tasks ------------------------------------------------------------

    def run_reasoning_task(self, task: TaskSpec, condition: str, tmp_root: Path) -> dict:
        condition = CONDITION_ALIASES[condition]
        clone = self._sandbox(task, tmp_root)
        row: dict[str, Any] = {
            "task_id": task.task_id, "kind": "reasoning", "family": task.family,
            "condition": condition, "gold": sorted(task.gold_modules),
        }
        if condition == "single_module":
            best = None
            dispatcher = self._dispatcher(clone, task.frozen_clock)
            for desc in dispatcher.runtime.bus.list_providers():
                session = dispatcher.open_session(Condition.single(desc.toolkit_id), task.frozen_clock)
                resp = dispatcher.handle_message(session, task.query)
                score = fulfillment(resp.modules_used, task.gold_modules)
                key = (score, desc.toolkit_id)
                # best-by-fulfillment; ties break to the lexicographically
                # first toolkit_id
                if best is None or score > best[0]:
                    best = (score, desc.toolkit_id, resp)
            score, module, resp = best
            row.update({
                "modules_used": sorted(resp.modules_used),
                "best_module": module,
                "fulfillment": score,
                "success": task_success(resp.modules_used, task.gold_modules),
                "latency_s": resp.latency_s,
            })
            return row
        cond = Condition.shared() if condition == "shared_context" else Condition.search()
        dispatcher = self._dispatcher(clone, task.frozen_clock)
        session = dispatcher.open_session(cond, task.frozen_clock)
        resp = dispatcher.handle_message(session, task.query)
        row.update({
            "modules_used": sorted(resp.modules_used),
            "fulfillment": fulfillment(resp.modules_used, task.gold_modules),
            "success": task_success(resp.modules_used, task.gold_modules),
            "latency_s": resp.latency_s,
        })
        return row

    def run_action_task(self, task: TaskSpec, condition: str, tmp_root: Path) -> dict:
        condition = CONDITION_ALIASES[condition]
        row: dict[str, Any] = {
            "task_id": task.task_id, "kind": "action", "family": task.family,
            "condition": condition, "gold": sorted(task.gold_modules),
        }
        if condition == "single_module":
            validated, best = False, None
            for toolkit_id in sorted(task.gold_modules):
                ok, detail = self._run_action_once(task, Condition.single(toolkit_id), tmp_root)
                if ok:
                    validated, best = True, toolkit_id
                    break
            row.update({"validated": validated, "best_module": best})
            return row
        cond = Condition.shared() if condition == "shared_context" else Condition.search()
        validated, detail = self._run_action_once(task, cond, tmp_root)
        row.update({"validated": validated, **detail})
        return row

    def _run_action_once(self, task: TaskSpec, cond: Condition, tmp_root: Path) -> tuple[bool, dict]:
        clone = self._sandbox(task, tmp_root)
        dispatcher = self._dispatcher(clone, task.frozen_clock)
        store = dispatcher.runtime.store
        before = store.snapshot_all()
        session = dispatcher.open_session(cond, task.frozen_clock)
        resp = dispatcher.handle_message(session, task.query)
        after = store.snapshot_all()
        diff = diff_snapshots(before, after)
        changed = {d.toolkit_id for d in diff}
        expected_modules = {e.toolkit_id for e in task.expected_diff}
        predicates_ok = all(
            check_expectation(e, after.states[e.toolkit_id].body if e.toolkit_id in after.states else {})
            for e in task.expected_diff
        )
        ok = predicates_ok and changed <= expected_modules
        return ok, {
            "changed_modules": sorted(changed),
            "tool_calls": [
                {"toolkit_id": t.toolkit_id, "endpoint": t.endpoint, "params": t.params}
                for t in resp.tool_calls
            ],
            "latency_s": resp.latency_s,
        }

    # -- suite ----------------------------------------------------------------------

    def run_suite(
        self,
        tasks: list[TaskSpec],
        conditions: Iterable[str],
        report_path: str | Path | None = None,
    ) -> dict:
        conditions = [CONDITION_ALIASES[c] for c in conditions]
        if not conditions:
            raise ValueError("at least one condition is required")
        report: dict[str, Any] = {"conditions": {}}
        with tempfile.TemporaryDirectory(prefix="psi_eval_") as tmp:
            tmp_root = Path(tmp)
            for condition in conditions:
                rows = []
                for task in tasks:
                    if task.kind == "reasoning":
                        rows.append(self.run_reasoning_task(task, condition, tmp_root))
                    else:
                        rows.append(self.run_action_task(task, condition, tmp_root))
                report["conditions"][condition] = {
                    "tasks": rows,
                    **_aggregate(rows),
                }
        report["summary_table"] = render_summary(report)
        if report_path is not None:
            Path(report_path).write_text(json.dumps(report, indent=1), encoding="utf-8")
        return report


def _aggregate(rows: list[dict]) -> dict:
    reasoning = [r for r in rows if r["kind"] == "reasoning"]
    actions = [r for r in rows if r["kind"] == "action"]
    agg: dict[str, Any] = {}
    if reasoning:
        successful = [r for r in reasoning if r["success"]]
        agg["reasoning"] = {
            "n": len(reasoning),
            "mean_fulfillment": sum(r["fulfillment"] for r in reasoning) / len(reasoning),
            "task_success_rate": len(successful) / len(reasoning),
            "mean_latency_s_successful": (
                sum(r["latency_s"] for r in successful) / len(successful) if successful else None
            ),
        }
    if actions:
        agg["actions"] = {
            "n": len(actions),
            "validated": sum(1 for r in actions if r["validated"]),
        }
    return agg


def render_summary(report: dict) -> str:
    lines = [f"{'condition':<16} {'n_reason':>8} {'fulfill':>8} {'success':>8} {'actions':>10}"]
    for condition, data in report["conditions"].items():
        r = data.get("reasoning") or {}
        a = data.get("actions") or {}
        fulfill = "{:.2f}".format(r["mean_fulfillment"]) if r else "-"
        success = "{:.2f}".format(r["task_success_rate"]) if r else "-"
        actions = "{}/{}".format(a["validated"], a["n"]) if a else "-"
        lines.append(
            f"{condition:<16} {r.get('n', 0):>8} {fulfill:>8} {success:>8} {actions:>10}"
        )
    return "\n".join(lines)
