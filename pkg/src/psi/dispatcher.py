"""Chat runtime: sessions, server-side context injection, tool routing,
state-change events, and proactive trigger rules."""
from __future__ import annotations

import itertools
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable

from .bus import Provider
from .errors import UnknownEndpointError, ValidationError
from .planner import Plan, PlannedCall, Planner, tokenize
from .runtime import Runtime
from .timeutil import parse_ts

logger = logging.getLogger(__name__)

DEFAULT_SEARCH_BUDGET = 6
EVENT_BUFFER_SIZE = 256

# Function words dropped from search queries; they match everywhere and
# would let any file outrank a genuinely relevant one.
SEARCH_STOPWORDS = {
    "a", "an", "the", "i", "my", "me", "of", "to", "for", "in", "on",
    "and", "is", "it", "do", "did", "have", "has", "what", "how",
    "this", "that", "then", "with", "all", "was", "so", "at",
}

SHARED_CONTEXT = "shared_context"
SEARCH_ONLY = "search_only"
SINGLE_MODULE = "single_module"


class BackendConfigError(Exception):
    pass


@dataclass(frozen=True)
class Condition:
    kind: str  # shared_context | search_only | single_module
    toolkit_id: str | None = None

    @classmethod
    def shared(cls) -> "Condition":
        return cls(SHARED_CONTEXT)

    @classmethod
    def search(cls) -> "Condition":
        return cls(SEARCH_ONLY)

    @classmethod
    def single(cls, toolkit_id: str) -> "Condition":
        return cls(SINGLE_MODULE, toolkit_id)


@dataclass
class ToolCallRecord:
    toolkit_id: str
    endpoint: str
    params: dict
    result: dict


@dataclass
class AgentResponse:
    reply_text: str
    modules_used: set[str]
    tool_calls: list[ToolCallRecord]
    latency_s: float
    injected_context: str = ""
    error: str | None = None


@dataclass
class ChatSession:
    session_id: str
    condition: Condition
    clock: datetime | None = None  # frozen; None = real time
    transcript: list[dict] = field(default_factory=list)


@dataclass(frozen=True)
class SearchHit:
    toolkit_id: str
    filename: str
    score: int
    excerpt: str


@dataclass(frozen=True)
class TriggerRule:
    rule_id: str
    toolkit_id: str
    predicate: Callable[[dict, datetime], bool]  # pure, no writes
    render: Callable[[dict, datetime], str]


@dataclass(frozen=True)
class Notification:
    rule_id: str
    text: str


def parking_expired_rule() -> TriggerRule:
    def predicate(body: dict, as_of: datetime) -> bool:
        session = body.get("active_session")
        return bool(session) and parse_ts(session["expires_at"]) < as_of

    def render(body: dict, as_of: datetime) -> str:
        return f"Parking session expired at {body['active_session']['expires_at']}"

    return TriggerRule("parking_expired", "parking", predicate, render)


class EventSubscription:
    """Bounded event buffer; overflow drops the oldest frames and leaves
    a single gap marker so slow subscribers know they missed events."""

    def __init__(self, maxsize: int = EVENT_BUFFER_SIZE):
        self.maxsize = maxsize
        self._frames: list[dict] = []
        self._cond = threading.Condition()
        self.closed = False

    def push(self, frame: dict) -> None:
        with self._cond:
            if self.closed:
                return
            if len(self._frames) >= self.maxsize:
                drop = len(self._frames) - self.maxsize + 1
                self._frames = self._frames[drop:]
                if not self._frames or self._frames[0].get("type") != "gap":
                    self._frames.insert(0, {"type": "gap"})
            self._frames.append(frame)
            self._cond.notify_all()

    def drain(self) -> list[dict]:
        with self._cond:
            frames, self._frames = self._frames, []
            return frames

    def get(self, timeout: float | None = None) -> dict | None:
        with self._cond:
            if not self._frames:
                self._cond.wait(timeout)
            if not self._frames:
                return None
            return self._frames.pop(0)

    def close(self) -> None:
        with self._cond:
            self.closed = True
            self._cond.notify_all()


class DeterministicBackend:
    """Wraps the keyword/pattern planner as the chat backend."""

    name = "deterministic"

    def __init__(self, planner: Planner):
        self.planner = planner

    def plan(self, query: str, context: str, visible: list[Provider], clock: datetime) -> Plan:
        return self.planner.plan(query, visible, clock)


class LlmBackend:
    """Adapter for an external chat-completion endpoint. Configured via
    PSI_LLM_BASE_URL / PSI_LLM_MODEL / PSI_LLM_API_KEY; never used by the
    acceptance suite."""

    name = "llm"

    def __init__(self, base_url: str | None = None, model: str | None = None, api_key: str | None = None):
        self.base_url = base_url or os.environ.get("PSI_LLM_BASE_URL")
        self.model = model or os.environ.get("PSI_LLM_MODEL")
        self.api_key = api_key or os.environ.get("PSI_LLM_API_KEY")
        if not self.base_url or not self.model:
            raise BackendConfigError(
                "llm backend requires PSI_LLM_BASE_URL and PSI_LLM_MODEL"
            )

    def _tools(self, visible: list[Provider]) -> list[dict]:
        tools = []
        for p in visible:
            for ep in p.descriptor.endpoints:
                tools.append({
                    "type": "function",
                    "function": {
                        "name": f"{p.descriptor.toolkit_id}__{ep.name}",
                        "description": ep.description,
                        "parameters": {
                            "type": "object",
                            "properties": {
                                s.name: {"type": "number" if s.type in ("number", "duration", "rating") else ("boolean" if s.type == "boolean" else "string")}
                                for s in ep.params
                            },
                            "required": [s.name for s in ep.params if s.required],
                        },
                    },
                })
        return tools

    def plan(self, query: str, context: str, visible: list[Provider], clock: datetime) -> Plan:
        import httpx

        messages = []
        if context:
            messages.append({"role": "system", "content": context})
        messages.append({"role": "user", "content": query})
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        resp = httpx.post(
            f"{self.base_url.rstrip('/')}/chat/completions",
            json={"model": self.model, "messages": messages, "tools": self._tools(visible)},
            headers=headers,
            timeout=60.0,
        )
        resp.raise_for_status()
        message = resp.json()["choices"][0]["message"]
        reply = message.get("content") or ""
        plan = Plan(reply=reply)
        known = {p.descriptor.toolkit_id for p in visible}
        for tc in message.get("tool_calls") or []:
            name = tc["function"]["name"]
            toolkit_id, _, endpoint = name.partition("__")
            import json as _json
            params = _json.loads(tc["function"].get("arguments") or "{}")
            plan.calls.append(PlannedCall(toolkit_id, endpoint, params))
        # modules_used: declared tool calls plus block tags cited in the reply
        for p in visible:
            if f"[{p.descriptor.display_name} Data]" in reply or f"[{p.descriptor.display_name}]" in reply:
                plan.modules_used.add(p.descriptor.toolkit_id)
        for call in plan.calls:
            if call.toolkit_id in known:
                plan.modules_used.add(call.toolkit_id)
        return plan


class Dispatcher:
    def __init__(
        self,
        runtime: Runtime,
        backend: str = "deterministic",
        search_budget: int = DEFAULT_SEARCH_BUDGET,
        debug_context_frames: bool = False,
    ):
        self.runtime = runtime
        self.search_budget = search_budget
        self.debug_context_frames = debug_context_frames
        self.planner = Planner(runtime.tz)
        if backend == "deterministic":
            self.backend = DeterministicBackend(self.planner)
        elif backend == "llm":
            self.backend = LlmBackend()
        else:
            raise BackendConfigError(f"unknown backend: {backend!r}")
        self.triggers: list[TriggerRule] = [parking_expired_rule()]
        self._subscriptions: list[EventSubscription] = []
        self._sub_lock = threading.Lock()
        self._session_seq = itertools.count(1)
        runtime.store.subscribe_writes(self.publish_event)

    # -- sessions ---------------------------------------------------------------

    def open_session(self, condition: Condition | None = None, frozen_clock: datetime | str | None = None) -> ChatSession:
        clock = parse_ts(frozen_clock) if frozen_clock is not None else None
        return ChatSession(
            session_id=f"s{next(self._session_seq)}",
            condition=condition or Condition.shared(),
            clock=clock,
        )

    def _session_clock(self, session: ChatSession) -> datetime:
        return session.clock or self.runtime.now()

    # -- events --------------------------------------------------------------------

    def subscribe(self) -> EventSubscription:
        sub = EventSubscription()
        with self._sub_lock:
            self._subscriptions.append(sub)
        return sub

    def unsubscribe(self, sub: EventSubscription) -> None:
        sub.close()
        with self._sub_lock:
            if sub in self._subscriptions:
                self._subscriptions.remove(sub)

    def publish_event(self, toolkit_id: str, version: int) -> None:
        frame = {"type": "state_event", "toolkit_id": toolkit_id, "version": version}
        with self._sub_lock:
            subs = list(self._subscriptions)
        for sub in subs:
            sub.push(frame)

    def _publish_frame(self, frame: dict) -> None:
        with self._sub_lock:
            subs = list(self._subscriptions)
        for sub in subs:
            sub.push(frame)

    # -- triggers --------------------------------------------------------------------

    def evaluate_triggers(self, as_of: datetime | None = None) -> list[Notification]:
        as_of = as_of or self.runtime.now()
        notifications: list[Notification] = []
        for rule in self.triggers:
            try:
                body = self.runtime.store.read_state(rule.toolkit_id).body
            except Exception:
                continue
            if rule.predicate(body, as_of):
                note = Notification(rule.rule_id, rule.render(body, as_of))
                notifications.append(note)
                self._publish_frame({"type": "notification", "rule_id": note.rule_id, "text": note.text})
        return notifications

    # -- search-only file recovery ------------------------------------------------------

    def search_files(self, pattern: str, budget: int | None = None) -> list[SearchHit]:
        budget = self.search_budget if budget is None else budget
        if budget <= 0:
            return []
        query_tokens = [t for t in tokenize(pattern) if t not in SEARCH_STOPWORDS]
        hits: list[SearchHit] = []
        for path in sorted(self.runtime.data_dir.glob("*.json")):
            text = path.read_text(encoding="utf-8")
            file_tokens = tokenize(text) + tokenize(path.stem)
            counts: dict[str, int] = {}
            for tok in file_tokens:
                counts[tok] = counts.get(tok, 0) + 1
            score = sum(counts.get(tok, 0) for tok in query_tokens)
            if score > 0:
                hits.append(SearchHit(path.stem, path.name, score, text[:400]))
        hits.sort(key=lambda h: (-h.score, h.filename))
        return hits[:budget]

    # -- message handling ------------------------------------------------------------------

    def _visible_and_context(self, session: ChatSession, text: str, clock: datetime):
        cond = session.condition
        if cond.kind == SHARED_CONTEXT:
            return self.runtime.bus.providers(), self.runtime.assemble(clock).rendered
        if cond.kind == SINGLE_MODULE:
            provider = self.runtime.bus.get_provider(cond.toolkit_id)
            block = self.runtime.bus.build_summary(cond.toolkit_id, clock)
            return [provider], block or ""
        # search_only: no assembled context, bounded opportunistic recovery
        hits = self.search_files(text)
        found = {h.toolkit_id for h in hits}
        visible = [p for p in self.runtime.bus.providers() if p.descriptor.toolkit_id in found]
        excerpts = "\n".join(f"--- {h.filename} ---\n{h.excerpt}" for h in hits)
        return visible, excerpts

    def handle_message(self, session: ChatSession, text: str) -> AgentResponse:
        start = time.perf_counter()
        clock = self._session_clock(session)
        visible, context = self._visible_and_context(session, text, clock)
        injected = context if session.condition.kind == SHARED_CONTEXT else ""
        try:
            plan = self.backend.plan(text, context, visible, clock)
        except Exception as exc:
            logger.exception("backend failure")
            response = AgentResponse(
                reply_text=f"backend error: {exc}",
                modules_used=set(),
                tool_calls=[],
                latency_s=time.perf_counter() - start,
                injected_context=injected,
                error=str(exc),
            )
            session.transcript.append({"user": text, "response": response})
            return response

        tool_calls: list[ToolCallRecord] = []
        modules_used = set(plan.modules_used)
        visible_ids = {p.descriptor.toolkit_id for p in visible}
        for call in plan.calls:
            if call.toolkit_id not in visible_ids:
                result = {"error": f"module not visible in this condition: {call.toolkit_id}"}
            else:
                try:
                    result = self.runtime.execute_action(call.toolkit_id, call.endpoint, call.params)
                    modules_used.add(call.toolkit_id)
                except (ValidationError, UnknownEndpointError) as exc:
                    result = {"error": str(exc)}
                    modules_used.add(call.toolkit_id)
            record = ToolCallRecord(call.toolkit_id, call.endpoint, call.params, result)
            tool_calls.append(record)

        response = AgentResponse(
            reply_text=plan.reply,
            modules_used=modules_used,
            tool_calls=tool_calls,
            latency_s=time.perf_counter() - start,
            injected_context=injected,
        )
        session.transcript.append({"user": text, "response": response})
        self.evaluate_triggers(clock)
        return response
