"""Shared personal-context bus.

Central registry of provider modules. Each provider publishes a
current-state snapshot scoped to the local calendar day; the bus wraps
it in per-module tags and concatenates all non-empty blocks inside the
outer ``[Personal Context]`` delimiters, in registration order.

Providers whose builders return nothing are silently omitted, so the
assembled text degrades gracefully. A builder that raises is logged and
treated as empty; assembly never aborts.
"""
from __future__ import annotations

import logging
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Protocol, runtime_checkable

logger = logging.getLogger(__name__)

OPEN_DELIM = "[Personal Context]"
CLOSE_DELIM = "[End Personal Context]"
TRUNCATED_MARKER = "[Context Truncated]"

_ID_RE = re.compile(r"^[a-z0-9_]+$")


class BusError(Exception):
    pass


class DuplicateProviderError(BusError):
    def __init__(self, toolkit_id: str):
        super().__init__(f"provider already registered: {toolkit_id!r}")
        self.toolkit_id = toolkit_id


class UnknownProviderError(BusError):
    def __init__(self, toolkit_id: str):
        super().__init__(f"provider not registered: {toolkit_id!r}")
        self.toolkit_id = toolkit_id


class DescriptorError(BusError):
    def __init__(self, violations: list[str]):
        super().__init__("invalid descriptor: " + "; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: str  # number | duration | text | rating | boolean | date
    required: bool = True
    unit: str | None = None


@dataclass(frozen=True)
class EndpointDescriptor:
    name: str
    params: tuple[ParamSpec, ...] = ()
    description: str = ""

    def signature(self) -> str:
        return f"{self.name}({', '.join(p.name for p in self.params)})"


@dataclass(frozen=True)
class ProviderDescriptor:
    toolkit_id: str
    display_name: str
    keywords: frozenset[str]
    endpoints: tuple[EndpointDescriptor, ...] = ()
    summary_source: str = "builtin"

    def validate(self) -> list[str]:
        violations: list[str] = []
        if not _ID_RE.match(self.toolkit_id or ""):
            violations.append(f"toolkit_id must match [a-z0-9_]+: {self.toolkit_id!r}")
        if not self.display_name:
            violations.append("display_name must be non-empty")
        if not self.keywords:
            violations.append("keywords must be non-empty")
        elif any(k != k.lower() for k in self.keywords):
            violations.append("keywords must be lowercase")
        names = [e.name for e in self.endpoints]
        if len(names) != len(set(names)):
            violations.append("endpoint names must be unique within the provider")
        for ep in self.endpoints:
            for p in ep.params:
                if p.required and not p.type:
                    violations.append(f"endpoint {ep.name}: required param {p.name} needs a type")
        return violations


@runtime_checkable
class Provider(Protocol):
    """The provider contract: identity plus a daily summary builder."""

    descriptor: ProviderDescriptor

    def summary_lines(self, as_of: datetime) -> list[str] | None:
        """Data lines for the local day of as_of, or None when empty."""
        ...

    def execute(self, endpoint: str, params: dict) -> dict:
        """Run a write-back endpoint; returns a result document."""
        ...


@dataclass(frozen=True)
class AssembledContext:
    as_of: datetime
    blocks: tuple[tuple[str, str], ...]  # (toolkit_id, tagged block text)
    rendered: str


class ContextBus:
    """Registry + assembly. Reads are lock-free snapshots of the
    registration list; registration changes are serialized."""

    def __init__(self, include_actions: bool = False, max_bytes: int | None = None):
        # include_actions appends "Actions: name(params)" lines to each
        # block; off by default so rendered context matches the golden
        # tagged format exactly.
        self.include_actions = include_actions
        self.max_bytes = max_bytes
        self._lock = threading.Lock()
        self._providers: list[Provider] = []

    # -- registry ------------------------------------------------------------

    def register(self, provider: Provider) -> ProviderDescriptor:
        desc = provider.descriptor
        violations = desc.validate()
        if violations:
            raise DescriptorError(violations)
        with self._lock:
            if any(p.descriptor.toolkit_id == desc.toolkit_id for p in self._providers):
                raise DuplicateProviderError(desc.toolkit_id)
            self._providers = [*self._providers, provider]
        return desc

    def unregister(self, toolkit_id: str) -> None:
        with self._lock:
            remaining = [p for p in self._providers if p.descriptor.toolkit_id != toolkit_id]
            if len(remaining) == len(self._providers):
                raise UnknownProviderError(toolkit_id)
            self._providers = remaining

    def list_providers(self) -> list[ProviderDescriptor]:
        return [p.descriptor for p in self._providers]

    def providers(self) -> list[Provider]:
        return list(self._providers)

    def get_provider(self, toolkit_id: str) -> Provider:
        for p in self._providers:
            if p.descriptor.toolkit_id == toolkit_id:
                return p
        raise UnknownProviderError(toolkit_id)

    def has_provider(self, toolkit_id: str) -> bool:
        return any(p.descriptor.toolkit_id == toolkit_id for p in self._providers)

    # -- assembly ------------------------------------------------------------

    def _render_block(self, provider: Provider, as_of: datetime) -> str | None:
        try:
            lines = provider.summary_lines(as_of)
        except Exception:
            logger.exception(
                "summary builder failed for %s; omitting block",
                provider.descriptor.toolkit_id,
            )
            return None
        if not lines:
            return None
        desc = provider.descriptor
        block = [f"[{desc.display_name} Data]", *lines]
        if self.include_actions:
            block += [f"Actions: {ep.signature()}" for ep in desc.endpoints]
        block.append(f"[End {desc.display_name} Data]")
        return "\n".join(block)

    def build_summary(self, toolkit_id: str, as_of: datetime) -> str | None:
        return self._render_block(self.get_provider(toolkit_id), as_of)

    def count_active_blocks(self, as_of: datetime, exclude: set[str] | None = None) -> int:
        """Number of providers with a non-empty block; used by read-only
        aggregator modules so they never touch other modules' state."""
        exclude = exclude or set()
        count = 0
        for p in self.providers():
            if p.descriptor.toolkit_id in exclude:
                continue
            if self._render_block(p, as_of) is not None:
                count += 1
        return count

    def assemble_context(self, as_of: datetime) -> AssembledContext:
        blocks: list[tuple[str, str]] = []
        for provider in self.providers():
            block = self._render_block(provider, as_of)
            if block is not None:
                blocks.append((provider.descriptor.toolkit_id, block))
        if not blocks:
            return AssembledContext(as_of=as_of, blocks=(), rendered="")
        rendered = "\n".join([OPEN_DELIM, *(b for _, b in blocks), CLOSE_DELIM])
        if self.max_bytes is not None and len(rendered.encode("utf-8")) > self.max_bytes:
            blocks, rendered = self._truncate(blocks)
        return AssembledContext(as_of=as_of, blocks=tuple(blocks), rendered=rendered)

    def _truncate(self, blocks: list[tuple[str, str]]) -> tuple[list[tuple[str, str]], str]:
        kept: list[tuple[str, str]] = []
        for i in range(len(blocks), 0, -1):
            kept = blocks[:i]
            rendered = "\n".join(
                [OPEN_DELIM, *(b for _, b in kept), TRUNCATED_MARKER, CLOSE_DELIM]
            )
            if len(rendered.encode("utf-8")) <= self.max_bytes or i == 1:
                return kept, rendered
        rendered = "\n".join([OPEN_DELIM, TRUNCATED_MARKER, CLOSE_DELIM])
        return [], rendered
