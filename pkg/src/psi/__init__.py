"""PSI-style shared personal-context runtime."""
from __future__ import annotations

from .bus import AssembledContext, ContextBus, EndpointDescriptor, ParamSpec, ProviderDescriptor
from .runtime import Runtime
from .store import ModuleState, StateSnapshot, StateStore, diff_snapshots

__all__ = [
    "AssembledContext",
    "ContextBus",
    "EndpointDescriptor",
    "ModuleState",
    "ParamSpec",
    "ProviderDescriptor",
    "Runtime",
    "StateSnapshot",
    "StateStore",
    "diff_snapshots",
]

__version__ = "0.1.0"
