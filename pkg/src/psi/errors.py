"""Shared exception types."""
from __future__ import annotations


class ValidationError(Exception):
    """A request payload violated an endpoint or manifest schema."""

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UnknownEndpointError(Exception):
    def __init__(self, toolkit_id: str, endpoint: str):
        super().__init__(f"unknown endpoint {endpoint!r} on module {toolkit_id!r}")
        self.toolkit_id = toolkit_id
        self.endpoint = endpoint
