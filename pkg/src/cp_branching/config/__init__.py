"""Configuration management for cp-branching."""

from .settings import PackingSettings, get_settings

__all__ = [
    "PackingSettings",
    "get_settings",
]
