"""Parameter scan management."""

from .manager import ScanManager

__all__ = [
    "ScanManager",
]
