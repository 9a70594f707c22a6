"""Byte accounting for the estimator's own working buffers.

The benchmark's memory figures are derived analytically, never sampled from
the OS, and the analytic terms must match real allocations. Estimator code
reports the sizes of its transient buffers here; when no tracker is active
the calls are no-ops.
"""

from contextlib import contextmanager

_ACTIVE = None


class BufferTracker:
    """Collects per-category byte records from instrumented code paths."""

    def __init__(self):
        self.records = {}

    def add(self, category: str, nbytes: int):
        self.records.setdefault(category, []).append(int(nbytes))

    def peak(self, category: str) -> int:
        return max(self.records.get(category, [0]))

    def total(self, category: str) -> int:
        return sum(self.records.get(category, [0]))


def record_buffer(category: str, nbytes: int) -> None:
    if _ACTIVE is not None:
        _ACTIVE.add(category, nbytes)


@contextmanager
def track_buffers():
    """Activate a tracker for the enclosed evaluations (not reentrant)."""
    global _ACTIVE
    if _ACTIVE is not None:
        raise RuntimeError("buffer tracking is already active")
    tracker = BufferTracker()
    _ACTIVE = tracker
    try:
        yield tracker
    finally:
        _ACTIVE = None
