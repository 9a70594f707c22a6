"""Worker-thread policy.

DRIFTX_THREADS caps the worker threads used by numeric kernels (default:
all cores). Setting it to 1 forces the benchmark's reproducible
single-threaded mode. Thread caps are applied to the underlying BLAS pools
via threadpoolctl around the regions that need them.
"""

import os

from threadpoolctl import threadpool_limits

ENV_VAR = "DRIFTX_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV_VAR, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{ENV_VAR} must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def thread_cap(limit=None):
    """Context manager capping BLAS worker threads (default: policy value)."""
    return threadpool_limits(limits=worker_count() if limit is None else limit)
