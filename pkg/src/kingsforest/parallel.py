"""Worker pools with deterministic, order-preserving task mapping."""

from __future__ import annotations

import multiprocessing as mp

_SHARED = None


def _init_worker(payload):
    global _SHARED
    _SHARED = payload


def shared():
    """Payload installed for the current worker (or for inline execution)."""
    return _SHARED


class Workers:
    """Map tasks over forked worker processes, or inline when size <= 1.

    Tasks are assembled back in submission order, and every task carries its
    own seed derivation, so results are identical for any pool size. The
    optional payload (typically the Dataset) is shipped to each worker once
    at startup instead of once per task.
    """

    def __init__(self, size=1, payload=None):
        self.size = max(1, int(size or 1))
        self._pool = None
        _init_worker(payload)
        if self.size > 1:
            try:
                ctx = mp.get_context("fork")
                self._pool = ctx.Pool(
                    self.size, initializer=_init_worker, initargs=(payload,)
                )
            except (ValueError, OSError):
                self.size = 1

    def map(self, fn, tasks):
        tasks = list(tasks)
        if self._pool is None or len(tasks) <= 1:
            return [fn(t) for t in tasks]
        return self._pool.map(fn, tasks)

    def close(self):
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def chunk_indices(n, parts):
    """Split range(n) into at most `parts` contiguous runs of near-equal size."""
    parts = max(1, min(parts, n)) if n else 1
    step, extra = divmod(n, parts)
    out = []
    start = 0
    for i in range(parts):
        width = step + (1 if i < extra else 0)
        if width == 0:
            continue
        out.append(list(range(start, start + width)))
        start += width
    return out
