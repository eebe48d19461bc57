"""Process-local counters for pipeline introspection.

Counters are incremented where work happens, so with a worker pool each
process keeps its own tallies; use a single-process run when asserting on
exact counts.
"""

from collections import Counter

_COUNTS = Counter()


def bump(name, k=1):
    _COUNTS[name] += k


def count(name) -> int:
    return _COUNTS[name]


def reset():
    _COUNTS.clear()


def snapshot() -> dict:
    return dict(_COUNTS)
