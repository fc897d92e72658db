"""Kernel backend selection.

The compiled extension is used when it imports cleanly; otherwise the numpy
reference implementation takes over. ``BELLCERT_NO_EXTENSION=1`` forces the
fallback (useful for benchmarking and for debugging parity issues).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("BELLCERT_NO_EXTENSION"):
    _impl = _pure
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND = "compiled" if _impl is not _pure else "pure"

G_TABLE = _pure.G_TABLE
ANTICORRELATE = _pure.ANTICORRELATE
POLICY_LOSS_REACTIVE = _pure.POLICY_LOSS_REACTIVE
POLICY_HERALD_CONDITIONED = _pure.POLICY_HERALD_CONDITIONED

accumulate_counts = _impl.accumulate_counts
win_flags = _impl.win_flags
count_wins = _impl.count_wins
deterministic_outcomes = _impl.deterministic_outcomes
quantum_outcomes = _impl.quantum_outcomes
memory_outcomes = _impl.memory_outcomes
memory_wins_batch = _impl.memory_wins_batch
deterministic_wins_batch = _impl.deterministic_wins_batch
quantum_wins_batch = _impl.quantum_wins_batch
bit_agreements = _impl.bit_agreements
count_ones = _impl.count_ones
block_counts = _impl.block_counts


def backends():
    """All importable backends, for parity tests and benchmarks."""
    found = {"pure": _pure}
    try:
        from . import _speedups

        found["compiled"] = _speedups
    except ImportError:
        pass
    return found
