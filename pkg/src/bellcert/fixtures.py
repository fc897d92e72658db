"""Published-run fixtures.

The per-cell outcome counts of the five published datasets (four individual
runs plus the seven-month aggregate) are hard-coded here; event files are
reconstructed from them with a synthetic but fixed ordering (cells walked in
a fixed order inside each herald stream, heralds interleaved round-robin).
Every statistic in this package is order-insensitive, so the reconstruction
is exact for all certification purposes; the ordering note travels in the
manifest.
"""

from __future__ import annotations

import importlib.resources
import json
from pathlib import Path

import numpy as np

from .errors import DomainError
from .events import PAIRS, PSI_MINUS, PSI_PLUS, CorrelationTable, RunDataset
from .eventio import write_events

__all__ = [
    "RUN_IDS",
    "GOLDEN_TAU",
    "run_counts",
    "correlation_table",
    "dataset",
    "write_fixture_tree",
    "fixture_path",
    "load_run",
]

#: Setting-predictability assumption used for every published P-value.
GOLDEN_TAU = 6.3e-4

# counts[(herald, a_choice, b_choice)] = (n_uu, n_ud, n_du, n_dd)
# a_choice: 0 -> alpha = 0 deg, 1 -> alpha' = 90 deg
# b_choice: 0 -> beta = -45 deg, 1 -> beta' = +45 deg
_P, _M = PSI_PLUS, PSI_MINUS

_RUN_COUNTS = {
    "run-20151127": {
        (_P, 0, 0): (4, 16, 21, 4),
        (_P, 0, 1): (4, 12, 13, 4),
        (_P, 1, 0): (3, 24, 11, 2),
        (_P, 1, 1): (10, 4, 8, 10),
        (_M, 0, 0): (4, 11, 17, 2),
        (_M, 0, 1): (4, 16, 13, 3),
        (_M, 1, 0): (22, 4, 2, 10),
        (_M, 1, 1): (4, 19, 16, 3),
    },
    "run-20160407": {
        (_P, 0, 0): (60, 182, 164, 47),
        (_P, 0, 1): (50, 182, 196, 47),
        (_P, 1, 0): (51, 168, 182, 29),
        (_P, 1, 1): (195, 60, 62, 159),
        (_M, 0, 0): (62, 192, 175, 73),
        (_M, 0, 1): (31, 189, 184, 29),
        (_M, 1, 0): (213, 38, 44, 187),
        (_M, 1, 1): (77, 166, 165, 52),
    },
    "run-20160415": {
        (_P, 0, 0): (154, 483, 471, 135),
        (_P, 0, 1): (135, 471, 507, 107),
        (_P, 1, 0): (134, 499, 513, 117),
        (_P, 1, 1): (489, 160, 182, 443),
        (_M, 0, 0): (168, 443, 536, 149),
        (_M, 0, 1): (122, 492, 510, 117),
        (_M, 1, 0): (535, 115, 128, 461),
        (_M, 1, 1): (172, 439, 483, 130),
    },
    "run-20160614": {
        (_P, 0, 0): (118, 483, 510, 146),
        (_P, 0, 1): (144, 482, 450, 185),
        (_P, 1, 0): (161, 441, 427, 173),
        (_P, 1, 1): (506, 158, 127, 489),
        (_M, 0, 0): (133, 533, 537, 105),
        (_M, 0, 1): (162, 466, 410, 207),
        (_M, 1, 0): (431, 159, 160, 454),
        (_M, 1, 1): (104, 523, 484, 132),
    },
    # every event collected between Nov 2015 and Jun 2016, including
    # calibration runs; nothing sorted out
    "run-combined": {
        (_P, 0, 0): (778, 2621, 2770, 804),
        (_P, 0, 1): (809, 2629, 2708, 816),
        (_P, 1, 0): (873, 2686, 2644, 730),
        (_P, 1, 1): (2696, 966, 902, 2453),
        (_M, 0, 0): (817, 2596, 2873, 742),
        (_M, 0, 1): (696, 2570, 2788, 772),
        (_M, 1, 0): (2783, 787, 840, 2503),
        (_M, 1, 1): (865, 2620, 2640, 791),
    },
}

RUN_IDS = tuple(_RUN_COUNTS)

_OUTCOMES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def run_counts(run_id: str) -> dict:
    if run_id not in _RUN_COUNTS:
        raise DomainError(f"unknown run {run_id!r}; known: {', '.join(RUN_IDS)}")
    return dict(_RUN_COUNTS[run_id])


def correlation_table(run_id: str) -> CorrelationTable:
    return CorrelationTable.from_cells(run_counts(run_id))


def _herald_stream(counts, herald):
    """All (a, b, x, y) rows of one herald, cells in fixed order."""
    rows = []
    for a, b in PAIRS:
        quad = counts[(herald, a, b)]
        for (x, y), n in zip(_OUTCOMES, quad):
            rows.extend([(a, b, x, y)] * n)
    return rows


def dataset(run_id: str) -> RunDataset:
    """Reconstructed event stream: heralds interleaved round-robin."""
    counts = run_counts(run_id)
    plus = _herald_stream(counts, _P)
    minus = _herald_stream(counts, _M)
    n = len(plus) + len(minus)
    h = np.empty(n, dtype=np.int8)
    a = np.empty(n, dtype=np.uint8)
    b = np.empty(n, dtype=np.uint8)
    x = np.empty(n, dtype=np.int8)
    y = np.empty(n, dtype=np.int8)
    ip = im = 0
    for i in range(n):
        take_plus = (i % 2 == 0 and ip < len(plus)) or im >= len(minus)
        if take_plus:
            h[i] = _P
            a[i], b[i], x[i], y[i] = plus[ip]
            ip += 1
        else:
            h[i] = _M
            a[i], b[i], x[i], y[i] = minus[im]
            im += 1
    return RunDataset(h, a, b, x, y, tau=GOLDEN_TAU, label=run_id)


def _manifest(run_id: str) -> dict:
    return {
        "run_id": run_id,
        "events": f"{run_id}.events",
        "tau": GOLDEN_TAU,
        "angles": {"alpha": 0.0, "alpha_prime": 90.0, "beta": -45.0, "beta_prime": 45.0},
        "note": ("reconstructed from aggregated outcome counts; within-cell "
                 "ordering is synthetic (fixed), heralds interleaved round-robin"),
    }


def write_fixture_tree(out_dir, runs=RUN_IDS) -> list[Path]:
    """Emit event files plus manifests for the requested runs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for run_id in runs:
        ds = dataset(run_id)
        events_path = out_dir / f"{run_id}.events"
        write_events(ds, events_path, header=_manifest(run_id)["note"])
        manifest_path = out_dir / f"{run_id}.manifest.json"
        manifest_path.write_text(json.dumps(_manifest(run_id), indent=2, sort_keys=True) + "\n")
        written.extend([events_path, manifest_path])
    return written


def fixture_path(run_id: str) -> Path:
    """Path of the packaged event file for a run."""
    if run_id not in _RUN_COUNTS:
        raise DomainError(f"unknown run {run_id!r}; known: {', '.join(RUN_IDS)}")
    res = importlib.resources.files("bellcert") / "data" / f"{run_id}.events"
    return Path(str(res))


def load_run(run_id: str) -> RunDataset:
    """The packaged fixture dataset (parsed from the shipped event file)."""
    from .eventio import read_events

    return read_events(fixture_path(run_id), tau=GOLDEN_TAU, label=run_id)
