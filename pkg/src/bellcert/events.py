"""Data model for event-ready CHSH trials and the S-parameter estimators.

An event-ready round is described by a herald tag h (+1 for the Psi+ state,
-1 for Psi-), two binary setting choices a, b (0 = unprimed angle, 1 =
primed) and two +-1 outcomes x, y. Datasets are stored column-wise as numpy
arrays; `TrialRecord` is the row view used for I/O and validation.

Estimator conventions (all reproduce the published run tables; see the test
suite for the golden checks):

* ``correlator``: E = (N_uu + N_dd - N_ud - N_du) / N with the binomial
  error sqrt((1 - E^2)/N).
* ``s_per_state``: S = sum_g g(a,b) E(a,b). Its quoted error uses the
  per-cell *sample* variance, sqrt(sum (1-E^2)/(N-1)); the inverse-variance
  weights used when combining the two herald states use the binomial form
  (the published tables follow exactly this mixed convention).
* ``s_event_based``: mean of f_i = 4 g^{h_i}(a_i,b_i) x_i y_i, which equals
  8 W / N - 4 identically; the error is the sample standard error of f_i.
* ``s_combined_event_based``: like ``s_per_state`` but evaluated on the
  mixed-herald stream, normalizing per setting pair with the per-event g
  sign. This is the estimator behind the "event based" row of the combined
  result tables.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .errors import ComputationError, DomainError

PSI_PLUS = 1
PSI_MINUS = -1
HERALDS = (PSI_PLUS, PSI_MINUS)

_HERALD_NAME = {PSI_PLUS: "psi+", PSI_MINUS: "psi-"}

#: Setting-pair iteration order used everywhere a table is walked.
PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class SettingAngles:
    """The four analysis directions, in spin-space degrees."""

    alpha: float = 0.0
    alpha_prime: float = 90.0
    beta: float = -45.0
    beta_prime: float = 45.0

    def side1(self, choice: int) -> float:
        return self.alpha_prime if choice else self.alpha

    def side2(self, choice: int) -> float:
        return self.beta_prime if choice else self.beta


DEFAULT_ANGLES = SettingAngles()


@dataclass(frozen=True)
class Setting:
    """One measurement direction: which observer, which choice, which angle."""

    side: int
    choice: int
    angle_deg: float

    def __post_init__(self):
        if self.side not in (1, 2):
            raise DomainError(f"side must be 1 or 2, got {self.side}")
        if self.choice not in (0, 1):
            raise DomainError(f"choice must be 0 or 1, got {self.choice}")

    @classmethod
    def side1(cls, choice: int, angles: SettingAngles = DEFAULT_ANGLES) -> "Setting":
        return cls(1, choice, angles.side1(choice))

    @classmethod
    def side2(cls, choice: int, angles: SettingAngles = DEFAULT_ANGLES) -> "Setting":
        return cls(2, choice, angles.side2(choice))


@dataclass(frozen=True)
class TrialRecord:
    """A single event-ready round."""

    herald: int
    a: int
    b: int
    x: int
    y: int
    index: int = 1
    timestamp_ns: int | None = None

    def __post_init__(self):
        if self.herald not in HERALDS:
            raise DomainError(f"herald must be +1 or -1, got {self.herald}")
        if self.a not in (0, 1) or self.b not in (0, 1):
            raise DomainError("setting choices must be 0 or 1")
        if self.x not in (-1, 1) or self.y not in (-1, 1):
            raise DomainError("outcomes must be +1 or -1")
        if self.index < 1:
            raise DomainError("index must be >= 1")


def g_sign(herald: int, a_choice: int, b_choice: int) -> int:
    """Target correlation sign for a setting pair under the given herald.

    +1 only for (primed, primed) under Psi+ and (primed, unprimed) under
    Psi-; -1 for every other combination.
    """
    if herald not in HERALDS:
        raise DomainError(f"herald must be +1 or -1, got {herald}")
    if a_choice not in (0, 1) or b_choice not in (0, 1):
        raise DomainError("setting choices must be 0 or 1")
    return int(kernels.G_TABLE[(1 - herald) // 2, a_choice, b_choice])


class RunDataset:
    """An ordered sequence of trials plus run metadata (column storage)."""

    def __init__(
        self,
        herald: np.ndarray,
        a: np.ndarray,
        b: np.ndarray,
        x: np.ndarray,
        y: np.ndarray,
        *,
        timestamps_ns: np.ndarray | None = None,
        angles: SettingAngles = DEFAULT_ANGLES,
        tau: float | None = None,
        label: str = "",
    ):
        self.herald = np.ascontiguousarray(herald, dtype=np.int8)
        self.a = np.ascontiguousarray(a, dtype=np.uint8)
        self.b = np.ascontiguousarray(b, dtype=np.uint8)
        self.x = np.ascontiguousarray(x, dtype=np.int8)
        self.y = np.ascontiguousarray(y, dtype=np.int8)
        self.timestamps_ns = (
            None if timestamps_ns is None else np.ascontiguousarray(timestamps_ns, dtype=np.int64)
        )
        self.angles = angles
        self.tau = tau
        self.label = label
        n = len(self.herald)
        for name in ("a", "b", "x", "y"):
            if len(getattr(self, name)) != n:
                raise DomainError(f"column {name!r} has mismatched length")
        if not np.isin(self.herald, (-1, 1)).all():
            raise DomainError("heralds must be +1 or -1")
        if self.a.max(initial=0) > 1 or self.b.max(initial=0) > 1:
            raise DomainError("setting choices must be 0 or 1")
        if not np.isin(self.x, (-1, 1)).all() or not np.isin(self.y, (-1, 1)).all():
            raise DomainError("outcomes must be +1 or -1")

    @classmethod
    def from_records(cls, records: Sequence[TrialRecord], **meta) -> "RunDataset":
        if records and any(r.timestamp_ns is not None for r in records):
            ts = np.array([r.timestamp_ns or 0 for r in records], dtype=np.int64)
        else:
            ts = None
        return cls(
            np.array([r.herald for r in records], dtype=np.int8),
            np.array([r.a for r in records], dtype=np.uint8),
            np.array([r.b for r in records], dtype=np.uint8),
            np.array([r.x for r in records], dtype=np.int8),
            np.array([r.y for r in records], dtype=np.int8),
            timestamps_ns=ts,
            **meta,
        )

    def __len__(self) -> int:
        return len(self.herald)

    def __iter__(self) -> Iterator[TrialRecord]:
        ts = self.timestamps_ns
        for i in range(len(self)):
            yield TrialRecord(
                int(self.herald[i]), int(self.a[i]), int(self.b[i]),
                int(self.x[i]), int(self.y[i]), index=i + 1,
                timestamp_ns=None if ts is None else int(ts[i]),
            )

    def subset(self, herald: int) -> "RunDataset":
        m = self.herald == herald
        return RunDataset(
            self.herald[m], self.a[m], self.b[m], self.x[m], self.y[m],
            timestamps_ns=None if self.timestamps_ns is None else self.timestamps_ns[m],
            angles=self.angles, tau=self.tau, label=self.label,
        )

    def flipped_side1(self) -> "RunDataset":
        """The dataset with every side-1 outcome inverted (x -> -x)."""
        return RunDataset(
            self.herald, self.a, self.b, -self.x, self.y,
            timestamps_ns=self.timestamps_ns, angles=self.angles,
            tau=self.tau, label=self.label,
        )


@dataclass(frozen=True)
class CellCounts:
    """Outcome counts of one (herald, setting-pair) cell."""

    n_uu: int
    n_ud: int
    n_du: int
    n_dd: int

    def __post_init__(self):
        if min(self.n_uu, self.n_ud, self.n_du, self.n_dd) < 0:
            raise DomainError("counts must be non-negative")

    @property
    def total(self) -> int:
        return self.n_uu + self.n_ud + self.n_du + self.n_dd

    @property
    def correlated(self) -> int:
        return self.n_uu + self.n_dd

    @property
    def anticorrelated(self) -> int:
        return self.n_ud + self.n_du


class CorrelationTable:
    """Per-(herald, setting pair) outcome counts.

    Backed by a uint64 array of shape (2 heralds, 2 a-choices, 2 b-choices,
    4 outcome pairs); counting never goes through floats.
    """

    def __init__(self, counts: np.ndarray):
        counts = np.asarray(counts, dtype=np.uint64)
        if counts.shape != (2, 2, 2, 4):
            raise DomainError(f"counts must have shape (2,2,2,4), got {counts.shape}")
        self.counts = counts

    @classmethod
    def from_dataset(cls, dataset: RunDataset) -> "CorrelationTable":
        return cls(kernels.accumulate_counts(
            dataset.herald, dataset.a, dataset.b, dataset.x, dataset.y))

    @classmethod
    def from_cells(cls, cells: dict[tuple[int, int, int], tuple[int, int, int, int]]) -> "CorrelationTable":
        """Build from {(herald, a_choice, b_choice): (uu, ud, du, dd)}."""
        counts = np.zeros((2, 2, 2, 4), dtype=np.uint64)
        for (herald, a, b), quad in cells.items():
            counts[(1 - herald) // 2, a, b, :] = quad
        return cls(counts)

    def cell(self, herald: int, a_choice: int, b_choice: int) -> CellCounts:
        quad = self.counts[(1 - herald) // 2, a_choice, b_choice]
        return CellCounts(*(int(v) for v in quad))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def total_for(self, herald: int) -> int:
        return int(self.counts[(1 - herald) // 2].sum())

    def __eq__(self, other) -> bool:
        return isinstance(other, CorrelationTable) and np.array_equal(self.counts, other.counts)

    def __add__(self, other: "CorrelationTable") -> "CorrelationTable":
        return CorrelationTable(self.counts + other.counts)


class EstimatorMethod(str, enum.Enum):
    PER_SETTING = "per_setting"
    EVENT_BASED = "event_based"
    WEIGHTED_MEAN = "weighted_mean"
    COMBINED_EVENT_BASED = "combined_event_based"


@dataclass(frozen=True)
class SEstimate:
    value: float
    sigma: float
    method: EstimatorMethod

    def __post_init__(self):
        if abs(self.value) > 4.0 + 1e-12:
            raise DomainError(f"|S| cannot exceed 4, got {self.value}")
        if self.sigma < 0:
            raise DomainError("sigma must be >= 0")


def correlator(cell: CellCounts) -> tuple[float, float]:
    """Correlator estimate E and its binomial error for one cell."""
    n = cell.total
    if n < 1:
        raise ComputationError("no events for setting pair")
    e = (cell.correlated - cell.anticorrelated) / n
    return e, math.sqrt((1.0 - e * e) / n)


def _cell_variances(table: CorrelationTable, herald: int, ddof: int):
    """Per-cell (g*E, variance) terms for one herald."""
    terms = []
    for a, b in PAIRS:
        cell = table.cell(herald, a, b)
        if cell.total <= ddof:
            raise ComputationError(
                f"empty setting-pair cell (herald {_HERALD_NAME[herald]}, a={a}, b={b})")
        e, _ = correlator(cell)
        terms.append((g_sign(herald, a, b) * e, (1.0 - e * e) / (cell.total - ddof)))
    return terms


def s_per_state(table: CorrelationTable, herald: int, *, sigma: str = "sample") -> SEstimate:
    """CHSH sum for one herald state from per-setting-pair correlators.

    ``sigma="sample"`` quotes the quadrature of per-cell sample standard
    errors, matching the published per-state values; ``sigma="binomial"``
    uses sqrt((1-E^2)/N) cells and is the variant whose inverse variance
    serves as the weight in `combine_states`.
    """
    if sigma not in ("sample", "binomial"):
        raise DomainError(f"unknown sigma convention {sigma!r}")
    terms = _cell_variances(table, herald, 1 if sigma == "sample" else 0)
    return SEstimate(
        value=sum(t[0] for t in terms),
        sigma=math.sqrt(sum(t[1] for t in terms)),
        method=EstimatorMethod.PER_SETTING,
    )


def wins(dataset: RunDataset) -> tuple[int, int]:
    """Total CHSH-game wins W and number of rounds N."""
    wp, n_p, wm, nm = kernels.count_wins(
        dataset.herald, dataset.a, dataset.b, dataset.x, dataset.y)
    return wp + wm, n_p + nm


def wins_by_herald(dataset: RunDataset) -> dict[int, tuple[int, int]]:
    wp, n_p, wm, nm = kernels.count_wins(
        dataset.herald, dataset.a, dataset.b, dataset.x, dataset.y)
    return {PSI_PLUS: (wp, n_p), PSI_MINUS: (wm, nm)}


def wins_from_table(table: CorrelationTable, herald: int) -> tuple[int, int]:
    """(W, N) for one herald computed from aggregated counts."""
    w = n = 0
    for a, b in PAIRS:
        cell = table.cell(herald, a, b)
        n += cell.total
        w += cell.correlated if g_sign(herald, a, b) > 0 else cell.anticorrelated
    return w, n


def s_event_based(dataset: RunDataset) -> SEstimate:
    """Mean of f_i = 4 g^{h_i}(a_i, b_i) x_i y_i; equals 8W/N - 4 exactly."""
    w, n = wins(dataset)
    if n < 1:
        raise ComputationError("empty dataset")
    value = (8 * w - 4 * n) / n
    if n > 1:
        # f_i takes only the values +-4, so the sample variance is a
        # function of the win fraction alone.
        var = (16.0 - value * value) * n / (n - 1)
        sigma = math.sqrt(var / n)
    else:
        sigma = 0.0
    return SEstimate(value=value, sigma=sigma, method=EstimatorMethod.EVENT_BASED)


def s_event_based_from_counts(w: int, n: int) -> float:
    if n < 1:
        raise ComputationError("empty dataset")
    if not 0 <= w <= n:
        raise DomainError("need 0 <= W <= N")
    return (8 * w - 4 * n) / n


def s_combined_event_based(table: CorrelationTable) -> SEstimate:
    """Mixed-herald CHSH sum normalized per setting pair.

    For each of the four setting pairs, both herald populations contribute
    g^h-signed correlation counts to a single per-pair estimate; the four
    estimates are summed. Reduces to `s_per_state` when only one herald is
    present.
    """
    value = 0.0
    var = 0.0
    for a, b in PAIRS:
        t = 0
        n = 0
        for herald in HERALDS:
            cell = table.cell(herald, a, b)
            t += g_sign(herald, a, b) * (cell.correlated - cell.anticorrelated)
            n += cell.total
        if n < 2:
            raise ComputationError(f"empty setting-pair cell (a={a}, b={b})")
        e = t / n
        value += e
        var += (1.0 - e * e) / (n - 1)
    return SEstimate(value=value, sigma=math.sqrt(var),
                     method=EstimatorMethod.COMBINED_EVENT_BASED)


def combine_states(s_plus: SEstimate, s_minus: SEstimate) -> SEstimate:
    """Inverse-variance weighted mean of the two per-state estimates."""
    if s_plus.sigma <= 0 or s_minus.sigma <= 0:
        raise DomainError("weighted mean needs strictly positive sigmas")
    wp = 1.0 / (s_plus.sigma * s_plus.sigma)
    wm = 1.0 / (s_minus.sigma * s_minus.sigma)
    return SEstimate(
        value=(s_plus.value * wp + s_minus.value * wm) / (wp + wm),
        sigma=math.sqrt(1.0 / (wp + wm)),
        method=EstimatorMethod.WEIGHTED_MEAN,
    )
