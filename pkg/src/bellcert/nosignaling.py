"""Setting-independence and no-signaling checks.

Two classical tests, both two-sided: a two-proportion z-test for mutual
independence of the two setting bits, and a pooled-variance two-sample
t-test comparing local outcome means across the remote setting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special

from .errors import ComputationError, DomainError
from .events import RunDataset

__all__ = [
    "ContingencyTable2x2",
    "ZTestResult",
    "TTestResult",
    "setting_independence_ztest",
    "nosignal_ttest",
    "NoSignalingTables",
    "build_tables",
    "normal_cdf",
    "student_t_cdf",
]


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def student_t_cdf(t: float, df: float) -> float:
    """CDF of Student's t via the regularized incomplete beta function."""
    if df <= 0:
        raise DomainError("degrees of freedom must be positive")
    x = df / (df + t * t)
    p = 0.5 * special.betainc(0.5 * df, 0.5, x)
    return 1.0 - p if t > 0 else p


@dataclass(frozen=True)
class ContingencyTable2x2:
    """Counts n[row][col]; row/column meanings carried in the labels."""

    n00: int
    n01: int
    n10: int
    n11: int
    row_label: str = "row"
    col_label: str = "col"

    def __post_init__(self):
        if min(self.n00, self.n01, self.n10, self.n11) < 0:
            raise DomainError("counts must be non-negative")
        if self.total < 1:
            raise DomainError("table must contain at least one event")

    @property
    def total(self) -> int:
        return self.n00 + self.n01 + self.n10 + self.n11

    @property
    def row_totals(self) -> tuple[int, int]:
        return self.n00 + self.n01, self.n10 + self.n11

    @property
    def col_totals(self) -> tuple[int, int]:
        return self.n00 + self.n10, self.n01 + self.n11


@dataclass(frozen=True)
class ZTestResult:
    z: float
    pvalue: float


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    pvalue: float


def setting_independence_ztest(table: ContingencyTable2x2) -> ZTestResult:
    """Two-sided two-proportion z-test of P(col=1 | row) across rows."""
    r0, r1 = table.row_totals
    if r0 < 1 or r1 < 1:
        raise DomainError("both rows need at least one event")
    pooled = (table.n01 + table.n11) / table.total
    if not 0.0 < pooled < 1.0:
        raise ComputationError("degenerate pooled proportion")
    se = math.sqrt(pooled * (1.0 - pooled) * (1.0 / r0 + 1.0 / r1))
    z = (table.n01 / r0 - table.n11 / r1) / se
    return ZTestResult(z=z, pvalue=2.0 * (1.0 - normal_cdf(abs(z))))


def nosignal_ttest(table: ContingencyTable2x2) -> TTestResult:
    """Two-sided pooled-variance t-test on +-1 outcome means.

    Rows are the two remote-setting groups; columns count +1 and -1
    outcomes in each group.
    """
    n0, n1 = table.row_totals
    if n0 < 2 or n1 < 2:
        raise DomainError("both groups need at least two samples")
    m0 = (table.n00 - table.n01) / n0
    m1 = (table.n10 - table.n11) / n1
    # sample variance of +-1 data: (n - n*m^2)/(n - 1)
    v0 = n0 * (1.0 - m0 * m0) / (n0 - 1)
    v1 = n1 * (1.0 - m1 * m1) / (n1 - 1)
    df = n0 + n1 - 2
    pooled = ((n0 - 1) * v0 + (n1 - 1) * v1) / df
    if pooled <= 0.0:
        raise ComputationError("zero variance in both groups")
    t = (m0 - m1) / math.sqrt(pooled * (1.0 / n0 + 1.0 / n1))
    return TTestResult(t=t, df=df, pvalue=2.0 * (1.0 - student_t_cdf(abs(t), df)))


@dataclass(frozen=True)
class NoSignalingTables:
    settings: ContingencyTable2x2      # a rows, b columns
    y_by_a: ContingencyTable2x2        # side-2 outcome grouped by side-1 setting
    x_by_b: ContingencyTable2x2        # side-1 outcome grouped by side-2 setting


def build_tables(dataset: RunDataset) -> NoSignalingTables:
    """Extract the three 2x2 tables the independence checks run on."""
    if len(dataset) == 0:
        raise DomainError("empty dataset")
    a = dataset.a.astype(int)
    b = dataset.b.astype(int)
    xpos = (dataset.x > 0).astype(int)
    ypos = (dataset.y > 0).astype(int)

    def counts(row, col):
        flat = (row * 2 + col)
        binned = [int((flat == v).sum()) for v in range(4)]
        return binned

    settings = ContingencyTable2x2(*counts(a, b), row_label="a", col_label="b")
    # columns ordered (+1, -1) as in the published layout
    y_by_a = ContingencyTable2x2(*counts(a, 1 - ypos), row_label="a", col_label="y")
    x_by_b = ContingencyTable2x2(*counts(b, 1 - xpos), row_label="b", col_label="x")
    return NoSignalingTables(settings=settings, y_by_a=y_by_a, x_by_b=x_by_b)
