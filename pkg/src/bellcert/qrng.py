"""Auditing of setting-choice bit streams and the predictability budget.

Stream statistics (all exact integer reductions until the final division):

* bias           B = n1/n - 1/2, with n1 the number of ones,
* serial corr.   SCC_l = sum (q_k - 1/2)(q_{k+l} - 1/2) / sum (q_k - 1/2)^2,
  uncorrected for bias,
* serial test    chi^2 of non-overlapping L-bit block frequencies.

The physical predictability budget combines a measured output bias, the
comparator threshold noise (an erf-model worst case pushed through the
bias-vs-threshold calibration curve) and the temperature sensitivity of
the threshold into a single worst-case tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from . import kernels
from .errors import DataFormatError, DomainError

__all__ = [
    "BitStream",
    "bias",
    "scc",
    "windowed_evolution",
    "serial_test",
    "xor_reduction",
    "QuadraticBiasCurve",
    "ThresholdNoise",
    "TemperatureSensitivity",
    "PredictabilityBudget",
    "BudgetResult",
    "predictability_budget",
    "PAPER_BUDGET",
]

MAX_LAG = 56  # largest lag the deployed generators were audited at


class BitStream:
    """A 0/1 sequence with convenience constructors for both wire formats."""

    def __init__(self, bits, label: str = ""):
        self.bits = np.ascontiguousarray(bits, dtype=np.uint8)
        if self.bits.max(initial=0) > 1:
            raise DomainError("bits must be 0 or 1")
        self.label = label

    def __len__(self) -> int:
        return len(self.bits)

    @classmethod
    def from_packed(cls, raw: bytes, label: str = "") -> "BitStream":
        """8 bits per byte, least-significant bit first."""
        arr = np.frombuffer(raw, dtype=np.uint8)
        return cls(np.unpackbits(arr, bitorder="little"), label)

    @classmethod
    def from_ascii(cls, text: str, label: str = "") -> "BitStream":
        """'0'/'1' characters; whitespace is ignored."""
        out = []
        for i, ch in enumerate(text):
            if ch in "01":
                out.append(ord(ch) - 48)
            elif not ch.isspace():
                raise DataFormatError(f"invalid bit character {ch!r}", field=f"offset {i}")
        return cls(np.array(out, dtype=np.uint8), label)

    def to_packed(self) -> bytes:
        return np.packbits(self.bits, bitorder="little").tobytes()

    def complemented(self) -> "BitStream":
        return BitStream(1 - self.bits, self.label)

    def reversed(self) -> "BitStream":
        return BitStream(self.bits[::-1], self.label)


def _as_bits(stream) -> np.ndarray:
    return stream.bits if isinstance(stream, BitStream) else np.ascontiguousarray(stream, dtype=np.uint8)


def bias(stream) -> tuple[float, float]:
    """(B, sigma): B = n1/n - 1/2 counting ones, sigma = 1/(2 sqrt(n))."""
    bits = _as_bits(stream)
    n = len(bits)
    if n < 1:
        raise DomainError("empty bit stream")
    n1 = kernels.count_ones(bits)
    return (2 * n1 - n) / (2 * n), 0.5 / math.sqrt(n)


def scc(stream, lag: int) -> float:
    """Lag-l serial correlation coefficient around 1/2.

    Products of centered bits take the values +-1/4, so the ratio reduces to
    (2*agreements - (n - l)) / n, evaluated in exact integer arithmetic.
    """
    bits = _as_bits(stream)
    n = len(bits)
    if lag < 1:
        raise DomainError(f"lag must be >= 1, got {lag}")
    if lag >= n:
        raise DomainError(f"lag {lag} needs a stream longer than {lag} bits")
    agree = int(kernels.bit_agreements(bits, lag)[lag - 1])
    return (2 * agree - (n - lag)) / n


def scc_profile(stream, max_lag: int = MAX_LAG) -> np.ndarray:
    """SCC_l for l = 1..max_lag in one pass over the stream."""
    bits = _as_bits(stream)
    n = len(bits)
    if max_lag < 1 or max_lag >= n:
        raise DomainError("need 1 <= max_lag < stream length")
    agree = kernels.bit_agreements(bits, max_lag)
    lags = np.arange(1, max_lag + 1)
    return (2 * agree - (n - lags)) / n


def scc_sigma(n: int) -> float:
    """Null-hypothesis standard error of SCC on n bits."""
    return 1.0 / math.sqrt(n)


def windowed_evolution(stream, statistic: str, window: int):
    """Per-window bias or SCC_1 with the corresponding +-sigma band.

    Returns (values, sigma) where sigma is the per-window null standard
    error. The trailing partial window is dropped.
    """
    bits = _as_bits(stream)
    if window < 1:
        raise DomainError("window must be >= 1")
    if statistic not in ("bias", "scc1"):
        raise DomainError(f"unknown statistic {statistic!r}")
    nwin = len(bits) // window
    if nwin == 0:
        raise DomainError("stream shorter than one window")
    values = np.empty(nwin, dtype=np.float64)
    for i in range(nwin):
        chunk = bits[i * window:(i + 1) * window]
        values[i] = bias(chunk)[0] if statistic == "bias" else scc(chunk, 1)
    sigma = 0.5 / math.sqrt(window) if statistic == "bias" else scc_sigma(window)
    return values, sigma


def serial_test(stream, block_length: int) -> float:
    """Chi-square goodness-of-fit p-value of non-overlapping L-bit blocks.

    Tests the 2^L block frequencies against uniformity (2^L - 1 degrees of
    freedom, upper tail). Requires at least 5 expected counts per pattern.
    """
    bits = _as_bits(stream)
    if block_length < 1:
        raise DomainError("block length must be >= 1")
    cells = 1 << block_length
    nblocks = len(bits) // block_length
    if nblocks < 5 * cells:
        raise DomainError(
            f"need at least {5 * cells} blocks of {block_length} bits, got {nblocks}")
    counts = kernels.block_counts(bits, block_length)
    expected = nblocks / cells
    stat = float(((counts - expected) ** 2).sum() / expected)
    return float(chi2.sf(stat, cells - 1))


def xor_reduction(tau: float, depth: int) -> float:
    """Predictability after XOR-combining `depth` successive bits.

    Piling-up composition of independent biases: 2^(k-1) * tau^k.
    """
    if depth < 1:
        raise DomainError(f"depth must be >= 1, got {depth}")
    if not 0.0 <= tau <= 0.5:
        raise DomainError(f"tau must lie in [0, 1/2], got {tau}")
    return 2.0 ** (depth - 1) * tau ** depth


# --- physical predictability budget ------------------------------------


@dataclass(frozen=True)
class QuadraticBiasCurve:
    """Bias versus comparator threshold, as a quadratic around the set point.

    The deployed generators are tuned to the curve's minimum, so the local
    model is B(v) = B0 + curvature * (v - set_point)^2 over the measured
    scan range. The curve itself is a calibration input (digitized from the
    generator characterization); only the tau components derived from it
    are checked against the published budget.
    """

    set_point_mv: float = -8.785
    curvature_per_mv2: float = 2.531e-4
    scan_halfwidth_mv: float = 4.412

    def __post_init__(self):
        if self.curvature_per_mv2 < 0 or self.scan_halfwidth_mv <= 0:
            raise DomainError("curve parameters must be non-negative")

    def excursion(self, delta_mv: float) -> float:
        """Bias shift for a threshold deviation of delta_mv from set point."""
        return self.curvature_per_mv2 * delta_mv * delta_mv

    @property
    def max_scan_slope(self) -> float:
        """Largest |dB/dv| anywhere in the measured scan range (per mV)."""
        return 2.0 * self.curvature_per_mv2 * self.scan_halfwidth_mv


@dataclass(frozen=True)
class ThresholdNoise:
    """Erf model of the comparator noise feature (all values in mV).

    mu1/sigma1 describe the rising slope of the integrated noise histogram,
    mu2/sigma2 the falling slope.
    """

    mu1_mv: float = -9.09
    sigma1_mv: float = 0.13
    mu2_mv: float = -8.48
    sigma2_mv: float = 0.25

    def __post_init__(self):
        if self.sigma1_mv < 0 or self.sigma2_mv < 0:
            raise DomainError("noise widths must be non-negative")

    def worst_deviation(self, set_point_mv: float, confidence: float) -> float:
        """Largest |threshold - set point| within the confidence interval."""
        lo = self.mu1_mv - confidence * self.sigma1_mv
        hi = self.mu2_mv + confidence * self.sigma2_mv
        return max(abs(set_point_mv - lo), abs(hi - set_point_mv))


@dataclass(frozen=True)
class TemperatureSensitivity:
    """Threshold drift via comparator offset and DAC temperature coefficients."""

    coefficient_v_per_degc: float = 2e-5  # both sources added up
    excursion_degc: float = 0.15

    def __post_init__(self):
        if self.coefficient_v_per_degc < 0 or self.excursion_degc < 0:
            raise DomainError("temperature parameters must be non-negative")

    @property
    def drift_mv(self) -> float:
        return self.coefficient_v_per_degc * self.excursion_degc * 1e3


@dataclass(frozen=True)
class PredictabilityBudget:
    """Inputs for the two predictability models of the deployed generators."""

    max_observed_bias: float = 8.74e-6
    bias_sigma: float = 8.33e-7
    bias_confidence: float = 2.0
    noise: ThresholdNoise = field(default_factory=ThresholdNoise)
    noise_confidence: float = 5.0
    temperature: TemperatureSensitivity = field(default_factory=TemperatureSensitivity)
    curve: QuadraticBiasCurve = field(default_factory=QuadraticBiasCurve)

    def __post_init__(self):
        if self.max_observed_bias < 0 or self.bias_sigma < 0:
            raise DomainError("bias budget components must be non-negative")
        if self.bias_confidence < 0 or self.noise_confidence < 0:
            raise DomainError("confidence multipliers must be non-negative")


@dataclass(frozen=True)
class BudgetResult:
    tau1: float
    tau2: float
    bias_component: float
    threshold_component: float
    temperature_component: float


def predictability_budget(budget: PredictabilityBudget = None) -> BudgetResult:
    """Evaluate both predictability models.

    tau1 (reasonable model): worst observed bias plus a confidence margin.
    tau2 (paranoid model): sum of the bias component, the threshold-noise
    worst case within the confidence interval mapped through the bias curve,
    and the temperature drift mapped through the curve's worst-case slope.
    """
    if budget is None:
        budget = PredictabilityBudget()
    tau1 = budget.max_observed_bias + budget.bias_confidence * budget.bias_sigma
    deviation = budget.noise.worst_deviation(
        budget.curve.set_point_mv, budget.noise_confidence)
    threshold = budget.curve.excursion(deviation)
    temperature = budget.curve.max_scan_slope * budget.temperature.drift_mv
    tau2 = tau1 + threshold + temperature
    if tau2 > 0.5:
        raise DomainError("budget exceeds the meaningful range tau <= 1/2")
    return BudgetResult(
        tau1=tau1, tau2=tau2, bias_component=tau1,
        threshold_component=threshold, temperature_component=temperature,
    )


PAPER_BUDGET = PredictabilityBudget()
