"""Simulation of event-ready CHSH runs under local and quantum models.

The module serves two purposes: producing synthetic datasets in the same
shape as the experimental ones, and stress-testing the P-value bounds with
adversarial local models (deterministic strategies, history-dependent
"memory" strategies, and strategies exploiting setting bias).

Randomness comes from counter-based Philox streams keyed per trial
(key = master_seed * 2^64 + trial_index), so batches are reproducible
independently of chunking or scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import kernels
from .errors import DomainError
from .events import (
    DEFAULT_ANGLES,
    PSI_MINUS,
    PSI_PLUS,
    RunDataset,
    SettingAngles,
)
from .pvalues import Predictability, lhv_s_bound, log_tail_table, martingale_log_pvalue

__all__ = [
    "DeterministicStrategy",
    "OutcomeModel",
    "SettingSource",
    "HeraldModel",
    "enumerate_strategies",
    "strategy_expected_s",
    "optimal_biased_expected_s",
    "quantum_correlator",
    "simulate_run",
    "simulate_win_counts",
    "validate_bound",
    "expected_event_rate",
    "ALWAYS_ANTICORRELATE",
    "MEMORY_POLICIES",
]


@dataclass(frozen=True)
class DeterministicStrategy:
    """Pre-assigned +-1 outputs for each local setting choice.

    ``index`` encodes the strategy: bit 0/1 give x(unprimed)/x(primed),
    bits 2/3 give y(unprimed)/y(primed), with a set bit meaning -1.
    """

    index: int

    def __post_init__(self):
        if not 0 <= self.index < 16:
            raise DomainError(f"strategy index must be in [0, 16), got {self.index}")

    def x(self, a_choice: int) -> int:
        return 1 - 2 * ((self.index >> a_choice) & 1)

    def y(self, b_choice: int) -> int:
        return 1 - 2 * ((self.index >> (2 + b_choice)) & 1)

    @property
    def x_of(self) -> dict[int, int]:
        return {0: self.x(0), 1: self.x(1)}

    @property
    def y_of(self) -> dict[int, int]:
        return {0: self.y(0), 1: self.y(1)}


#: x = +1 and y = -1 for every input: anticorrelates all four setting pairs.
ALWAYS_ANTICORRELATE = DeterministicStrategy(kernels.ANTICORRELATE)

MEMORY_POLICIES = {
    "loss_reactive": kernels.POLICY_LOSS_REACTIVE,
    "herald_conditioned": kernels.POLICY_HERALD_CONDITIONED,
}


def enumerate_strategies() -> list[DeterministicStrategy]:
    """All 16 deterministic local strategies, in stable index order."""
    return [DeterministicStrategy(k) for k in range(16)]


def strategy_expected_s(strategy: DeterministicStrategy, herald: int) -> int:
    """Exact S expectation under unbiased settings (an even integer)."""
    from .events import g_sign

    return sum(
        g_sign(herald, a, b) * strategy.x(a) * strategy.y(b)
        for a in (0, 1) for b in (0, 1)
    )


def optimal_biased_expected_s(tau: float) -> float:
    """Best per-round S expectation over all 16 strategies at setting bias tau.

    Maximizes sum_ab 4 g(a,b) x(a) y(b) Pr(a) Pr(b) with Pr favouring each
    setting by tau; the result equals the closed form 2 + 8(tau - tau^2)
    for either herald.
    """
    from .events import g_sign

    pred = Predictability(tau)  # validates the domain
    p_a = (0.5 + pred.tau, 0.5 - pred.tau)
    p_b = (0.5 + pred.tau, 0.5 - pred.tau)
    best = -math.inf
    for herald in (PSI_PLUS, PSI_MINUS):
        for strat in enumerate_strategies():
            value = sum(
                4.0 * g_sign(herald, a, b) * strat.x(a) * strat.y(b) * p_a[a] * p_b[b]
                for a in (0, 1) for b in (0, 1)
            )
            best = max(best, value)
    return best


def quantum_correlator(herald: int, a_angle_deg: float, b_angle_deg: float,
                       visibility: float = 1.0) -> float:
    """Two-particle correlator of the heralded spin states at visibility V.

    E = -V cos(a - b) for the Psi- state and -V cos(a + b) for Psi+
    (angles in spin space).
    """
    if not 0.0 <= visibility <= 1.0:
        raise DomainError(f"visibility must lie in [0, 1], got {visibility}")
    a = math.radians(a_angle_deg)
    b = math.radians(b_angle_deg)
    phase = a - b if herald == PSI_MINUS else a + b
    return -visibility * math.cos(phase)


@dataclass(frozen=True)
class SettingSource:
    """Biased binary setting generator for both sides.

    Positive tau makes choice 0 (the unprimed angle) more likely, matching
    the bias convention of the LHV ceiling derivation.
    """

    tau_a: float = 0.0
    tau_b: float = 0.0

    def __post_init__(self):
        if not (abs(self.tau_a) <= 0.5 and abs(self.tau_b) <= 0.5):
            raise DomainError("setting biases must lie in [-1/2, 1/2]")

    @property
    def tau(self) -> float:
        return max(abs(self.tau_a), abs(self.tau_b))


@dataclass(frozen=True)
class OutcomeModel:
    """What produces the outcomes: an LHV rule or the quantum prediction."""

    kind: str
    strategy: DeterministicStrategy = ALWAYS_ANTICORRELATE
    policy: str = "loss_reactive"
    visibility: float = 1.0
    policy_fn: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("deterministic", "memory_lhv", "optimal_biased_lhv", "quantum"):
            raise DomainError(f"unknown model kind {self.kind!r}")
        if self.kind == "memory_lhv" and self.policy_fn is None and self.policy not in MEMORY_POLICIES:
            raise DomainError(f"unknown memory policy {self.policy!r}")
        if not 0.0 <= self.visibility <= 1.0:
            raise DomainError("visibility must lie in [0, 1]")

    @classmethod
    def deterministic(cls, strategy: DeterministicStrategy = ALWAYS_ANTICORRELATE):
        return cls("deterministic", strategy=strategy)

    @classmethod
    def memory(cls, policy: str = "loss_reactive", policy_fn: Callable | None = None):
        return cls("memory_lhv", policy=policy, policy_fn=policy_fn)

    @classmethod
    def optimal_biased(cls):
        return cls("optimal_biased_lhv")

    @classmethod
    def quantum(cls, visibility: float = 1.0):
        return cls("quantum", visibility=visibility)


@dataclass(frozen=True)
class HeraldModel:
    """Heralding statistics of the entanglement source."""

    p_herald: float = 0.7e-6
    attempt_rate: float = 5.2e4
    psi_plus_fraction: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.p_herald <= 1.0:
            raise DomainError("p_herald must lie in [0, 1]")
        if self.attempt_rate <= 0:
            raise DomainError("attempt_rate must be positive")
        if not 0.0 <= self.psi_plus_fraction <= 1.0:
            raise DomainError("psi_plus_fraction must lie in [0, 1]")


def expected_event_rate(herald: HeraldModel) -> float:
    """Event-ready rate in events per second."""
    return herald.p_herald * herald.attempt_rate


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed << 64) + trial))


def _draw_inputs(rng, n, source: SettingSource, psi_plus_fraction: float):
    h = np.where(rng.random(n) < psi_plus_fraction, 1, -1).astype(np.int8)
    a = (rng.random(n) >= 0.5 + source.tau_a).astype(np.uint8)
    b = (rng.random(n) >= 0.5 + source.tau_b).astype(np.uint8)
    return h, a, b


def _quantum_same_prob(visibility: float, angles: SettingAngles) -> np.ndarray:
    """P(y = x) per (herald, a, b) that realizes the quantum correlator."""
    p = np.empty((2, 2, 2), dtype=np.float64)
    for h01, herald in enumerate((PSI_PLUS, PSI_MINUS)):
        for a in (0, 1):
            for b in (0, 1):
                e = quantum_correlator(herald, angles.side1(a), angles.side2(b), visibility)
                p[h01, a, b] = 0.5 * (1.0 + e)
    return p


def _biased_optimal_strategies(source: SettingSource) -> dict[int, DeterministicStrategy]:
    """Per-herald optimal strategies for known bias signs, by brute force.

    The herald is announced before the measurements, so an adversary may
    switch strategies event for event; the optima differ between the two
    heralded states.
    """
    from .events import g_sign

    p_a = (0.5 + source.tau_a, 0.5 - source.tau_a)
    p_b = (0.5 + source.tau_b, 0.5 - source.tau_b)
    best = {}
    for herald in (PSI_PLUS, PSI_MINUS):
        best[herald] = max(
            enumerate_strategies(),
            key=lambda strat: sum(
                g_sign(herald, a, b) * strat.x(a) * strat.y(b) * p_a[a] * p_b[b]
                for a in (0, 1) for b in (0, 1)
            ),
        )
    return best


def _two_strategy_outcomes(h, a, b, strategies: dict[int, DeterministicStrategy]):
    xp, yp = kernels.deterministic_outcomes(a, b, strategies[PSI_PLUS].index)
    xm, ym = kernels.deterministic_outcomes(a, b, strategies[PSI_MINUS].index)
    plus = h > 0
    return (np.where(plus, xp, xm).astype(np.int8),
            np.where(plus, yp, ym).astype(np.int8))


def _python_memory_outcomes(policy_fn: Callable, h, a, b):
    """Arbitrary user policy: full prior transcript in, strategy out."""
    n = len(h)
    x = np.empty(n, dtype=np.int8)
    y = np.empty(n, dtype=np.int8)
    history: list[tuple[int, int, int, int, int]] = []
    for i in range(n):
        strat = policy_fn(tuple(history), int(h[i]))
        x[i] = strat.x(int(a[i]))
        y[i] = strat.y(int(b[i]))
        history.append((int(h[i]), int(a[i]), int(b[i]), int(x[i]), int(y[i])))
    return x, y


def simulate_run(
    model: OutcomeModel,
    source: SettingSource = SettingSource(),
    n_events: int = 1000,
    seed: int = 0,
    *,
    psi_plus_fraction: float = 0.5,
    angles: SettingAngles = DEFAULT_ANGLES,
    trial: int = 0,
    label: str = "",
) -> RunDataset:
    """Simulate one event-ready run; bit-identical for identical arguments."""
    if n_events < 1:
        raise DomainError(f"need n_events >= 1, got {n_events}")
    rng = _trial_rng(seed, trial)
    h, a, b = _draw_inputs(rng, n_events, source, psi_plus_fraction)
    if model.kind == "deterministic":
        x, y = kernels.deterministic_outcomes(a, b, model.strategy.index)
    elif model.kind == "optimal_biased_lhv":
        x, y = _two_strategy_outcomes(h, a, b, _biased_optimal_strategies(source))
    elif model.kind == "memory_lhv":
        if model.policy_fn is not None:
            x, y = _python_memory_outcomes(model.policy_fn, h, a, b)
        else:
            x, y = kernels.memory_outcomes(MEMORY_POLICIES[model.policy], h, a, b)
    else:
        xs = np.where(rng.random(n_events) < 0.5, 1, -1).astype(np.int8)
        u = rng.random(n_events)
        x, y = kernels.quantum_outcomes(
            h, a, b, xs, u, _quantum_same_prob(model.visibility, angles))
    return RunDataset(h, a, b, x, y, angles=angles, tau=source.tau,
                      label=label or f"sim-{model.kind}")


def simulate_win_counts(
    model: OutcomeModel,
    source: SettingSource,
    n_events: int,
    trials: int,
    seed: int = 0,
    *,
    psi_plus_fraction: float = 0.5,
    angles: SettingAngles = DEFAULT_ANGLES,
    chunk: int = 4096,
) -> np.ndarray:
    """Win count W of `trials` independent runs (the hot Monte-Carlo path)."""
    if n_events < 1 or trials < 1:
        raise DomainError("need n_events >= 1 and trials >= 1")
    out = np.empty(trials, dtype=np.int64)
    p_same = _quantum_same_prob(model.visibility, angles) if model.kind == "quantum" else None
    pair = _biased_optimal_strategies(source) if model.kind == "optimal_biased_lhv" else None
    for start in range(0, trials, chunk):
        nt = min(chunk, trials - start)
        h2 = np.empty((nt, n_events), dtype=np.int8)
        a2 = np.empty((nt, n_events), dtype=np.uint8)
        b2 = np.empty((nt, n_events), dtype=np.uint8)
        if model.kind == "quantum":
            x2 = np.empty((nt, n_events), dtype=np.int8)
            u2 = np.empty((nt, n_events), dtype=np.float64)
        for i in range(nt):
            rng = _trial_rng(seed, start + i)
            h2[i], a2[i], b2[i] = _draw_inputs(rng, n_events, source, psi_plus_fraction)
            if model.kind == "quantum":
                x2[i] = np.where(rng.random(n_events) < 0.5, 1, -1)
                u2[i] = rng.random(n_events)
        if model.kind == "quantum":
            w = kernels.quantum_wins_batch(h2, a2, b2, x2, u2, p_same)
        elif model.kind == "memory_lhv" and model.policy_fn is None:
            w = kernels.memory_wins_batch(MEMORY_POLICIES[model.policy], h2, a2, b2)
        elif model.kind == "memory_lhv":
            w = np.empty(nt, dtype=np.int64)
            for i in range(nt):
                x, y = _python_memory_outcomes(model.policy_fn, h2[i], a2[i], b2[i])
                w[i] = int(kernels.win_flags(h2[i], a2[i], b2[i], x, y).sum())
        elif model.kind == "optimal_biased_lhv":
            flat = (h2.reshape(-1), a2.reshape(-1), b2.reshape(-1))
            x, y = _two_strategy_outcomes(*flat, pair)
            w = kernels.win_flags(*flat, x, y).reshape(nt, n_events).sum(axis=1, dtype=np.int64)
        else:
            w = kernels.deterministic_wins_batch(model.strategy.index, h2, a2, b2)
        out[start:start + nt] = w
    return out


@dataclass(frozen=True)
class ExceedanceReport:
    """Empirical check that P(bound <= kappa) stays below kappa."""

    kappa: float
    trials: int
    n_events: int
    frequency_martingale: float
    frequency_game: float
    threshold: float  # kappa + 3 binomial sigma

    @property
    def martingale_sound(self) -> bool:
        return self.frequency_martingale <= self.threshold

    @property
    def game_sound(self) -> bool:
        return self.frequency_game <= self.threshold


def validate_bound(
    model: OutcomeModel,
    n_events: int,
    trials: int,
    kappa: float,
    *,
    source: SettingSource = SettingSource(),
    tau: float | Predictability = 0.0,
    seed: int = 0,
) -> ExceedanceReport:
    """Monte-Carlo soundness check of both P-value bounds.

    Simulates `trials` independent runs under `model`, computes both bounds
    per run (from the event-based S and the win count), and reports how often
    each bound drops to or below `kappa`. For any local model the frequency
    must stay within binomial fluctuation of kappa.
    """
    if trials < 1000:
        raise DomainError("need at least 1000 trials for a meaningful check")
    if not 0.0 < kappa < 1.0:
        raise DomainError("kappa must lie in (0, 1)")
    pred = tau if isinstance(tau, Predictability) else Predictability(float(tau))
    w = simulate_win_counts(model, source, n_events, trials, seed)
    # Both bounds are monotone functions of W at fixed N, so per-trial
    # P-values reduce to one precomputed table lookup.
    log_kappa = math.log(kappa)
    game_table = log_tail_table(n_events, pred.win_probability)
    s_of_w = (8.0 * np.arange(n_events + 1) - 4.0 * n_events) / n_events
    mart_table = np.array(
        [martingale_log_pvalue(s, n_events, pred.epsilon) for s in s_of_w])
    freq_m = float(np.count_nonzero(mart_table[w] <= log_kappa)) / trials
    freq_g = float(np.count_nonzero(game_table[w] <= log_kappa)) / trials
    threshold = kappa + 3.0 * math.sqrt(kappa * (1.0 - kappa) / trials)
    return ExceedanceReport(
        kappa=kappa, trials=trials, n_events=n_events,
        frequency_martingale=freq_m, frequency_game=freq_g,
        threshold=threshold,
    )
