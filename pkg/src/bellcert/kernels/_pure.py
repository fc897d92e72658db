"""Numpy reference implementations of the hot kernels.

The compiled extension (``_speedups``) mirrors every function in this module
with identical semantics; both consume pre-drawn random arrays, so results are
bit-identical across backends.

Array conventions: heralds are int8 +1/-1, setting choices uint8 0/1
(0 = unprimed, 1 = primed), outcomes int8 +1/-1.

Strategy encoding: a deterministic strategy is an integer k in [0, 16) with
x(a) = 1 - 2*((k >> a) & 1) and y(b) = 1 - 2*((k >> (2 + b)) & 1).
"""

from __future__ import annotations

import numpy as np

# g^h(a,b) indexed by [h01, a, b] with h01 = 0 for psi+ (h=+1), 1 for psi-.
# +1 only at (primed, primed) under psi+ and (primed, unprimed) under psi-.
G_TABLE = np.full((2, 2, 2), -1, dtype=np.int8)
G_TABLE[0, 1, 1] = 1
G_TABLE[1, 1, 0] = 1

# Strategy that outputs anticorrelated pairs for every input: x = +1, y = -1.
ANTICORRELATE = 12

POLICY_LOSS_REACTIVE = 1
POLICY_HERALD_CONDITIONED = 2


def _h01(h: np.ndarray) -> np.ndarray:
    return ((1 - h.astype(np.int64)) // 2).astype(np.intp)


def accumulate_counts(h, a, b, x, y):
    """Count events into a (herald, a, b, outcome-pair) table.

    Outcome pairs are indexed 0..3 as (uu, ud, du, dd) where u is +1.
    Returns a uint64 array of shape (2, 2, 2, 4).
    """
    pair = (1 - x.astype(np.int64)) + (1 - y.astype(np.int64)) // 2
    flat = ((_h01(h) * 2 + a) * 2 + b) * 4 + pair
    counts = np.bincount(flat, minlength=32)
    return counts.reshape(2, 2, 2, 4).astype(np.uint64)


def win_flags(h, a, b, x, y):
    """1 where x*y matches g^h(a,b), else 0."""
    g = G_TABLE[_h01(h), a.astype(np.intp), b.astype(np.intp)]
    return (x.astype(np.int16) * y == g).astype(np.uint8)


def count_wins(h, a, b, x, y):
    """Return (wins_psi_plus, n_psi_plus, wins_psi_minus, n_psi_minus)."""
    w = win_flags(h, a, b, x, y)
    plus = h > 0
    n_plus = int(np.count_nonzero(plus))
    w_plus = int(np.count_nonzero(w[plus]))
    return w_plus, n_plus, int(w.sum()) - w_plus, len(h) - n_plus


def deterministic_outcomes(a, b, strategy):
    x = 1 - 2 * ((strategy >> a.astype(np.int8)) & 1)
    y = 1 - 2 * ((strategy >> (2 + b.astype(np.int8))) & 1)
    return x.astype(np.int8), y.astype(np.int8)


def quantum_outcomes(h, a, b, x, u, p_same):
    """Side-2 outcome correlated with x: y = x with prob p_same[h01,a,b]."""
    p = p_same[_h01(h), a.astype(np.intp), b.astype(np.intp)]
    y = np.where(u < p, x, -x).astype(np.int8)
    return x.astype(np.int8), y


def _policy_step(policy, k, kp, km, h01, a, b, win):
    """Advance per-trial strategy state after one round (vectorized)."""
    if policy == POLICY_LOSS_REACTIVE:
        # A loss flips the y output used this round; the new strategy would
        # have won the round just played.
        k ^= np.where(win == 0, np.uint8(1) << (2 + b), 0).astype(np.uint8)
    else:
        # Separate loss-reactive cycle per herald.
        lost = win == 0
        adv = lost & (h01 == 0)
        kp[adv] = (kp[adv] + 1) & 15
        adv = lost & (h01 == 1)
        km[adv] = (km[adv] + 1) & 15
        k[:] = np.where(h01 == 0, kp, km)
    return k


def memory_outcomes(policy, h, a, b):
    """Sequential memory-LHV outcomes for a single run."""
    n = len(h)
    x = np.empty(n, dtype=np.int8)
    y = np.empty(n, dtype=np.int8)
    h01 = _h01(h)
    k = kp = km = ANTICORRELATE
    for i in range(n):
        if policy == POLICY_HERALD_CONDITIONED:
            k = kp if h01[i] == 0 else km
        ai, bi = int(a[i]), int(b[i])
        xi = 1 - 2 * ((k >> ai) & 1)
        yi = 1 - 2 * ((k >> (2 + bi)) & 1)
        x[i], y[i] = xi, yi
        win = xi * yi == G_TABLE[h01[i], ai, bi]
        if not win:
            if policy == POLICY_LOSS_REACTIVE:
                k ^= 1 << (2 + bi)
            elif h01[i] == 0:
                kp = (kp + 1) & 15
            else:
                km = (km + 1) & 15
    return x, y


def memory_wins_batch(policy, h2, a2, b2):
    """Win totals for a batch of independent memory-LHV runs.

    h2/a2/b2 have shape (n_trials, n_events). Returns int64[n_trials].
    Vectorized across trials, sequential over events (the policy state
    depends on each trial's own history).
    """
    nt, n = h2.shape
    wins = np.zeros(nt, dtype=np.int64)
    k = np.full(nt, ANTICORRELATE, dtype=np.uint8)
    kp = np.full(nt, ANTICORRELATE, dtype=np.uint8)
    km = np.full(nt, ANTICORRELATE, dtype=np.uint8)
    h01_2 = _h01(h2.reshape(-1)).reshape(nt, n)
    for j in range(n):
        a = a2[:, j]
        b = b2[:, j]
        h01 = h01_2[:, j]
        if policy == POLICY_HERALD_CONDITIONED:
            k = np.where(h01 == 0, kp, km)
        bit = ((k >> a) ^ (k >> (2 + b))) & 1          # 1 where x*y = -1
        g_neg = (G_TABLE[h01, a.astype(np.intp), b.astype(np.intp)] < 0)
        win = (bit == 1) == g_neg
        wins += win
        k = _policy_step(policy, k, kp, km, h01, a, b, win.astype(np.uint8))
    return wins


def deterministic_wins_batch(strategy, h2, a2, b2):
    """Win totals per trial for a fixed deterministic strategy."""
    nt, n = h2.shape
    flat_w = win_flags(
        h2.reshape(-1), a2.reshape(-1), b2.reshape(-1),
        *deterministic_outcomes(a2.reshape(-1), b2.reshape(-1), strategy),
    )
    return flat_w.reshape(nt, n).sum(axis=1, dtype=np.int64)


def quantum_wins_batch(h2, a2, b2, x2, u2, p_same):
    nt, n = h2.shape
    x, y = quantum_outcomes(
        h2.reshape(-1), a2.reshape(-1), b2.reshape(-1),
        x2.reshape(-1), u2.reshape(-1), p_same,
    )
    flat_w = win_flags(h2.reshape(-1), a2.reshape(-1), b2.reshape(-1), x, y)
    return flat_w.reshape(nt, n).sum(axis=1, dtype=np.int64)


def bit_agreements(bits, max_lag):
    """Number of equal pairs (q_k, q_{k+l}) for each lag l = 1..max_lag."""
    n = len(bits)
    agree = np.empty(max_lag, dtype=np.int64)
    for lag in range(1, max_lag + 1):
        if lag >= n:
            agree[lag - 1] = 0
        else:
            agree[lag - 1] = np.count_nonzero(bits[:-lag] == bits[lag:])
    return agree


def count_ones(bits):
    return int(np.count_nonzero(bits))


def block_counts(bits, length):
    """Histogram of non-overlapping `length`-bit blocks (MSB first)."""
    nblocks = len(bits) // length
    weights = (1 << np.arange(length - 1, -1, -1)).astype(np.int64)
    vals = bits[: nblocks * length].reshape(nblocks, length).astype(np.int64) @ weights
    return np.bincount(vals, minlength=1 << length).astype(np.int64)
