"""Seeded path sampling and likelihood-ratio diagnostics.

Sampling is driven by the counter-based generator in rng.py: path number p
consumes the stream seeded by (seed XOR p), one counter value per time step.
Results are therefore bit-identical for a fixed seed no matter how the paths
are batched or parallelized; merging is by path index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CanonicalChain, require_compatible
from .rng import stream_seeds, uniforms

#: Reserved value standing in for log 0 in trajectory output.  exp() of it
#: underflows to exactly 0.0, and summaries exclude it from log averages.
LOG_SENTINEL = -1.0e308


def _pick(cum_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw per row; never selects a zero-probability state.

    ``cum_rows`` are row cumulative sums; u is rescaled by the actual row
    total (compensating float drift in the last entry) and nudged strictly
    below it so the count of entries <= u always lands on a positive cell.
    """
    last = cum_rows[:, -1]
    scaled = np.minimum(u * last, np.nextafter(last, -np.inf))
    return (cum_rows <= scaled[:, None]).sum(axis=1)


def _stepped(chain: CanonicalChain, n: int, count: int, seed: int, first_path: int):
    """Yield (k, states_k) for k = 1..n, sampling all ``count`` paths in lockstep."""
    streams = stream_seeds(seed, first_path, count)
    lam_cum = np.cumsum(chain.lambda1)[None, :]
    states = _pick(np.broadcast_to(lam_cum, (count, lam_cum.shape[1])), uniforms(streams, 0))
    yield 1, states
    for k in range(1, n):
        cum = np.cumsum(chain.transition_at(k), axis=1)
        states = _pick(cum[states], uniforms(streams, k))
        yield k + 1, states


def sample_paths(chain: CanonicalChain, n: int, count: int, seed: int,
                 first_path: int = 0) -> np.ndarray:
    """``count`` independent paths of length n from the exact law, as (count, n) indices."""
    if count < 1:
        raise ValueError("count must be positive")
    if n < 1:
        raise ValueError("time indices start at 1")
    out = np.empty((count, n), dtype=np.int16)
    for k, states in _stepped(chain, n, count, seed, first_path):
        out[:, k - 1] = states
    return out


def _log_ratio_steps(a: CanonicalChain, b: CanonicalChain, n: int, count: int,
                     seed: int, first_path: int):
    """Sample under b and yield (k, log z_k) increments per path."""
    require_compatible(a, b)
    # log-ratio tables may contain -inf (a-null cells) and NaN (cells null for
    # both); sampling under b never gathers the NaN cells.
    with np.errstate(divide="ignore", invalid="ignore"):
        log_lam = np.log(a.lambda1) - np.log(b.lambda1)
    prev = None
    log_z = None
    for k, states in _stepped(b, n, count, seed, first_path):
        if k == 1:
            log_z = log_lam[states].copy()
        else:
            pa = a.transition_at(k - 1)
            pb = b.transition_at(k - 1)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.log(pa) - np.log(pb)
            log_z = log_z + step[prev, states]
        prev = states
        yield k, log_z


@dataclass(frozen=True)
class TrajectoryBatch:
    """Log likelihood-ratio series sampled under the second measure.

    ``log_z[p, k-1]`` is log z_k along path p; paths that hit a transition
    null for the first measure carry LOG_SENTINEL from that point on.
    """

    seed: int
    horizon: int
    count: int
    log_z: np.ndarray

    def terminal(self) -> np.ndarray:
        return self.log_z[:, -1]

    def summary(self, threshold: float) -> dict:
        """Martingale mean and the mass already driven below -threshold."""
        term = self.terminal()
        sentinel = term <= LOG_SENTINEL
        with np.errstate(under="ignore"):
            z = np.exp(term)  # sentinel underflows to exactly 0, as it should
        mean = float(z.mean())
        stderr = float(z.std(ddof=1) / np.sqrt(self.count)) if self.count > 1 else float("inf")
        finite = term[~sentinel]
        return {
            "count": self.count,
            "horizon": self.horizon,
            "threshold": float(threshold),
            "fraction_below_threshold": float((term < -threshold).mean()),
            "mean_z": mean,
            "mean_z_stderr": stderr,
            "confidence_radius": 4.0 * stderr,
            "sentinel_count": int(sentinel.sum()),
            "mean_log_z_finite": float(finite.mean()) if finite.size else None,
            "median_log_z": float(np.median(term)),
        }


def loglr_trajectories(a: CanonicalChain, b: CanonicalChain, n: int, count: int,
                       seed: int, first_path: int = 0) -> TrajectoryBatch:
    """Full log likelihood-ratio trajectories under the second measure."""
    if count < 1:
        raise ValueError("count must be positive")
    out = np.empty((count, n))
    for k, log_z in _log_ratio_steps(a, b, n, count, seed, first_path):
        out[:, k - 1] = log_z
    out[np.isneginf(out)] = LOG_SENTINEL
    return TrajectoryBatch(int(seed), n, count, out)


def terminal_log_ratios(a: CanonicalChain, b: CanonicalChain, n: int, count: int,
                        seed: int, first_path: int = 0) -> np.ndarray:
    """Only log z_n per path (memory-light variant for long horizons)."""
    last = None
    for _, log_z in _log_ratio_steps(a, b, n, count, seed, first_path):
        last = log_z
    out = np.array(last)
    out[np.isneginf(out)] = LOG_SENTINEL
    return out


@dataclass(frozen=True)
class WeightSequence:
    """Weights a_n = scale * n**-exponent (exponent 0 gives a constant sequence)."""

    scale: float = 1.0
    exponent: float = 0.0

    def value_at(self, n) -> np.ndarray:
        return self.scale * np.asarray(n, dtype=float) ** -self.exponent


def fatou_diagnostic(chain: CanonicalChain, weights: WeightSequence, s: int,
                     horizon: int, threshold: float, count: int, seed: int) -> dict:
    """Monte Carlo estimate of P(sum_{n<=N} a_n 1{state_n = s} >= C).

    For divergent weight sums on chains with positive occupation certificates
    the hit probability tends to one; the estimate comes with a 4-sigma
    binomial confidence radius.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    totals = np.zeros(count)
    for k, states in _stepped(chain, horizon, count, seed, 0):
        totals += weights.value_at(k) * (states == s)
    p_hat = float((totals >= threshold).mean())
    radius = 4.0 * float(np.sqrt(p_hat * (1.0 - p_hat) / count))
    return {
        "estimate": p_hat,
        "confidence_radius": radius,
        "count": count,
        "horizon": horizon,
        "threshold": float(threshold),
    }
