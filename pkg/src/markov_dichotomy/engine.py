"""Exact dynamic programming on canonical chains.

Everything here is a pure function of immutable inputs: marginals, window
products, pair probabilities, Hellinger integrals of the likelihood-ratio
martingale, one-step conditional Hellinger discrepancies, and cylinder-event
conditioning by forward-backward recursion.  Costs are O(n * |states|^2), so
these are the production counterparts of the brute-force oracle module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    ONE_SIDED,
    CanonicalChain,
    conditioned_on_time_zero,
    require_compatible,
)


class NullEventError(ValueError):
    """Conditioning on an event of probability zero."""


class LocalContinuityError(ValueError):
    """A computation requires local absolute continuity and support containment fails."""


def marginal(chain: CanonicalChain, n: int) -> np.ndarray:
    """Law of the working process at time n >= 1 (lambda1 pushed through P_1..P_{n-1})."""
    if n < 1:
        raise ValueError("time indices start at 1")
    v = np.array(chain.lambda1)
    for k in range(1, n):
        v = v @ chain.transition_at(k)
    return v


def window_product(chain: CanonicalChain, n: int, m: int) -> np.ndarray:
    """Matrix product P_n P_{n+1} ... P_m (inclusive, m - n + 1 factors)."""
    if not 1 <= n <= m:
        raise ValueError(f"need 1 <= n <= m, got n={n}, m={m}")
    out = np.array(chain.transition_at(n))
    for k in range(n + 1, m + 1):
        out = out @ chain.transition_at(k)
    return out


def pair_probability(chain: CanonicalChain, n: int, m: int, s: int, t: int) -> float:
    """Probability of being at state s at time n and state t at time m > n."""
    if not 1 <= n < m:
        raise ValueError(f"need 1 <= n < m, got n={n}, m={m}")
    return float(marginal(chain, n)[s] * window_product(chain, n, m - 1)[s, t])


def hellinger_integral(a: CanonicalChain, b: CanonicalChain, n: int) -> float:
    """Expectation under b of the square root of the level-n likelihood ratio.

    Computed through the multiplicative structure of the ratio: start from
    r0(u) = sqrt(lambda1_a(u) * lambda1_b(u)) and apply the entrywise
    square-root-product matrices of each step.  Equals the summed square-root
    affinity of the two level-n path laws; 1 iff the laws agree, 0 iff they
    have disjoint supports.
    """
    require_compatible(a, b)
    if n < 1:
        raise ValueError("time indices start at 1")
    v = np.sqrt(a.lambda1 * b.lambda1)
    for k in range(1, n):
        v = v @ np.sqrt(a.transition_at(k) * b.transition_at(k))
    return float(v.sum())


def hellinger_trajectory(a: CanonicalChain, b: CanonicalChain, n_max: int) -> np.ndarray:
    """The integrals for n = 1..n_max as one incremental sweep.

    The sequence is nonincreasing (each factor matrix has row sums at most 1
    by Cauchy-Schwarz); callers rely on that monotonicity.
    """
    require_compatible(a, b)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    out = np.empty(n_max)
    v = np.sqrt(a.lambda1 * b.lambda1)
    out[0] = v.sum()
    for k in range(1, n_max):
        v = v @ np.sqrt(a.transition_at(k) * b.transition_at(k))
        out[k] = v.sum()
    return out


def local_hellinger(a: CanonicalChain, b: CanonicalChain, n: int, s: int) -> float:
    """Squared Hellinger discrepancy of the time-n transition rows at state s.

    sum_t (sqrt(P_n(s,t)) - sqrt(Q_n(s,t)))**2, in [0, 2].
    """
    require_compatible(a, b)
    if n < 1:
        raise ValueError("time indices start at 1")
    p = a.transition_at(n)[s]
    q = b.transition_at(n)[s]
    return float(((np.sqrt(p) - np.sqrt(q)) ** 2).sum())


def z_mean(a: CanonicalChain, b: CanonicalChain, n: int) -> float:
    """Mean under b of the level-n likelihood ratio of a against b.

    The ratio is a mean-one martingale, so the contract is 1 within 1e-12;
    the value is computed independently as the total a-mass flowing through
    b-positive steps.  Raises LocalContinuityError when a puts mass on a
    b-null start or transition among its reachable states up to level n
    (the ratio is undefined there).
    """
    require_compatible(a, b)
    if n < 1:
        raise ValueError("time indices start at 1")
    if np.any((a.lambda1 > 0) & (b.lambda1 == 0)):
        raise LocalContinuityError("level-1 law of the first measure escapes the second's support")
    v = np.array(a.lambda1)
    for k in range(1, n):
        p = a.transition_at(k)
        q = b.transition_at(k)
        bad = (v > 0)[:, None] & (p > 0) & (q == 0)
        if np.any(bad):
            i, j = map(int, np.argwhere(bad)[0])
            raise LocalContinuityError(
                f"transition ({i} -> {j}) at time {k} is possible for the first "
                "measure but null for the second"
            )
        v = v @ p
    return float(v.sum())


# ---------------------------------------------------------------------------
# Cylinder events and conditioning.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderEvent:
    """Finite conjunction of single-coordinate constraints, index -> symbol.

    One-sided measures accept indices >= 0; two-sided measures accept any
    integers, where index k > 0 pins the right coordinate of the working
    state at time k, index k < 0 pins the left coordinate at time |k|, and
    index 0 pins the time-0 symbol.
    """

    constraints: tuple

    def __post_init__(self):
        items = tuple(sorted((int(i), str(s)) for i, s in self.constraints))
        indices = [i for i, _ in items]
        if len(set(indices)) != len(indices):
            raise ValueError("cylinder event indices must be distinct")
        object.__setattr__(self, "constraints", items)

    @classmethod
    def of(cls, mapping) -> "CylinderEvent":
        return cls(tuple(mapping.items()))

    @property
    def span(self) -> int:
        """Largest constrained |index| (0 for the empty event)."""
        return max((abs(i) for i, _ in self.constraints), default=0)

    def is_empty(self) -> bool:
        return not self.constraints


def event_masks(chain: CanonicalChain, event: CylinderEvent):
    """Translate an event into per-level boolean masks over the working states.

    Returns (time0_symbol_or_None, {level >= 1: mask vector}).  Constraints
    sharing a level (a two-sided +-n pair) are intersected componentwise.
    """
    k = len(chain.alphabet)
    time0 = None
    levels: dict[int, np.ndarray] = {}

    def narrow(level: int, cond: np.ndarray) -> None:
        prev = levels.get(level, np.ones(chain.n_states, dtype=bool))
        levels[level] = prev & cond

    for idx, sym in event.constraints:
        j = chain.symbol_index(sym)
        if idx == 0:
            time0 = sym
            continue
        if chain.sided == ONE_SIDED:
            if idx < 0:
                raise ValueError("one-sided events use indices >= 0")
            narrow(idx, np.arange(k) == j)
        else:
            pairs = np.arange(k * k)
            if idx > 0:
                narrow(idx, (pairs % k) == j)
            else:
                narrow(-idx, (pairs // k) == j)
    return time0, levels


def _prepared(chain: CanonicalChain, event: CylinderEvent):
    """Apply any time-0 constraint and return (chain', level masks, time-0 mass)."""
    time0, levels = event_masks(chain, event)
    mass0 = 1.0
    if time0 is not None:
        if chain.pi0 is None:
            raise ValueError(
                "conditioning at index 0 requires a chain built with canonicalize()"
            )
        mass0 = float(chain.pi0[chain.symbol_index(time0)])
        chain = conditioned_on_time_zero(chain, time0)
    return chain, levels, mass0


def _forward(chain: CanonicalChain, levels, up_to: int) -> list:
    """Masked forward vectors alpha_1..alpha_{up_to} (index 0 unused)."""
    alphas = [None] * (up_to + 1)
    v = np.array(chain.lambda1)
    if 1 in levels:
        v = v * levels[1]
    alphas[1] = v
    for k in range(1, up_to):
        v = v @ chain.transition_at(k)
        if k + 1 in levels:
            v = v * levels[k + 1]
        alphas[k + 1] = v
    return alphas


def _backward(chain: CanonicalChain, levels, frm: int, to: int) -> np.ndarray:
    """beta_{frm}: probability of satisfying constraints on levels (frm, to]."""
    beta = np.ones(chain.n_states)
    for k in range(to - 1, frm - 1, -1):
        nxt = beta
        if k + 1 in levels:
            nxt = nxt * levels[k + 1]
        beta = chain.transition_at(k) @ nxt
    return beta


def event_probability(chain: CanonicalChain, event: CylinderEvent) -> float:
    """Exact probability of a cylinder event."""
    chain, levels, mass0 = _prepared(chain, event)
    if not levels:
        return mass0
    top = max(levels)
    return mass0 * float(_forward(chain, levels, top)[top].sum())


def conditional_marginal(chain: CanonicalChain, event: CylinderEvent, n: int) -> np.ndarray:
    """Law of the working process at time n conditioned on a cylinder event."""
    if n < 1:
        raise ValueError("time indices start at 1")
    chain, levels, mass0 = _prepared(chain, event)
    if mass0 == 0.0:
        raise NullEventError("conditioning on null event")
    top = max(levels, default=0)
    alphas = _forward(chain, levels, max(n, top, 1))
    total = float(alphas[max(top, 1)].sum())
    if total == 0.0:
        raise NullEventError("conditioning on null event")
    if n >= top:
        vec = alphas[n]
    else:
        vec = alphas[n] * _backward(chain, levels, n, top)
    return vec / float(vec.sum())


def conditional_pair(
    chain: CanonicalChain, event: CylinderEvent, n: int, m: int, s: int, t: int
) -> float:
    """Conditional probability of state s at time n and state t at time m > n."""
    if not 1 <= n < m:
        raise ValueError(f"need 1 <= n < m, got n={n}, m={m}")
    chain, levels, mass0 = _prepared(chain, event)
    if mass0 == 0.0:
        raise NullEventError("conditioning on null event")
    top = max(levels, default=0)
    alphas = _forward(chain, levels, max(n, top, 1))
    total = float(alphas[max(top, 1)].sum())
    if total == 0.0:
        raise NullEventError("conditioning on null event")
    u = np.zeros(chain.n_states)
    u[s] = 1.0
    for k in range(n, m):
        u = u @ chain.transition_at(k)
        if k + 1 in levels:
            u = u * levels[k + 1]
    beta_m = _backward(chain, levels, m, top) if m < top else np.ones(chain.n_states)
    return float(alphas[n][s] * u[t] * beta_m[t]) / total
