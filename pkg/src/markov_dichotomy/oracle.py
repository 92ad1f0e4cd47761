"""Brute-force ground truth by exhaustive path enumeration.

This module exists to validate the dynamic-programming engine on small
instances, not for production use: a hard guard rejects state spaces with
more than PATH_GUARD = 10**7 paths.  All quantities are computed directly
from the full table of path probabilities, independently of the engine's
recursions.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .model import ONE_SIDED, CanonicalChain, require_compatible
from .engine import LocalContinuityError, NullEventError

PATH_GUARD = 10**7


class PathCountGuardError(RuntimeError):
    """The requested enumeration exceeds the path-count guard."""


def _check_guard(chain: CanonicalChain, levels: int) -> None:
    if chain.n_states ** levels > PATH_GUARD:
        raise PathCountGuardError(
            f"{chain.n_states}**{levels} paths exceed the enumeration guard {PATH_GUARD}"
        )


def _grow(paths: np.ndarray, k: int) -> np.ndarray:
    npaths = paths.shape[0]
    ext = np.tile(np.arange(k, dtype=np.int16), npaths)[:, None]
    return np.hstack([np.repeat(paths, k, axis=0), ext])


@dataclass(frozen=True)
class PathTable:
    """Exact law of the first n working states: one row per surviving path."""

    paths: np.ndarray  # (npaths, n) int16 state indices
    probs: np.ndarray  # (npaths,) probabilities

    @property
    def horizon(self) -> int:
        return self.paths.shape[1]

    def total_mass(self) -> float:
        return float(self.probs.sum())

    def level_distribution(self, n: int, n_states: int = 0) -> np.ndarray:
        """Marginalize the table at time n (1-based)."""
        return np.bincount(self.paths[:, n - 1], weights=self.probs, minlength=n_states)


def enumerate_paths(chain: CanonicalChain, n: int) -> PathTable:
    """Exact law of the working process on levels 1..n, zero-probability paths pruned."""
    if n < 1:
        raise ValueError("time indices start at 1")
    _check_guard(chain, n)
    k = chain.n_states
    paths = np.arange(k, dtype=np.int16)[:, None]
    probs = np.array(chain.lambda1)
    keep = probs > 0
    paths, probs = paths[keep], probs[keep]
    for lev in range(1, n):
        step = chain.transition_at(lev)[paths[:, -1]]
        probs = (probs[:, None] * step).ravel()
        paths = _grow(paths, k)
        keep = probs > 0
        paths, probs = paths[keep], probs[keep]
    return PathTable(paths, probs)


def joint_paths(a: CanonicalChain, b: CanonicalChain, n: int, prune: bool = True):
    """One path grid with both measures' probabilities.

    Rows where both probabilities vanish are pruned (when ``prune``), so the
    grid supports affinity and likelihood-ratio computations for the pair.
    """
    require_compatible(a, b)
    if n < 1:
        raise ValueError("time indices start at 1")
    _check_guard(a, n)
    k = a.n_states
    paths = np.arange(k, dtype=np.int16)[:, None]
    pa = np.array(a.lambda1)
    pb = np.array(b.lambda1)
    for lev in range(1, n):
        last = paths[:, -1]
        pa = (pa[:, None] * a.transition_at(lev)[last]).ravel()
        pb = (pb[:, None] * b.transition_at(lev)[last]).ravel()
        paths = _grow(paths, k)
        if prune:
            keep = (pa > 0) | (pb > 0)
            paths, pa, pb = paths[keep], pa[keep], pb[keep]
    if prune:
        keep = (pa > 0) | (pb > 0)
        paths, pa, pb = paths[keep], pa[keep], pb[keep]
    return paths, pa, pb


def oracle_hellinger(a: CanonicalChain, b: CanonicalChain, n: int) -> float:
    """Summed square-root affinity of the two level-n path laws."""
    _, pa, pb = joint_paths(a, b, n)
    return float(np.sqrt(pa * pb).sum())


def oracle_z_distribution(a: CanonicalChain, b: CanonicalChain, n: int):
    """Exact distribution of the level-n likelihood ratio.

    Returns (values, prob_b, prob_a): distinct ratio values with their total
    probability under each measure.  Raises LocalContinuityError when some
    path is possible under ``a`` but null under ``b``.
    """
    _, pa, pb = joint_paths(a, b, n)
    if np.any((pa > 0) & (pb == 0)):
        raise LocalContinuityError(
            "a path is possible under the first measure but null under the second"
        )
    keep = pb > 0
    pa, pb = pa[keep], pb[keep]
    z = pa / pb
    values, inverse = np.unique(z, return_inverse=True)
    wb = np.bincount(inverse, weights=pb, minlength=values.size)
    wa = np.bincount(inverse, weights=pa, minlength=values.size)
    return values, wb, wa


def oracle_z_mean(a: CanonicalChain, b: CanonicalChain, n: int) -> float:
    """Mean of the level-n likelihood ratio under b, straight off the table."""
    values, wb, _ = oracle_z_distribution(a, b, n)
    return float((values * wb).sum())


def sqrt_step_conditionals(a: CanonicalChain, b: CanonicalChain, n: int):
    """Conditional mean of the square-rooted one-step ratio, prefix by prefix.

    For every length-(n-1) prefix carrying positive mass under both measures,
    computes E_b[sqrt(z_n / z_{n-1}) | prefix] from the path tables alone.
    Returns (last_states, values) aligned arrays; the defining property under
    test is that the value depends on the prefix only through its last state.
    Requires n >= 2.
    """
    require_compatible(a, b)
    if n < 2:
        raise ValueError("needs two levels")
    _check_guard(a, n)
    _, pa_prev, pb_prev = joint_paths(a, b, n - 1, prune=False)
    paths, pa, pb = joint_paths(a, b, n, prune=False)
    k = a.n_states
    parent = np.arange(paths.shape[0]) // k
    # sum_children sqrt(pa*pb) / sqrt(pa_parent*pb_parent) equals the
    # conditional mean of sqrt(Z): the parent factors cancel inside the root.
    child_aff = np.bincount(parent, weights=np.sqrt(pa * pb), minlength=pa_prev.size)
    good = (pa_prev > 0) & (pb_prev > 0)
    values = child_aff[good] / np.sqrt(pa_prev[good] * pb_prev[good])
    last_states = paths[::k, -2][good]
    return last_states, values


def _satisfying(chain: CanonicalChain, event, paths: np.ndarray) -> np.ndarray:
    """Boolean mask of table rows satisfying all level >= 1 constraints."""
    k = len(chain.alphabet)
    keep = np.ones(paths.shape[0], dtype=bool)
    for idx, sym in event.constraints:
        if idx == 0:
            continue
        j = chain.alphabet.index(sym)
        if chain.sided == ONE_SIDED:
            if idx < 0:
                raise ValueError("one-sided events use indices >= 0")
            keep &= paths[:, idx - 1] == j
        else:
            level = abs(idx)
            col = paths[:, level - 1]
            keep &= (col % k == j) if idx > 0 else (col // k == j)
    return keep


def _with_time_zero(chain: CanonicalChain, event):
    """Fold an index-0 constraint into the start law; return (chain, mass)."""
    time0 = dict(event.constraints).get(0)
    if time0 is None:
        return chain, 1.0
    from .model import conditioned_on_time_zero

    if chain.pi0 is None:
        raise ValueError("conditioning at index 0 requires a chain built with canonicalize()")
    mass = float(chain.pi0[chain.symbol_index(time0)])
    if mass == 0.0:
        raise NullEventError("conditioning on null event")
    return conditioned_on_time_zero(chain, time0), mass


def oracle_conditional(chain: CanonicalChain, event, n: int) -> np.ndarray:
    """Conditional law at time n by filtering the path table."""
    chain, _ = _with_time_zero(chain, event)
    levels = max(n, event.span, 1)
    table = enumerate_paths(chain, levels)
    keep = _satisfying(chain, event, table.paths)
    mass = table.probs[keep].sum()
    if mass == 0.0:
        raise NullEventError("conditioning on null event")
    dist = np.bincount(
        table.paths[keep, n - 1], weights=table.probs[keep], minlength=chain.n_states
    )
    return dist / mass


def oracle_conditional_pair(chain: CanonicalChain, event, n: int, m: int, s: int, t: int) -> float:
    """Conditional pair probability by filtering the path table."""
    if not 1 <= n < m:
        raise ValueError(f"need 1 <= n < m, got n={n}, m={m}")
    chain, _ = _with_time_zero(chain, event)
    levels = max(m, event.span)
    table = enumerate_paths(chain, levels)
    keep = _satisfying(chain, event, table.paths)
    mass = table.probs[keep].sum()
    if mass == 0.0:
        raise NullEventError("conditioning on null event")
    hit = keep & (table.paths[:, n - 1] == s) & (table.paths[:, m - 1] == t)
    return float(table.probs[hit].sum() / mass)


def oracle_event_probability(chain: CanonicalChain, event) -> float:
    chain, mass0 = _with_time_zero(chain, event)
    levels = max(event.span, 1)
    table = enumerate_paths(chain, levels)
    keep = _satisfying(chain, event, table.paths)
    return mass0 * float(table.probs[keep].sum())


def oracle_pair(chain: CanonicalChain, n: int, m: int, s: int, t: int) -> float:
    """Unconditional pair probability off the table."""
    if not 1 <= n < m:
        raise ValueError(f"need 1 <= n < m, got n={n}, m={m}")
    table = enumerate_paths(chain, m)
    hit = (table.paths[:, n - 1] == s) & (table.paths[:, m - 1] == t)
    return float(table.probs[hit].sum())


def path_label(chain: CanonicalChain, states) -> str:
    labels = chain.states
    if chain.sided == ONE_SIDED:
        return "".join(labels[s] for s in states)
    return ",".join(f"{labels[s][0]}|{labels[s][1]}" for s in states)


def dump_joint_csv(a: CanonicalChain, b: CanonicalChain, n: int, fh) -> None:
    """Write the joint path table as CSV with columns path, p_A, p_B, z."""
    paths, pa, pb = joint_paths(a, b, n)
    writer = csv.writer(fh)
    writer.writerow(["path", "p_A", "p_B", "z"])
    for row, x, y in zip(paths, pa, pb):
        z = x / y if y > 0 else float("inf")
        writer.writerow([path_label(a, row), repr(x), repr(y), repr(z)])
