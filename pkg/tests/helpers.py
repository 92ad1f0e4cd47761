"""Shared builders for the test suite."""

import numpy as np

import markov_dichotomy as md

UNIFORM2 = np.full((2, 2), 0.5)
FLIP = np.array([[1.0, -1.0], [1.0, -1.0]])
BANDED3 = np.array([[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]])


def uniform_chain(k=2, sided=md.ONE_SIDED):
    size = k if sided == md.ONE_SIDED else k * k
    alphabet = [chr(ord("a") + i) for i in range(k)]
    mat = np.full((size, size), 1.0 / size)
    return md.build_chain(alphabet, sided, np.full(size, 1.0 / size), [], md.ConstantTail(mat))


def coin_pair(alpha, c=0.25):
    """Perturbed i.i.d. coin against the uniform coin (the dichotomy family)."""
    a = md.build_chain(
        ["h", "t"], md.ONE_SIDED, [0.5, 0.5], [], md.PowerTail(UNIFORM2, FLIP, c, alpha)
    )
    b = md.build_chain(["h", "t"], md.ONE_SIDED, [0.5, 0.5], [], md.ConstantTail(UNIFORM2))
    return a, b


def iid_chain(row):
    """Two-state i.i.d. chain with the given row distribution everywhere."""
    row = np.asarray(row, dtype=float)
    mat = np.tile(row, (2, 1))
    return md.build_chain(["h", "t"], md.ONE_SIDED, row, [], md.ConstantTail(mat))


def banded_chain():
    return md.build_chain(
        ["a", "b", "c"], md.ONE_SIDED, np.full(3, 1.0 / 3), [], md.ConstantTail(BANDED3)
    )


def random_stochastic(rng, rows, cols=None, floor=0.02, pattern=None):
    """Random kernel with entries either 0 (outside pattern) or >= floor-ish."""
    cols = cols or rows
    raw = rng.random((rows, cols)) + floor
    if pattern is not None:
        raw = raw * pattern
    return raw / raw.sum(axis=1, keepdims=True)


def random_certified_matrix(rng, size, delta):
    """Strictly positive stochastic matrix with every entry >= delta."""
    assert size * delta <= 1.0
    w = rng.random((size, size))
    w = w / w.sum(axis=1, keepdims=True)
    return delta + (1.0 - size * delta) * w


def random_certified_chain(rng, size, delta, prefix_len=2):
    alphabet = [chr(ord("a") + i) for i in range(size)]
    prefix = [random_certified_matrix(rng, size, delta) for _ in range(prefix_len)]
    tail = md.ConstantTail(random_certified_matrix(rng, size, delta))
    lam = random_stochastic(rng, 1, size)[0]
    return md.build_chain(alphabet, md.ONE_SIDED, lam, prefix, tail)


def _zero_sum_direction(rng, base):
    """Random zero-row-sum matrix supported where the base is positive."""
    support = base > 0
    d = rng.standard_normal(base.shape) * support
    counts = support.sum(axis=1, keepdims=True)
    d = d - np.where(support, d.sum(axis=1, keepdims=True) / counts, 0.0)
    # one more sweep kills float residue in the row sums
    d = d - np.where(support, d.sum(axis=1, keepdims=True) / counts, 0.0)
    return d


def random_spec(rng, k, sided, sub_support=False):
    """Random full measure description; transitions are prefix + random tail.

    With ``sub_support`` some transition entries are zeroed (against a
    full-support partner this keeps local absolute continuity one-way).
    """
    size = k if sided == md.ONE_SIDED else k * k
    alphabet = [chr(ord("a") + i) for i in range(k)]
    pi0 = random_stochastic(rng, 1, k)[0]
    step0 = random_stochastic(rng, k, size)
    pattern = None
    if sub_support:
        pattern = rng.random((size, size)) > 0.3
        pattern[np.arange(size), rng.integers(0, size, size)] = True  # no dead rows
    prefix = [random_stochastic(rng, size, pattern=pattern) for _ in range(int(rng.integers(0, 3)))]
    base = random_stochastic(rng, size, pattern=pattern)
    if rng.random() < 0.5:
        tail = md.ConstantTail(base)
    else:
        direction = _zero_sum_direction(rng, base)
        peak = np.abs(direction).max()
        first = len(prefix) + 1
        scale = 0.5 * base[base > 0].min() / (peak * first ** -0.75) if peak > 0 else 0.0
        tail = md.PowerTail(base, direction, scale, 0.75)
    spec = md.MeasureSpec(alphabet, sided, pi0, step0, md.TransitionSequence(tuple(prefix), tail))
    return md.spec_from_dict(md.spec_to_dict(spec))  # run document validation


def random_spec_pair(rng, k, sided):
    """A pair over one alphabet; the second measure has full support."""
    a = random_spec(rng, k, sided, sub_support=bool(rng.random() < 0.3))
    b = random_spec(rng, k, sided, sub_support=False)
    return a, b


def positive_event(rng, chain, max_level, n_constraints=2):
    """Cylinder event with positive probability, built from a sampled path."""
    path = md.sample_paths(chain, max_level, 1, seed=int(rng.integers(0, 2**31)))[0]
    levels = rng.choice(np.arange(1, max_level + 1), size=n_constraints, replace=False)
    constraints = {}
    for lev in levels:
        state = chain.states[path[lev - 1]]
        if chain.sided == md.ONE_SIDED:
            constraints[int(lev)] = state
        else:
            if rng.random() < 0.5:
                constraints[-int(lev)] = state[0]
            else:
                constraints[int(lev)] = state[1]
    return md.CylinderEvent.of(constraints)
