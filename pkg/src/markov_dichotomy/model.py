"""Descriptions of finite-alphabet, time-inhomogeneous Markov measures.

A measure is given by an alphabet, a sidedness flag, an initial distribution
``pi0``, an initial kernel ``step0`` and a transition sequence.  One-sided
measures evolve on the alphabet itself; two-sided measures are reduced to a
one-sided chain on symbol pairs (the pair at time n collects the coordinates
at -n and +n), so every downstream computation sees a single "working" state
space.

Transition sequences are an explicit finite prefix of stochastic matrices
followed by a closed-form tail (constant, or a power-law perturbation of a
constant base).  Restricting the tail to this decidable family is what makes
the convergence questions asked by the criteria module answerable exactly.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

ROW_SUM_TOL = 1e-12

ONE_SIDED = "one"
TWO_SIDED = "two"


class SpecFormatError(ValueError):
    """A document violates the file schema (missing or ill-typed fields)."""


class SpecNumericError(ValueError):
    """A numeric invariant fails (row sums, negativity, tail positivity)."""


class IncompatibleChainsError(ValueError):
    """Two measures do not share an alphabet and sidedness."""


def _frozen(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


def _numeric_array(values, what: str) -> np.ndarray:
    try:
        return np.array(values, dtype=float)
    except (ValueError, TypeError) as exc:
        raise SpecFormatError(f"{what}: not a numeric array ({exc})") from exc


def _canonical_vector(values, what: str) -> np.ndarray:
    """Validate a probability vector and renormalise it idempotently.

    Entries must be non-negative and sum to 1 within ROW_SUM_TOL.  The
    returned vector sums to exactly 1.0 in float arithmetic, so feeding a
    canonical vector back through this function is a bit-exact no-op (this
    is what makes parse -> serialize -> parse the identity).
    """
    vec = _numeric_array(values, what)
    if vec.ndim != 1 or vec.size == 0:
        raise SpecFormatError(f"{what}: expected a non-empty flat array of numbers")
    if not np.all(np.isfinite(vec)):
        raise SpecNumericError(f"{what}: non-finite entry")
    if np.any(vec < 0.0):
        j = int(np.argmin(vec))
        raise SpecNumericError(f"{what}: negative entry {vec[j]!r} at position {j}")
    total = math.fsum(vec.tolist())
    if abs(total - 1.0) > ROW_SUM_TOL:
        raise SpecNumericError(
            f"{what}: entries sum to {total!r}, expected 1 within {ROW_SUM_TOL}"
        )
    for _ in range(5):
        if total == 1.0:
            return vec
        vec = vec / total
        residual = 1.0 - math.fsum(vec.tolist())
        if residual != 0.0:
            vec[int(np.argmax(vec))] += residual
        total = math.fsum(vec.tolist())
    raise SpecNumericError(f"{what}: renormalisation did not converge")


def _canonical_kernel(rows, shape, what: str) -> np.ndarray:
    mat = _numeric_array(rows, what)
    if mat.ndim != 2 or mat.shape != shape:
        raise SpecFormatError(
            f"{what}: expected a {shape[0]}x{shape[1]} matrix, got shape {tuple(mat.shape)}"
        )
    out = np.empty(shape)
    for i in range(shape[0]):
        out[i] = _canonical_vector(mat[i], f"{what} row {i}")
    return out


def _canonical_stochastic(rows, size: int, what: str) -> np.ndarray:
    return _canonical_kernel(rows, (size, size), what)


@dataclass(frozen=True)
class ConstantTail:
    """Tail rule P_n = matrix for every n beyond the explicit prefix."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    def matrix_at(self, n: int) -> np.ndarray:
        return self.matrix

    def support(self) -> np.ndarray:
        return self.matrix > 0


@dataclass(frozen=True)
class PowerTail:
    """Tail rule P_n = base + scale * (n + index_offset)**-exponent * direction.

    ``direction`` has zero row sums and vanishes wherever ``base`` does, so
    every tail matrix is row-stochastic with the support pattern of ``base``.
    ``index_offset`` is internal plumbing for re-indexed chains (the shift
    application); parsed documents always have offset 0.
    """

    base: np.ndarray
    direction: np.ndarray
    scale: float
    exponent: float
    index_offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "base", _frozen(self.base))
        object.__setattr__(self, "direction", _frozen(self.direction))

    def matrix_at(self, n: int) -> np.ndarray:
        factor = self.scale * float(n + self.index_offset) ** -self.exponent
        return self.base + factor * self.direction

    def support(self) -> np.ndarray:
        return self.base > 0

    @property
    def coefficient(self) -> np.ndarray:
        return self.scale * self.direction


Tail = Union[ConstantTail, PowerTail]


@dataclass(frozen=True)
class TransitionSequence:
    """Explicit prefix P_1..P_N plus a closed-form tail for n > N."""

    prefix: tuple
    tail: Tail

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(_frozen(p) for p in self.prefix))

    def matrix_at(self, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("transition indices start at 1")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        return self.tail.matrix_at(n)

    @property
    def first_tail_index(self) -> int:
        return len(self.prefix) + 1


def _validate_tail(tail: Tail, size: int, first_index: int, what: str) -> Tail:
    if isinstance(tail, ConstantTail):
        return ConstantTail(_canonical_stochastic(tail.matrix, size, f"{what}.P"))
    if not isinstance(tail, PowerTail):
        raise SpecFormatError(f"{what}: unknown tail rule {type(tail).__name__}")
    base = _canonical_stochastic(tail.base, size, f"{what}.P")
    direction = np.array(tail.direction, dtype=float)
    if direction.shape != (size, size):
        raise SpecFormatError(f"{what}.Delta: expected a {size}x{size} matrix")
    if not np.all(np.isfinite(direction)):
        raise SpecNumericError(f"{what}.Delta: non-finite entry")
    for i in range(size):
        rs = math.fsum(direction[i].tolist())
        if abs(rs) > ROW_SUM_TOL:
            raise SpecNumericError(f"{what}.Delta row {i}: row sum {rs!r}, expected 0")
    if not (isinstance(tail.exponent, (int, float)) and math.isfinite(tail.exponent) and tail.exponent > 0):
        raise SpecNumericError(f"{what}.alpha: must be a positive real, got {tail.exponent!r}")
    if not (isinstance(tail.scale, (int, float)) and math.isfinite(tail.scale)):
        raise SpecNumericError(f"{what}.c: must be a finite real, got {tail.scale!r}")
    bad = (base == 0) & (direction != 0)
    if np.any(bad):
        i, j = map(int, np.argwhere(bad)[0])
        raise SpecNumericError(
            f"{what}.Delta: nonzero entry at ({i},{j}) where the base matrix vanishes"
        )
    out = PowerTail(base, direction, float(tail.scale), float(tail.exponent), int(tail.index_offset))
    first = out.matrix_at(first_index)
    bad = (base > 0) & (first <= 0)
    if np.any(bad):
        i, j = map(int, np.argwhere(bad)[0])
        raise SpecNumericError(
            f"{what}: perturbed entry ({i},{j}) is {first[i, j]!r} at index {first_index}; "
            "tail entries must stay strictly positive wherever the base is positive"
        )
    return out


def _validate_transitions(transitions: TransitionSequence, size: int, what: str) -> TransitionSequence:
    prefix = tuple(
        _canonical_stochastic(p, size, f"{what}.prefix[{i}]")
        for i, p in enumerate(transitions.prefix)
    )
    tail = _validate_tail(transitions.tail, size, len(prefix) + 1, f"{what}.tail")
    return TransitionSequence(prefix, tail)


def working_size(alphabet, sided: str) -> int:
    k = len(alphabet)
    return k if sided == ONE_SIDED else k * k


def working_states(alphabet, sided: str) -> tuple:
    """Labels of the working state space: symbols, or (left, right) pairs."""
    if sided == ONE_SIDED:
        return tuple(alphabet)
    return tuple((a, b) for a in alphabet for b in alphabet)


@dataclass(frozen=True)
class MeasureSpec:
    """A fully validated user-facing measure description."""

    alphabet: tuple
    sided: str
    pi0: np.ndarray
    step0: np.ndarray
    transitions: TransitionSequence

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "pi0", _frozen(self.pi0))
        object.__setattr__(self, "step0", _frozen(self.step0))

    @property
    def n_symbols(self) -> int:
        return len(self.alphabet)

    @property
    def n_states(self) -> int:
        return working_size(self.alphabet, self.sided)

    @property
    def states(self) -> tuple:
        return working_states(self.alphabet, self.sided)


@dataclass(frozen=True)
class CanonicalChain:
    """One-sided chain on the working state space that all analyses consume.

    ``lambda1`` is the law of the working process at time 1 and ``transitions``
    drive it forward: P_n governs the step from time n to n+1 for n >= 1.
    ``pi0``/``step0`` are kept when the chain was built from a full measure
    description; they are only needed to condition on the time-0 coordinate.
    """

    alphabet: tuple
    sided: str
    lambda1: np.ndarray
    transitions: TransitionSequence
    pi0: np.ndarray = None
    step0: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "lambda1", _frozen(self.lambda1))
        if self.pi0 is not None:
            object.__setattr__(self, "pi0", _frozen(self.pi0))
        if self.step0 is not None:
            object.__setattr__(self, "step0", _frozen(self.step0))

    @property
    def n_states(self) -> int:
        return working_size(self.alphabet, self.sided)

    @property
    def states(self) -> tuple:
        return working_states(self.alphabet, self.sided)

    def symbol_index(self, symbol: str) -> int:
        try:
            return self.alphabet.index(symbol)
        except ValueError:
            raise ValueError(f"symbol {symbol!r} not in alphabet {self.alphabet}") from None

    def transition_at(self, n: int) -> np.ndarray:
        return self.transitions.matrix_at(n)

    def support_pattern(self, n: int) -> np.ndarray:
        return self.transitions.matrix_at(n) > 0


def transition_at(chain: CanonicalChain, n: int) -> np.ndarray:
    """Transition matrix governing the step from time n to n+1 (n >= 1)."""
    return chain.transition_at(n)


def support_pattern(chain: CanonicalChain, n: int) -> np.ndarray:
    """Boolean positivity pattern of transition_at(chain, n)."""
    return chain.support_pattern(n)


def require_compatible(a: CanonicalChain, b: CanonicalChain) -> None:
    if a.alphabet != b.alphabet or a.sided != b.sided:
        raise IncompatibleChainsError(
            f"measures are not comparable: alphabet/sidedness "
            f"({a.alphabet}, {a.sided}) vs ({b.alphabet}, {b.sided})"
        )


def build_chain(alphabet, sided, lambda1, prefix, tail, pi0=None, step0=None) -> CanonicalChain:
    """Validated CanonicalChain constructor for direct (non-document) use."""
    alphabet = tuple(alphabet)
    if sided not in (ONE_SIDED, TWO_SIDED):
        raise SpecFormatError(f"sided: expected '{ONE_SIDED}' or '{TWO_SIDED}', got {sided!r}")
    size = working_size(alphabet, sided)
    transitions = _validate_transitions(TransitionSequence(tuple(prefix), tail), size, "transitions")
    lam = _canonical_vector(lambda1, "lambda1")
    if lam.size != size:
        raise SpecFormatError(f"lambda1: expected length {size}, got {lam.size}")
    return CanonicalChain(alphabet, sided, lam, transitions, pi0=pi0, step0=step0)


def canonicalize(spec: MeasureSpec) -> CanonicalChain:
    """Reduce a measure description to its working one-sided chain.

    lambda1(u) = sum_s pi0(s) * step0(s, u); transitions pass through.
    """
    lam = _canonical_vector(spec.pi0 @ spec.step0, "lambda1")
    return CanonicalChain(
        spec.alphabet, spec.sided, lam, spec.transitions, pi0=spec.pi0, step0=spec.step0
    )


# ---------------------------------------------------------------------------
# Document parsing and serialization.
#
# Schema: UTF-8 JSON with fields
#   alphabet     array of distinct strings
#   sided        "one" | "two"
#   pi0          array over the alphabet
#   step0        array of arrays, one row per symbol, columns over the
#                working states (pairs ordered (a,b) -> a*|S|+b)
#   transitions  {prefix: [matrix, ...],
#                 tail: {kind: "constant", P} |
#                       {kind: "power_perturbation", P, Delta, c, alpha}}
# ---------------------------------------------------------------------------


def _expect(doc: dict, key: str, kind, what: str):
    if key not in doc:
        raise SpecFormatError(f"{what}: missing field {key!r}")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise SpecFormatError(f"{what}.{key}: unexpected type {type(value).__name__}")
    return value


def _tail_from_dict(doc: dict, what: str) -> Tail:
    kind = _expect(doc, "kind", str, what)
    if kind == "constant":
        return ConstantTail(_numeric_array(_expect(doc, "P", list, what), f"{what}.P"))
    if kind == "power_perturbation":
        return PowerTail(
            base=_numeric_array(_expect(doc, "P", list, what), f"{what}.P"),
            direction=_numeric_array(_expect(doc, "Delta", list, what), f"{what}.Delta"),
            scale=_expect(doc, "c", (int, float), what),
            exponent=_expect(doc, "alpha", (int, float), what),
        )
    raise SpecFormatError(f"{what}.kind: unknown tail kind {kind!r}")


def spec_from_dict(doc: dict) -> MeasureSpec:
    if not isinstance(doc, dict):
        raise SpecFormatError("document: expected a JSON object at top level")
    alphabet = _expect(doc, "alphabet", list, "document")
    if not alphabet or not all(isinstance(s, str) for s in alphabet):
        raise SpecFormatError("alphabet: expected a non-empty array of strings")
    if len(set(alphabet)) != len(alphabet):
        raise SpecFormatError("alphabet: symbols must be distinct")
    sided = _expect(doc, "sided", str, "document")
    if sided not in (ONE_SIDED, TWO_SIDED):
        raise SpecFormatError(f"sided: expected 'one' or 'two', got {sided!r}")
    k = len(alphabet)
    size = working_size(alphabet, sided)
    pi0 = _canonical_vector(_expect(doc, "pi0", list, "document"), "pi0")
    if pi0.size != k:
        raise SpecFormatError(f"pi0: expected length {k}, got {pi0.size}")
    step0 = _canonical_kernel(_expect(doc, "step0", list, "document"), (k, size), "step0")
    tdoc = _expect(doc, "transitions", dict, "document")
    prefix = _expect(tdoc, "prefix", list, "transitions")
    tail = _tail_from_dict(_expect(tdoc, "tail", dict, "transitions"), "transitions.tail")
    transitions = _validate_transitions(
        TransitionSequence(tuple(prefix), tail), size, "transitions"
    )
    return MeasureSpec(tuple(alphabet), sided, pi0, step0, transitions)


def parse_spec(text: str) -> MeasureSpec:
    """Parse and validate a UTF-8 JSON measure document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"document is not valid JSON: {exc}") from exc
    return spec_from_dict(doc)


def load_spec(path) -> MeasureSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec(fh.read())


def _tail_to_dict(tail: Tail) -> dict:
    if isinstance(tail, ConstantTail):
        return {"kind": "constant", "P": tail.matrix.tolist()}
    return {
        "kind": "power_perturbation",
        "P": tail.base.tolist(),
        "Delta": tail.direction.tolist(),
        "c": tail.scale,
        "alpha": tail.exponent,
    }


def spec_to_dict(spec: MeasureSpec) -> dict:
    return {
        "alphabet": list(spec.alphabet),
        "sided": spec.sided,
        "pi0": spec.pi0.tolist(),
        "step0": spec.step0.tolist(),
        "transitions": {
            "prefix": [p.tolist() for p in spec.transitions.prefix],
            "tail": _tail_to_dict(spec.transitions.tail),
        },
    }


def serialize_spec(spec: MeasureSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=2)


def conditioned_on_time_zero(chain: CanonicalChain, symbol: str) -> CanonicalChain:
    """The chain's law conditioned on the time-0 coordinate being ``symbol``.

    Conditioning on time 0 only reweights lambda1 (the future enters through
    the time-1 state alone), so the result is again a canonical chain.
    Requires pi0/step0 provenance, i.e. a chain built by canonicalize().
    """
    if chain.pi0 is None or chain.step0 is None:
        raise ValueError(
            "conditioning at index 0 requires the initial kernel; "
            "build the chain with canonicalize()"
        )
    j = chain.symbol_index(symbol)
    mass = chain.pi0[j]
    if mass == 0.0:
        from .engine import NullEventError  # local import to avoid a cycle

        raise NullEventError(f"conditioning on null event: pi0({symbol!r}) = 0")
    lam = _canonical_vector(chain.step0[j], "conditioned lambda1")
    return dataclasses.replace(chain, lambda1=lam, pi0=None, step0=None)
