"""Shift non-singularity and equivalent-stationary-measure analyses.

Both analyses reduce to series classifications already implemented in the
criteria module: the shift compares each transition matrix with its
successor, stationarization compares each with the tail's limit matrix.
Both assume pair-occupation membership of the input; the reports carry the
certificate (or its absence) instead of refusing to compute.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .model import (
    ONE_SIDED,
    CanonicalChain,
    ConstantTail,
    MeasureSpec,
    PowerTail,
    TransitionSequence,
    _canonical_vector,
)
from .engine import marginal
from .criteria import (
    CONVERGES,
    ClassMembership,
    SeriesClassification,
    auto_certificate,
    series_classify,
)

NONSINGULAR = "nonsingular"
SINGULAR = "singular"
NOT_LOC_EQUIVALENT = "not_loc_equivalent"

STATIONARY_FOUND = "equivalent_stationary_found"
SINGULAR_TO_ALL_STATIONARY = "singular_to_all_stationary"


def subshift_support_check(chain: CanonicalChain) -> bool:
    """Whether the transition support pattern is the same at every time.

    The prefix is checked matrix by matrix; tail patterns are constant by
    construction, so one representative tail pattern settles the rest.
    """
    reference = chain.transitions.tail.support()
    for n in range(1, len(chain.transitions.prefix) + 1):
        if not np.array_equal(chain.support_pattern(n), reference):
            return False
    return True


def shifted_chain(chain: CanonicalChain) -> CanonicalChain:
    """The chain re-indexed one step forward (transition n becomes n+1).

    This is the transition data of the image measure under the left shift;
    its start law is the original law at time 2.
    """
    prefix = chain.transitions.prefix
    n_pref = len(prefix)
    new_prefix = tuple(prefix[1:]) + ((chain.transitions.matrix_at(n_pref + 1),) if n_pref else ())
    tail = chain.transitions.tail
    if isinstance(tail, PowerTail):
        tail = dataclasses.replace(tail, index_offset=tail.index_offset + 1)
    return CanonicalChain(
        chain.alphabet,
        chain.sided,
        _canonical_vector(marginal(chain, 2), "shifted lambda1"),
        TransitionSequence(new_prefix, tail),
    )


@dataclass(frozen=True)
class ShiftReport:
    """Outcome of the shift non-singularity test."""

    subshift_supported: bool
    series: SeriesClassification
    verdict: str
    s_certificate: ClassMembership

    def to_dict(self) -> dict:
        return {
            "subshift_supported": self.subshift_supported,
            "series_verdict": self.series.to_dict(),
            "verdict": self.verdict,
            "s_certificate": self.s_certificate.to_dict(),
        }

    def to_text(self) -> str:
        return "\n".join(
            [
                f"verdict: {self.verdict}",
                f"subshift supported: {self.subshift_supported}",
                f"consecutive-step series: {self.series.verdict} [{self.series.tail_argument}]",
                f"occupation certificate: {self.s_certificate.conclusion} "
                f"(witness {self.s_certificate.witness})",
            ]
        )


def shift_analysis(chain: CanonicalChain, delta: float = None, big_m: int = None) -> ShiftReport:
    """Non-singularity of the left shift for a constant-support chain.

    The shift preserves the measure class iff the supports never change and
    the consecutive-step discrepancy series converges; with a varying support
    the shifted measure is not even locally equivalent to the original.
    """
    certificate = auto_certificate(chain, delta, big_m)
    series = series_classify(chain, shifted_chain(chain))
    supported = subshift_support_check(chain)
    if not supported:
        verdict = NOT_LOC_EQUIVALENT
    elif series.converges:
        verdict = NONSINGULAR
    else:
        verdict = SINGULAR
    return ShiftReport(supported, series, verdict, certificate)


def limit_matrix(chain: CanonicalChain) -> np.ndarray:
    """The limit of the transition matrices (always exists for decidable tails)."""
    tail = chain.transitions.tail
    return np.array(tail.matrix if isinstance(tail, ConstantTail) else tail.base)


def stationary_distribution(matrix: np.ndarray, tol: float = 1e-12):
    """Stationary row vector of a stochastic matrix.

    Returns (distribution, unique) where unique is False when further
    eigenvalues sit on the unit circle (periodic or reducible limits); the
    returned vector is still a valid stationary law.  Eigen-decomposition
    first, power iteration as fallback.
    """
    matrix = np.asarray(matrix, dtype=float)
    k = matrix.shape[0]
    values, vectors = np.linalg.eig(matrix.T)
    on_circle = int(np.sum(np.abs(values) > 1.0 - 1e-9))
    unique = on_circle == 1
    order = np.argsort(-values.real)
    lead = None
    for idx in order:
        if abs(values[idx] - 1.0) < 1e-6:
            candidate = vectors[:, idx].real
            total = candidate.sum()
            if abs(total) > 1e-12:
                candidate = candidate / total
                if np.all(candidate >= -1e-10):
                    candidate = np.clip(candidate, 0.0, None)
                    lead = candidate / candidate.sum()
                    break
    if lead is None or np.max(np.abs(lead @ matrix - lead)) > tol:
        lead = np.full(k, 1.0 / k)
        for _ in range(200000):
            nxt = lead @ matrix
            if np.max(np.abs(nxt - lead)) < 1e-15:
                lead = nxt
                break
            lead = nxt
        if np.max(np.abs(lead @ matrix - lead)) > tol:
            raise ValueError("no stationary distribution found within tolerance")
    return _canonical_vector(lead, "stationary distribution"), unique


@dataclass(frozen=True)
class StationarizationReport:
    """Outcome of the equivalent-stationary-measure test."""

    limit_exists: bool
    limit: np.ndarray
    series: SeriesClassification
    verdict: str
    stationary_spec: MeasureSpec
    s_certificate: ClassMembership
    note: str = ""

    def to_dict(self) -> dict:
        from .model import spec_to_dict

        return {
            "limit_exists": self.limit_exists,
            "limit_matrix": self.limit.tolist() if self.limit is not None else None,
            "series_verdict": self.series.to_dict(),
            "verdict": self.verdict,
            "stationary_spec": (
                spec_to_dict(self.stationary_spec) if self.stationary_spec is not None else None
            ),
            "s_certificate": self.s_certificate.to_dict(),
            "note": self.note,
        }

    def to_text(self) -> str:
        lines = [
            f"verdict: {self.verdict}",
            f"limit matrix exists: {self.limit_exists}",
            f"distance-to-limit series: {self.series.verdict} [{self.series.tail_argument}]",
            f"occupation certificate: {self.s_certificate.conclusion} "
            f"(witness {self.s_certificate.witness})",
        ]
        if self.note:
            lines.append(f"note: {self.note}")
        return "\n".join(lines)


def _stationary_spec(chain: CanonicalChain, limit: np.ndarray, initial) -> tuple:
    """Build the constant-transition measure description around ``limit``."""
    note = ""
    if initial is None:
        rho, unique = stationary_distribution(limit)
        if not unique:
            return None, (
                "limit matrix has further unit-circle eigenvalues (periodic or "
                "reducible); supply an initial distribution explicitly"
            )
    else:
        rho = _canonical_vector(initial, "initial")
        if rho.size != chain.n_states:
            raise ValueError(f"initial distribution must have length {chain.n_states}")
    k = len(chain.alphabet)
    if chain.sided == ONE_SIDED:
        pi0 = rho
        step0 = np.array(limit)
    else:
        # The time-0 coupling is not determined by the working-process law;
        # an independent time-0 coordinate reproduces that law exactly.
        pi0 = np.full(k, 1.0 / k)
        step0 = np.tile(rho, (k, 1))
    spec = MeasureSpec(
        chain.alphabet,
        chain.sided,
        pi0,
        step0,
        TransitionSequence((), ConstantTail(limit)),
    )
    return spec, note


def stationarize(chain: CanonicalChain, initial=None, delta: float = None,
                 big_m: int = None) -> StationarizationReport:
    """Equivalent stationary measure, or singularity to every stationary one.

    The transition limit always exists inside the decidable tail family; the
    verdict is the classification of the distance-to-limit series.  On
    success the report carries a ready-to-serialize stationary description
    whose start law is the stationary law of the limit matrix (or the given
    ``initial`` for periodic limits).
    """
    certificate = auto_certificate(chain, delta, big_m)
    limit = limit_matrix(chain)
    constant = CanonicalChain(
        chain.alphabet,
        chain.sided,
        np.full(chain.n_states, 1.0 / chain.n_states),
        TransitionSequence((), ConstantTail(limit)),
    )
    series = series_classify(chain, constant)
    if not series.converges:
        return StationarizationReport(
            True, limit, series, SINGULAR_TO_ALL_STATIONARY, None, certificate
        )
    spec, note = _stationary_spec(chain, limit, initial)
    return StationarizationReport(
        True, limit, series, STATIONARY_FOUND, spec, certificate, note
    )
