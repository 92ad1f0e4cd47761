"""Decision criteria: series classification, class membership, verdicts.

The central quantity is the per-step transition discrepancy

    d_n^2 = sum_{s,t} (sqrt(P_n(s,t)) - sqrt(Q_n(s,t)))^2 ,

whose series over n separates equivalence from mutual singularity for
locally equivalent measures with uniformly recurrent pair occupation
(class S).  Because transition tails come from a decidable family, the
series verdict is obtained symbolically; numeric partial sums are attached
as evidence only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    CanonicalChain,
    ConstantTail,
    PowerTail,
    require_compatible,
)
from .engine import marginal, window_product

CONVERGES = "converges"
DIVERGES = "diverges"

MEMBER = "member"
NOT_MEMBER = "not_member"
UNDETERMINED = "undetermined"

EQUIVALENT = "equivalent"
MUTUALLY_SINGULAR = "mutually_singular"
NOT_A_AC_B = "not_A_ac_B"
NOT_LOC_EQUIVALENT = "not_loc_equivalent"
INCONCLUSIVE = "inconclusive"


def d_n_squared(p, q) -> float:
    """Summed squared difference of the square-rooted transition matrices."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {q.shape}")
    return float(((np.sqrt(p) - np.sqrt(q)) ** 2).sum())


@dataclass(frozen=True)
class SeriesClassification:
    """Verdict on sum_n d_n^2 with the symbolic tail rule that produced it."""

    verdict: str
    partial_sums: tuple
    tail_argument: str
    effective_exponent: float = None

    @property
    def converges(self) -> bool:
        return self.verdict == CONVERGES

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "partial_sums": [[int(n), s] for n, s in self.partial_sums],
            "tail_argument": self.tail_argument,
            "effective_exponent": self.effective_exponent,
        }


def _tail_form(chain: CanonicalChain):
    """Normalize a tail to (base, coefficient, exponent, offset)."""
    tail = chain.transitions.tail
    if isinstance(tail, ConstantTail):
        return tail.matrix, np.zeros_like(tail.matrix), None, 0
    assert isinstance(tail, PowerTail)
    return tail.base, tail.coefficient, tail.exponent, tail.index_offset


def _classify_tails(a: CanonicalChain, b: CanonicalChain):
    """Symbolic verdict for the tail part of the series.

    Returns (verdict, tag, effective_exponent).  The tail family guarantees
    clean asymptotics: with a common base, a perturbed entry p + eps(n)
    contributes (eps_a(n) - eps_b(n))^2 / (4p) * (1 + o(1)), so only the
    slowest surviving power matters.
    """
    base_a, coef_a, exp_a, off_a = _tail_form(a)
    base_b, coef_b, exp_b, off_b = _tail_form(b)
    if not np.array_equal(base_a, base_b):
        return DIVERGES, "distinct_limit_matrices", 0.0
    zero_a = not coef_a.any()
    zero_b = not coef_b.any()
    if zero_a and zero_b:
        return CONVERGES, "identical_constant_tails", None
    if zero_a or zero_b:
        exp = exp_b if zero_a else exp_a
        eff = 2.0 * exp
        tag = "single_power_perturbation"
        return (CONVERGES if eff > 1.0 else DIVERGES), tag, eff
    if exp_a == exp_b and np.array_equal(coef_a, coef_b):
        if off_a == off_b:
            return CONVERGES, "identical_tails", None
        # same power, same coefficient, shifted index: the difference decays
        # one order faster, so the terms always sum.
        return CONVERGES, "index_shift_only", 2.0 * exp_a + 2.0
    eff = 2.0 * min(exp_a, exp_b)
    tag = "common_exponent_distinct_directions" if exp_a == exp_b else "distinct_exponents"
    return (CONVERGES if eff > 1.0 else DIVERGES), tag, eff


def _partial_sums(a: CanonicalChain, b: CanonicalChain, horizon: int) -> tuple:
    """Compensated partial sums of d_n^2 at geometric checkpoints (evidence only)."""
    checkpoints = []
    n = 1
    while n < horizon:
        checkpoints.append(n)
        n *= 2
    checkpoints.append(horizon)
    out = []
    total = 0.0
    carry = 0.0
    for n in range(1, horizon + 1):
        term = d_n_squared(a.transition_at(n), b.transition_at(n)) - carry
        bumped = total + term
        carry = (bumped - total) - term
        total = bumped
        if checkpoints and n == checkpoints[0]:
            out.append((n, total))
            checkpoints.pop(0)
    return tuple(out)


def series_classify(a: CanonicalChain, b: CanonicalChain, horizon: int = 256) -> SeriesClassification:
    """Classify sum_n d_n^2 over the decidable tail family.

    The explicit prefixes contribute finitely and never affect the verdict;
    the verdict comes from the symbolic comparison of the two tails.
    """
    require_compatible(a, b)
    verdict, tag, eff = _classify_tails(a, b)
    sums = _partial_sums(a, b, max(horizon, 1))
    return SeriesClassification(verdict, sums, tag, eff)


def loc_abs_continuous(a: CanonicalChain, b: CanonicalChain) -> bool:
    """Whether every finite level of ``a`` is absolutely continuous w.r.t. ``b``.

    True iff the start law's support is contained in b's, and at every time n
    and every a-reachable state the row support of P_n sits inside that of
    Q_n.  The prefix is scanned directly; on the tails the support patterns
    are constant, so the scan stops once the reachable set revisits itself.
    """
    require_compatible(a, b)
    if np.any((a.lambda1 > 0) & (b.lambda1 == 0)):
        return False
    reach = a.lambda1 > 0
    n_pref = max(len(a.transitions.prefix), len(b.transitions.prefix))
    seen = set()
    n = 1
    limit = n_pref + 2 ** min(a.n_states, 20) + 2
    while n <= limit:
        pat_a = a.support_pattern(n)
        pat_b = b.support_pattern(n)
        if np.any(reach[:, None] & pat_a & ~pat_b):
            return False
        reach = (reach[:, None] & pat_a).any(axis=0)
        n += 1
        if n > n_pref:
            key = reach.tobytes()
            if key in seen:
                return True
            seen.add(key)
    raise RuntimeError("reachability scan failed to close")  # pragma: no cover


@dataclass(frozen=True)
class ClassMembership:
    """Evidence about membership in the marginal (R) or pair (S) occupation class."""

    class_name: str  # "R" | "S"
    method: str  # "sufficient_condition" | "window_estimate"
    witness: tuple
    conclusion: str  # MEMBER | NOT_MEMBER | UNDETERMINED

    def to_dict(self) -> dict:
        return {
            "class": self.class_name,
            "method": self.method,
            "witness": list(self.witness),
            "conclusion": self.conclusion,
        }


def _tail_entry_floor(chain: CanonicalChain) -> np.ndarray:
    """Conservative lower bound for positive tail entries, valid for all tail times."""
    tail = chain.transitions.tail
    if isinstance(tail, ConstantTail):
        return np.array(tail.matrix)
    n0 = chain.transitions.first_tail_index
    drift = abs(tail.scale) * float(n0 + tail.index_offset) ** -tail.exponent
    return tail.base - drift * np.abs(tail.direction)


def class_s_sufficient(chain: CanonicalChain, delta: float, big_m: int) -> ClassMembership:
    """Certificate for the pair-occupation class via the delta/M condition.

    Member iff every transition entry is 0 or >= delta (tails bounded
    analytically) and every M-step window product is entrywise positive
    (prefix windows checked one by one; one representative tail window
    suffices because tail support patterns are constant).  Anything else is
    reported undetermined, never disproved.
    """
    if not 0.0 < delta <= 0.5:
        raise ValueError(f"delta must lie in (0, 1/2], got {delta!r}")
    if big_m < 1:
        raise ValueError(f"M must be a positive integer, got {big_m!r}")
    witness = (float(delta), int(big_m))
    n_pref = len(chain.transitions.prefix)
    for n in range(1, n_pref + 1):
        mat = chain.transition_at(n)
        if np.any((mat > 0) & (mat < delta)):
            return ClassMembership("S", "sufficient_condition", witness, UNDETERMINED)
    floor = _tail_entry_floor(chain)
    support = chain.transitions.tail.support()
    if np.any(support & (floor < delta)):
        return ClassMembership("S", "sufficient_condition", witness, UNDETERMINED)
    for n in range(1, n_pref + 2):
        if not np.all(window_product(chain, n, n + big_m - 1) > 0):
            return ClassMembership("S", "sufficient_condition", witness, UNDETERMINED)
    return ClassMembership("S", "sufficient_condition", witness, MEMBER)


def class_window_estimate(chain: CanonicalChain, class_name: str, horizon: int) -> ClassMembership:
    """Windowed occupation minima as membership evidence.

    R: min marginal over times in [horizon/2, horizon].  S: min pair
    probability over times n < m <= horizon with min(n, m, m-n) >= horizon/4.
    A positive minimum is reported as member (evidence, not proof: finite
    windows cannot certify a liminf); a zero minimum as not_member.
    """
    if class_name not in ("R", "S"):
        raise ValueError(f"class must be 'R' or 'S', got {class_name!r}")
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    if class_name == "R":
        lo = max(1, horizon // 2)
        v = marginal(chain, lo)
        best = float(v.min())
        for n in range(lo + 1, horizon + 1):
            v = v @ chain.transition_at(n - 1)
            best = min(best, float(v.min()))
        witness = (horizon, best)
        conclusion = MEMBER if best > 0 else NOT_MEMBER
        return ClassMembership("R", "window_estimate", witness, conclusion)
    w = max(1, horizon // 4)
    best = math.inf
    marg = marginal(chain, w)
    for n in range(w, horizon - w + 1):
        if n > w:
            marg = marg @ chain.transition_at(n - 1)
        window = None
        for m in range(n + w, horizon + 1):
            if window is None:
                window = window_product(chain, n, n + w - 1)
            else:
                window = window @ chain.transition_at(m - 1)
            best = min(best, float((marg[:, None] * window).min()))
    if not math.isfinite(best):
        return ClassMembership("S", "window_estimate", (horizon, 0.0), UNDETERMINED)
    conclusion = MEMBER if best > 0 else NOT_MEMBER
    return ClassMembership("S", "window_estimate", (horizon, best), conclusion)


def auto_certificate(chain: CanonicalChain, delta: float = None, big_m: int = None,
                     max_m: int = 4) -> ClassMembership:
    """Try the sufficient condition, guessing delta and M when not supplied.

    The guessed delta is the smallest guaranteed positive entry across the
    prefix and the tail floor, capped at 1/2; M candidates run from 1.
    """
    if delta is None:
        lows = []
        for n in range(1, len(chain.transitions.prefix) + 1):
            mat = chain.transition_at(n)
            if np.any(mat > 0):
                lows.append(float(mat[mat > 0].min()))
        floor = _tail_entry_floor(chain)
        support = chain.transitions.tail.support()
        if np.any(support):
            lows.append(float(floor[support].min()))
        candidate = min(lows) if lows else 0.0
        if candidate <= 0.0:
            return ClassMembership("S", "sufficient_condition", (0.0, big_m or 1), UNDETERMINED)
        delta = min(candidate, 0.5)
    for m in [big_m] if big_m is not None else range(1, max_m + 1):
        result = class_s_sufficient(chain, delta, m)
        if result.conclusion == MEMBER:
            return result
    return ClassMembership("S", "sufficient_condition", (float(delta), big_m or max_m), UNDETERMINED)


@dataclass(frozen=True)
class DecideOptions:
    """Tuning knobs for decide(): certificate hints and evidence horizons."""

    delta: float = None
    big_m: int = None
    horizon: int = 200
    assume_class_s: bool = False  # caller vouches for both pair-occupation memberships


@dataclass(frozen=True)
class DecisionReport:
    """Full outcome of the equivalence/singularity decision with evidence."""

    loc_ac_a_wrt_b: bool
    loc_ac_b_wrt_a: bool
    series: SeriesClassification
    class_a: ClassMembership
    class_b: ClassMembership
    verdict: str
    applied_theorem: str  # "A" | "B" | "none"
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "loc_ac_A_wrt_B": self.loc_ac_a_wrt_b,
            "loc_ac_B_wrt_A": self.loc_ac_b_wrt_a,
            "series": self.series.to_dict(),
            "class_A": self.class_a.to_dict(),
            "class_B": self.class_b.to_dict(),
            "verdict": self.verdict,
            "applied_theorem": self.applied_theorem,
            "detail": self.detail,
        }

    def to_text(self) -> str:
        lines = [
            f"verdict: {self.verdict}",
            f"applied criterion: {self.applied_theorem}",
            f"locally a.c. (first w.r.t. second): {self.loc_ac_a_wrt_b}",
            f"locally a.c. (second w.r.t. first): {self.loc_ac_b_wrt_a}",
            f"series: {self.series.verdict} [{self.series.tail_argument}]",
        ]
        if self.series.effective_exponent is not None:
            lines.append(f"effective tail exponent: {self.series.effective_exponent}")
        if self.series.partial_sums:
            n, s = self.series.partial_sums[-1]
            lines.append(f"partial sum through n={n}: {s:.6g}")
        for name, rec in (("first", self.class_a), ("second", self.class_b)):
            lines.append(
                f"class {rec.class_name} evidence ({name}): {rec.conclusion} "
                f"via {rec.method}, witness {rec.witness}"
            )
        if self.detail:
            lines.append(f"note: {self.detail}")
        return "\n".join(lines)


def _membership_evidence(chain: CanonicalChain, options: DecideOptions) -> ClassMembership:
    cert = auto_certificate(chain, options.delta, options.big_m)
    if cert.conclusion == MEMBER:
        return cert
    return class_window_estimate(chain, "S", max(options.horizon, 8))


def decide(a: CanonicalChain, b: CanonicalChain, options: DecideOptions = None) -> DecisionReport:
    """Decide equivalence vs. mutual singularity for a pair of measures.

    The verdict never overclaims a hypothesis: equivalence needs local
    equivalence, a convergent series and marginal-occupation evidence for the
    first measure (a certificate, since the pair class implies the marginal
    class, or an explicit assume flag); mutual singularity additionally needs
    certificates for both measures.  A divergent series with only one-sided
    evidence yields an inconclusive verdict carrying the one implication that
    does hold.
    """
    options = options or DecideOptions()
    require_compatible(a, b)
    loc_ab = loc_abs_continuous(a, b)
    loc_ba = loc_abs_continuous(b, a)
    series = series_classify(a, b, horizon=options.horizon)
    class_a = _membership_evidence(a, options)
    class_b = _membership_evidence(b, options)
    certified_a = options.assume_class_s or (
        class_a.method == "sufficient_condition" and class_a.conclusion == MEMBER
    )
    certified_b = options.assume_class_s or (
        class_b.method == "sufficient_condition" and class_b.conclusion == MEMBER
    )

    def report(verdict, theorem, detail=""):
        return DecisionReport(
            loc_ab, loc_ba, series, class_a, class_b, verdict, theorem, detail
        )

    if not loc_ab:
        return report(
            NOT_A_AC_B,
            "none",
            "the first measure is not locally absolutely continuous with "
            "respect to the second, so it cannot be absolutely continuous",
        )
    if not loc_ba:
        return report(
            NOT_LOC_EQUIVALENT,
            "none",
            "the second measure is not locally absolutely continuous with "
            "respect to the first, so the pair cannot be equivalent",
        )
    if series.converges:
        if certified_a:
            return report(EQUIVALENT, "A")
        return report(
            INCONCLUSIVE,
            "none",
            "series converges but marginal-occupation membership of the first "
            "measure is not certified; equivalence not claimed",
        )
    if certified_a and certified_b:
        return report(MUTUALLY_SINGULAR, "B")
    if certified_a:
        return report(
            INCONCLUSIVE,
            "A",
            "divergent series with occupation evidence for the first measure: "
            "the first measure is not absolutely continuous with respect to "
            "the second; mutual singularity needs certificates for both",
        )
    return report(
        INCONCLUSIVE,
        "none",
        "divergent series but no occupation certificates; nothing is claimed",
    )
