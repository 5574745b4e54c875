"""Regime classifier: which scattering statement applies to a parameter tuple.

Rules are checked in a fixed order and the first match wins:

    a  no L^2 limit        lambda1 != 0, p1 <= 2/N, p2 < 4/N
    b  no L^2 limit        lambda1 != 0, lambda2 >= 0, p1 <= 2/N, 4/N <= p2 <= 4/(N-2), N >= 6
    c  Sigma scattering    lambda1 > 0, lambda2 >= 0, 2/N < p1 < p2 <= 4/(N-2)
                           (single power with p1 < alpha0, or p2 = 4/(N-2), is
                           flagged through Verdict.corollary)
    d  Sigma scattering    lambda1 > 0, lambda2 < 0, 2/N < p1 < p2 < 4/N, mass below threshold
    e  Sigma scattering    lambda1 < 0, lambda2 > 0, 4/(N+2) < p1 < p2 < 4/(N-2)
    f  Sigma scattering    lambda1 < 0, lambda2 < 0, 4/(N+2) < p1 < p2 < 4/N
    g  GWP, scattering open   lambda2 > 0 (row 1) or lambda2 < 0, p2 <= 4/N (row 5)
    h  blow-up possible       lambda2 < 0 with supercritical p2 (rows 6-8)
    i  outside covered regimes

With lambda2 = 0 the single-power equation is meant and every condition on
p2 holds vacuously (p1 must still stay below 4/(N-2) where rule c asks for
p1 < p2 <= 4/(N-2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import ParameterError
from .radial import ModelParams

_EPS = 1e-12


class Tag(str, Enum):
    NO_SCATTERING_L2 = "NoScattering_L2"
    SCATTERING_SIGMA = "Scattering_Sigma"
    GWP_SCATTERING_OPEN = "GWP_ScatteringOpen"
    BLOWUP_POSSIBLE = "BlowupPossible_ConditionNotEvaluated"
    OUTSIDE = "OutsideCoveredRegimes"


@dataclass(frozen=True)
class DataStats:
    mass: float
    energy: Optional[float] = None
    sigma_norm: Optional[float] = None


@dataclass(frozen=True)
class Verdict:
    """``source`` names the governing statement; ``corollary`` optionally names
    the special case the tuple also falls under."""

    tag: Tag
    source: str
    threshold_margin: Optional[float] = None
    corollary: Optional[str] = None

    def to_dict(self) -> dict:
        return {"tag": self.tag.value, "source": self.source,
                "threshold_margin": self.threshold_margin, "corollary": self.corollary}


def alpha0(N: int) -> float:
    """(2 - N + sqrt(N^2 + 12 N + 4)) / (2 N)."""
    if N < 3:
        raise ParameterError(f"N must be >= 3, got {N}")
    return (2 - N + math.sqrt(N * N + 12 * N + 4)) / (2 * N)


def _lt(a, b):
    return a < b - _EPS


def _le(a, b):
    return a <= b + _EPS


class _P2:
    """p2 comparisons that hold vacuously when the second term is absent."""

    def __init__(self, params: ModelParams):
        self.absent = params.lambda2 == 0 or params.p2 is None
        self.p2 = params.p2

    def lt(self, b):
        return self.absent or _lt(self.p2, b)

    def le(self, b):
        return self.absent or _le(self.p2, b)

    def gt(self, b):
        return self.absent or _lt(b, self.p2)

    def ge(self, b):
        return self.absent or _le(b, self.p2)


class _Ctx:
    def __init__(self, params: ModelParams, stats: Optional[DataStats], CN: Optional[float]):
        self.params, self.stats, self.CN = params, stats, CN
        N = params.N
        self.N, self.l1, self.l2, self.p1 = N, params.lambda1, params.lambda2, params.p1
        self.P2 = _P2(params)
        self.crit = 4.0 / (N - 2)
        self.two_n, self.four_n, self.strauss = 2.0 / N, 4.0 / N, 4.0 / (N + 2)
        # single-power problems read p1 < p2 <= 4/(N-2) as p1 < 4/(N-2)
        self.p1_below_crit = _lt(self.p1, self.crit) if self.P2.absent else True


def _rule_a(c: _Ctx):
    if _le(c.p1, c.two_n) and c.P2.lt(c.four_n):
        return Verdict(Tag.NO_SCATTERING_L2, "Theorem 1(i)")


def _rule_b(c: _Ctx):
    if (c.l2 >= 0 and _le(c.p1, c.two_n) and not c.P2.absent
            and c.P2.ge(c.four_n) and c.P2.le(c.crit) and c.N >= 6):
        return Verdict(Tag.NO_SCATTERING_L2, "Theorem 1(ii)")


def _rule_c(c: _Ctx):
    if c.l1 > 0 and c.l2 >= 0 and _lt(c.two_n, c.p1) and c.P2.le(c.crit) and c.p1_below_crit:
        corollary = None
        if c.P2.absent and _lt(c.p1, alpha0(c.N)):
            corollary = "Corollary 1.1"
        elif c.l2 > 0 and abs(c.params.p2 - c.crit) <= _EPS:
            corollary = "Corollary 1.2"
        return Verdict(Tag.SCATTERING_SIGMA, "Theorem 2 case (3)", corollary=corollary)


def _rule_d(c: _Ctx):
    if c.l1 > 0 and c.l2 < 0 and _lt(c.two_n, c.p1) and c.P2.lt(c.four_n):
        if c.CN is None:
            raise ParameterError("rule for lambda1 > 0 > lambda2 needs the sharp constant CN")
        if c.stats is None:
            raise ParameterError("rule for lambda1 > 0 > lambda2 needs the data mass")
        from .ground_state import threshold_mass_bound

        bound = threshold_mass_bound(c.params, c.CN)
        lhs = c.stats.mass ** (4.0 / c.N)
        if lhs < bound:
            return Verdict(Tag.SCATTERING_SIGMA, "Theorem 2 case (4)", bound - lhs)


def _rule_e(c: _Ctx):
    if c.l1 < 0 and c.l2 > 0 and _lt(c.strauss, c.p1) and c.P2.lt(c.crit):
        return Verdict(Tag.SCATTERING_SIGMA, "Theorem 2 case (1)")


def _rule_f(c: _Ctx):
    if c.l1 < 0 and c.l2 < 0 and _lt(c.strauss, c.p1) and c.P2.lt(c.four_n):
        return Verdict(Tag.SCATTERING_SIGMA, "Theorem 2 case (2)")


def _rule_g(c: _Ctx):
    if c.l2 > 0:
        return Verdict(Tag.GWP_SCATTERING_OPEN, "Table 1 row 1")
    if c.l2 < 0 and _le(c.params.p2, c.four_n):
        return Verdict(Tag.GWP_SCATTERING_OPEN, "Table 1 row 5")


def _rule_h(c: _Ctx):
    if c.l2 < 0 and _lt(c.four_n, c.params.p2) and _le(c.params.p2, c.crit):
        if c.l1 > 0:
            return Verdict(Tag.BLOWUP_POSSIBLE, "Table 1 row 6")
        if _lt(c.four_n, c.p1):
            return Verdict(Tag.BLOWUP_POSSIBLE, "Table 1 row 7")
        return Verdict(Tag.BLOWUP_POSSIBLE, "Table 1 row 8")


RULES = {"a": _rule_a, "b": _rule_b, "c": _rule_c, "d": _rule_d,
         "e": _rule_e, "f": _rule_f, "g": _rule_g, "h": _rule_h}
RULE_ORDER = tuple(RULES)


def matching_rules(params: ModelParams, stats: Optional[DataStats] = None,
                   CN: Optional[float] = None, names=RULE_ORDER) -> list[str]:
    """Names of all rules whose conditions hold (not only the first)."""
    ctx = _Ctx(params, stats, CN)
    return [n for n in names if RULES[n](ctx) is not None]


def classify(params: ModelParams, stats: Optional[DataStats] = None,
             CN: Optional[float] = None, order=RULE_ORDER) -> Verdict:
    """Verdict for ``params``; ``stats`` and ``CN`` matter only for rule d."""
    if params.lambda1 == 0:
        raise ParameterError("classification needs lambda1 != 0")
    ctx = _Ctx(params, stats, CN)
    for name in order:
        verdict = RULES[name](ctx)
        if verdict is not None:
            return verdict
    return Verdict(Tag.OUTSIDE, "none")
