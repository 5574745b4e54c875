"""Trajectory instrumentation: conservation ledger, lens-energy bookkeeping,
decay-rate fits and the non-scattering witness.

Lens-frame bookkeeping.  With L_i(s) = ||v(s)||_{p_i+2}^{p_i+2} and
gamma_i = (N p_i - 4)/2,

    M(s) = lambda1/(p1+2) int_0^s (1-tau)^{gamma_1 - 1} L_1(tau) dtau,
    N(s) = lambda2/(p2+2) int_0^s (1-tau)^{gamma_2 - 1} L_2(tau) dtau,
    K(s) = 1/2 ||grad v(s)||^2 + (1-s) [M'(s) + N'(s)],

and exact solutions satisfy K(s) = a M(s) + b N(s) + C0 with
a = (4 - N p1)/2, b = (4 - N p2)/2, C0 = K(0).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, ParameterError
from .propagators import LensState, power_integral
from .radial import (
    ModelParams,
    RadialField,
    RadialGrid,
    dirichlet_form,
    energy,
    integrate,
    lp_integral,
    norm_l2,
    pairing,
    radial_derivative,
)

LEDGER_COLUMNS = ("s_or_t", "mass", "energy", "grad_l2", "lp1", "lp2", "M", "N", "K", "residual")


@dataclass(frozen=True)
class LedgerRecord:
    s: float
    mass: float
    energy: float
    grad_l2: float
    lp1: float
    lp2: float
    M_s: float = 0.0
    N_s: float = 0.0
    K_s: float = 0.0
    C0: float = 0.0
    identity_residual: float = 0.0

    def row(self) -> list[float]:
        return [self.s, self.mass, self.energy, self.grad_l2, self.lp1, self.lp2,
                self.M_s, self.N_s, self.K_s, self.identity_residual]


def identity_coefficients(params: ModelParams) -> tuple[float, float]:
    """(a, b) = ((4 - N p1)/2, (4 - N p2)/2); b is 0 without a second term."""
    N = params.N
    a = (4.0 - N * params.p1) / 2.0
    b = (4.0 - N * params.p2) / 2.0 if params.p2 is not None else 0.0
    return a, b


def _couplings(params: ModelParams):
    """[(lambda, p) for term 1, term 2] with absent terms as (0, p1)."""
    lam2 = params.lambda2 if params.p2 is not None else 0.0
    p2 = params.p2 if params.p2 is not None else params.p1
    return [(params.lambda1, params.p1), (lam2, p2)]


def _lens_potential(s: float, lps, params: ModelParams) -> float:
    """(1-s)[M'(s) + N'(s)] = sum lambda_i h_i(s) L_i / (p_i + 2)."""
    out = 0.0
    for (lam, p), L in zip(_couplings(params), lps):
        if lam != 0:
            out += lam / (p + 2) * (1.0 - s) ** params.lens_exponent(p) * L
    return out


def lens_physical_energy(state: LensState, params: ModelParams) -> float:
    """E(u(t)) of the physical solution, evaluated from v(s).

    Uses ||grad u||^2 = 1/4 ||(y - 2i(1-s) grad) v||^2 and
    ||u||_{p+2}^{p+2} = (1-s)^{N p/2} ||v||_{p+2}^{p+2}.
    """
    v, s = state.v, state.s
    dv = radial_derivative(v)
    kin = 0.25 * float(integrate(v.grid, np.abs(v.r * v.values - 2j * (1 - s) * dv) ** 2))
    e = 0.5 * kin
    for lam, p in params.terms:
        e += lam / (p + 2) * (1 - s) ** (params.N * p / 2) * lp_integral(v, p)
    return e


def ledger_start(state: LensState, params: ModelParams) -> LedgerRecord:
    """Initial record; C0 is the lens energy K at the starting time."""
    v = state.v
    lps = [lp_integral(v, p) for _, p in _couplings(params)]
    grad = dirichlet_form(v)
    K = 0.5 * grad + _lens_potential(state.s, lps, params)
    return LedgerRecord(state.s, norm_l2(v), lens_physical_energy(state, params), grad,
                        lps[0], lps[1], 0.0, 0.0, K, K, 0.0)


def _product_trapezoid(s0: float, s1: float, q: float, f0: float, f1: float) -> float:
    """int_{s0}^{s1} (1-tau)^q f(tau) dtau with f linear between f0 and f1.

    The weight (1-tau)^q is integrated exactly, so the rule stays second
    order even where the weight is singular.
    """
    ds = s1 - s0
    if ds == 0:
        return 0.0
    i0 = power_integral(s0, ds, q)
    i1 = (1.0 - s0) * i0 - power_integral(s0, ds, q + 1.0)
    return f0 * i0 + (f1 - f0) / ds * i1


def ledger_update(record: LedgerRecord, state: LensState, params: ModelParams) -> LedgerRecord:
    """Advance the ledger to ``state`` (lens time must increase)."""
    if not state.s > record.s:
        raise DomainError(f"ledger times must increase: {state.s} after {record.s}")
    v = state.v
    couplings = _couplings(params)
    lps = [lp_integral(v, p) for _, p in couplings]
    acc = []
    for (lam, p), L_old, L_new, prev in zip(couplings, (record.lp1, record.lp2), lps,
                                            (record.M_s, record.N_s)):
        if lam == 0:
            acc.append(0.0)
            continue
        q = params.lens_exponent(p) - 1.0
        acc.append(prev + lam / (p + 2) * _product_trapezoid(record.s, state.s, q, L_old, L_new))
    grad = dirichlet_form(v)
    K = 0.5 * grad + _lens_potential(state.s, lps, params)
    a, b = identity_coefficients(params)
    rhs = a * acc[0] + b * acc[1] + record.C0
    den = abs(K) + abs(record.C0)
    resid = abs(K - rhs) / den if den > 0 else 0.0
    return LedgerRecord(state.s, norm_l2(v), lens_physical_energy(state, params), grad,
                        lps[0], lps[1], acc[0], acc[1], K, record.C0, resid)


def physical_record(t: float, u: RadialField, params: ModelParams,
                    e0: Optional[float] = None) -> LedgerRecord:
    """Physical-frame row: K holds E(u), residual the relative energy drift."""
    couplings = _couplings(params)
    lps = [lp_integral(u, p) for _, p in couplings]
    e = energy(u, params)
    e0 = e if e0 is None else e0
    den = abs(e) + abs(e0)
    resid = abs(e - e0) / den if den > 0 else 0.0
    return LedgerRecord(t, norm_l2(u), e, dirichlet_form(u), lps[0], lps[1],
                        0.0, 0.0, e, e0, resid)


def ledger_csv(records: Sequence[LedgerRecord]) -> str:
    buf = io.StringIO()
    buf.write(",".join(LEDGER_COLUMNS) + "\n")
    for rec in records:
        buf.write(",".join(f"{x:.15e}" for x in rec.row()) + "\n")
    return buf.getvalue()


def _lsq_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


@dataclass
class GronwallFit:
    slope: Optional[float]
    bound: float
    window: tuple
    skipped: bool = False
    reason: str = ""
    tolerance: float = 0.1

    @property
    def within_bound(self) -> Optional[bool]:
        """slope <= bound + tolerance; None when the fit was skipped."""
        return None if self.skipped else self.slope <= self.bound + self.tolerance


def gronwall_exponent_check(ledger: Sequence[LedgerRecord], params: ModelParams,
                            s_min: float = 0.5) -> GronwallFit:
    """Fit log(aM + bN) against -log(1-s) over s >= s_min.

    The growth bound is (4 - N p1)/2; the fit is skipped when the combination
    is not positive on the window.
    """
    a, b = identity_coefficients(params)
    bound = (4.0 - params.N * params.p1) / 2.0
    recs = [r for r in ledger if r.s >= s_min]
    window = (s_min, recs[-1].s if recs else s_min)
    if len(recs) < 3:
        return GronwallFit(None, bound, window, True, "fewer than 3 records in window")
    comb = np.array([a * r.M_s + b * r.N_s for r in recs])
    if np.any(comb <= 0):
        return GronwallFit(None, bound, window, True, "aM + bN not positive on window")
    x = -np.log1p(-np.array([r.s for r in recs]))
    slope, _ = _lsq_slope(x, np.log(comb))
    return GronwallFit(slope, bound, window)


def decay_exponent(r: float, N: int) -> float:
    """-N (r - 2) / (2 r): the predicted L^r decay rate in t."""
    return -N * (r - 2.0) / (2.0 * r)


@dataclass
class DecayFit:
    slope: float
    theory: float
    window: tuple

    @property
    def relative_error(self) -> float:
        if self.theory == 0:
            return abs(self.slope)
        return abs(self.slope - self.theory) / abs(self.theory)


def decay_fit(times: Sequence[float], norms: Sequence[float], r: float, N: int,
              window: Optional[tuple] = None) -> DecayFit:
    """Least-squares slope of log ||u(t)||_r against log(1+t).

    The default window is the last decade of t.  For r <= 2 no decay is
    predicted and the theoretical slope is 0.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(norms, dtype=float)
    if r < 2:
        raise ParameterError(f"decay fit needs r >= 2, got {r}")
    if window is None:
        window = (t.max() / 10.0, t.max())
    sel = (t >= window[0]) & (t <= window[1]) & (y > 0)
    if sel.sum() < 3:
        raise ParameterError("decay fit window holds fewer than 3 samples")
    slope, _ = _lsq_slope(np.log1p(t[sel]), np.log(y[sel]))
    theory = decay_exponent(r, N) if r > 2 else 0.0
    return DecayFit(slope, theory, (float(window[0]), float(window[1])))


def bump(grid: RadialGrid, r0: float = 2.0) -> RadialField:
    """Smooth compactly supported exp(-1/(1 - (r/r0)^2)) for r < r0."""
    r = np.asarray(grid.r)
    x = np.clip(r / r0, 0.0, 1.0)
    vals = np.zeros_like(r)
    inside = x < 1
    vals[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return RadialField(grid, vals)


def pairing_series(lens_traj: Sequence[LensState], theta: RadialField) -> tuple[np.ndarray, np.ndarray]:
    """(s_k, <v(s_k), theta>) with the complex pairing."""
    s = np.array([st.s for st in lens_traj])
    vals = np.array([pairing(st.v, theta) for st in lens_traj])
    return s, vals


@dataclass
class WitnessReport:
    s: np.ndarray
    pairing: np.ndarray
    exponent: float
    predicted: float
    growth_ratio: float
    window: tuple
    model: str


def pairing_drift(s: Sequence[float], vals: Sequence[complex],
                  window: tuple = (0.5, 0.99)) -> float:
    """max | |<v(s),theta>| / |<v(s_a),theta>| - 1 | over the window [s_a, s_b]."""
    s = np.asarray(s, dtype=float)
    mag = np.abs(np.asarray(vals))
    sel = (s >= window[0] - 1e-12) & (s <= window[1] + 1e-12)
    if sel.sum() < 2:
        raise ParameterError("pairing window holds fewer than 2 samples")
    mag = mag[sel]
    if mag[0] == 0:
        raise DomainError("pairing vanishes at the start of the window")
    return float(np.max(np.abs(mag / mag[0] - 1.0)))


def witness_from_series(s: Sequence[float], vals: Sequence[complex], params: ModelParams,
                        window: tuple = (0.5, 0.99)) -> WitnessReport:
    """Growth of |<v(s), theta>| as s -> 1 for p1 <= 2/N.

    Reports the ratio |<v, theta>| (end of window) / (start of window) and the
    least-squares slope kappa of log|<v, theta>| against log(1-s), to be
    compared with (N p1 - 2)/2.  For N p1 = 2 the model is c1 |log(1-s)|;
    the exponent is then the log-log slope against |log(1-s)| and the
    prediction is 1.
    """
    N, p1 = params.N, params.p1
    if p1 > 2.0 / N * (1 + 1e-12):
        raise DomainError(f"witness regime needs p1 <= 2/N, got p1={p1}")
    s = np.asarray(s, dtype=float)
    vals = np.asarray(vals)
    sel = (s >= window[0] - 1e-12) & (s <= window[1] + 1e-12)
    if sel.sum() < 4:
        raise ParameterError("witness window holds fewer than 4 samples")
    ss, mag = s[sel], np.abs(vals[sel])
    if np.any(mag <= 0):
        raise DomainError("witness pairing vanishes inside the window")
    ratio = float(mag[-1] / mag[0])
    x = np.log1p(-ss)
    if abs(N * p1 - 2.0) < 1e-12:
        kappa, _ = _lsq_slope(np.log(-x), np.log(mag))
        return WitnessReport(s, vals, kappa, 1.0, ratio, window, "c1*|log(1-s)|")
    kappa, _ = _lsq_slope(x, np.log(mag))
    return WitnessReport(s, vals, kappa, (N * p1 - 2.0) / 2.0, ratio, window, "c1*(1-s)^kappa")


def nonscatter_witness(lens_traj: Sequence[LensState], theta: RadialField,
                       params: ModelParams, window: tuple = (0.5, 0.99)) -> WitnessReport:
    """``witness_from_series`` applied to a stored lens trajectory."""
    s, vals = pairing_series(lens_traj, theta)
    return witness_from_series(s, vals, params, window)
