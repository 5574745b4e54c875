"""Unitary time stepping for the physical and the lens-frame equations.

Linear part: Crank-Nicolson (Cayley) steps on the reduced field
w = r^{(N-1)/2} u with the tridiagonal operator A = -d^2/dr^2 + V_eff.
Nonlinear part: the exact pointwise phase sub-flow.  The two are combined by
Strang splitting.  In the lens frame the nonlinear coefficients
h_i(s) = (1-s)^{(N p_i - 4)/2} are integrated exactly over each sub-step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.linalg import lapack

from .errors import DomainError, NonContractionError, ParameterError, SolverError
from .radial import ModelParams, RadialField, RadialGrid, norm_l2


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping knobs.

    ``near_one_ratio`` caps lens steps at ``near_one_ratio * (1 - s)`` so the
    step shrinks geometrically as s approaches 1.
    """

    dt: float = 1e-3
    substeps_linear: int = 1
    scheme: str = "strang"
    near_one_ratio: float = 0.05

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.substeps_linear < 1:
            raise ParameterError("substeps_linear must be >= 1")
        if self.scheme != "strang":
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if not 0 < self.near_one_ratio < 1:
            raise ParameterError("near_one_ratio must lie in (0, 1)")


@dataclass(frozen=True)
class LensState:
    s: float
    v: RadialField

    def __post_init__(self):
        if not 0 <= self.s < 1:
            raise DomainError(f"lens time must lie in [0, 1), got {self.s}")


class _Cayley:
    """Factored (I + i dt/2 A) for one grid and step size."""

    def __init__(self, grid: RadialGrid, dt: float):
        h2 = grid.h ** 2
        self.diag = 2.0 / h2 + np.asarray(grid.centrifugal)
        self.off = -1.0 / h2
        a = 0.5j * dt
        self.a = a
        n = grid.M
        dl = np.full(n - 1, a * self.off, dtype=complex)
        d = 1.0 + a * self.diag
        du = dl.copy()
        dl, d, du, du2, ipiv, info = lapack.zgttrf(dl, d, du)
        if info != 0:
            raise SolverError(f"tridiagonal factorization failed (info={info})")
        self.lu = (dl, d, du, du2, ipiv)

    def apply(self, w: np.ndarray) -> np.ndarray:
        aw = self.diag * w
        aw[1:] += self.off * w[:-1]
        aw[:-1] += self.off * w[1:]
        rhs = w - self.a * aw
        x, info = lapack.zgttrs(*self.lu, rhs)
        if info != 0:
            raise SolverError(f"tridiagonal solve failed (info={info})")
        return x


@lru_cache(maxsize=64)
def _cayley(grid: RadialGrid, dt: float) -> _Cayley:
    return _Cayley(grid, dt)


def free_step(f: RadialField, dt: float, substeps: int = 1) -> RadialField:
    """Approximate J(dt) f = exp(i dt Lap) f by ``substeps`` Cayley steps.

    Negative dt runs the free flow backwards.
    """
    if dt == 0:
        return f
    op = _cayley(f.grid, dt / substeps)
    w = np.array(f.reduced)
    for _ in range(substeps):
        w = op.apply(w)
    return RadialField.from_reduced(f.grid, w)


def _nonlinear_rate(u: np.ndarray, coeffs: Sequence[tuple[float, float]]) -> np.ndarray:
    amp = np.abs(u)
    rate = np.zeros(u.shape)
    for c, p in coeffs:
        rate += c * amp ** p
    return rate


def nonlinear_phase_step(f: RadialField, params: ModelParams, dt: float) -> RadialField:
    """Exact flow of i u_t = sum lambda_i |u|^p_i u over time dt."""
    rate = _nonlinear_rate(f.values, params.terms)
    return f.like(f.values * np.exp(-1j * dt * rate))


def strang_step_physical(f: RadialField, params: ModelParams, cfg: StepperConfig,
                         dt: Optional[float] = None) -> RadialField:
    dt = cfg.dt if dt is None else dt
    u = nonlinear_phase_step(f, params, dt / 2)
    u = free_step(u, dt, cfg.substeps_linear)
    return nonlinear_phase_step(u, params, dt / 2)


def power_integral(s: float, ds: float, q: float) -> float:
    """Exact int_s^{s+ds} (1 - tau)^q dtau for 0 <= s < s + ds < 1."""
    if not (0 <= s and ds >= 0 and s + ds < 1):
        raise DomainError(f"lens interval [{s}, {s + ds}] must lie inside [0, 1)")
    if ds == 0:
        return 0.0
    a = 1.0 - s
    if abs(q + 1.0) < 1e-12:
        return -math.log1p(-ds / a)
    e = q + 1.0
    # expm1 form keeps accuracy for small ds
    return a ** e * -math.expm1(e * math.log1p(-ds / a)) / e


def lens_phase_integral(s: float, ds: float, p: float, N: int) -> float:
    """Exact int_s^{s+ds} h(tau) dtau with h(tau) = (1 - tau)^{(N p - 4)/2}.

    The exponent equals -1 at p = 2/N, where the integral is logarithmic.
    """
    return power_integral(s, ds, (N * p - 4.0) / 2.0)


def _lens_phase(v: RadialField, params: ModelParams, s: float, ds: float) -> RadialField:
    coeffs = [(lam * lens_phase_integral(s, ds, p, params.N), p) for lam, p in params.terms]
    rate = _nonlinear_rate(v.values, coeffs)
    return v.like(v.values * np.exp(-1j * rate))


def strang_step_lens(state: LensState, params: ModelParams, cfg: StepperConfig,
                     ds: Optional[float] = None) -> LensState:
    """One Strang step of i v_s + Lap v = sum lambda_i h_i(s) |v|^p_i v."""
    ds = cfg.dt if ds is None else ds
    s = state.s
    if s + ds >= 1:
        raise DomainError(f"cannot step from s={s} by {ds}: lens time must stay below 1")
    v = _lens_phase(state.v, params, s, ds / 2)
    v = free_step(v, ds, cfg.substeps_linear)
    v = _lens_phase(v, params, s + ds / 2, ds / 2)
    return LensState(s + ds, v)


def lens_step_size(s: float, cfg: StepperConfig) -> float:
    """Step size at lens time s: dt, capped by near_one_ratio * (1 - s)."""
    return min(cfg.dt, cfg.near_one_ratio * (1.0 - s))


def iter_physical(phi: RadialField, params: ModelParams, cfg: StepperConfig,
                  t_end: float) -> Iterator[tuple[float, RadialField]]:
    """Yield (t, u(t)) at t = 0 and after every Strang step up to t_end."""
    n = max(1, int(round(t_end / cfg.dt)))
    dt = t_end / n
    u = phi
    yield 0.0, u
    for k in range(1, n + 1):
        u = strang_step_physical(u, params, cfg, dt)
        yield k * dt, u


def evolve_physical(phi: RadialField, params: ModelParams, cfg: StepperConfig,
                    t_end: float) -> RadialField:
    for _, u in iter_physical(phi, params, cfg, t_end):
        pass
    return u


def iter_lens(state: LensState, params: ModelParams, cfg: StepperConfig, s_end: float,
              stops: Sequence[float] = ()) -> Iterator[LensState]:
    """Yield the lens state at the start and after every step up to s_end.

    Steps follow ``lens_step_size``; every value in ``stops`` (and s_end) is
    hit exactly.
    """
    if not state.s <= s_end < 1:
        raise DomainError(f"s_end={s_end} must satisfy {state.s} <= s_end < 1")
    targets = sorted({float(x) for x in stops if state.s < x < s_end} | {float(s_end)})
    yield state
    for target in targets:
        while state.s < target:
            ds = lens_step_size(state.s, cfg)
            if state.s + ds >= target - 1e-12 * (1 - target):
                ds = target - state.s
            state = strang_step_lens(state, params, cfg, ds)
            if state.s != target and abs(state.s - target) < 1e-14:
                state = LensState(target, state.v)
            yield state


def evolve_lens(state: LensState, params: ModelParams, cfg: StepperConfig,
                s_end: float) -> LensState:
    for state in iter_lens(state, params, cfg, s_end):
        pass
    return state


def _forcing(u: np.ndarray, params: ModelParams) -> np.ndarray:
    return _nonlinear_rate(u, params.terms) * u


def picard_iterates(phi: RadialField, params: ModelParams, T: float, iters: int,
                    cfg: StepperConfig) -> Iterator[RadialField]:
    """Yield u_1(T), u_2(T), ... of the discretized Duhamel fixed-point map.

    u_{k+1}(t) = J(t) phi - i int_0^t J(t - s) F(u_k(s)) ds, with trapezoid
    quadrature on the grid t_n = n*dt and J(dt) a Cayley step; u_0 = J(t) phi.
    """
    if iters < 1:
        raise ParameterError("need at least one Picard iteration")
    n = max(1, int(math.ceil(T / cfg.dt - 1e-9)))
    dt = T / n
    grid = phi.grid
    step = _cayley(grid, dt / cfg.substeps_linear)

    def J(w):
        for _ in range(cfg.substeps_linear):
            w = step.apply(w)
        return w

    rf = grid.reduce_factor
    free = np.empty((n + 1, grid.M), dtype=complex)
    free[0] = phi.reduced
    for k in range(1, n + 1):
        free[k] = J(free[k - 1])
    bound = 1e3 * max(norm_l2(phi), 1e-300)
    current = free.copy()
    for _ in range(iters):
        forcing = np.array([_forcing(w / rf, params) * rf for w in current])
        nxt = np.empty_like(current)
        nxt[0] = free[0]
        acc = np.zeros(grid.M, dtype=complex)
        for k in range(1, n + 1):
            acc = J(acc + 0.5 * dt * forcing[k - 1]) + 0.5 * dt * forcing[k]
            nxt[k] = free[k] - 1j * acc
        current = nxt
        u = RadialField.from_reduced(grid, current[-1])
        size = norm_l2(u)
        if not np.isfinite(size) or size > bound:
            raise NonContractionError(
                f"Picard iterate norm {size:.3e} exceeds 1e3 * ||phi||; shorten T")
        yield u


def picard_iterate(phi: RadialField, params: ModelParams, T: float, iters: int,
                   cfg: StepperConfig) -> RadialField:
    for u in picard_iterates(phi, params, T, iters, cfg):
        pass
    return u
