"""Lens (pseudoconformal) frame maps and scattering-state extraction.

    s = t/(1+t),  y = x/(1+t),
    v(s, y) = (1+t)^{N/2} u(t, x) exp(-i|x|^2 / (4(1+t))).

The forward map samples u at x = (1+t) y_j.  When those radii coincide with
the nodes of u's grid (lens radius R_u/(1+t), same node count) no
interpolation happens; otherwise u is interpolated (monotone cubic on modulus
and unwrapped phase) and the quadratic phase is applied analytically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, ParameterError
from .propagators import LensState, free_step
from .radial import (
    ModelParams,
    RadialField,
    RadialGrid,
    integrate,
    interpolate,
    lp_integral,
    norm_l2,
    norm_sigma,
    radial_derivative,
)


def lens_time(t: float) -> float:
    return t / (1.0 + t)


def physical_time(s: float) -> float:
    if not s < 1:
        raise DomainError(f"lens time must be below 1, got {s}")
    return s / (1.0 - s)


def to_lens(u: RadialField, t: float, lens_grid: Optional[RadialGrid] = None) -> LensState:
    """Map u(t) on its grid to the lens state v(s).

    The default lens grid keeps the node count and has radius R_u/(1+t).
    """
    if t < 0:
        raise DomainError(f"to_lens needs t >= 0, got {t}")
    scale = 1.0 + t
    if lens_grid is None:
        lens_grid = u.grid.scaled(1.0 / scale)
    if lens_grid.R > u.grid.R / scale * (1 + 1e-12):
        raise DomainError(
            f"lens radius {lens_grid.R} exceeds the covered radius {u.grid.R / scale}")
    x = scale * lens_grid.r
    vals = interpolate(u, x)
    vals = scale ** (lens_grid.N / 2) * vals * np.exp(-1j * x ** 2 / (4 * scale))
    return LensState(lens_time(t), RadialField(lens_grid, vals))


def from_lens(state: LensState, grid: Optional[RadialGrid] = None) -> tuple[RadialField, float]:
    """Inverse map: (u(t), t) from v(s).

    By default u lives on the lens grid dilated by 1/(1-s), which needs no
    interpolation.
    """
    s = state.s
    t = physical_time(s)
    scale = 1.0 - s
    v = state.v
    if grid is None:
        grid = v.grid.scaled(1.0 / scale)
    y = scale * grid.r
    if y[-1] > v.grid.R * (1 + 1e-12):
        raise DomainError("target physical grid extends beyond the lens domain")
    vals = interpolate(v, y)
    vals = scale ** (grid.N / 2) * vals * np.exp(1j * y ** 2 / (4 * scale))
    return RadialField(grid, vals), t


def _rel(a: float, b: float) -> float:
    den = abs(a) + abs(b)
    return 0.0 if den == 0 else abs(a - b) / den


@dataclass
class IdentityReport:
    """Relative residuals of the gradient and L^{beta+2} transform identities."""

    gradient_v: float
    gradient_u: float
    lp: dict = field(default_factory=dict)

    @property
    def worst(self) -> float:
        return max([self.gradient_v, self.gradient_u, *self.lp.values()])


def check_identities(u: RadialField, t: float, v_state: LensState,
                     params: ModelParams) -> IdentityReport:
    """Compare norms of u(t) and v(s) = to_lens(u, t).

    gradient_v: ||grad v||^2 against 1/4 ||(x + 2i(1+t) grad) u||^2
    gradient_u: ||grad u||^2 against 1/4 ||(y - 2i(1-s) grad) v||^2
    lp[beta]:   ||v||_{beta+2}^{beta+2} against (1+t)^{N beta/2} ||u||_{beta+2}^{beta+2}
    for beta = 0, p1, p2.  Each residual is |a - b| / (|a| + |b|).
    """
    v = v_state.v
    s = v_state.s
    N = u.grid.N
    du = radial_derivative(u)
    dv = radial_derivative(v)
    grad_v = float(integrate(v.grid, np.abs(dv) ** 2))
    rhs_v = 0.25 * float(integrate(u.grid, np.abs(u.r * u.values + 2j * (1 + t) * du) ** 2))
    grad_u = float(integrate(u.grid, np.abs(du) ** 2))
    rhs_u = 0.25 * float(integrate(v.grid, np.abs(v.r * v.values - 2j * (1 - s) * dv) ** 2))
    betas = [0.0] + [p for _, p in params.terms]
    lp = {}
    for beta in betas:
        a = lp_integral(v, beta)
        b = (1 + t) ** (N * beta / 2) * lp_integral(u, beta)
        lp[beta] = _rel(a, b)
    return IdentityReport(_rel(grad_v, rhs_v), _rel(grad_u, rhs_u), lp)


@dataclass
class ExtractionReport:
    """Successive scattering-state candidates and their differences."""

    eps: list
    sigma_diff: list
    l2_diff: list

    def records(self) -> list[dict]:
        """JSON-ready rows (eps_k, sigma_diff, l2_diff); the first has no diff."""
        rows = [{"eps": self.eps[0], "sigma_diff": None, "l2_diff": None}]
        for e, sd, ld in zip(self.eps[1:], self.sigma_diff, self.l2_diff):
            rows.append({"eps": e, "sigma_diff": sd, "l2_diff": ld})
        return rows

    @property
    def decreasing(self) -> bool:
        d = self.sigma_diff
        return all(b < a for a, b in zip(d, d[1:]))


def scattering_candidate(state: LensState, substeps: int = 1000,
                         horizon: Optional[float] = None) -> RadialField:
    """exp(i|y|^2/4) J(-h) v(s), a scattering-state estimate from one lens state.

    With the default h = s this is exactly J(-t) u(t) written in lens
    variables; h = 1 gives the limit formula evaluated at finite s.  Both
    agree as s -> 1.
    """
    h = state.s if horizon is None else horizon
    w = free_step(state.v, -h, substeps)
    return w * np.exp(1j * w.r ** 2 / 4)


def extract_scattering_state(states: Sequence[LensState], substeps: int = 1000,
                             horizon: Optional[float] = None
                             ) -> tuple[RadialField, ExtractionReport]:
    """Scattering-state candidates from lens states approaching s = 1.

    Returns the last candidate and the Sigma / L^2 distances between
    consecutive candidates.
    """
    if len(states) < 2:
        raise ParameterError("need at least two lens states near s = 1")
    states = sorted(states, key=lambda st: st.s)
    cands = [scattering_candidate(st, substeps, horizon) for st in states]
    sig = [norm_sigma(b - a) for a, b in zip(cands, cands[1:])]
    l2 = [norm_l2(b - a) for a, b in zip(cands, cands[1:])]
    eps = [1.0 - st.s for st in states]
    return cands[-1], ExtractionReport(eps, sig, l2)
