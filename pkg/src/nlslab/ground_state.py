"""Positive radial ground state of Lap W - (2/N) W + W^{1+4/N} = 0 and the sharp
Gagliardo-Nirenberg constant C_N = (N+2) / (N ||W||_2^{4/N}).

W is found by shooting on W(0) with bisection: too large a value makes W
cross zero, too small a value makes W turn back up while still positive.
The mass, gradient and potential integrals are carried along as extra ODE
components, so the Pohozaev residuals reflect the ODE tolerance rather than
a separate quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, ParameterError, SolverError
from .radial import (
    ModelParams,
    RadialField,
    RadialGrid,
    gradient_sq,
    lp_integral,
    make_grid,
    norm_l2,
    sphere_area,
)

R_START = 1e-4
R_MAX = 80.0
SPLICE_FRACTION = 1e-8


@dataclass(frozen=True)
class GroundStateResult:
    N: int
    W: RadialField
    w0: float
    mass: float
    CN: float
    pohozaev: tuple[float, float]
    splice_radius: float

    def to_dict(self) -> dict:
        return {"N": self.N, "w0": self.w0, "mass": self.mass, "CN": self.CN,
                "residual_nehari": self.pohozaev[0], "residual_pohozaev": self.pohozaev[1],
                "splice_radius": self.splice_radius}


def sharp_constant(mass: float, N: int) -> float:
    """C_N from the ground-state mass ||W||_2."""
    return (N + 2) / (N * mass ** (4.0 / N))


def _rhs(N: int, c: float, p: float):
    def f(r, y):
        W, dW = y[0], y[1]
        aW = abs(W)
        rn = r ** (N - 1)
        return [dW,
                -(N - 1) / r * dW + c * W - aW ** p * W,
                W * W * rn,
                dW * dW * rn,
                aW ** (p + 2) * rn]
    return f


def _initial(w0: float, N: int, c: float, p: float) -> list[float]:
    b = w0 * (c - w0 ** p) / (2 * N)
    r = R_START
    W = w0 + b * r * r
    rn1 = r ** N / N
    return [W, 2 * b * r, W * W * rn1, 0.0, abs(W) ** (p + 2) * rn1]


def _shoot(w0: float, N: int, rtol: float, dense: bool = False):
    c, p = 2.0 / N, 4.0 / N

    def cross(r, y):
        return y[0]
    cross.terminal = True
    cross.direction = -1

    def turn(r, y):
        return y[1]
    turn.terminal = True
    turn.direction = 1

    return solve_ivp(_rhs(N, c, p), (R_START, R_MAX), _initial(w0, N, c, p),
                     method="DOP853", rtol=rtol, atol=1e-14 * max(w0, 1.0),
                     events=(cross, turn), dense_output=dense)


def _classify(sol) -> int:
    """+1 overshoot (zero crossing), -1 undershoot (turns up), 0 neither.

    Starting values with W'' > 0 at the origin never decrease and count as
    undershoot.
    """
    if len(sol.t_events[0]):
        return 1
    if len(sol.t_events[1]) or sol.y[1, -1] >= 0:
        return -1
    return 0


def shoot_ground_state(N: int, tol: float = 1e-12, grid: RadialGrid | None = None,
                       rtol: float = 1e-12) -> GroundStateResult:
    """Ground state by bisection on W(0) to bracket width ``tol``.

    Beyond the splice radius (where the two bracketing trajectories separate,
    or W < 1e-8 W(0)) the profile continues as
    W(r_s) (r_s/r)^{(N-1)/2} exp(-sqrt(2/N) (r - r_s)).
    """
    if int(N) != N or N < 3:
        raise ParameterError(f"N must be an integer >= 3, got {N}")
    if not 0 < tol <= 1e-6:
        raise ParameterError(f"tol must lie in (0, 1e-6], got {tol}")
    lo, hi = 1e-3, 1e3
    if _classify(_shoot(lo, N, rtol)) != -1 or _classify(_shoot(hi, N, rtol)) != 1:
        raise SolverError("could not bracket the ground state in [1e-3, 1e3]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        kind = _classify(_shoot(mid, N, rtol))
        if kind == 1:
            hi = mid
        else:
            lo = mid
    sol_lo = _shoot(lo, N, rtol, dense=True)
    sol_hi = _shoot(hi, N, rtol, dense=True)
    w0 = 0.5 * (lo + hi)

    r_end = min(sol_lo.t[-1], sol_hi.t[-1])
    rr = np.linspace(R_START, r_end, 20001)
    Wlo = sol_lo.sol(rr)[0]
    Whi = sol_hi.sol(rr)[0]
    bad = (np.abs(Wlo - Whi) > 1e-3 * np.abs(Wlo)) | (Wlo < SPLICE_FRACTION * w0)
    idx = int(np.argmax(bad)) if bad.any() else len(rr) - 1
    r_s = float(rr[max(idx - 1, 1)])
    y_s = 0.5 * (sol_lo.sol(r_s) + sol_hi.sol(r_s))
    W_s = float(y_s[0])
    k = math.sqrt(2.0 / N)
    p = 4.0 / N
    rn = r_s ** (N - 1)
    # tail integrals of W_s^2 (r_s/r)^{N-1} e^{-2k(r - r_s)} r^{N-1}, etc.
    tail_mass = W_s ** 2 * rn / (2 * k)
    tail_grad = k ** 2 * tail_mass
    tail_pot = W_s ** (p + 2) * rn / ((p + 2) * k)
    sig = sphere_area(N)
    mass2 = sig * (y_s[2] + tail_mass)
    grad2 = sig * (y_s[3] + tail_grad)
    pot = sig * (y_s[4] + tail_pot)
    c = 2.0 / N
    res1 = abs(grad2 + c * mass2 - pot) / pot
    res2 = abs((N - 2) / 2 * grad2 + mass2 - N / (p + 2) * pot) / pot
    mass = math.sqrt(mass2)

    if grid is None:
        grid = make_grid(40.0, 8191, N)
    r = np.asarray(grid.r)
    vals = np.empty_like(r)
    inner = r <= r_s
    vals[inner] = 0.5 * (sol_lo.sol(r[inner])[0] + sol_hi.sol(r[inner])[0])
    ro = r[~inner]
    vals[~inner] = W_s * (r_s / ro) ** ((N - 1) / 2) * np.exp(-k * (ro - r_s))
    W = RadialField(grid, vals)
    return GroundStateResult(N, W, w0, mass, sharp_constant(mass, N), (res1, res2), r_s)


@lru_cache(maxsize=None)
def ground_state(N: int) -> GroundStateResult:
    """Cached ground state at default tolerance and grid."""
    return shoot_ground_state(N)


def gn_ratio(f: RadialField) -> float:
    """||f||_{4/N+2}^{4/N+2} / (||grad f||_2^2 ||f||_2^{4/N})."""
    N = f.grid.N
    mass = norm_l2(f)
    grad = gradient_sq(f)
    if mass == 0 or grad == 0:
        raise DomainError("Gagliardo-Nirenberg ratio undefined for a zero field")
    return lp_integral(f, 4.0 / N) / (grad * mass ** (4.0 / N))


def threshold_mass_bound(params: ModelParams, CN: float) -> float:
    """Upper bound on ||phi||_2^{4/N} guaranteeing scattering when lambda1 > 0,
    lambda2 < 0 and 2/N < p1 < p2 < 4/N.

        (4 - N p1) / (2 N (p2 - p1) C_N)
          * ((p2 + 2)/|lambda2|)^{(4 - N p1)/(N (p2 - p1))}
          * (lambda1 (4 - N p1)(N p1 - 2) / (2 (4 - N p2)(p1 + 2)))^{(4 - N p2)/(N (p2 - p1))}
    """
    N, l1, l2, p1, p2 = params.N, params.lambda1, params.lambda2, params.p1, params.p2
    if not (l1 > 0 and l2 < 0 and p2 is not None and 2.0 / N < p1 < p2 < 4.0 / N):
        raise DomainError("mass threshold applies only for lambda1 > 0, lambda2 < 0, "
                          "2/N < p1 < p2 < 4/N")
    d = N * (p2 - p1)
    e1 = (4 - N * p1) / d
    e2 = (4 - N * p2) / d
    lead = (4 - N * p1) / (2 * d * CN)
    f1 = ((p2 + 2) / abs(l2)) ** e1
    f2 = (l1 * (4 - N * p1) * (N * p1 - 2) / (2 * (4 - N * p2) * (p1 + 2))) ** e2
    return lead * f1 * f2
