"""Radial grids, complex radial fields, quadrature and norms on R^N.

A radially symmetric function u(|x|) on R^N is sampled at the interior nodes
r_j = j*h, j = 1..M, of a uniform grid on [0, R] with h = R/(M+1).  The field
vanishes at r = R (Dirichlet truncation).  Integrals over R^N reduce to

    int f dx = sigma_{N-1} * sum_j f(r_j) r_j^{N-1} h,

with sigma_{N-1} = 2 pi^{N/2} / Gamma(N/2) the area of the unit sphere.

The propagators work on the reduced field w = r^{(N-1)/2} u, for which the
radial Laplacian becomes w'' - (N-1)(N-3)/(4 r^2) w and the L^2 norm is the
plain 1D norm of w.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, GridMismatchError, ParameterError

MIN_NODES = 16


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere S^{N-1} in R^N."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


@dataclass(frozen=True)
class ModelParams:
    """Parameters (N, lambda1, lambda2, p1, p2) of
    i u_t + Lap u = lambda1 |u|^p1 u + lambda2 |u|^p2 u.

    With ``lambda2 == 0`` the single-power equation is represented and ``p2``
    may be omitted.  ``lambda1 == 0`` is accepted so the free flow can be run
    as a control; the classifier rejects it.
    """

    N: int
    lambda1: float
    lambda2: float = 0.0
    p1: float = 1.0
    p2: Optional[float] = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise ParameterError(f"N must be an integer >= 3, got {self.N}")
        crit = 4.0 / (self.N - 2)
        if not self.p1 > 0:
            raise ParameterError(f"p1 must be positive, got {self.p1}")
        if self.lambda2 != 0:
            if self.p2 is None:
                raise ParameterError("p2 is required when lambda2 != 0")
            if not self.p1 < self.p2:
                raise ParameterError(f"need p1 < p2, got p1={self.p1}, p2={self.p2}")
            if self.p2 > crit * (1 + 1e-12):
                raise ParameterError(f"p2={self.p2} exceeds 4/(N-2)={crit}")
        elif self.p1 > crit * (1 + 1e-12):
            raise ParameterError(f"p1={self.p1} exceeds 4/(N-2)={crit}")

    @property
    def terms(self) -> list[tuple[float, float]]:
        """Active (coupling, exponent) pairs; zero couplings are dropped."""
        out = []
        if self.lambda1 != 0:
            out.append((self.lambda1, self.p1))
        if self.lambda2 != 0:
            out.append((self.lambda2, self.p2))
        return out

    def lens_exponent(self, p: float) -> float:
        """gamma = (N p - 4)/2, the power of (1-s) multiplying |v|^p v."""
        return (self.N * p - 4.0) / 2.0

    def to_dict(self) -> dict:
        return {"N": self.N, "lambda1": self.lambda1, "lambda2": self.lambda2,
                "p1": self.p1, "p2": self.p2}


@dataclass(frozen=True)
class RadialGrid:
    R: float
    M: int
    N: int

    @cached_property
    def h(self) -> float:
        return self.R / (self.M + 1)

    @cached_property
    def r(self) -> np.ndarray:
        r = self.h * np.arange(1, self.M + 1)
        r.setflags(write=False)
        return r

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights for integrals over R^N."""
        w = sphere_area(self.N) * self.r ** (self.N - 1) * self.h
        w.setflags(write=False)
        return w

    @cached_property
    def reduce_factor(self) -> np.ndarray:
        """r^{(N-1)/2}, mapping u to the reduced field w."""
        f = self.r ** ((self.N - 1) / 2)
        f.setflags(write=False)
        return f

    @cached_property
    def centrifugal(self) -> np.ndarray:
        """V_eff(r) = (N-1)(N-3)/(4 r^2)."""
        v = (self.N - 1) * (self.N - 3) / (4.0 * self.r ** 2)
        v.setflags(write=False)
        return v

    def scaled(self, factor: float) -> "RadialGrid":
        """Grid with the same node count and radius R*factor."""
        return RadialGrid(self.R * factor, self.M, self.N)

    def zeros(self) -> "RadialField":
        return RadialField(self, np.zeros(self.M, dtype=complex))

    def sample(self, fn) -> "RadialField":
        """Field with values fn(r) at the nodes."""
        return RadialField(self, fn(self.r))


def make_grid(R: float, M: int, N: int) -> RadialGrid:
    if not R > 0:
        raise ParameterError(f"grid radius must be positive, got {R}")
    if int(M) != M or M < MIN_NODES:
        raise ParameterError(f"need at least {MIN_NODES} interior nodes, got {M}")
    if int(N) != N or N < 3:
        raise ParameterError(f"dimension must be >= 3, got {N}")
    return RadialGrid(float(R), int(M), int(N))


@dataclass(frozen=True, eq=False)
class RadialField:
    """Complex samples u(r_j) of a radial function.  Immutable."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.grid.M,):
            raise GridMismatchError(
                f"expected {self.grid.M} samples, got shape {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_reduced(cls, grid: RadialGrid, w: np.ndarray) -> "RadialField":
        return cls(grid, np.asarray(w) / grid.reduce_factor)

    @property
    def reduced(self) -> np.ndarray:
        return self.values * self.grid.reduce_factor

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    def like(self, values) -> "RadialField":
        return RadialField(self.grid, values)

    def _other(self, other):
        if isinstance(other, RadialField):
            check_same_grid(self, other)
            return other.values
        return other

    def __add__(self, other):
        return self.like(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.like(self.values - self._other(other))

    def __rsub__(self, other):
        return self.like(self._other(other) - self.values)

    def __mul__(self, other):
        return self.like(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.like(self.values / self._other(other))

    def __neg__(self):
        return self.like(-self.values)

    def conj(self) -> "RadialField":
        return self.like(self.values.conj())

    def __abs__(self) -> "RadialField":
        return self.like(np.abs(self.values))


def check_same_grid(f: RadialField, g: RadialField) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"fields live on different grids: {f.grid} vs {g.grid}")


def integrate(grid: RadialGrid, values: np.ndarray) -> complex | float:
    """int_{R^N} f dx for samples f(r_j)."""
    return np.dot(grid.weights, values)


def norm_lr(f: RadialField, r: float) -> float:
    """L^r norm on R^N."""
    if not r >= 1:
        raise ParameterError(f"L^r norm needs r >= 1, got {r}")
    return float(integrate(f.grid, np.abs(f.values) ** r)) ** (1.0 / r)


def norm_l2(f: RadialField) -> float:
    return norm_lr(f, 2.0)


def lp_integral(f: RadialField, p: float) -> float:
    """||f||_{p+2}^{p+2} = int |f|^{p+2} dx."""
    return float(integrate(f.grid, np.abs(f.values) ** (p + 2)))


def radial_derivative(f: RadialField) -> np.ndarray:
    """d/dr by centered differences, second-order one-sided at the end nodes."""
    return np.gradient(f.values, f.grid.h, edge_order=2)


def norm_h1(f: RadialField) -> float:
    du = radial_derivative(f)
    return math.sqrt(norm_l2(f) ** 2 + float(integrate(f.grid, np.abs(du) ** 2)))


def norm_weighted(f: RadialField) -> float:
    """|| |x| f ||_2."""
    return math.sqrt(float(integrate(f.grid, (f.grid.r * np.abs(f.values)) ** 2)))


def norm_sigma(f: RadialField) -> float:
    """||f||_Sigma = ||f||_{H^1} + ||x f||_2."""
    return norm_h1(f) + norm_weighted(f)


def gradient_sq(f: RadialField) -> float:
    """||grad f||_2^2 from the centered-difference derivative."""
    return float(integrate(f.grid, np.abs(radial_derivative(f)) ** 2))


def dirichlet_form(f: RadialField) -> float:
    """||grad f||_2^2 as the discrete quadratic form conserved by the propagators.

    Uses forward differences of the reduced field with w_0 = w_{M+1} = 0 plus
    the centrifugal term, i.e. sigma_{N-1} * h * <w, A w>.
    """
    g = f.grid
    w = f.reduced
    wp = np.concatenate(([0.0], w, [0.0]))
    kin = np.sum(np.abs(np.diff(wp)) ** 2) / g.h
    pot = np.sum(g.centrifugal * np.abs(w) ** 2) * g.h
    return float(sphere_area(g.N) * (kin + pot))


def pairing(f: RadialField, theta: RadialField) -> complex:
    """Complex pairing int f conj(theta) dx."""
    check_same_grid(f, theta)
    return complex(integrate(f.grid, f.values * theta.values.conj()))


def real_pairing(f: RadialField, theta: RadialField) -> float:
    """Real duality Re int f conj(theta) dx."""
    return pairing(f, theta).real


def energy(u: RadialField, params: ModelParams) -> float:
    """E(u) = 1/2 ||grad u||^2 + sum_i lambda_i/(p_i+2) ||u||_{p_i+2}^{p_i+2}."""
    e = 0.5 * dirichlet_form(u)
    for lam, p in params.terms:
        e += lam / (p + 2) * lp_integral(u, p)
    return e


def gaussian(grid: RadialGrid, amplitude: float = 1.0, width: float = 1.0) -> RadialField:
    """amplitude * exp(-|x|^2 / width^2)."""
    return grid.sample(lambda r: amplitude * np.exp(-(r / width) ** 2))


def random_field(grid: RadialGrid, rng: np.random.Generator, terms: int = 3) -> RadialField:
    """Smooth random radial field: sum_k a_k exp(-r^2/w_k^2) times exp(i b r^2).

    Complex a_k are standard normal, w_k uniform in [0.5, 3] and b uniform in
    [-0.5, 0.5]; every draw comes from ``rng``.
    """
    a = rng.standard_normal(terms) + 1j * rng.standard_normal(terms)
    w = rng.uniform(0.5, 3.0, terms)
    b = rng.uniform(-0.5, 0.5)
    r = np.asarray(grid.r)
    vals = (a[:, None] * np.exp(-(r[None, :] / w[:, None]) ** 2)).sum(axis=0)
    return RadialField(grid, vals * np.exp(1j * b * r ** 2))


def resample(f: RadialField, grid: RadialGrid) -> RadialField:
    """Values of f at the nodes of another grid (same N).

    Exact when the target nodes coincide with source nodes; otherwise monotone
    cubic interpolation on the modulus and on the unwrapped phase.
    """
    return RadialField(grid, interpolate(f, grid.r))


def interpolate(f: RadialField, x: np.ndarray) -> np.ndarray:
    """Evaluate the radial field at radii x, 0 <= x <= R."""
    g = f.grid
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > g.R * (1 + 1e-12)):
        raise DomainError("interpolation radius outside [0, R]")
    idx = np.rint(x / g.h).astype(int)
    on_node = np.all(np.abs(x - idx * g.h) <= 1e-10 * g.h) and np.all((idx >= 1) & (idx <= g.M))
    if on_node:
        return f.values[idx - 1].copy()
    # even extension through the origin, zero at r = R
    rr = np.concatenate((-g.r[::-1], g.r, [g.R]))
    vals = np.concatenate((f.values[::-1], f.values, [0.0]))
    mod = np.abs(vals)
    phase = np.unwrap(np.angle(vals))
    out_mod = PchipInterpolator(rr, mod)(x)
    out_phase = PchipInterpolator(rr, phase)(x)
    return out_mod * np.exp(1j * out_phase)


def to_csv(f: RadialField) -> str:
    """CSV text: a header with R, M, N then rows r_j, Re u_j, Im u_j."""
    g = f.grid
    buf = io.StringIO()
    buf.write(f"# R={g.R!r},M={g.M},N={g.N}\n")
    buf.write("r,re,im\n")
    for r, v in zip(g.r, f.values):
        buf.write(f"{r:.17g},{v.real:.17g},{v.imag:.17g}\n")
    return buf.getvalue()


def from_csv(text: str) -> RadialField:
    lines = text.strip().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ParameterError("missing grid header line")
    meta = dict(kv.split("=") for kv in lines[0][1:].strip().split(","))
    grid = RadialGrid(float(meta["R"]), int(meta["M"]), int(meta["N"]))
    data = np.loadtxt(io.StringIO("\n".join(lines[2:])), delimiter=",", ndmin=2)
    if data.shape[0] != grid.M:
        raise ParameterError(f"expected {grid.M} rows, found {data.shape[0]}")
    return RadialField(grid, data[:, 1] + 1j * data[:, 2])
