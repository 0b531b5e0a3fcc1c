"""Displacement and squeeze gates, quadrature statistics and phase-space output.

Conventions
-----------
* Quadrature ``X_theta = (a e^{-i theta} + a^dag e^{i theta}) / 2``; the vacuum
  variance is 1/4 for every angle.
* Squeezing degree ``1 - var_min / (1/4)``.
* Phase-space coordinates are ``x = Re(alpha)``, ``p = Im(alpha)`` and the
  Wigner function is normalised so that ``integral W dx dp = 1``; the vacuum
  has ``W(0, 0) = 2/pi``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import TruncationOverflowError
from .fock import (
    CavityState,
    FieldOperator,
    FockSpace,
    _lowering_matrix,
    coherent_tail,
    expm_hermitian,
    inner_product,
)

VACUUM_VARIANCE = 0.25
WIGNER_NORMALIZATION = "integral W dx dp = 1, x = Re(alpha), p = Im(alpha), vacuum W(0,0) = 2/pi"
QUADRATURE_CONVENTION = "X_theta = (a exp(-i theta) + a^dag exp(i theta))/2, vacuum variance 1/4"


def _wrap_angle(phi: float) -> float:
    """Map an angle into (-pi, pi]."""
    out = math.remainder(phi, 2 * math.pi)
    return math.pi if out == -math.pi else out


@dataclass(frozen=True)
class SqueezeSpec:
    """Dynamical squeeze: effective amplitude ``xi`` (s^-1) acting for time ``t`` (s)."""

    xi: complex
    t: float

    @property
    def r(self) -> float:
        return 2.0 * abs(self.xi) * self.t

    @property
    def theta(self) -> float:
        # xi = |xi| e^{-i Theta}
        return -float(np.angle(self.xi))

    @property
    def phi(self) -> float:
        return _wrap_angle(math.pi / 2 - self.theta)

    @property
    def zeta(self) -> complex:
        """Equivalent static squeeze parameter r e^{i phi}."""
        return self.r * complex(math.cos(self.phi), math.sin(self.phi))


@dataclass(frozen=True)
class QuadratureReport:
    var_min: float
    angle_min: float
    var_conjugate: float
    degree: float

    @property
    def uncertainty_product(self) -> float:
        return self.var_min * self.var_conjugate


@dataclass(frozen=True)
class WignerGridSpec:
    x_min: float = -4.0
    x_max: float = 4.0
    p_min: float = -4.0
    p_max: float = 4.0
    nx: int = 81
    np: int = 81

    def axes(self):
        return (
            np.linspace(self.x_min, self.x_max, self.nx),
            np.linspace(self.p_min, self.p_max, self.np),
        )


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """Wigner function sampled on a rectangular grid; ``values[i, j] = W(x_i, p_j)``."""

    x_min: float
    x_max: float
    p_min: float
    p_max: float
    nx: int
    np: int
    values: np.ndarray = field(repr=False)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.np)

    def integral(self) -> float:
        return float(trapezoid(trapezoid(self.values, self.ps, axis=1), self.xs))

    def to_csv(self, header: dict | None = None) -> str:
        buf = io.StringIO()
        meta = {
            "x_range": f"{self.x_min!r},{self.x_max!r}",
            "p_range": f"{self.p_min!r},{self.p_max!r}",
            "nx": self.nx,
            "np": self.np,
            "normalization": WIGNER_NORMALIZATION,
        }
        meta.update(header or {})
        for key, val in meta.items():
            buf.write(f"# {key}: {val}\n")
        buf.write("x,p,W_per_area\n")
        for i, x in enumerate(self.xs):
            for j, p in enumerate(self.ps):
                buf.write(f"{x!r},{p!r},{float(self.values[i, j])!r}\n")
        return buf.getvalue()


# ---------------------------------------------------------------------------
# gates

def _tail_guard(space: FockSpace, column: np.ndarray, what: str):
    tail = float(np.sum(np.abs(column[space.interior:]) ** 2))
    if tail > space.tail_tol:
        raise TruncationOverflowError(
            f"{what} moves {tail:.3e} of the vacuum population into the truncation "
            f"tail of dim={space.dim}"
        )


def displacement(space: FockSpace, alpha: complex, convention: str = "standard") -> FieldOperator:
    """Displacement operator.

    ``standard`` builds exp(alpha a^dag - alpha* a).  ``paper-literal`` builds
    exp[(alpha* a - alpha a^dag)/2], which equals the standard operator at
    ``-alpha/2``.
    """
    if convention == "standard":
        beta = complex(alpha)
    elif convention == "paper-literal":
        beta = -complex(alpha) / 2
    else:
        raise ValueError(f"unknown displacement convention {convention!r}")
    if coherent_tail(space, beta) > space.tail_tol:
        raise TruncationOverflowError(
            f"displacement |alpha|^2={abs(beta) ** 2:.3g} overflows dim={space.dim}"
        )
    a = _lowering_matrix(space.dim)
    # exp(beta a^dag - beta* a) = exp(-i K), K = i (beta a^dag - beta* a)
    K = 1j * (beta * a.T - np.conj(beta) * a)
    U = expm_hermitian(K)
    _tail_guard(space, U[:, 0], "displacement")
    return FieldOperator(space, U, unitary=True)


def squeeze_static(space: FockSpace, zeta: complex) -> FieldOperator:
    """S(zeta) = exp[(zeta* a^2 - zeta a^dag^2)/2]."""
    a = _lowering_matrix(space.dim)
    a2 = a @ a
    zeta = complex(zeta)
    K = 0.5j * (np.conj(zeta) * a2 - zeta * a2.T)
    U = expm_hermitian(K)
    _tail_guard(space, U[:, 0], "squeeze")
    return FieldOperator(space, U, unitary=True)


def squeeze_dynamic(space: FockSpace, xi: complex, t: float) -> FieldOperator:
    """S(xi, t) = exp[-i (xi a^dag^2 + xi* a^2) t]; squeeze factor r = 2|xi|t."""
    a = _lowering_matrix(space.dim)
    a2 = a @ a
    xi = complex(xi)
    K = xi * a2.T + np.conj(xi) * a2
    U = expm_hermitian(K, t)
    _tail_guard(space, U[:, 0], "squeeze")
    return FieldOperator(space, U, unitary=True)


# ---------------------------------------------------------------------------
# quadratures

def quadrature_operator(space: FockSpace, theta: float) -> FieldOperator:
    a = _lowering_matrix(space.dim)
    ph = complex(math.cos(theta), math.sin(theta))
    X = 0.5 * (a * np.conj(ph) + a.T * ph)
    return FieldOperator(space, X, hermitian=True)


def quadrature_variance(state: CavityState, theta: float) -> float:
    X = quadrature_operator(state.space, theta).mat
    psi = state.amps
    Xpsi = X @ psi
    mean = np.vdot(psi, Xpsi).real
    return float(np.vdot(Xpsi, Xpsi).real - mean**2)


def _moments(state: CavityState):
    psi = state.amps
    n = np.arange(state.space.dim)
    s1 = np.sqrt(n[1:])
    a_psi = np.zeros_like(psi)
    a_psi[:-1] = s1 * psi[1:]
    a2_psi = np.zeros_like(psi)
    a2_psi[:-1] = s1 * a_psi[1:]
    return np.vdot(psi, a_psi), np.vdot(psi, a2_psi), float(np.sum(n * np.abs(psi) ** 2))


def _variance_curve(state: CavityState):
    """Variance of X_theta as a vectorised function of theta, from <a>, <a^2>, <n>."""
    m1, m2, nbar = _moments(state)
    c = m2 - m1**2
    base = 0.25 * (2.0 * (nbar - abs(m1) ** 2) + 1.0)

    def var(theta):
        return base + 0.5 * np.real(c * np.exp(-2j * np.asarray(theta)))

    return var


def _golden_min(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def min_variance(state: CavityState, grid: int = 720) -> QuadratureReport:
    """Minimum quadrature variance over theta in [0, pi).

    Coarse scan on ``grid`` points, then golden-section refinement to 1e-10
    in theta.  Degenerate (angle-independent) states report theta = 0.
    """
    var = _variance_curve(state)
    thetas = np.arange(grid) * (math.pi / grid)
    vals = var(thetas)
    if float(np.max(vals) - np.min(vals)) < 1e-14:
        theta = 0.0
    else:
        k = int(np.argmin(vals))
        h = math.pi / grid
        theta = _golden_min(lambda th: float(var(th)), thetas[k] - h, thetas[k] + h)
        theta = theta % math.pi
    vmin = float(var(theta))
    vconj = float(var(theta + math.pi / 2))
    if vconj < vmin:
        vmin, vconj = vconj, vmin
    degree = max(0.0, 1.0 - vmin / VACUUM_VARIANCE)
    return QuadratureReport(vmin, float(theta), vconj, degree)


def squeezing_degree(report: QuadratureReport) -> float:
    return max(0.0, 1.0 - report.var_min / VACUUM_VARIANCE)


# ---------------------------------------------------------------------------
# overlaps and photon statistics

def fidelity(a: CavityState, b: CavityState) -> float:
    return abs(inner_product(a, b)) ** 2


def photon_distribution(state: CavityState) -> np.ndarray:
    return np.abs(state.amps) ** 2


def mean_photon(state: CavityState) -> float:
    return float(np.dot(np.arange(state.space.dim), photon_distribution(state)))


def odd_population(state: CavityState) -> float:
    return float(np.sum(photon_distribution(state)[1::2]))


# ---------------------------------------------------------------------------
# Wigner function

def wigner(state: CavityState, spec: WignerGridSpec | None = None, cutoff: float = 1e-30) -> WignerGrid:
    """Wigner function of a pure state on a rectangular (x, p) grid.

    Uses the iterative Fock-basis kernel W_mn(alpha) built from the vacuum
    Gaussian by the ladder recursions; amplitudes whose populations are all
    below ``cutoff`` at the top of the basis are dropped.
    """
    spec = spec or WignerGridSpec()
    xs, ps = spec.axes()
    A = xs[:, None] + 1j * ps[None, :]
    psi = state.amps
    pops = np.abs(psi) ** 2
    support = np.nonzero(pops > cutoff)[0]
    M = int(support[-1]) + 1 if support.size else 1
    rho = np.outer(psi[:M], psi[:M].conj())

    wl = [None] * M
    wl[0] = (2.0 / math.pi) * np.exp(-2.0 * np.abs(A) ** 2)
    W = np.real(rho[0, 0]) * np.real(wl[0])
    for n in range(1, M):
        wl[n] = (2.0 * A * wl[n - 1]) / math.sqrt(n)
        W = W + 2.0 * np.real(rho[0, n] * wl[n])
    for m in range(1, M):
        temp = wl[m]
        wl[m] = (2.0 * np.conj(A) * temp - math.sqrt(m) * wl[m - 1]) / math.sqrt(m)
        W = W + np.real(rho[m, m] * wl[m])
        for n in range(m + 1, M):
            temp2 = (2.0 * A * wl[n - 1] - math.sqrt(m) * temp) / math.sqrt(n)
            temp = wl[n]
            wl[n] = temp2
            W = W + 2.0 * np.real(rho[m, n] * wl[n])
    return WignerGrid(spec.x_min, spec.x_max, spec.p_min, spec.p_max, spec.nx, spec.np, np.asarray(W))
