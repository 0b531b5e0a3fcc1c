"""Truncated single-mode Fock space.

States, ladder operators, expectation values and propagators for one cavity
mode truncated to the basis |0>, ..., |dim-1>.  Operators on the
atom (x) field composite space reuse :class:`FieldOperator` with ``levels > 1``;
the composite index is ``level * dim + n``.

All Hamiltonians are stored divided by hbar, i.e. as angular frequencies in
s^-1, and propagators are ``exp(-i H t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, TypeVar

import numpy as np
import scipy.linalg
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import (
    InvalidDimensionError,
    NonHermitianError,
    OutOfRangeError,
    SpaceMismatchError,
    StepNonconvergenceError,
    TruncationOverflowError,
    ZeroNormError,
)

HERMITIAN_RTOL = 1e-12
UNITARY_ATOL = 1e-10
NORM_DRIFT_TOL = 1e-8


def _frozen(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockSpace:
    """Truncation of a single bosonic mode.

    Attributes
    ----------
    dim : int
        Number of basis states (|0> ... |dim-1>).
    tail_tol : float
        Largest population tolerated in the top 10% of the basis.
    """

    dim: int
    tail_tol: float = 1e-12

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 2:
            raise InvalidDimensionError(f"dim must be an integer >= 2, got {self.dim!r}")
        if not (0.0 < self.tail_tol < 1.0):
            raise InvalidDimensionError(f"tail_tol must lie in (0, 1), got {self.tail_tol!r}")

    @property
    def interior(self) -> int:
        """First index of the truncation tail, ceil(0.9 * dim)."""
        return math.ceil(0.9 * self.dim)


def make_space(nmax: int, tail_tol: float = 1e-12) -> FockSpace:
    return FockSpace(int(nmax) if isinstance(nmax, (int, np.integer)) else nmax, tail_tol)


@dataclass(frozen=True, eq=False)
class CavityState:
    """Pure state of the cavity mode as a Fock amplitude vector."""

    space: FockSpace
    amps: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amps)
        if amps.shape != (self.space.dim,):
            raise SpaceMismatchError(
                f"amplitude vector has shape {amps.shape}, space has dim {self.space.dim}"
            )
        object.__setattr__(self, "amps", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def populations(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def tail_population(self) -> float:
        return float(np.sum(self.populations()[self.space.interior:]))

    def check_truncation(self) -> "CavityState":
        tail = self.tail_population()
        if tail > self.space.tail_tol:
            raise TruncationOverflowError(
                f"population {tail:.3e} in the top 10% of a dim={self.space.dim} basis "
                f"exceeds tail_tol={self.space.tail_tol:.1e}; increase dim"
            )
        return self


@dataclass(frozen=True, eq=False)
class FieldOperator:
    """Dense operator on a Fock space, or on ``levels`` atomic levels (x) the field.

    The ``hermitian`` flag is validated on construction; ``unitary`` is a
    promise made by the constructor function and can be checked with
    :meth:`unitarity_defect`.
    """

    space: FockSpace
    mat: np.ndarray
    hermitian: bool = False
    unitary: bool = False
    levels: int = 1

    def __post_init__(self):
        mat = _frozen(self.mat)
        n = self.levels * self.space.dim
        if mat.shape != (n, n):
            raise SpaceMismatchError(f"matrix shape {mat.shape} does not match ({n}, {n})")
        object.__setattr__(self, "mat", mat)
        if self.hermitian:
            scale = float(np.max(np.abs(mat))) if mat.size else 0.0
            defect = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
            if defect > HERMITIAN_RTOL * max(scale, 1e-300):
                raise NonHermitianError(
                    f"operator flagged hermitian has |H - H^dag| = {defect:.3e}"
                )

    @property
    def size(self) -> int:
        return self.levels * self.space.dim

    def dag(self) -> "FieldOperator":
        return FieldOperator(self.space, self.mat.conj().T, self.hermitian, self.unitary, self.levels)

    def __matmul__(self, other):
        if isinstance(other, FieldOperator):
            _check_op_pair(self, other)
            return FieldOperator(
                self.space,
                self.mat @ other.mat,
                unitary=self.unitary and other.unitary,
                levels=self.levels,
            )
        if hasattr(other, "amps"):
            if other.space != self.space or other.amps.shape[0] != self.size:
                raise SpaceMismatchError("operator and state live on different spaces")
            return replace(other, amps=self.mat @ other.amps)
        return NotImplemented

    def interior_mask(self) -> np.ndarray:
        field_idx = np.arange(self.space.dim) < self.space.interior
        return np.tile(field_idx, self.levels)

    def unitarity_defect(self) -> float:
        """max |U^dag U - 1| over the interior block (field indices < ceil(0.9 dim))."""
        m = self.interior_mask()
        block = (self.mat.conj().T @ self.mat)[np.ix_(m, m)]
        return float(np.max(np.abs(block - np.eye(block.shape[0]))))


def _check_op_pair(a: FieldOperator, b: FieldOperator):
    if a.space != b.space or a.levels != b.levels:
        raise SpaceMismatchError("operators live on different spaces")


def _check_state_pair(a, b):
    if a.space != b.space or a.amps.shape != b.amps.shape:
        raise SpaceMismatchError("states live on different spaces")


# ---------------------------------------------------------------------------
# ladder operators

def _lowering_matrix(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def annihilation(space: FockSpace) -> FieldOperator:
    return FieldOperator(space, _lowering_matrix(space.dim))


def creation(space: FockSpace) -> FieldOperator:
    return FieldOperator(space, _lowering_matrix(space.dim).T)


def number_operator(space: FockSpace) -> FieldOperator:
    return FieldOperator(space, np.diag(np.arange(space.dim, dtype=float)), hermitian=True)


def identity(space: FockSpace, levels: int = 1) -> FieldOperator:
    return FieldOperator(
        space, np.eye(levels * space.dim), hermitian=True, unitary=True, levels=levels
    )


# ---------------------------------------------------------------------------
# states

def fock_state(space: FockSpace, n: int) -> CavityState:
    if not 0 <= n < space.dim:
        raise OutOfRangeError(f"Fock index {n} outside 0..{space.dim - 1}")
    amps = np.zeros(space.dim, dtype=complex)
    amps[n] = 1.0
    return CavityState(space, amps)


def coherent_amplitudes(dim: int, alpha: complex) -> np.ndarray:
    """Untruncated-normalisation coherent amplitudes e^{-|a|^2/2} a^n / sqrt(n!)."""
    n = np.arange(dim)
    if alpha == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    mag = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1))
    return mag * np.exp(1j * n * np.angle(alpha))


def coherent_tail(space: FockSpace, alpha: complex) -> float:
    """Exact Poisson mass of |alpha> at or above the truncation tail index."""
    return float(poisson.sf(space.interior - 1, abs(alpha) ** 2))


def coherent_state(space: FockSpace, alpha: complex) -> CavityState:
    tail = coherent_tail(space, alpha)
    if tail > space.tail_tol:
        raise TruncationOverflowError(
            f"coherent state |alpha|^2={abs(alpha) ** 2:.3g} puts {tail:.3e} in the "
            f"truncation tail of dim={space.dim}"
        )
    amps = coherent_amplitudes(space.dim, complex(alpha))
    return CavityState(space, amps / np.linalg.norm(amps))


def inner_product(a: CavityState, b: CavityState) -> complex:
    _check_state_pair(a, b)
    return complex(np.vdot(a.amps, b.amps))


def normalize(state):
    nrm = np.linalg.norm(state.amps)
    if nrm < 1e-300:
        raise ZeroNormError("cannot normalise the zero vector")
    return replace(state, amps=state.amps / nrm)


def expectation(op: FieldOperator, state) -> complex:
    if op.space != state.space or op.size != state.amps.shape[0]:
        raise SpaceMismatchError("operator and state live on different spaces")
    return complex(np.vdot(state.amps, op.mat @ state.amps))


# ---------------------------------------------------------------------------
# matrix exponentials and propagators

def expm_hermitian(mat: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(-i mat t) for Hermitian ``mat`` via eigendecomposition."""
    w, v = np.linalg.eigh(mat)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def expm_generic(mat: np.ndarray) -> np.ndarray:
    """exp(mat) for an arbitrary square matrix (scaling and squaring)."""
    return scipy.linalg.expm(np.asarray(mat, dtype=complex))


def propagator_static(H: FieldOperator, t: float) -> FieldOperator:
    if not H.hermitian:
        raise NonHermitianError("propagator_static needs an operator flagged hermitian")
    return FieldOperator(H.space, expm_hermitian(H.mat, t), unitary=True, levels=H.levels)


# two-point Gauss-Legendre nodes
_C1 = 0.5 - math.sqrt(3.0) / 6.0
_C2 = 0.5 + math.sqrt(3.0) / 6.0
_K2 = math.sqrt(3.0) / 12.0

S = TypeVar("S")


def _generator_matrix(gen, t: float) -> np.ndarray:
    H = gen(t)
    if isinstance(H, FieldOperator):
        if not H.hermitian:
            raise NonHermitianError("time-dependent generator must return hermitian operators")
        return H.mat
    return np.asarray(H, dtype=complex)


def _magnus4(gen, t0: float, t1: float, steps: int, psi: np.ndarray) -> np.ndarray:
    h = (t1 - t0) / steps
    last_K = None
    U = None
    for k in range(steps):
        ta = t0 + k * h
        H1 = _generator_matrix(gen, ta + _C1 * h)
        H2 = _generator_matrix(gen, ta + _C2 * h)
        K = 0.5 * h * (H1 + H2) - 1j * _K2 * h * h * (H2 @ H1 - H1 @ H2)
        # constant generators reuse the previous exponential
        if last_K is None or not np.array_equal(K, last_K):
            U = expm_hermitian(K)
            last_K = K
        psi = U @ psi
    return psi


def propagator_td(
    gen: Callable[[float], FieldOperator],
    t0: float,
    t1: float,
    steps: int,
    state: S,
    *,
    refine: bool = False,
    tol: float = 1e-8,
    max_doublings: int = 8,
) -> S:
    """Integrate i d|psi>/dt = H(t)|psi> from ``t0`` to ``t1``.

    Fixed-step fourth-order Magnus scheme (two Gauss-Legendre nodes per
    step, one Hermitian exponential per step), so every step is exactly
    unitary.

    With ``refine=True`` the step count is doubled until two successive
    results differ by less than ``tol`` (max-abs over amplitudes); failure
    after ``max_doublings`` raises :class:`StepNonconvergenceError`.
    Works for any state object with ``space`` and ``amps`` attributes.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    psi0 = np.asarray(state.amps, dtype=complex)
    n0 = np.linalg.norm(psi0)
    out = _magnus4(gen, t0, t1, steps, psi0)
    if refine:
        for _ in range(max_doublings):
            steps *= 2
            finer = _magnus4(gen, t0, t1, steps, psi0)
            diff = float(np.max(np.abs(finer - out)))
            out = finer
            if diff < tol:
                break
        else:
            raise StepNonconvergenceError(
                f"step doubling up to {steps} steps still changes the state by {diff:.3e}"
            )
    drift = abs(np.linalg.norm(out) - n0) / max(n0, 1e-300)
    if drift > NORM_DRIFT_TOL:
        raise StepNonconvergenceError(f"norm drift {drift:.3e} exceeds {NORM_DRIFT_TOL}")
    return replace(state, amps=out * (n0 / np.linalg.norm(out)))
