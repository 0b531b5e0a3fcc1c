"""Driven three-level ladder atom coupled to the cavity mode.

Level order is (g, i, e); composite index ``level * dim + n``.  The
two-level Raman model keeps only (g, e).

Frames
------
``bare``
    Schroedinger picture of the full model, H0 = w a^dag a - w s_gg + d s_ii + w s_ee.
``interaction``
    Bare frame transformed by exp(-i H0 t) and then by
    exp[-i d t (s_gg + s_ee)].  The effective and quadratic Hamiltonians
    are written in this frame; it contains no cavity frequency.
``rotating``
    Interaction frame further rotated by
    G = (Delta/2)(a^dag a + s_ii) + Delta s_ee, which removes every explicit
    time dependence.  On the |i> branch this is the frame rotating at nu/2,
    i.e. the frame of the closed-form squeeze operator.

All three are exact unitary changes of frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import SpaceMismatchError, ZeroDetuningError
from .fock import (
    CavityState,
    FieldOperator,
    FockSpace,
    _lowering_matrix,
    propagator_static,
    propagator_td,
)

LEVELS3 = ("g", "i", "e")
LEVELS2 = ("g", "e")
FRAMES = ("bare", "interaction", "rotating")


@dataclass(frozen=True)
class PhysicalParams:
    """Model parameters, all angular rates in s^-1.

    ``Delta`` is the detuning of the classical drive, whose frequency is
    ``omega0 = 2 omega + Delta``.
    """

    omega: float
    lambda_g: complex
    lambda_e: complex
    Omega: complex
    delta: float
    Delta: float

    @property
    def omega0(self) -> float:
        return 2.0 * self.omega + self.Delta

    def adiabaticity(self) -> dict:
        def ratio(x):
            return math.inf if x == 0 else abs(self.delta) / abs(x)

        return {
            "delta_over_lambda_g": ratio(self.lambda_g),
            "delta_over_lambda_e": ratio(self.lambda_e),
            "delta_over_Omega": ratio(self.Omega),
        }

    def with_resonant_drive(self) -> "PhysicalParams":
        """Copy with Delta = 2 chi (parametric resonance)."""
        return replace(self, Delta=2.0 * derive_effective(self).chi)

    def scaled(self, s: float) -> "PhysicalParams":
        return replace(
            self,
            lambda_g=self.lambda_g * s,
            lambda_e=self.lambda_e * s,
            Omega=self.Omega * s,
            delta=self.delta * s,
            Delta=self.Delta * s,
        )


@dataclass(frozen=True)
class EffectiveParams:
    chi: float
    varpi: float
    xi: complex
    Theta: float
    nu: float

    @property
    def omega(self) -> float:
        return self.varpi - self.chi

    @property
    def Delta(self) -> float:
        return self.nu - 2.0 * self.omega

    def is_resonant(self, rtol: float = 1e-9) -> bool:
        return abs(self.Delta - 2.0 * self.chi) <= rtol * abs(self.chi)


def derive_effective(p: PhysicalParams) -> EffectiveParams:
    if p.delta == 0:
        raise ZeroDetuningError("effective parameters need a nonzero detuning delta")
    lg2 = abs(p.lambda_g) ** 2
    le2 = abs(p.lambda_e) ** 2
    chi = 2.0 * (lg2 + le2) / p.delta
    xi = 2.0 * complex(p.Omega) * np.conj(p.lambda_g) * np.conj(p.lambda_e) / p.delta**2
    xi = complex(xi)
    theta = -math.atan2(xi.imag, xi.real) + 0.0 if xi != 0 else 0.0
    return EffectiveParams(chi=chi, varpi=p.omega + chi, xi=xi, Theta=theta, nu=2.0 * p.omega + p.Delta)


# ---------------------------------------------------------------------------
# composite states

@dataclass(frozen=True, eq=False)
class AtomFieldState:
    space: FockSpace
    amps: np.ndarray
    levels: tuple = LEVELS3

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex, copy=True)
        if amps.shape != (len(self.levels) * self.space.dim,):
            raise SpaceMismatchError(
                f"composite amplitudes have shape {amps.shape}, expected "
                f"({len(self.levels) * self.space.dim},)"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def product(cls, level: str, field: CavityState, levels=LEVELS3) -> "AtomFieldState":
        atom = np.zeros(len(levels))
        atom[levels.index(level)] = 1.0
        return cls(field.space, np.kron(atom, field.amps), tuple(levels))

    def branch(self, level: str) -> np.ndarray:
        """Unnormalised field amplitudes |Phi_level>."""
        k = self.levels.index(level)
        d = self.space.dim
        return self.amps[k * d:(k + 1) * d]

    def population(self, level: str) -> float:
        return float(np.sum(np.abs(self.branch(level)) ** 2))


def decompose(state: AtomFieldState) -> dict:
    """Split |Psi> = sum_l |l>|Phi_l> into unnormalised field branches."""
    return {lvl: state.branch(lvl).copy() for lvl in state.levels}


def project(state: AtomFieldState, level: str) -> tuple:
    """Post-select on an atomic level: (normalised field state, probability)."""
    phi = state.branch(level)
    prob = float(np.vdot(phi, phi).real)
    if prob == 0.0:
        return None, 0.0
    return CavityState(state.space, phi / math.sqrt(prob)), prob


# ---------------------------------------------------------------------------
# operators

def _unit(levels, k, l) -> np.ndarray:
    m = np.zeros((len(levels), len(levels)))
    m[levels.index(k), levels.index(l)] = 1.0
    return m


def atomic_projector(k: str, l: str, space: FockSpace, levels=LEVELS3) -> FieldOperator:
    """sigma_kl = |k><l| (x) 1_field."""
    mat = np.kron(_unit(levels, k, l), np.eye(space.dim))
    return FieldOperator(space, mat, hermitian=(k == l), levels=len(levels))


def _sig(levels, k, l, field_mat):
    return np.kron(_unit(levels, k, l), field_mat)


def _herm(mat):
    return mat + mat.conj().T


def full_hamiltonian(p: PhysicalParams, space: FockSpace, t: float = 0.0, frame: str = "bare") -> FieldOperator:
    """Full three-level model divided by hbar."""
    d = space.dim
    L = LEVELS3
    a = _lowering_matrix(d)
    one = np.eye(d)
    n = np.diag(np.arange(d, dtype=float))
    lg, le, Om = complex(p.lambda_g), complex(p.lambda_e), complex(p.Omega)

    coupling = lg * _sig(L, "i", "g", a) + le * _sig(L, "e", "i", a)
    if frame == "bare":
        H = (
            np.kron(np.eye(3), p.omega * n)
            - p.omega * _sig(L, "g", "g", one)
            + p.delta * _sig(L, "i", "i", one)
            + p.omega * _sig(L, "e", "e", one)
        )
        drive = Om * np.exp(-1j * p.omega0 * t)
    elif frame in ("interaction", "rotating"):
        H = -p.delta * (_sig(L, "g", "g", one) + _sig(L, "e", "e", one))
        drive = Om * np.exp(-1j * p.Delta * t) if frame == "interaction" else Om
    else:
        raise ValueError(f"unknown frame {frame!r}")
    H = H + _herm(coupling + drive * _sig(L, "e", "g", one))
    if frame == "rotating":
        H = H - rotating_generator(p, space)
    return FieldOperator(space, H, hermitian=True, levels=3)


def rotating_generator(p: PhysicalParams, space: FockSpace) -> np.ndarray:
    """G = (Delta/2)(a^dag a + s_ii) + Delta s_ee on the composite space (diagonal)."""
    d = space.dim
    n = np.arange(d, dtype=float)
    half = 0.5 * p.Delta
    diag = np.concatenate([half * n, half * (n + 1.0), half * n + p.Delta])
    return np.diag(diag)


def effective_hamiltonian(p: PhysicalParams, space: FockSpace, t: float = 0.0) -> FieldOperator:
    """Adiabatically eliminated model in the interaction frame (levels g, i, e)."""
    d = space.dim
    L = LEVELS3
    a = _lowering_matrix(d)
    a2 = a @ a
    one = np.eye(d)
    n = np.diag(np.arange(d, dtype=float))
    stark = 2.0 * n + one
    lg, le, Om = complex(p.lambda_g), complex(p.lambda_e), complex(p.Omega)
    lg2, le2 = abs(lg) ** 2, abs(le) ** 2
    delta = p.delta
    drive_eg = Om * np.exp(-1j * p.Delta * t) * _sig(L, "e", "g", one)

    H = -delta * (_sig(L, "g", "g", one) + _sig(L, "e", "e", one)) + _herm(drive_eg)
    bracket = (
        lg2 * _sig(L, "g", "g", one)
        - (lg2 + le2) * _sig(L, "i", "i", one)
        + le2 * _sig(L, "e", "e", one)
        + (lg2 + le2) / (2.0 * delta) * _herm(drive_eg)
    )
    H = H - (1.0 / delta) * (np.kron(np.eye(3), stark) @ bracket)
    two_photon = 2.0 * _herm(lg * le * _sig(L, "e", "g", a2))
    parity = _sig(L, "g", "g", one) + _sig(L, "e", "e", one) - 2.0 * _sig(L, "i", "i", one)
    param = _herm(lg * le * np.conj(Om) * np.exp(1j * p.Delta * t) * np.kron(np.eye(3), a2))
    # param commutes with parity (parity is diagonal in the atom), so the product is hermitian
    H = H - (1.0 / delta) * (two_photon + (1.0 / delta) * (param @ parity))
    return FieldOperator(space, H, hermitian=True, levels=3)


def quadratic_hamiltonian(e: EffectiveParams, space: FockSpace, t: float = 0.0, frame: str = "bare") -> FieldOperator:
    """Parametric-amplifier Hamiltonian of the |i> branch (divided by hbar)."""
    a = _lowering_matrix(space.dim)
    a2 = a @ a
    n = np.diag(np.arange(space.dim, dtype=float))
    if frame == "bare":
        freq, phase = e.varpi, np.exp(-1j * e.nu * t)
    elif frame == "interaction":
        freq, phase = e.chi, np.exp(-1j * e.Delta * t)
    elif frame == "rotating":
        freq, phase = e.chi - 0.5 * e.Delta, 1.0
    else:
        raise ValueError(f"unknown frame {frame!r}")
    H = freq * n + _herm(e.xi * phase * a2.T)
    return FieldOperator(space, H, hermitian=True)


def raman_hamiltonian(p: PhysicalParams, space: FockSpace) -> FieldOperator:
    """Undriven two-photon Raman model on levels (g, e); Omega is ignored."""
    d = space.dim
    L = LEVELS2
    a = _lowering_matrix(d)
    n = np.arange(d, dtype=float)
    lg, le = complex(p.lambda_g), complex(p.lambda_e)
    delta = p.delta
    if delta == 0:
        raise ZeroDetuningError("Raman model needs a nonzero detuning")
    g_block = np.diag((delta + abs(lg) ** 2 / delta) + 2.0 * abs(lg) ** 2 * n / delta)
    e_block = np.diag((delta + abs(le) ** 2 / delta) + 2.0 * abs(le) ** 2 * n / delta)
    H = -np.kron(_unit(L, "g", "g"), g_block) - np.kron(_unit(L, "e", "e"), e_block)
    H = H + (2.0 / delta) * _herm(lg * le * np.kron(_unit(L, "e", "g"), a @ a))
    return FieldOperator(space, H, hermitian=True, levels=2)


# ---------------------------------------------------------------------------
# full vs effective

@dataclass(frozen=True)
class EffectiveComparison:
    """Full-model |i> branch against the effective quadratic evolution.

    ``fidelity`` is |<Phi_eff|Phi_i>|^2 with both states normalised;
    ``population_i`` is the unnormalised weight of the |i> branch.
    """

    frame: str
    times: tuple
    population_i: tuple
    fidelity: tuple
    steps: int

    @property
    def final_fidelity(self) -> float:
        return self.fidelity[-1]

    @property
    def min_fidelity(self) -> float:
        return min(self.fidelity)

    @property
    def final_infidelity(self) -> float:
        return 1.0 - self.fidelity[-1]


def _seg_steps(rate: float, seg: float, norm: float) -> int:
    # resolve both the explicit time dependence and the generator scale
    return max(2, math.ceil(seg * rate / 0.25), math.ceil(seg * norm / 20.0))


def compare_effective(
    p: PhysicalParams,
    initial: CavityState,
    t: float,
    frame: str = "interaction",
    samples: int = 10,
    effective_scale: float = 1.0,
    tol: float = 1e-8,
) -> EffectiveComparison:
    """Evolve |i>(x)initial under the full model and initial under the effective model.

    ``effective_scale`` multiplies chi and xi of the effective model (1 means
    the stated coefficients); it exists to probe the coefficient
    normalisation against the full-model oracle.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    space = initial.space
    eff = derive_effective(p)
    if effective_scale != 1.0:
        chi = eff.chi * effective_scale
        eff = replace(eff, chi=chi, varpi=eff.omega + chi, xi=eff.xi * effective_scale, nu=eff.nu)
    times = [t * k / samples for k in range(1, samples + 1)]
    full = AtomFieldState.product("i", initial)
    field = initial
    pops, fids = [], []
    steps_used = 0

    if frame == "rotating":
        Hf = full_hamiltonian(p, space, frame="rotating")
        He = quadratic_hamiltonian(eff, space, frame="rotating")
        for tk in times:
            full_k = propagator_static(Hf, tk) @ full
            field_k = propagator_static(He, tk) @ field
            pops.append(full_k.population("i"))
            fids.append(_branch_fidelity(full_k.branch("i"), field_k.amps))
    elif frame in ("interaction", "bare"):
        seg = t / samples
        if frame == "bare":
            rate = abs(p.omega0) + abs(p.omega) + abs(p.delta)
        else:
            rate = abs(p.Delta)
        probe = full_hamiltonian(p, space, 0.0, frame)
        norm = float(np.linalg.norm(probe.mat, 2))
        steps = _seg_steps(rate, seg, norm)

        def gen_full(s):
            return full_hamiltonian(p, space, s, frame)

        def gen_eff(s):
            return quadratic_hamiltonian(eff, space, s, frame)

        t_prev = 0.0
        for tk in times:
            full = propagator_td(gen_full, t_prev, tk, steps, full, refine=True, tol=tol)
            field = propagator_td(gen_eff, t_prev, tk, steps, field, refine=True, tol=tol)
            t_prev = tk
            pops.append(full.population("i"))
            fids.append(_branch_fidelity(full.branch("i"), field.amps))
        steps_used = steps
    else:
        raise ValueError(f"unknown frame {frame!r}")
    return EffectiveComparison(frame, tuple(times), tuple(pops), tuple(fids), steps_used)


def _branch_fidelity(phi_i: np.ndarray, phi_eff: np.ndarray) -> float:
    ni = np.vdot(phi_i, phi_i).real
    ne = np.vdot(phi_eff, phi_eff).real
    if ni == 0 or ne == 0:
        return 0.0
    return float(abs(np.vdot(phi_eff, phi_i)) ** 2 / (ni * ne))
