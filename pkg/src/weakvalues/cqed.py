"""Dispersive qubit-resonator dynamics driven by the resonator-population weak value.

The joint Hamiltonian is ``(omega_q/2) Z + omega_r a^dag a + chi Z a^dag a`` with
``Z = diag(-1, +1)``, so qubit state ``|0>`` sees the resonator at
``omega_r - chi`` and ``|1>`` at ``omega_r + chi``.  Writing the joint state as
``c0 |0>|psi0> + c1 |1>|psi1>``, the coherence ``rho01 = c0 c1* <psi1|psi0>``
obeys ``d rho01/dt = i (omega_q + 2 chi n_w) rho01`` with the complex weak value
``n_w = <psi1|a^dag a|psi0> / <psi1|psi0>``.

Closed evolution is tracked in the lab frame; driven-damped steady states are
coherent amplitudes in the frame rotating at the drive frequency.  Every
record carries a ``frame`` tag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import poisson

from .errors import DimensionMismatch, InvalidState, OrthogonalBranches, TruncationOverflow, UndampedDrive
from .qcore import matexp_hermitian_generator

#: Largest probability mass a Fock truncation may discard.
TAIL_MASS_TOL = 1e-10
BRANCH_OVERLAP_FLOOR = 1e-12
FIXED_POINT_TOL = 1e-12
NORM_TOL = 1e-10
#: Wideband formulas are flagged unreliable unless chi and |delta| stay below this fraction of kappa.
WIDEBAND_FRACTION = 0.1

ResonatorState = Union[complex, np.ndarray]


@dataclass(frozen=True)
class DispersiveModel:
    omega_q: float
    omega_r: float
    chi: float
    kappa: float = 0.0
    epsilon: float = 0.0
    delta: float = 0.0
    fock_cutoff: int = 60

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 1:
            raise ValueError("fock_cutoff must be a positive integer")
        for name in ("omega_q", "omega_r", "chi", "kappa", "epsilon", "delta"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def guard_ok(self, amplitude: complex) -> bool:
        """Tail-mass guard ``|psi|^2 + 5|psi| + 10 < N``."""
        a = abs(amplitude)
        return a * a + 5 * a + 10 < self.fock_cutoff


def _is_fock(state) -> bool:
    return np.ndim(state) == 1


@dataclass(frozen=True)
class BranchState:
    c0: complex
    c1: complex
    psi0: ResonatorState
    psi1: ResonatorState
    frame: str = "lab"

    def __post_init__(self):
        if abs(abs(self.c0) ** 2 + abs(self.c1) ** 2 - 1) > NORM_TOL:
            raise InvalidState("qubit amplitudes are not normalized")
        if _is_fock(self.psi0) != _is_fock(self.psi1):
            raise InvalidState("branches must both be coherent amplitudes or both Fock vectors")
        if _is_fock(self.psi0):
            for v in (self.psi0, self.psi1):
                if abs(np.linalg.norm(v) - 1) > NORM_TOL:
                    raise InvalidState("Fock vectors must be normalized")

    @property
    def populations(self) -> tuple[float, float]:
        return abs(self.c0) ** 2, abs(self.c1) ** 2

    def branch_overlap(self) -> complex:
        """``<psi1|psi0>``."""
        return _overlap(self.psi1, self.psi0)

    def coherence(self) -> complex:
        """``rho01 = <0|rho_qubit|1> = c0 c1* <psi1|psi0>``."""
        return complex(self.c0 * np.conj(self.c1) * self.branch_overlap())

    def population_weak_value(self) -> complex:
        return population_weak_value(self.psi1, self.psi0)


def coherent_fock(alpha: complex, cutoff: int) -> np.ndarray:
    """Coherent state truncated to ``cutoff`` Fock levels (not renormalized)."""
    n = np.arange(cutoff)
    ratios = np.ones(cutoff, dtype=complex)
    ratios[1:] = alpha / np.sqrt(n[1:])
    return np.exp(-abs(alpha) ** 2 / 2) * np.cumprod(ratios)


def truncation_tail_mass(alpha: complex, cutoff: int) -> float:
    """Poisson mass above the highest retained level ``cutoff - 1``."""
    return float(poisson.sf(cutoff - 1, abs(alpha) ** 2))


def _overlap(psi1, psi0) -> complex:
    if _is_fock(psi1):
        a, b = np.asarray(psi1, dtype=complex), np.asarray(psi0, dtype=complex)
        if a.shape != b.shape:
            raise DimensionMismatch("Fock vectors differ in length")
        return complex(np.vdot(a, b))
    a1, a0 = complex(psi1), complex(psi0)
    return complex(np.exp(-abs(a1) ** 2 / 2 - abs(a0) ** 2 / 2 + np.conj(a1) * a0))


def population_weak_value(psi1: ResonatorState, psi0: ResonatorState,
                          floor: float = BRANCH_OVERLAP_FLOOR) -> complex:
    """``<psi1|a^dag a|psi0> / <psi1|psi0>`` for coherent amplitudes or Fock vectors.

    For coherent amplitudes this is ``conj(psi1) * psi0``.
    """
    ov = _overlap(psi1, psi0)
    if abs(ov) < floor:
        raise OrthogonalBranches(f"branch overlap {abs(ov):.3e} below floor")
    if _is_fock(psi1):
        a = np.asarray(psi1, dtype=complex)
        b = np.asarray(psi0, dtype=complex)
        return complex(np.vdot(a, np.arange(a.size) * b) / ov)
    return complex(np.conj(psi1) * psi0)


def joint_hamiltonian(model: DispersiveModel) -> np.ndarray:
    """``(omega_q/2) Z + omega_r n + chi Z n`` on ``qubit (x) Fock``, dimension ``2N``."""
    N = int(model.fock_cutoff)
    n = np.diag(np.arange(N, dtype=float))
    Z = np.diag([-1.0, 1.0])
    I_r = np.eye(N)
    H = 0.5 * model.omega_q * np.kron(Z, I_r) + model.omega_r * np.kron(np.eye(2), n) + model.chi * np.kron(Z, n)
    return H.astype(complex)


def coherent_branch_state(c0: complex, c1: complex, alpha: complex, model: DispersiveModel) -> BranchState:
    """Qubit superposition with both branches in the truncated coherent state ``alpha``."""
    N = int(model.fock_cutoff)
    if not model.guard_ok(alpha):
        raise TruncationOverflow(f"|alpha| = {abs(alpha):.3g} too large for cutoff {N}")
    tail = truncation_tail_mass(alpha, N)
    if tail > TAIL_MASS_TOL:
        raise TruncationOverflow(f"tail mass {tail:.3e} exceeds {TAIL_MASS_TOL:.0e}")
    v = coherent_fock(alpha, N)
    v = v / np.linalg.norm(v)
    return BranchState(complex(c0), complex(c1), v, v.copy())


def closed_joint_evolution(model: DispersiveModel, initial: BranchState, t: float) -> BranchState:
    """Exact unitary evolution of ``c0|0>|psi0> + c1|1>|psi1>`` in the truncated space."""
    if model.kappa != 0 or model.epsilon != 0:
        raise ValueError("closed evolution requires kappa = epsilon = 0")
    N = int(model.fock_cutoff)
    if not _is_fock(initial.psi0):
        raise InvalidState("closed evolution needs Fock-vector branches")
    psi0 = np.asarray(initial.psi0, dtype=complex)
    psi1 = np.asarray(initial.psi1, dtype=complex)
    if psi0.size != N:
        raise DimensionMismatch("branch length differs from the Fock cutoff")
    for v in (psi0, psi1):
        tail = float(np.sum(np.abs(v[-1:]) ** 2))
        if tail > TAIL_MASS_TOL:
            raise TruncationOverflow(f"top Fock level holds {tail:.3e} of the branch")
    joint = np.concatenate([initial.c0 * psi0, initial.c1 * psi1])
    U = matexp_hermitian_generator(joint_hamiltonian(model), t)
    out = U @ joint
    b0, b1 = out[:N], out[N:]
    n0, n1 = np.linalg.norm(b0), np.linalg.norm(b1)
    # c_j keeps the phase of the initial amplitude; the branch vector carries the dynamics
    c0 = n0 * np.exp(1j * np.angle(initial.c0)) if n0 > 0 else 0j
    c1 = n1 * np.exp(1j * np.angle(initial.c1)) if n1 > 0 else 0j
    v0 = b0 / c0 if n0 > 0 else psi0
    v1 = b1 / c1 if n1 > 0 else psi1
    return BranchState(complex(c0), complex(c1), v0, v1)


def coherent_branch_amplitudes(model: DispersiveModel, alpha: complex, t) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form lab-frame amplitudes ``alpha exp(-i (omega_r -+ chi) t)``."""
    t = np.asarray(t, dtype=float)
    return (alpha * np.exp(-1j * (model.omega_r - model.chi) * t),
            alpha * np.exp(-1j * (model.omega_r + model.chi) * t))


@dataclass(frozen=True)
class CoherenceTrace:
    t: np.ndarray
    rho01: np.ndarray
    n_w: np.ndarray
    log_law_error: float
    frame: str = "lab"


def coherence_ode(model: DispersiveModel, n_w_trace: Callable[[float], complex], rho01_initial: complex,
                  t_grid, rtol: float = 1e-10, atol: float = 1e-12) -> CoherenceTrace:
    """Integrate ``d rho01/dt = i (omega_q + 2 chi n_w(t)) rho01`` on ``t_grid``.

    The complex exponent ``int_0^t i (omega_q + 2 chi n_w) ds`` is integrated
    with adaptive Dormand-Prince stepping and exponentiated, so the magnitude
    follows ``d ln|rho01|/dt = -2 chi Im n_w`` up to the quadrature error.
    ``log_law_error`` is the largest per-interval gap between the change of
    ``ln|rho01|`` and a 16-point Gauss-Legendre integral of ``-2 chi Im n_w``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("t_grid must be a non-empty 1D array")
    if np.any(np.diff(t) < 0):
        raise ValueError("t_grid must be sorted")

    def rhs(s, y):
        nw = complex(n_w_trace(s))
        rate = 1j * (model.omega_q + 2 * model.chi * nw)
        return [rate.real, rate.imag]

    t0 = float(t[0])
    if t.size == 1 or t[-1] == t0:
        phase = np.zeros(t.size, dtype=complex)
    else:
        sol = solve_ivp(rhs, (t0, float(t[-1])), [0.0, 0.0], method="RK45", t_eval=t, rtol=rtol, atol=atol)
        if not sol.success:
            raise ArithmeticError(sol.message)
        phase = sol.y[0] + 1j * sol.y[1]
    rho = complex(rho01_initial) * np.exp(phase)
    nw = np.array([complex(n_w_trace(s)) for s in t])

    # independent check of the magnitude law on each grid interval
    nodes, weights = np.polynomial.legendre.leggauss(16)
    err = 0.0
    for a, b, ra, rb in zip(t[:-1], t[1:], rho[:-1], rho[1:]):
        if b == a or ra == 0:
            continue
        s = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        decay = 0.5 * (b - a) * np.sum(weights * np.array([-2 * model.chi * complex(n_w_trace(x)).imag for x in s]))
        err = max(err, abs(np.log(abs(rb) / abs(ra)) - decay))
    return CoherenceTrace(t, rho, nw, float(err))


@dataclass(frozen=True)
class SteadyState:
    psi0: complex
    psi1: complex
    fixed_point_residual: float
    frame: str = "drive"


def branch_amplitude_rhs(model: DispersiveModel, psi: complex, branch: int) -> complex:
    """``-(i detuning_j + kappa/2) psi + epsilon`` with detuning ``delta -+ chi`` for branch 0/1."""
    det = model.delta - model.chi if branch == 0 else model.delta + model.chi
    return complex(-(1j * det + model.kappa / 2) * psi + model.epsilon)


def steady_state_amplitudes(model: DispersiveModel) -> SteadyState:
    """``psi_j = (2 eps/kappa) / (1 + 2i (delta -+ chi)/kappa)`` with the fixed-point residual."""
    if model.kappa == 0:
        if model.epsilon != 0:
            raise UndampedDrive("a drive without damping has no steady state")
        return SteadyState(0j, 0j, 0.0)
    k, eps = model.kappa, model.epsilon
    psi0 = (2 * eps / k) / (1 + 2j * (model.delta - model.chi) / k)
    psi1 = (2 * eps / k) / (1 + 2j * (model.delta + model.chi) / k)
    scale = max(abs(eps), k / 2 * max(abs(psi0), abs(psi1)), np.finfo(float).tiny)
    res = max(abs(branch_amplitude_rhs(model, psi0, 0)), abs(branch_amplitude_rhs(model, psi1, 1))) / scale
    if res > FIXED_POINT_TOL:
        raise ArithmeticError(f"steady state is not a fixed point (residual {res:.3e})")
    return SteadyState(complex(psi0), complex(psi1), float(res))


@dataclass(frozen=True)
class StarkReport:
    n_w: complex
    stark_shift: float
    dephasing_rate: float
    wideband_n_mean: float
    wideband_dephasing: float
    dephasing_rel_deviation: float
    wideband_reliable: bool
    fixed_point_residual: float
    frame: str = "drive"

    def as_dict(self) -> dict:
        return {
            "frame": self.frame,
            "n_w_re": self.n_w.real,
            "n_w_im": self.n_w.imag,
            "stark_shift": self.stark_shift,
            "dephasing_rate": self.dephasing_rate,
            "wideband_n_mean": self.wideband_n_mean,
            "wideband_dephasing": self.wideband_dephasing,
            "dephasing_rel_deviation": self.dephasing_rel_deviation,
            "wideband_reliable": self.wideband_reliable,
            "fixed_point_residual": self.fixed_point_residual,
        }


def stark_and_dephasing(model: DispersiveModel) -> StarkReport:
    """Exact ``n_w = conj(psi1) psi0`` rates alongside the wideband approximations."""
    ss = steady_state_amplitudes(model)
    nw = complex(np.conj(ss.psi1) * ss.psi0)
    stark = 2 * model.chi * nw.real
    gamma = 2 * model.chi * nw.imag
    if model.kappa > 0:
        nbar = 4 * model.epsilon**2 / model.kappa**2
        gamma_wb = 8 * model.chi**2 * nbar / model.kappa
    else:
        nbar, gamma_wb = 0.0, 0.0
    if gamma_wb != 0:
        dev = abs(gamma - gamma_wb) / abs(gamma_wb)
    else:
        dev = 0.0 if gamma == 0 else float("inf")
    reliable = model.kappa > 0 and abs(model.chi) < WIDEBAND_FRACTION * model.kappa \
        and abs(model.delta) < WIDEBAND_FRACTION * model.kappa
    return StarkReport(nw, float(stark), float(gamma), float(nbar), float(gamma_wb), float(dev),
                       bool(reliable), ss.fixed_point_residual)
