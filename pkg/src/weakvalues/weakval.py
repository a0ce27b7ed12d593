"""Weak values as two-boundary estimates.

Covers the pure-state weak value with intermediate unitary evolution, the
effect/density-matrix generalization, the weighted trace distance and the
optimal conditioned estimates it selects, and the energy-shift identity
for perturbed Hamiltonians.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateOverlap, DimensionMismatch, PostselectionImpossible, VanishingConditioning
from .qcore import (
    POSTSELECTION_FLOOR,
    Observable,
    as_observable,
    dagger,
    density_matrix,
    effect_matrix,
    matexp_hermitian_generator,
    normalize,
)

#: Minimum |<E|E'>| accepted when pairing unperturbed and perturbed eigenvectors.
OVERLAP_FLOOR = 0.1


@dataclass(frozen=True)
class TwoBoundaryScenario:
    """Preparation ``|i>`` at time 0, postselection ``<f|`` at time ``horizon``."""

    initial: np.ndarray
    final: np.ndarray
    hamiltonian: Observable
    horizon: float
    floor: float = POSTSELECTION_FLOOR

    def __post_init__(self):
        object.__setattr__(self, "initial", normalize(self.initial))
        object.__setattr__(self, "final", normalize(self.final))
        object.__setattr__(self, "hamiltonian", as_observable(self.hamiltonian))
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        d = self.hamiltonian.dim
        if self.initial.size != d or self.final.size != d:
            raise DimensionMismatch("states and Hamiltonian dimensions differ")

    def propagator(self, t: float) -> np.ndarray:
        return matexp_hermitian_generator(self.hamiltonian, t)

    def amplitude(self) -> complex:
        """``<f|U_T|i>``."""
        return complex(self.final.conj() @ self.propagator(self.horizon) @ self.initial)

    def postselection_probability(self) -> float:
        return abs(self.amplitude()) ** 2

    def forward(self, t: float) -> np.ndarray:
        """``|i'> = U_t |i>``."""
        return self.propagator(t) @ self.initial

    def backward(self, t: float) -> np.ndarray:
        """``|f'>`` such that ``<f'| = <f| U_{T-t}``."""
        return dagger(self.propagator(self.horizon - t)) @ self.final


def weak_value(s: TwoBoundaryScenario, A, t: float) -> complex:
    """Complex weak value ``<f|U_{T-t} A U_t|i> / <f|U_T|i>``.

    Callers estimating the observable take the real part.
    """
    A = as_observable(A)
    if not 0.0 <= t <= s.horizon:
        raise ValueError(f"t={t} outside [0, {s.horizon}]")
    denom = s.amplitude()
    if abs(denom) ** 2 < s.floor:
        raise PostselectionImpossible(f"postselection probability {abs(denom) ** 2:.3e} below floor")
    fp, ip = s.backward(t), s.forward(t)
    return complex(fp.conj() @ A.matrix @ ip) / denom


def generalized_weak_value(E, rho, A, floor: float = POSTSELECTION_FLOOR) -> complex:
    """``Tr[E A rho] / Tr[E rho]`` for an effect ``E`` and state ``rho``."""
    E = effect_matrix(E)
    rho = density_matrix(rho)
    A = as_observable(A)
    denom = np.trace(E @ rho)
    if abs(denom) < floor:
        raise VanishingConditioning(f"Tr[E rho] = {denom:.3e}")
    return complex(np.trace(E @ A.matrix @ rho) / denom)


def trace_distance(rho, A, B) -> float:
    """Weighted squared distance ``Tr[rho (A - B)^2]``."""
    rho = density_matrix(rho)
    D = as_observable(A).matrix - as_observable(B).matrix
    if D.shape != rho.shape:
        raise DimensionMismatch("rho and observables differ in dimension")
    return float(np.trace(rho @ D @ D).real)


def optimal_estimates(i, A, basis: Sequence[np.ndarray], floor: float = POSTSELECTION_FLOOR) -> np.ndarray:
    """Optimal conditioned estimates ``Re <f|A|i>/<f|i>`` for each basis outcome.

    Outcomes with ``|<f|i>|^2 < floor`` never occur and get ``nan``.
    """
    i = normalize(i)
    A = as_observable(A)
    out = np.full(len(basis), np.nan)
    for k, f in enumerate(basis):
        f = np.asarray(f, dtype=complex)
        ov = f.conj() @ i
        if abs(ov) ** 2 >= floor:
            out[k] = ((f.conj() @ A.matrix @ i) / ov).real
    return out


def estimator_observable(estimates: Sequence[float], basis: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_f a_f |f><f|``; undefined (nan) estimates contribute nothing."""
    d = len(basis[0])
    out = np.zeros((d, d), dtype=complex)
    for a, f in zip(estimates, basis):
        if np.isfinite(a):
            f = np.asarray(f, dtype=complex)
            out += a * np.outer(f, f.conj())
    return out


def match_eigenpairs(H, Delta) -> list[tuple[int, int, float]]:
    """Pair each unperturbed eigenvector with its maximum-overlap perturbed one.

    Returns ``(k, k_prime, |<E_k|E'_k'>|)`` triples.
    """
    H = as_observable(H)
    Hp = Observable(H.matrix + as_observable(Delta).matrix, tol=1e-10)
    ov = np.abs(dagger(H.eigenvectors) @ Hp.eigenvectors)
    return [(k, int(np.argmax(ov[k])), float(ov[k].max())) for k in range(H.dim)]


@dataclass(frozen=True)
class EnergyShift:
    energy: float
    perturbed_energy: float
    shift: complex
    overlap: float

    @property
    def residual(self) -> float:
        return float(self.perturbed_energy - self.energy - self.shift.real)


def eigen_perturbation(H, Delta, pair, floor: float = OVERLAP_FLOOR) -> EnergyShift:
    """Energy shift of a perturbed level as the weak value of the perturbation.

    ``pair`` is either an unperturbed index (the perturbed partner is found by
    maximum overlap) or an explicit ``(unperturbed, perturbed)`` tuple.
    """
    H = as_observable(H)
    Dm = as_observable(Delta).matrix
    Hp = Observable(H.matrix + Dm, tol=1e-10)
    if np.ndim(pair) == 0:
        k = int(pair)
        kp = int(np.argmax(np.abs(dagger(Hp.eigenvectors) @ H.eigenvectors[:, k])))
    else:
        k, kp = (int(p) for p in pair)
    e = H.eigenvectors[:, k]
    ep = Hp.eigenvectors[:, kp]
    ov = complex(e.conj() @ ep)
    if abs(ov) < floor:
        raise DegenerateOverlap(f"|<E|E'>| = {abs(ov):.3e} below {floor}")
    shift = complex(e.conj() @ Dm @ ep) / ov
    return EnergyShift(float(H.eigenvalues[k]), float(Hp.eigenvalues[kp]), shift, abs(ov))


def eigen_perturbation_shift(H, Delta, pair, floor: float = OVERLAP_FLOOR) -> complex:
    """``<E|Delta|E'> / <E|E'>``; equals ``E' - E`` up to rounding."""
    return eigen_perturbation(H, Delta, pair, floor).shift


@dataclass(frozen=True)
class WeakValueTrace:
    times: np.ndarray
    values: np.ndarray
    expectation: np.ndarray
    anomalous: np.ndarray = field(repr=False)
    spectral_radius: float = 0.0


def weak_value_trace(s: TwoBoundaryScenario, A, n_samples: int) -> WeakValueTrace:
    """Sample the weak value and the plain expectation value on a closed time grid."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    A = as_observable(A)
    times = np.linspace(0.0, s.horizon, n_samples)
    values = np.array([weak_value(s, A, t) for t in times])
    expect = np.empty(n_samples)
    for k, t in enumerate(times):
        ip = s.forward(t)
        expect[k] = (ip.conj() @ A.matrix @ ip).real
    anomalous = np.abs(values.real) > A.spectral_radius * (1 + 1e-12)
    return WeakValueTrace(times, values, expect, anomalous, A.spectral_radius)


def rabi_scenario(omega: float, horizon: float) -> TwoBoundaryScenario:
    """Qubit prepared in ``|1>``, postselected on ``<0|``, with
    ``U_t = exp[i omega t (|1><0| + |0><1|)]``, i.e. ``H = -omega sigma_x``.
    """
    H = -omega * np.array([[0, 1], [1, 0]], dtype=complex)
    return TwoBoundaryScenario(np.array([0, 1], dtype=complex), np.array([1, 0], dtype=complex), Observable(H), horizon)


def rabi_closed_form(omega: float, horizon: float, t):
    """``sin(omega (T - 2t)) / sin(omega T)`` for :func:`rabi_scenario` with ``A = Z``."""
    return np.sin(omega * (horizon - 2 * np.asarray(t))) / np.sin(omega * horizon)


def aav_states(target: float, theta_i: float = np.pi / 4) -> tuple[np.ndarray, np.ndarray]:
    """Real qubit pre/postselection with ``<f|Z|i>/<f|i> = target``.

    With ``|s(theta)> = cos(theta)|0> + sin(theta)|1>`` and ``Z = diag(-1, 1)``
    the weak value is ``-cos(a + b) / cos(a - b)``, which is solved for ``b``.
    """
    a = theta_i
    # -cos(a+b) = target cos(a-b)  =>  tan(b) = (target+1) cos(a) / ((1-target) sin(a))
    b = np.arctan2((target + 1) * np.cos(a), (1 - target) * np.sin(a))
    i = np.array([np.cos(a), np.sin(a)], dtype=complex)
    f = np.array([np.cos(b), np.sin(b)], dtype=complex)
    return i, f
