"""Impulsive von Neumann coupling between a detector pointer and a system.

The detector is either a uniform periodic grid (continuum pointer, with the
momentum operator built from the discrete Fourier transform) or a small
discrete register.  Free evolution before and after the coupling is folded
into the supplied effective states: the pointer amplitudes are given in the
basis that is finally measured, and the system states are the
back/forward-propagated ``<f'|`` and ``|i'>``.

Grid pointers store *density* amplitudes ``<x|d'>`` and carry the spacing
``weight = dx``; every probability that leaves this module is a density in
``x`` that must be multiplied by ``weight`` before summing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, PostselectionImpossible
from .qcore import (
    DENSITY_FLOOR,
    POSTSELECTION_FLOOR,
    Observable,
    as_observable,
    dagger,
    normalize,
)

#: g |F_w| |A_w| at or above this value is flagged as outside linear response.
VALIDITY_THRESHOLD = 0.1


@dataclass(frozen=True)
class PointerModel:
    """Detector degree of freedom.

    Attributes
    ----------
    labels : ndarray
        Readout label per outcome ``x`` (grid positions or discrete tags).
    amplitudes : ndarray
        ``<x|d'>``; for grids these are density amplitudes normalized with ``weight``.
    F : Observable
        Detector observable coupled to the system.
    readout : ndarray
        Spectrum of ``R = sum_x readout_x |x><x|`` before calibration.
    weight : float
        Grid spacing ``dx`` (1 for discrete pointers).
    calibration : float
        Scale applied to ``readout`` to form the signal values ``alpha_x``.
    """

    labels: np.ndarray
    amplitudes: np.ndarray
    F: Observable
    readout: np.ndarray
    weight: float = 1.0
    calibration: float = 1.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        n = amps.size
        if np.asarray(self.labels).size != n or np.asarray(self.readout).size != n or self.F.dim != n:
            raise DimensionMismatch("pointer labels, amplitudes, F and readout must share one dimension")
        norm = np.sum(np.abs(amps) ** 2) * self.weight
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"pointer wavefunction norm {norm} != 1")

    @property
    def dim(self) -> int:
        return self.F.dim

    @property
    def alpha(self) -> np.ndarray:
        return self.calibration * np.asarray(self.readout, dtype=float)

    @property
    def unit_vector(self) -> np.ndarray:
        """Detector state as a unit-norm vector in the discrete basis."""
        return np.asarray(self.amplitudes, dtype=complex) * np.sqrt(self.weight)

    @property
    def R(self) -> np.ndarray:
        return np.diag(self.alpha).astype(complex)

    def with_calibration(self, calibration: float) -> "PointerModel":
        return PointerModel(self.labels, self.amplitudes, self.F, self.readout, self.weight, calibration)


def position_grid(n: int, span: float) -> tuple[np.ndarray, float]:
    """Symmetric periodic grid ``x_j = (j - n/2) dx`` with ``dx = span / n``."""
    dx = span / n
    return (np.arange(n) - n // 2) * dx, dx


def momentum_observable(n: int, dx: float) -> Observable:
    """Periodic momentum ``-i d/dx`` diagonalized by the discrete Fourier basis."""
    k = 2 * np.pi * np.fft.fftfreq(n, d=dx)
    j = np.arange(n) - n // 2
    waves = np.exp(1j * np.outer(j * dx, k)) / np.sqrt(n)
    return Observable.from_spectrum(k, waves)


def gaussian_pointer(sigma: float = 1.0, n: int = 256, span: float | None = None, g: float | None = None) -> PointerModel:
    """Zero-mean Gaussian pointer with ``F = p``, ``R = x``.

    With a nonzero ``g`` the readout is calibrated to ``alpha_x = x / g``;
    ``g = 0`` leaves it uncalibrated.
    """
    if n & (n - 1):
        raise ValueError("grid size must be a power of two")
    span = 40.0 * sigma if span is None else span
    if span < 8 * sigma:
        raise ValueError("grid span must cover at least 8 sigma")
    x, dx = position_grid(n, span)
    psi = (2 * np.pi * sigma**2) ** -0.25 * np.exp(-(x**2) / (4 * sigma**2))
    psi = psi / np.sqrt(np.sum(np.abs(psi) ** 2) * dx)
    cal = 1.0 if not g else 1.0 / g
    return PointerModel(x, psi.astype(complex), momentum_observable(n, dx), x, dx, cal)


def qubit_pointer(g: float | None = None) -> PointerModel:
    """Two-level detector prepared in ``|+>`` with ``F = sigma_y``, read out in ``{|0>, |1>}``.

    Coupled to a system ``A`` with eigenvalues ``a`` this produces
    ``P_{0,1} = (1 -/+ sin(2 g a)) / 2`` on each eigenspace; readout labels are
    ``-1, +1`` and with ``g`` given they are calibrated by ``1 / sin(2g)``.
    """
    F = Observable(np.array([[0, -1j], [1j, 0]]))
    amps = np.array([1, 1], dtype=complex) / np.sqrt(2)
    cal = 1.0 if g is None or np.sin(2 * g) == 0 else 1.0 / np.sin(2 * g)
    return PointerModel(np.array([0, 1]), amps, F, np.array([-1.0, 1.0]), 1.0, cal)


@dataclass(frozen=True)
class CouplingScenario:
    """Product input ``|d'>|i'>``, coupling ``exp(-i g F (x) A)``, system postselection ``<f'|``."""

    initial: np.ndarray
    final: np.ndarray
    observable: Observable
    pointer: PointerModel
    g: float

    def __post_init__(self):
        object.__setattr__(self, "initial", normalize(self.initial))
        object.__setattr__(self, "final", normalize(self.final))
        object.__setattr__(self, "observable", as_observable(self.observable))
        if not np.isfinite(self.g):
            raise ValueError("coupling strength must be finite")
        if self.initial.size != self.observable.dim or self.final.size != self.observable.dim:
            raise DimensionMismatch("system states and observable differ in dimension")

    @property
    def sys_dim(self) -> int:
        return self.observable.dim


def _generator_spectrum(sc: CouplingScenario):
    F, A = sc.pointer.F, sc.observable
    vecs = np.kron(F.eigenvectors, A.eigenvectors)
    vals = np.multiply.outer(F.eigenvalues, A.eigenvalues).ravel()
    return vals, vecs


def joint_unitary(sc: CouplingScenario) -> np.ndarray:
    """``V = exp(-i g F (x) A)`` on detector (x) system, detector first.

    The generator's eigenbasis is the tensor product of the factors' eigenbases,
    so the exponential is exact up to rounding.
    """
    vals, vecs = _generator_spectrum(sc)
    return (vecs * np.exp(-1j * sc.g * vals)) @ dagger(vecs)


def joint_state(sc: CouplingScenario) -> np.ndarray:
    """``V |d'>|i'>`` reshaped to ``(n_x, sys_dim)`` density amplitudes."""
    vals, vecs = _generator_spectrum(sc)
    psi0 = np.kron(np.asarray(sc.pointer.amplitudes, dtype=complex), sc.initial)
    out = vecs @ (np.exp(-1j * sc.g * vals) * (dagger(vecs) @ psi0))
    return out.reshape(sc.pointer.dim, sc.sys_dim)


def joint_distribution(sc: CouplingScenario, postselection_basis) -> np.ndarray:
    """``p_{x,f} = |<x', f'| V |d', i'>|^2`` as an ``(n_x, n_f)`` array.

    For grid pointers the entries are densities in ``x``; multiply by
    ``sc.pointer.weight`` to obtain probabilities.
    """
    basis = np.column_stack([np.asarray(f, dtype=complex) for f in postselection_basis])
    amps = joint_state(sc) @ basis.conj()
    return np.abs(amps) ** 2


def _pointer_mask(pointer: PointerModel) -> np.ndarray:
    rho = np.abs(pointer.amplitudes) ** 2
    return rho > DENSITY_FLOOR * rho.max()


def detector_weak_values(pointer: PointerModel) -> np.ndarray:
    """``F_w(x) = <x'|F|d'> / <x'|d'>``; ``nan`` where the pointer density vanishes."""
    psi = np.asarray(pointer.amplitudes, dtype=complex)
    Fpsi = pointer.F.matrix @ psi
    out = np.full(psi.size, np.nan + 0j)
    m = _pointer_mask(pointer)
    out[m] = Fpsi[m] / psi[m]
    return out


def system_weak_value(sc: CouplingScenario) -> complex:
    ov = sc.final.conj() @ sc.initial
    if abs(ov) ** 2 < POSTSELECTION_FLOOR:
        raise PostselectionImpossible("postselection orthogonal to the prepared state")
    return complex(sc.final.conj() @ sc.observable.matrix @ sc.initial / ov)


@dataclass(frozen=True)
class LinearResponse:
    """First-order weak-value predictions; array fields are indexed by pointer outcome."""

    F_w: np.ndarray
    A_w: complex
    mean_A: float
    mean_A2: float
    mean_F: float
    mean_F2: float
    mean_R: float
    mean_RF: complex
    joint_ratio: np.ndarray
    detector_marginal_ratio: np.ndarray
    system_marginal_ratio: float
    unconditioned_readout: float
    conditioned_readout: float
    valid: np.ndarray = field(repr=False)


def linear_response_prediction(sc: CouplingScenario) -> LinearResponse:
    """Evaluate the truncated weak-value expansions for ``sc``.

    ``mean_RF`` uses the literal ordering ``<d'|R F|d'>``.
    """
    g = sc.g
    p = sc.pointer
    d = p.unit_vector
    A = sc.observable.matrix
    i = sc.initial
    Fw = detector_weak_values(p)
    Aw = system_weak_value(sc)
    mean_A = float((i.conj() @ A @ i).real)
    mean_A2 = float((i.conj() @ A @ A @ i).real)
    Fm = p.F.matrix
    mean_F = float((d.conj() @ Fm @ d).real)
    mean_F2 = float((d.conj() @ Fm @ Fm @ d).real)
    R = p.R
    mean_R = float((d.conj() @ R @ d).real)
    mean_RF = complex(d.conj() @ R @ Fm @ d)
    joint = 1 + 2 * g * np.imag(Fw * Aw) + g**2 * np.abs(Fw) ** 2 * abs(Aw) ** 2
    det = 1 + 2 * g * mean_A * np.imag(Fw) + g**2 * mean_A2 * np.abs(Fw) ** 2
    sysm = 1 + 2 * g * mean_F * Aw.imag + g**2 * mean_F2 * abs(Aw) ** 2
    uncond = mean_R + 2 * g * mean_A * mean_RF.imag
    cond = mean_R + 2 * g * (Aw.real * mean_RF.imag + Aw.imag * mean_RF.real)
    with np.errstate(invalid="ignore"):
        valid = abs(g) * np.abs(Fw) * abs(Aw) < VALIDITY_THRESHOLD
    return LinearResponse(Fw, Aw, mean_A, mean_A2, mean_F, mean_F2, mean_R, mean_RF,
                          joint, det, float(sysm), float(uncond), float(cond), valid)


def exact_joint_ratio(sc: CouplingScenario) -> np.ndarray:
    """``p_{x,f'} / |<x'|d'><f'|i'>|^2`` from the exact joint distribution."""
    p = joint_distribution(sc, [sc.final])[:, 0]
    base = np.abs(sc.pointer.amplitudes) ** 2 * abs(sc.final.conj() @ sc.initial) ** 2
    out = np.full(p.size, np.nan)
    m = _pointer_mask(sc.pointer)
    out[m] = p[m] / base[m]
    return out


def second_order_joint_ratio(sc: CouplingScenario) -> np.ndarray:
    """Consistent second-order expansion of the joint ratio.

    Adds ``-g^2 Re[(F^2)_w (A^2)_w]`` to the first-order form; the remainder is
    then third order in ``g``.
    """
    lr = linear_response_prediction(sc)
    psi = np.asarray(sc.pointer.amplitudes, dtype=complex)
    Fm = sc.pointer.F.matrix
    F2w = np.full(psi.size, np.nan + 0j)
    m = _pointer_mask(sc.pointer)
    F2w[m] = (Fm @ (Fm @ psi))[m] / psi[m]
    A = sc.observable.matrix
    A2w = complex(sc.final.conj() @ A @ A @ sc.initial / (sc.final.conj() @ sc.initial))
    return lr.joint_ratio - sc.g**2 * np.real(F2w * A2w)


def conditioned_pointer_average(sc: CouplingScenario, f=None, floor: float = POSTSELECTION_FLOOR) -> float:
    """``sum_x alpha_x p_{x|f}`` from the exact joint distribution."""
    f = sc.final if f is None else normalize(f)
    p = joint_distribution(sc, [f])[:, 0] * sc.pointer.weight
    pf = p.sum()
    if pf < floor:
        raise PostselectionImpossible(f"postselection probability {pf:.3e} below floor")
    return float(np.dot(sc.pointer.alpha, p) / pf)


def unconditioned_pointer_average(sc: CouplingScenario) -> float:
    """``sum_x alpha_x p_x`` with all system outcomes kept."""
    px = np.sum(np.abs(joint_state(sc)) ** 2, axis=1) * sc.pointer.weight
    return float(np.dot(sc.pointer.alpha, px))


def aav_scenario(target: float = 100.0, g: float = 1e-5, sigma: float = 1.0, n: int = 256,
                 span: float | None = None) -> CouplingScenario:
    """Spin-1/2 ``Z`` measured by a Gaussian pointer, postselected for a large weak value."""
    from .weakval import aav_states

    i, f = aav_states(target)
    Z = np.array([[-1, 0], [0, 1]], dtype=complex)
    return CouplingScenario(i, f, Observable(Z), gaussian_pointer(sigma, n, span, g), g)
