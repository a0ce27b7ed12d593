"""One-dimensional Schrodinger dynamics seen through the complex action.

Fields derived from a wavefunction on a periodic grid:

* complex local momentum ``p(x) = <x|p|psi>/<x|psi>``, split into the Bohmian
  (real) and osmotic (imaginary) parts,
* the quantum potential, computed both from the density and from the weak
  momentum variance,
* residuals of the continuity and Bohmian Hamilton-Jacobi equations between
  consecutive snapshots.

All derivatives are spectral.  The phase is never unwrapped; time
derivatives of the phase use ``angle(psi(t+dt) psi*(t))``.  Points where the
density drops below ``NODE_FLOOR * max(rho)`` are masked, not regularized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NODE_FLOOR = 1e-12
#: Relative density above which the two quantum-potential formulas are compared;
#: below it the division by rho amplifies roundoff past the comparison tolerance.
Q_COMPARE_FLOOR = 1e-6


@dataclass(frozen=True)
class Wavefunction1D:
    x: np.ndarray
    psi: np.ndarray
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        psi = np.asarray(self.psi, dtype=complex)
        n = x.size
        if psi.shape != x.shape:
            raise ValueError("grid and amplitudes differ in shape")
        if n < 2 or n & (n - 1):
            raise ValueError("grid size must be a power of two")
        if not np.allclose(np.diff(x), x[1] - x[0], rtol=1e-9, atol=0):
            raise ValueError("grid must be uniform")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "psi", psi)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def k(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @property
    def rho(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    def norm(self) -> float:
        return float(np.sum(self.rho) * self.dx)

    def normalized(self) -> "Wavefunction1D":
        return self.replace(self.psi / np.sqrt(self.norm()))

    def replace(self, psi) -> "Wavefunction1D":
        return Wavefunction1D(self.x, psi, self.mass, self.hbar)

    def mask(self, floor: float = NODE_FLOOR) -> np.ndarray:
        rho = self.rho
        return rho > floor * rho.max()

    def mean_momentum(self) -> float:
        """``<psi|p|psi>`` computed in momentum space."""
        phi = np.fft.fft(self.psi)
        return float(self.hbar * np.sum(self.k * np.abs(phi) ** 2) / np.sum(np.abs(phi) ** 2))


def spectral_derivative(f: np.ndarray, dx: float, order: int = 1) -> np.ndarray:
    """``d^order f / dx^order`` on a periodic grid (Nyquist mode dropped for odd orders)."""
    n = f.size
    k = 2 * np.pi * np.fft.fftfreq(n, d=dx)
    if order % 2 == 1:
        k = k.copy()
        k[n // 2] = 0.0
    out = np.fft.ifft((1j * k) ** order * np.fft.fft(f))
    return out.real if np.isrealobj(f) else out


def uniform_grid(n: int, span: float, center: float = 0.0) -> np.ndarray:
    return center + (np.arange(n) - n // 2) * (span / n)


def gaussian_packet(x, x0: float = 0.0, sigma: float = 1.0, k0: float = 0.0, mass: float = 1.0,
                    hbar: float = 1.0) -> Wavefunction1D:
    """Packet with density ``exp(-(x-x0)^2 / 2 sigma^2)`` and mean momentum ``hbar k0``."""
    x = np.asarray(x, dtype=float)
    psi = np.exp(-((x - x0) ** 2) / (4 * sigma**2) + 1j * k0 * x)
    return Wavefunction1D(x, psi, mass, hbar).normalized()


def cat_state(x, separation: float = 3.0, sigma: float = 1.0, k0: float = 0.0, phase: float = 0.0,
              mass: float = 1.0) -> Wavefunction1D:
    """Superposition of two packets at ``+-separation/2`` with momenta ``+-k0``."""
    x = np.asarray(x, dtype=float)
    a = separation / 2
    g1 = np.exp(-((x + a) ** 2) / (4 * sigma**2) + 1j * k0 * x)
    g2 = np.exp(-((x - a) ** 2) / (4 * sigma**2) - 1j * k0 * x + 1j * phase)
    return Wavefunction1D(x, g1 + g2, mass).normalized()


def hermite_state(x, level: int = 1, x0: float = 0.0, k0: float = 0.0, omega: float = 1.0,
                  mass: float = 1.0) -> Wavefunction1D:
    """Harmonic-oscillator eigenfunction of the given level, displaced and boosted."""
    from numpy.polynomial.hermite import hermval

    x = np.asarray(x, dtype=float)
    u = np.sqrt(mass * omega) * (x - x0)
    c = np.zeros(level + 1)
    c[level] = 1.0
    psi = hermval(u, c) * np.exp(-(u**2) / 2 + 1j * k0 * x)
    return Wavefunction1D(x, psi, mass).normalized()


def evolve(wf: Wavefunction1D, V, dt: float, steps: int) -> Wavefunction1D:
    """Strang-split Fourier stepping: half potential, full kinetic, half potential."""
    V = np.zeros(wf.n) if V is None else np.asarray(V, dtype=float)
    half_v = np.exp(-0.5j * V * dt / wf.hbar)
    kin = np.exp(-0.5j * wf.hbar * wf.k**2 * dt / wf.mass)
    psi = wf.psi
    for _ in range(steps):
        psi = half_v * np.fft.ifft(kin * np.fft.fft(half_v * psi))
    return wf.replace(psi)


def evolve_snapshots(wf: Wavefunction1D, V, dt: float, steps: int, every: int = 1) -> list[Wavefunction1D]:
    out = [wf]
    cur = wf
    for _ in range(steps // every):
        cur = evolve(cur, V, dt, every)
        out.append(cur)
    return out


@dataclass(frozen=True)
class FieldProfile:
    x: np.ndarray
    rho: np.ndarray
    p_bohm: np.ndarray
    p_osmotic: np.ndarray
    Q: np.ndarray
    weak_var: np.ndarray
    mask: np.ndarray = field(repr=False)

    @property
    def p_complex(self) -> np.ndarray:
        return self.p_bohm + 1j * self.p_osmotic


def _masked(values, mask):
    out = np.full(values.shape, np.nan, dtype=values.dtype)
    out[mask] = values[mask]
    return out


def local_momentum(wf: Wavefunction1D) -> np.ndarray:
    """Complex ``-i hbar psi' / psi``; ``nan`` at masked nodes."""
    m = wf.mask()
    dpsi = spectral_derivative(wf.psi, wf.dx)
    out = np.full(wf.n, np.nan + 0j)
    out[m] = -1j * wf.hbar * dpsi[m] / wf.psi[m]
    return out


def quantum_potential_from_density(wf: Wavefunction1D) -> np.ndarray:
    """``-(hbar^2/2m) (sqrt rho)'' / sqrt rho`` written through derivatives of ``rho``.

    ``(sqrt rho)''/sqrt rho = rho''/(2 rho) - (rho')^2/(4 rho^2)``; ``rho`` stays smooth
    through nodes where ``sqrt rho`` has a kink.
    """
    m = wf.mask()
    rho = wf.rho
    d1 = spectral_derivative(rho, wf.dx, 1)
    d2 = spectral_derivative(rho, wf.dx, 2)
    out = np.full(wf.n, np.nan)
    r = rho[m]
    out[m] = -(wf.hbar**2 / (2 * wf.mass)) * (d2[m] / (2 * r) - d1[m] ** 2 / (4 * r**2))
    return out


def weak_momentum_variance(wf: Wavefunction1D) -> np.ndarray:
    """``Re <x|p^2|psi>/<x|psi> - (Re <x|p|psi>/<x|psi>)^2``."""
    m = wf.mask()
    d1 = spectral_derivative(wf.psi, wf.dx, 1)
    d2 = spectral_derivative(wf.psi, wf.dx, 2)
    out = np.full(wf.n, np.nan)
    p1 = (-1j * wf.hbar * d1[m] / wf.psi[m]).real
    p2 = (-(wf.hbar**2) * d2[m] / wf.psi[m]).real
    out[m] = p2 - p1**2
    return out


def momentum_field(wf: Wavefunction1D) -> FieldProfile:
    p = local_momentum(wf)
    var = weak_momentum_variance(wf)
    Q = quantum_potential_from_density(wf)
    return FieldProfile(wf.x, wf.rho, p.real, p.imag, Q, var, wf.mask())


def osmotic_from_density(wf: Wavefunction1D) -> np.ndarray:
    """``-(hbar/2) d ln(rho)/dx`` computed as ``-(hbar/2) rho'/rho``."""
    m = wf.mask()
    d1 = spectral_derivative(wf.rho, wf.dx)
    return _masked(-(wf.hbar / 2) * d1 / np.where(m, wf.rho, 1.0), m)


def quantum_potential(wf: Wavefunction1D, tol: float | None = None,
                      compare_floor: float = Q_COMPARE_FLOOR) -> np.ndarray:
    """Quantum potential from the density; with ``tol`` set, also check it against
    the weak momentum variance over ``2m`` where ``rho > compare_floor * max(rho)``.
    """
    Q = quantum_potential_from_density(wf)
    if tol is not None:
        alt = weak_momentum_variance(wf) / (2 * wf.mass)
        m = wf.mask(compare_floor) & np.isfinite(Q) & np.isfinite(alt)
        err = np.max(np.abs(Q[m] - alt[m]), initial=0.0)
        if err > tol:
            raise ArithmeticError(f"quantum potential routes disagree by {err:.3e}")
    return Q


@dataclass(frozen=True)
class Residuals:
    continuity_l2: float
    hj_l2: float
    continuity: np.ndarray = field(repr=False)
    hj: np.ndarray = field(repr=False)


def residuals(psi_t: Wavefunction1D, psi_next: Wavefunction1D, V, dt: float, mask_floor: float = NODE_FLOOR) -> Residuals:
    """Continuity and Bohmian Hamilton-Jacobi residuals at the midpoint ``t + dt/2``.

    Time derivatives are centered differences between the two snapshots;
    spatial terms are averaged over both snapshots.  Norms are
    ``sqrt(sum r^2 dx)`` over points unmasked in both snapshots.
    """
    V = np.zeros(psi_t.n) if V is None else np.asarray(V, dtype=float)
    m = psi_t.mask(mask_floor) & psi_next.mask(mask_floor)
    hbar, mass, dx = psi_t.hbar, psi_t.mass, psi_t.dx

    def current(wf):
        return hbar * np.imag(np.conj(wf.psi) * spectral_derivative(wf.psi, dx)) / mass

    drho = (psi_next.rho - psi_t.rho) / dt
    div_j = spectral_derivative(0.5 * (current(psi_t) + current(psi_next)), dx)
    cont = drho + div_j

    dphase = np.angle(psi_next.psi * np.conj(psi_t.psi)) / dt

    def hj_terms(wf):
        p = local_momentum(wf).real
        return p**2 / (2 * mass) + quantum_potential_from_density(wf)

    hj = hbar * dphase + 0.5 * (hj_terms(psi_t) + hj_terms(psi_next)) + V
    cont_l2 = float(np.sqrt(np.sum(cont[m] ** 2) * dx))
    hj_l2 = float(np.sqrt(np.sum(hj[m] ** 2) * dx))
    return Residuals(cont_l2, hj_l2, _masked(cont, m), _masked(hj, m))
