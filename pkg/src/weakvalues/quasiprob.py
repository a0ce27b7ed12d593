"""Quasiprobability representations behind weak values.

Kirkwood-Dirac tables (and their real Terletsky-Margenau-Hill part) over
two orthonormal bases, state reconstruction from them, the conditional
quasiprobability that weights eigenvalues in a weak value, and a discrete
Wigner transform for periodic 1D grids with its local-momentum identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import PostselectionImpossible, SingularBasisPair
from .hjac import Wavefunction1D, local_momentum, spectral_derivative
from .qcore import DENSITY_FLOOR, POSTSELECTION_FLOOR, as_observable, density_matrix, normalize

#: Pairs with |<f|a>| below this cannot be used in the operator expansion.
SINGULAR_OVERLAP = 1e-12


def _columns(basis) -> np.ndarray:
    return np.column_stack([np.asarray(b, dtype=complex).ravel() for b in basis])


@dataclass(frozen=True)
class QuasiprobTable:
    """Kirkwood-Dirac entries ``K[a, f] = <f|a><a|rho|f>``."""

    basis_a: np.ndarray
    basis_f: np.ndarray
    complex_entries: np.ndarray
    singular: np.ndarray = field(repr=False)

    @property
    def real_view(self) -> np.ndarray:
        """Terletsky-Margenau-Hill distribution."""
        return self.complex_entries.real

    def marginal_a(self) -> np.ndarray:
        return self.complex_entries.sum(axis=1)

    def marginal_f(self) -> np.ndarray:
        return self.complex_entries.sum(axis=0)

    def negativity(self) -> tuple[float, float]:
        return negativity(self.real_view)


def negativity(values) -> tuple[float, float]:
    """``(min entry, sum of |negative entries|)``."""
    v = np.asarray(values, dtype=float)
    return float(v.min()), float(-v[v < 0].sum())


def kirkwood_dirac(rho, basis_a: Sequence, basis_f: Sequence) -> QuasiprobTable:
    rho = density_matrix(rho)
    Ua, Uf = _columns(basis_a), _columns(basis_f)
    overlaps = Uf.conj().T @ Ua  # [f, a] = <f|a>
    rho_af = Ua.conj().T @ rho @ Uf  # [a, f] = <a|rho|f>
    K = overlaps.T * rho_af
    return QuasiprobTable(Ua, Uf, K, np.abs(overlaps.T) < SINGULAR_OVERLAP)


def reconstruct_state(table: QuasiprobTable) -> np.ndarray:
    """``rho = sum_{a,f} K[a,f] |a><f| / <f|a>``."""
    if np.any(table.singular):
        raise SingularBasisPair("basis pair has vanishing overlaps")
    Ua, Uf = table.basis_a, table.basis_f
    overlaps = (Uf.conj().T @ Ua).T  # [a, f] = <f|a>
    coeff = table.complex_entries / overlaps
    return Ua @ coeff @ Uf.conj().T


def conditional_tmh(i, f, A, floor: float = POSTSELECTION_FLOOR) -> np.ndarray:
    """``Re <f|a><a|i><i|f> / |<f|i>|^2`` over the eigenbasis of ``A``.

    Degenerate eigenvalues are kept as separate entries (one per eigenvector).
    """
    i, f = normalize(i), normalize(f)
    A = as_observable(A)
    fi = f.conj() @ i
    if abs(fi) ** 2 < floor:
        raise PostselectionImpossible("postselection orthogonal to preparation")
    V = A.eigenvectors
    fa = f.conj() @ V
    ai = V.conj().T @ i
    return (fa * ai * np.conj(fi)).real / abs(fi) ** 2


@dataclass(frozen=True)
class WignerGrid:
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # shape (len(x), len(p))
    hbar: float = 1.0

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    def total(self) -> float:
        return float(self.values.sum() * self.dx * self.dp)

    def x_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.dp

    def negativity(self) -> tuple[float, float]:
        v = self.values
        return float(v.min()), float(-v[v < 0].sum() * self.dx * self.dp)


def wigner_transform(wf: Wavefunction1D) -> WignerGrid:
    """``W(x,p) = int psi(x - y/2) psi*(x + y/2) exp(i p y / hbar) dy / (2 pi hbar)``.

    With ``y = 2 s dx`` the shifted products stay on the grid and the ``y``
    integral becomes a length-``n`` DFT; the momentum grid has spacing
    ``pi hbar / (n dx)`` and covers ``|p| < pi hbar / (2 dx)``, so the state
    must be band-limited to that half-Nyquist range.  Shifts leaving the
    domain contribute zero: a periodic wrap would pair the state with its own
    image and put spurious fringes at the domain edge, so the state must
    vanish at the boundary.
    """
    n, dx, hbar = wf.n, wf.dx, wf.hbar
    psi = wf.psi
    s = np.arange(n) - n // 2
    rows = np.arange(n)[:, None] - s[None, :]
    cols = np.arange(n)[:, None] + s[None, :]
    inside = (rows >= 0) & (rows < n) & (cols >= 0) & (cols < n)
    corr = np.where(inside, psi[rows % n] * np.conj(psi[cols % n]), 0.0)  # [x, s]
    m = np.arange(n) - n // 2
    p = m * np.pi * hbar / (n * dx)
    # sum_s corr[x, s] exp(2 pi i m s / n)
    phase = np.exp(2j * np.pi * np.outer(s, m) / n)
    W = (corr @ phase).real * (2 * dx) / (2 * np.pi * hbar)
    return WignerGrid(wf.x, p, W, hbar)


def wigner_local_momentum(W: WignerGrid, wf: Wavefunction1D, density_floor: float = DENSITY_FLOOR,
                          check_tol: float | None = None) -> np.ndarray:
    """``int p W dp / int W dp`` per ``x``; ``nan`` where ``|psi|^2 < density_floor``.

    The Nyquist momentum bin is excluded from the first moment, matching the
    spectral derivative convention.  With ``check_tol`` set, the result is
    compared with ``Re <x|p|psi>/<x|psi>``.
    """
    pw = W.p.copy()
    pw[0] = 0.0
    num = W.values @ pw * W.dp
    den = W.values.sum(axis=1) * W.dp
    m = wf.rho >= density_floor
    out = np.full(wf.n, np.nan)
    out[m] = num[m] / den[m]
    if check_tol is not None:
        ref = local_momentum(wf).real
        ok = m & np.isfinite(ref)
        err = np.max(np.abs(out[ok] - ref[ok]), initial=0.0)
        if err > check_tol:
            raise ArithmeticError(f"phase-space and spectral local momenta differ by {err:.3e}")
    return out


def partial_momentum_average(wf: Wavefunction1D) -> np.ndarray:
    """``Re[(-i hbar psi') psi*]``, the unconditioned numerator of the local momentum."""
    return (-1j * wf.hbar * spectral_derivative(wf.psi, wf.dx) * np.conj(wf.psi)).real
