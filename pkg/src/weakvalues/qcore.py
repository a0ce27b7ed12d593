"""Dense complex linear algebra and validated quantum-state primitives.

Matrices are plain ``numpy`` complex arrays; the only wrapper type is
:class:`Observable`, which caches a Hermitian eigendecomposition so that
propagators and joint unitaries can be built without re-diagonalizing.

Units: hbar = 1 throughout unless a caller passes ``hbar`` explicitly.
Qubit convention follows ``Z = |1><1| - |0><0|``, so ``sigma_z()`` is
``diag(-1, +1)`` in the ``(|0>, |1>)`` basis.
"""

from __future__ import annotations

from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .errors import DimensionMismatch, InvalidState, NotHermitian

IDENTITY_TOL = 1e-12
SPECTRAL_TOL = 1e-10
POSTSELECTION_FLOOR = 1e-12
DENSITY_FLOOR = 1e-12

ArrayLike = Union[np.ndarray, Sequence]


def as_matrix(a: ArrayLike) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def normalize(v: ArrayLike) -> np.ndarray:
    """Return ``v`` scaled to unit Euclidean norm."""
    v = np.asarray(v, dtype=complex).ravel()
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0.0:
        raise InvalidState("cannot normalize a zero or non-finite vector")
    return v / n


def ket(amplitudes: ArrayLike) -> np.ndarray:
    """Build a normalized ket from raw amplitudes."""
    return normalize(amplitudes)


def basis_ket(dim: int, k: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[k] = 1.0
    return v


def projector(v: ArrayLike) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    return np.outer(v, v.conj())


def is_hermitian(m: np.ndarray, tol: float = IDENTITY_TOL) -> bool:
    return bool(np.max(np.abs(m - dagger(m)), initial=0.0) < tol)


def density_matrix(state: ArrayLike, tol: float = IDENTITY_TOL) -> np.ndarray:
    """Validate (or build from a ket) a density matrix.

    A 1-d input is treated as a ket and turned into its projector.
    """
    a = np.asarray(state, dtype=complex)
    if a.ndim == 1:
        return projector(normalize(a))
    rho = as_matrix(a)
    if rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch("density matrix must be square")
    if not is_hermitian(rho, tol):
        raise NotHermitian("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise InvalidState(f"density matrix trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(rho).min() < -SPECTRAL_TOL:
        raise InvalidState("density matrix has negative eigenvalues")
    return rho


def effect_matrix(e: ArrayLike, tol: float = SPECTRAL_TOL) -> np.ndarray:
    """Validate an effect: Hermitian with spectrum inside [0, 1]."""
    a = np.asarray(e, dtype=complex)
    if a.ndim == 1:
        return projector(normalize(a))
    m = as_matrix(a)
    if not is_hermitian(m, IDENTITY_TOL):
        raise NotHermitian("effect matrix is not Hermitian")
    w = np.linalg.eigvalsh(m)
    if w.min() < -tol or w.max() > 1.0 + tol:
        raise InvalidState("effect matrix eigenvalues must lie in [0, 1]")
    return m


class Observable:
    """Hermitian matrix with a cached eigendecomposition.

    Parameters
    ----------
    matrix : array_like
        Square Hermitian matrix.
    tol : float
        Maximum allowed ``|M - M^dagger|`` entry.
    """

    def __init__(self, matrix: ArrayLike, tol: float = IDENTITY_TOL):
        m = as_matrix(matrix)
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatch("observable must be square")
        if not is_hermitian(m, tol):
            raise NotHermitian("observable is not Hermitian")
        self.matrix = m
        self.matrix.setflags(write=False)
        self._spectrum = None

    @classmethod
    def from_spectrum(cls, eigenvalues: ArrayLike, eigenvectors: ArrayLike) -> "Observable":
        """Build from a known real spectrum and unitary eigenvector matrix."""
        w = np.asarray(eigenvalues, dtype=float)
        v = as_matrix(eigenvectors)
        obs = cls((v * w) @ dagger(v), tol=SPECTRAL_TOL)
        obs._spectrum = (w, v)
        return obs

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def _eig(self):
        if self._spectrum is None:
            w, v = np.linalg.eigh(self.matrix)
            self._spectrum = (w, v)
        return self._spectrum

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eig()[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._eig()[1]

    @cached_property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    def eigenbasis(self) -> list[np.ndarray]:
        return [self.eigenvectors[:, k] for k in range(self.dim)]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self) -> str:
        return f"Observable(dim={self.dim})"


def as_observable(a: Union[Observable, ArrayLike]) -> Observable:
    return a if isinstance(a, Observable) else Observable(a)


def matexp_hermitian_generator(H: Union[Observable, ArrayLike], t: float, hbar: float = 1.0) -> np.ndarray:
    """Unitary propagator ``exp(-i H t / hbar)`` from the eigendecomposition of ``H``."""
    H = as_observable(H)
    w, v = H.eigenvalues, H.eigenvectors
    return (v * np.exp(-1j * w * t / hbar)) @ dagger(v)


def kron(*mats: ArrayLike) -> np.ndarray:
    """Tensor product; the first factor is the slow (outer) index."""
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def partial_matrix_element(bra_det: ArrayLike, joint: ArrayLike, ket_det: ArrayLike, sys_dim: int) -> np.ndarray:
    """Contract the detector indices of ``joint`` between ``<bra_det|`` and ``|ket_det>``.

    ``joint`` acts on detector (x) system with the detector factor first.
    """
    bra = np.asarray(bra_det, dtype=complex).ravel()
    ket_ = np.asarray(ket_det, dtype=complex).ravel()
    joint = as_matrix(joint)
    det_dim = bra.size
    if ket_.size != det_dim or joint.shape != (det_dim * sys_dim, det_dim * sys_dim):
        raise DimensionMismatch(
            f"joint shape {joint.shape} incompatible with detector dim {det_dim} x system dim {sys_dim}"
        )
    blocks = joint.reshape(det_dim, sys_dim, det_dim, sys_dim)
    return np.einsum("i,iajb,j->ab", bra.conj(), blocks, ket_)


def sigma_x() -> np.ndarray:
    return np.array([[0, 1], [1, 0]], dtype=complex)


def sigma_y() -> np.ndarray:
    return np.array([[0, -1j], [1j, 0]], dtype=complex)


def sigma_z() -> np.ndarray:
    """``|1><1| - |0><0|``."""
    return np.array([[-1, 0], [0, 1]], dtype=complex)


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    return normalize(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (m + dagger(m)) / 2


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real
