"""Generalized measurements: Kraus sets, POVMs, contextual values, and the
exact decomposition of postselected averages into weak value plus
measurement-disturbance (Lindblad) error terms.

Grid-labelled Kraus sets hold density operators ``M_x`` together with the grid
spacing ``weight``, so completeness reads ``weight * sum_x M_x^dagger M_x = I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NoUnbiasedEstimator, PostselectionImpossible
from .qcore import POSTSELECTION_FLOOR, Observable, as_observable, dagger, normalize
from .rng import make_rng, sample_indices
from .vonneumann import CouplingScenario, joint_unitary

CONTEXTUAL_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class KrausSet:
    operators: np.ndarray
    labels: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        ops = np.asarray(self.operators, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise DimensionMismatch("Kraus operators must have shape (n, d, d)")
        object.__setattr__(self, "operators", ops)
        if np.asarray(self.labels).shape[0] != ops.shape[0]:
            raise DimensionMismatch("one label per Kraus operator required")

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    def __len__(self) -> int:
        return self.operators.shape[0]

    def povm(self) -> np.ndarray:
        """Probability operators ``P_x = M_x^dagger M_x`` (densities for grids)."""
        return dagger(self.operators) @ self.operators

    def completeness_error(self) -> float:
        total = self.weight * self.povm().sum(axis=0)
        return float(np.max(np.abs(total - np.eye(self.dim))))

    def joint_probabilities(self, i, basis) -> np.ndarray:
        """``weight * |<f|M_x|i>|^2`` as an ``(n_x, n_f)`` probability table."""
        i = normalize(i)
        B = np.column_stack([np.asarray(f, dtype=complex) for f in basis])
        amps = (self.operators @ i) @ B.conj()
        return self.weight * np.abs(amps) ** 2


def kraus_from_coupling(sc: CouplingScenario) -> KrausSet:
    """``M_x = <x'| V |d'>`` for every pointer outcome of a von Neumann coupling."""
    p = sc.pointer
    V = joint_unitary(sc)
    n, d = p.dim, sc.sys_dim
    blocks = V.reshape(n, d, n, d)
    # contract the detector input index with |d'>; the output index stays as x
    ops = np.einsum("xajb,j->xab", blocks, np.asarray(p.amplitudes, dtype=complex))
    return KrausSet(ops, np.asarray(p.labels), p.weight)


def two_outcome_kraus(gamma: float, A=None) -> KrausSet:
    """``M_pm = sqrt((I pm gamma A)/2)`` for an observable with ``|A| <= 1``."""
    A = np.array([[-1, 0], [0, 1]], dtype=complex) if A is None else as_observable(A).matrix
    obs = Observable(A)
    ops = []
    for s in (-1.0, 1.0):
        w = (1 + s * gamma * obs.eigenvalues) / 2
        if np.any(w < -1e-15):
            raise ValueError("gamma * A must have spectrum inside [-1, 1]")
        ops.append((obs.eigenvectors * np.sqrt(np.clip(w, 0, None))) @ dagger(obs.eigenvectors))
    return KrausSet(np.array(ops), np.array([-1.0, 1.0]))


@dataclass(frozen=True)
class ContextualValues:
    values: np.ndarray
    target: Observable
    residual: float


def polynomial_readout(labels, degree: int) -> np.ndarray:
    """Design matrix ``[1, x, x^2, ...]`` over the readout labels."""
    x = np.asarray(labels, dtype=float)
    return np.vander(x, degree + 1, increasing=True)


def solve_contextual_values(povm, A, weight: float = 1.0, readout_basis=None,
                            strict: bool = True) -> ContextualValues:
    """Solve ``A = weight * sum_x alpha_x P_x`` for real ``alpha``.

    The minimum-norm least-squares solution is taken, either over the raw
    outcome weights or, when ``readout_basis`` (shape ``(n_outcomes, k)``) is
    given, over coefficients ``c`` with ``alpha = readout_basis @ c``.
    """
    P = np.asarray(povm, dtype=complex)
    A = as_observable(A)
    n, d, _ = P.shape
    if d != A.dim:
        raise DimensionMismatch("POVM and observable differ in dimension")
    flat = weight * P.reshape(n, d * d).T
    L = np.vstack([flat.real, flat.imag])
    rhs = np.concatenate([A.matrix.ravel().real, A.matrix.ravel().imag])
    if readout_basis is None:
        alpha = np.linalg.lstsq(L, rhs, rcond=None)[0]
    else:
        B = np.asarray(readout_basis, dtype=float)
        c = np.linalg.lstsq(L @ B, rhs, rcond=None)[0]
        alpha = B @ c
    recon = weight * np.einsum("x,xab->ab", alpha, P)
    residual = float(np.max(np.abs(recon - A.matrix)))
    if strict and residual > CONTEXTUAL_RESIDUAL_TOL:
        raise NoUnbiasedEstimator(f"observable not spanned by the POVM (residual {residual:.3e})")
    return ContextualValues(alpha, A, residual)


def lindblad_term(M, target) -> np.ndarray:
    """``(1/2)([M^dagger, T] M + M^dagger [T, M])``."""
    M = np.asarray(M, dtype=complex)
    T = np.asarray(target, dtype=complex)
    if M.shape != T.shape or M.shape[0] != M.shape[1]:
        raise DimensionMismatch("Lindblad bracket needs square matrices of equal size")
    Md = dagger(M)
    return 0.5 * ((Md @ T - T @ Md) @ M + Md @ (T @ M - M @ T))


@dataclass(frozen=True)
class ConditionedAverageReport:
    value: float
    decomposed: float
    ideal: float
    error_alpha: float
    error_one: float
    postselection_prob: float
    weak_value: complex = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "decomposed": self.decomposed,
            "ideal": self.ideal,
            "error_alpha": self.error_alpha,
            "error_one": self.error_one,
            "postselection_prob": self.postselection_prob,
            "weak_value_re": self.weak_value.real,
            "weak_value_im": self.weak_value.imag,
        }


def conditioned_average(ks: KrausSet, cv: ContextualValues, i, f,
                        floor: float = POSTSELECTION_FLOOR) -> ConditionedAverageReport:
    """Postselected average of ``alpha_x``, directly and via the error-term decomposition."""
    i, f = normalize(i), normalize(f)
    alpha = np.asarray(cv.values, dtype=float)
    if alpha.size != len(ks):
        raise DimensionMismatch("one contextual value per Kraus operator required")
    p = ks.joint_probabilities(i, [f])[:, 0]
    pf = p.sum()
    if pf < floor:
        raise PostselectionImpossible(f"postselection probability {pf:.3e} below floor")
    value = float(alpha @ p / pf)

    Pi = np.outer(f, f.conj())
    terms = np.array([(i.conj() @ lindblad_term(M, Pi) @ i).real for M in ks.operators]) * ks.weight
    err_alpha = float(alpha @ terms)
    err_one = float(terms.sum())
    A = cv.target.matrix
    ov = f.conj() @ i
    jordan = float((f.conj() @ A @ i * np.conj(ov)).real)
    overlap = float(abs(ov) ** 2)
    decomposed = (jordan + err_alpha) / (overlap + err_one)
    if overlap >= floor:
        aw = complex(f.conj() @ A @ i / ov)
    else:
        aw = complex(np.nan, np.nan)
    return ConditionedAverageReport(value, float(decomposed), aw.real, err_alpha, err_one, float(pf), aw)


@dataclass(frozen=True)
class EventSample:
    """Sampled ``(x, f)`` outcome pairs and per-``f`` empirical averages of ``alpha_x``."""

    x_index: np.ndarray
    f_index: np.ndarray
    alpha: np.ndarray
    labels: np.ndarray
    counts: np.ndarray
    means: np.ndarray
    stderr: np.ndarray
    seed: int
    stream: int

    def rows(self):
        for k, (xi, fi) in enumerate(zip(self.x_index, self.f_index)):
            yield k, self.labels[xi], int(fi), self.alpha[xi]


def sample_events(ks: KrausSet, cv: ContextualValues, i, postselection_basis, n: int, seed: int,
                  stream: int = 0) -> EventSample:
    """Draw ``n`` independent ``(x, f)`` pairs from the exact joint distribution."""
    if n < 1:
        raise ValueError("n must be positive")
    table = ks.joint_probabilities(i, postselection_basis)
    nx, nf = table.shape
    rng = make_rng(seed, stream)
    flat = sample_indices(table, n, rng)
    xi, fi = np.divmod(flat, nf)
    alpha = np.asarray(cv.values, dtype=float)
    counts = np.bincount(fi, minlength=nf)
    means = np.full(nf, np.nan)
    stderr = np.full(nf, np.nan)
    for k in range(nf):
        a = alpha[xi[fi == k]]
        if a.size:
            means[k] = a.mean()
        if a.size > 1:
            stderr[k] = a.std(ddof=1) / np.sqrt(a.size)
    return EventSample(xi, fi, alpha, np.asarray(ks.labels), counts, means, stderr, seed, stream)
