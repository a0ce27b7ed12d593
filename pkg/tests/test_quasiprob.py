import numpy as np
import pytest
from hypothesis import given, strategies as st

from weakvalues import hjac
from weakvalues import quasiprob as qp
from weakvalues.errors import PostselectionImpossible, SingularBasisPair
from weakvalues.qcore import Observable, random_density, random_hermitian, random_ket, random_unitary, sigma_x, sigma_z
from weakvalues.weakval import rabi_scenario, weak_value


def ket_weak_value(i, f, A):
    return complex(f.conj() @ A.matrix @ i / (f.conj() @ i))

seeds = st.integers(0, 2**32 - 1)
Z_BASIS = [np.array([1, 0]), np.array([0, 1])]
X_BASIS = [np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)]


def fourier_basis(d):
    F = np.exp(2j * np.pi * np.outer(np.arange(d), np.arange(d)) / d) / np.sqrt(d)
    return [F[:, k] for k in range(d)]


def test_commuting_case_is_classical():
    rho = np.diag([0.7, 0.3])
    t = qp.kirkwood_dirac(rho, Z_BASIS, Z_BASIS)
    np.testing.assert_allclose(t.complex_entries, np.diag([0.7, 0.3]), atol=1e-15)
    assert np.all(t.real_view >= 0)


def test_plus_state_hand_values():
    plus = X_BASIS[0]
    t = qp.kirkwood_dirac(np.outer(plus, plus), Z_BASIS, X_BASIS)
    # K[a, f] = <f|a><a|+><+|f>: all |<f|a>| = 1/sqrt2, <a|+> = 1/sqrt2, <+|f> = delta
    expected = np.array([[0.5, 0.0], [0.5, 0.0]])
    np.testing.assert_allclose(t.complex_entries, expected, atol=1e-15)
    direct = np.array([[(f.conj() @ a) * (a.conj() @ plus) * (plus.conj() @ f) for f in X_BASIS] for a in Z_BASIS])
    np.testing.assert_allclose(t.complex_entries, direct, atol=1e-15)


@given(seeds, st.sampled_from([2, 3, 4]))
def test_normalization_and_marginals(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_density(d, rng)
    U = random_unitary(d, rng)
    Ua = [U[:, k] for k in range(d)]
    Uf = [U @ v for v in fourier_basis(d)]
    t = qp.kirkwood_dirac(rho, Ua, Uf)
    assert abs(t.complex_entries.sum() - 1) < 1e-12
    pa = np.array([(a.conj() @ rho @ a).real for a in Ua])
    pf = np.array([(f.conj() @ rho @ f).real for f in Uf])
    np.testing.assert_allclose(t.marginal_a(), pa, atol=1e-12)
    np.testing.assert_allclose(t.marginal_f(), pf, atol=1e-12)


@pytest.mark.parametrize("psi", [[1, 0], [0.6, 0.8j], [1, 1j]])
def test_round_trip_pure_qubit(psi):
    psi = np.asarray(psi, complex) / np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    t = qp.kirkwood_dirac(rho, Z_BASIS, X_BASIS)
    assert np.max(np.abs(qp.reconstruct_state(t) - rho)) < 1e-12


def test_maximally_mixed(rng):
    d = 3
    U = random_unitary(d, rng)
    Uf = [U @ v for v in fourier_basis(d)]
    Ua = fourier_basis(d)
    t = qp.kirkwood_dirac(np.eye(d) / d, Ua, Uf)
    expected = np.array([[abs(f.conj() @ a) ** 2 / d for f in Uf] for a in Ua])
    np.testing.assert_allclose(t.complex_entries, expected, atol=1e-14)
    assert np.all(t.real_view >= 0)
    assert np.max(np.abs(qp.reconstruct_state(t) - np.eye(d) / d)) < 1e-12


@given(seeds)
def test_round_trip_random_4d(seed):
    rng = np.random.default_rng(seed)
    U, V = random_unitary(4, rng), random_unitary(4, rng)
    Ua, Uf = [U[:, k] for k in range(4)], [V[:, k] for k in range(4)]
    overlaps = np.abs(V.conj().T @ U)
    rho = random_density(4, rng)
    t = qp.kirkwood_dirac(rho, Ua, Uf)
    if overlaps.min() > 1e-3:
        assert np.max(np.abs(qp.reconstruct_state(t) - rho)) < 1e-10


def test_singular_pair_flagged():
    t = qp.kirkwood_dirac(np.eye(2) / 2, Z_BASIS, Z_BASIS)
    assert t.singular[0, 1] and not t.singular[0, 0]
    with pytest.raises(SingularBasisPair):
        qp.reconstruct_state(t)


@given(seeds)
def test_conditional_tmh_sums(seed):
    rng = np.random.default_rng(seed)
    i, f = random_ket(3, rng), random_ket(3, rng)
    A = Observable(random_hermitian(3, rng))
    p = qp.conditional_tmh(i, f, A)
    assert abs(p.sum() - 1) < 1e-12
    assert abs(A.eigenvalues @ p - ket_weak_value(i, f, A).real) < 1e-12 * max(1, np.max(np.abs(A.eigenvalues)))


def test_conditional_tmh_born_when_f_equals_i(rng):
    i = random_ket(3, rng)
    A = Observable(random_hermitian(3, rng))
    born = np.abs(A.eigenvectors.conj().T @ i) ** 2
    np.testing.assert_allclose(qp.conditional_tmh(i, i, A), born, atol=1e-14)


def test_conditional_tmh_orthogonal():
    with pytest.raises(PostselectionImpossible):
        qp.conditional_tmh([1, 0], [0, 1], sigma_z())


def test_anomaly_implies_negativity():
    rng = np.random.default_rng(2024)
    anomalies = 0
    for _ in range(10_000):
        i, f = random_ket(2, rng), random_ket(2, rng)
        A = Observable(random_hermitian(2, rng))
        if abs(f.conj() @ i) ** 2 < 1e-9:
            continue
        aw = ket_weak_value(i, f, A).real
        if abs(aw) > A.spectral_radius + 1e-12:
            anomalies += 1
            assert qp.conditional_tmh(i, f, A).min() < 0
    assert anomalies > 100


def test_rabi_anomalous_time_has_negative_entry():
    # Z_w = sin(w(T-2t))/sin(wT) is about 1.10 at t = 0.2 for w = 1, T = 2
    sc = rabi_scenario(1.0, 2.0)
    t = 0.2
    Z = Observable(sigma_z())
    aw = weak_value(sc, Z, t).real
    assert aw == pytest.approx(np.sin(1.6) / np.sin(2.0), abs=1e-12)
    p = qp.conditional_tmh(sc.forward(t), sc.backward(t), Z)
    assert p.min() < 0


def test_kd_conditioned_matches_tmh(rng):
    for _ in range(20):
        i, f = random_ket(2, rng), random_ket(2, rng)
        A = Observable(random_hermitian(2, rng))
        f_perp = np.array([-np.conj(f[1]), np.conj(f[0])])
        basis_a = list(A.eigenbasis())
        t = qp.kirkwood_dirac(np.outer(i, i.conj()), basis_a, [f, f_perp])
        col = t.real_view[:, 0]
        np.testing.assert_allclose(col / col.sum(), qp.conditional_tmh(i, f, A), atol=1e-12)


def test_negativity_witness():
    assert qp.negativity([0.5, -0.2, 0.9, -0.1]) == (pytest.approx(-0.2), pytest.approx(0.3))


# -- Wigner -------------------------------------------------------------------

X = hjac.uniform_grid(512, 40.0)


def test_gaussian_wigner_nonnegative():
    W = qp.wigner_transform(hjac.gaussian_packet(X, 0.0, 1.0))
    assert W.values.min() >= -1e-10
    assert abs(W.total() - 1) < 1e-8


def test_cat_wigner_negative():
    W = qp.wigner_transform(hjac.cat_state(X, 3.0, 1.0))
    assert W.values.min() < 0
    assert W.negativity()[1] > 0


@given(seeds)
def test_x_marginal_random_smooth_states(seed):
    rng = np.random.default_rng(seed)
    x = hjac.uniform_grid(256, 40.0)
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    psi = sum(ck * hjac.gaussian_packet(x, rng.uniform(-4, 4), rng.uniform(0.7, 1.5), rng.uniform(-1.5, 1.5)).psi
              for ck in c)
    wf = hjac.Wavefunction1D(x, psi).normalized()
    W = qp.wigner_transform(wf)
    assert np.max(np.abs(W.x_marginal() - wf.rho)) < 1e-8
    assert abs(W.total() - 1) < 1e-8


def test_real_gaussian_local_momentum_zero():
    wf = hjac.gaussian_packet(X, 0.5, 1.2)
    lm = qp.wigner_local_momentum(qp.wigner_transform(wf), wf, check_tol=1e-6)
    assert np.nanmax(np.abs(lm)) < 1e-8


def test_plane_wave_phase_local_momentum():
    wf = hjac.gaussian_packet(X, 0.0, 1.5, k0=1.3)
    lm = qp.wigner_local_momentum(qp.wigner_transform(wf), wf)
    m = np.isfinite(lm)
    assert m.sum() > 100
    assert np.max(np.abs(lm[m] - 1.3)) < 1e-6


def test_cat_overlap_exceeds_packet_band():
    k0 = 1.0
    wf = hjac.cat_state(X, 2.5, 1.0, k0, 0.7)
    lm = qp.wigner_local_momentum(qp.wigner_transform(wf), wf)
    ref = hjac.local_momentum(wf).real
    m = np.isfinite(lm) & np.isfinite(ref)
    assert np.max(np.abs(lm[m] - ref[m])) < 1e-6
    # each packet has momentum spread 1/(2 sigma) around k0
    assert np.max(np.abs(lm[m] - k0)) > 3 * 0.5


def test_mismatch_raises_when_checked():
    wf = hjac.gaussian_packet(X, 0.0, 1.0, k0=0.5)
    W = qp.wigner_transform(wf)
    other = hjac.gaussian_packet(X, 0.0, 1.0, k0=-0.5)
    with pytest.raises(ArithmeticError):
        qp.wigner_local_momentum(W, other, check_tol=1e-6)


def test_masked_points_are_nan():
    wf = hjac.gaussian_packet(X, 0.0, 1.0)
    lm = qp.wigner_local_momentum(qp.wigner_transform(wf), wf)
    assert np.isnan(lm[0]) and np.isfinite(lm[len(lm) // 2])


def test_partial_momentum_average_integrates_to_mean(rng):
    wf = hjac.gaussian_packet(X, 1.0, 0.9, k0=0.8)
    assert np.sum(qp.partial_momentum_average(wf)) * wf.dx == pytest.approx(0.8, abs=1e-10)
