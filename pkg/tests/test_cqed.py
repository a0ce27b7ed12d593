import numpy as np
import pytest
from hypothesis import given, strategies as st

from weakvalues import cqed
from weakvalues.errors import OrthogonalBranches, TruncationOverflow, UndampedDrive
from weakvalues.verification import closed_system_comparison

finite = st.floats(-3, 3, allow_nan=False)


def closed_model(chi=0.05, N=60, omega_q=5.0):
    return cqed.DispersiveModel(omega_q=omega_q, omega_r=2 * np.pi, chi=chi, fock_cutoff=N)


def fock(alpha, N=60):
    v = cqed.coherent_fock(alpha, N)
    return v / np.linalg.norm(v)


def test_model_validation():
    with pytest.raises(ValueError):
        cqed.DispersiveModel(1, 1, 0.1, kappa=-1)
    with pytest.raises(ValueError):
        cqed.DispersiveModel(1, 1, 0.1, fock_cutoff=2.5)
    m = cqed.DispersiveModel(1, 1, 0.1, fock_cutoff=60)
    assert m.guard_ok(4.0) and not m.guard_ok(6.0)


def test_branch_state_normalization_checked():
    with pytest.raises(Exception):
        cqed.BranchState(1.0, 1.0, 0j, 0j)
    with pytest.raises(Exception):
        cqed.BranchState(1.0, 0.0, np.array([1.0, 1.0]), np.array([1.0, 0.0]))


def test_weak_value_equal_branches_is_mean_population():
    assert cqed.population_weak_value(1.5 + 0.5j, 1.5 + 0.5j) == pytest.approx(2.5)
    v = fock(1.5 + 0.5j)
    assert cqed.population_weak_value(v, v) == pytest.approx(2.5, abs=1e-10)


def test_vacuum_branches():
    assert cqed.population_weak_value(0j, 0j) == 0
    vac = np.zeros(10)
    vac[0] = 1
    assert cqed.population_weak_value(vac, vac) == 0


@given(st.floats(0, 4), st.floats(0, 2 * np.pi), st.floats(0, 4), st.floats(0, 2 * np.pi))
def test_coherent_weak_value_vs_fock(r1, p1, r0, p0):
    a1, a0 = r1 * np.exp(1j * p1), r0 * np.exp(1j * p0)
    if abs(np.exp(-abs(a1 - a0) ** 2 / 2)) < 1e-6:
        return
    closed = cqed.population_weak_value(a1, a0)
    assert closed == pytest.approx(np.conj(a1) * a0, abs=1e-14)
    assert abs(cqed.population_weak_value(fock(a1), fock(a0)) - closed) < 1e-8


def test_orthogonal_branches():
    with pytest.raises(OrthogonalBranches):
        cqed.population_weak_value(10.0, -10.0)
    e0, e1 = np.eye(4)[0], np.eye(4)[1]
    with pytest.raises(OrthogonalBranches):
        cqed.population_weak_value(e1, e0)


def test_truncation_overflow():
    m = closed_model(N=20)
    with pytest.raises(TruncationOverflow):
        cqed.coherent_branch_state(1, 0, 4.0, m)
    assert cqed.truncation_tail_mass(3.0, 60) < 1e-10


def test_decoupled_phase_advance():
    m = closed_model(chi=0.0)
    init = cqed.coherent_branch_state(0.6, 0.8, 2.0, m)
    for t in (0.3, 1.7, 5.0):
        out = cqed.closed_joint_evolution(m, init, t)
        # branches differ only by the qubit phase
        assert abs(abs(np.vdot(out.psi1, out.psi0)) - 1) < 1e-10
        assert out.coherence() == pytest.approx(init.coherence() * np.exp(1j * m.omega_q * t), abs=1e-10)


def test_closed_weak_value_circle_and_populations():
    m = closed_model(chi=0.05)
    alpha = 2.0
    init = cqed.coherent_branch_state(0.6, 0.8j, alpha, m)
    for t in np.linspace(0, 20, 9):
        out = cqed.closed_joint_evolution(m, init, t)
        nw = out.population_weak_value()
        assert abs(nw - alpha**2 * np.exp(2j * m.chi * t)) < 1e-8
        p0, p1 = out.populations
        assert abs(p0 - 0.36) < 1e-12 and abs(p1 - 0.64) < 1e-12
        a0, a1 = cqed.coherent_branch_amplitudes(m, alpha, t)
        # branch vectors carry the qubit phase; compare up to it
        r0 = np.vdot(fock(a0), out.psi0)
        assert abs(abs(r0) - 1) < 1e-9
        r1 = np.vdot(fock(a1), out.psi1)
        assert abs(abs(r1) - 1) < 1e-9


def test_closed_evolution_requires_closed_model():
    m = cqed.DispersiveModel(1, 1, 0.1, kappa=1.0)
    init = cqed.coherent_branch_state(1, 0, 1.0, closed_model())
    with pytest.raises(ValueError):
        cqed.closed_joint_evolution(m, init, 1.0)


def test_ode_bare_qubit():
    m = closed_model(omega_q=3.0)
    t = np.linspace(0, 5, 51)
    tr = cqed.coherence_ode(m, lambda s: 0.0, 0.5, t)
    np.testing.assert_allclose(tr.rho01, 0.5 * np.exp(1j * 3.0 * t), atol=1e-9)


def test_ode_ac_stark_real_constant():
    m = closed_model(chi=0.2, omega_q=1.0)
    t = np.linspace(0, 10, 101)
    tr = cqed.coherence_ode(m, lambda s: 3.0, 0.5, t)
    np.testing.assert_allclose(tr.rho01, 0.5 * np.exp(1j * (1.0 + 2 * 0.2 * 3.0) * t), atol=1e-8)
    np.testing.assert_allclose(np.abs(tr.rho01), 0.5, atol=1e-12)


def test_ode_log_law_with_decay():
    m = closed_model(chi=0.3, omega_q=1.0)
    nw = lambda s: 2.0 + 1j * (1 + np.sin(s))
    t = np.linspace(0, 8, 81)
    tr = cqed.coherence_ode(m, nw, 0.5, t)
    assert tr.log_law_error < 1e-8
    assert np.all(np.diff(np.abs(tr.rho01)) <= 0)
    exact = 0.5 * np.exp(-2 * 0.3 * (t + 1 - np.cos(t)))
    np.testing.assert_allclose(np.abs(tr.rho01), exact, rtol=1e-8)


def test_ode_grid_validation():
    with pytest.raises(ValueError):
        cqed.coherence_ode(closed_model(), lambda s: 0, 1, [1.0, 0.5])


def test_closed_system_oracle():
    t, ode, ref, tr = closed_system_comparison(alpha=3.0, periods=10)
    assert np.max(np.abs(ode - ref)) < 1e-6


def test_fock_doubling_robustness():
    alpha = 2.5
    vals = []
    for N in (60, 120):
        m = closed_model(N=N)
        init = cqed.coherent_branch_state(0.6, 0.8, alpha, m)
        out = cqed.closed_joint_evolution(m, init, 7.3)
        vals.append(np.array([out.population_weak_value(), out.coherence(), *out.populations]))
    assert np.max(np.abs(vals[0] - vals[1])) < 1e-9
    ss = cqed.steady_state_amplitudes(cqed.DispersiveModel(0, 0, 0.5, 10.0, 8.0))
    nws = [cqed.population_weak_value(fock(ss.psi1, N), fock(ss.psi0, N)) for N in (60, 120)]
    assert abs(nws[0] - nws[1]) < 1e-9
    assert abs(nws[0] - np.conj(ss.psi1) * ss.psi0) < 1e-8


def test_steady_state_no_drive():
    ss = cqed.steady_state_amplitudes(cqed.DispersiveModel(0, 0, 0.3, 2.0, 0.0))
    assert ss.psi0 == 0 and ss.psi1 == 0


def test_steady_state_resonant_branch():
    ss = cqed.steady_state_amplitudes(cqed.DispersiveModel(0, 0, 0.4, 3.0, 1.2, delta=0.4))
    assert ss.psi0 == 2 * 1.2 / 3.0
    assert ss.psi0.imag == 0


def test_steady_state_plug_in():
    ss = cqed.steady_state_amplitudes(cqed.DispersiveModel(0, 0, 0.5, 10.0, 1.0, 0.0))
    assert ss.psi0 == pytest.approx(0.2 / (1 - 0.1j), abs=1e-15)
    assert ss.psi1 == pytest.approx(0.2 / (1 + 0.1j), abs=1e-15)
    # second evaluation: fixed point of the branch equation
    assert ss.psi0 == pytest.approx(1.0 / (5 - 0.5j), abs=1e-15)
    assert ss.fixed_point_residual < 1e-12


@given(finite, st.floats(0.05, 10), st.floats(0, 3), finite)
def test_fixed_point_residual_random(chi, kappa, eps, delta):
    m = cqed.DispersiveModel(0, 0, chi, kappa, eps, delta)
    ss = cqed.steady_state_amplitudes(m)
    assert ss.fixed_point_residual < 1e-12
    rep = cqed.stark_and_dephasing(m)
    assert rep.stark_shift == pytest.approx(2 * chi * (np.conj(ss.psi1) * ss.psi0).real, abs=1e-12)


def test_undamped_drive():
    with pytest.raises(UndampedDrive):
        cqed.steady_state_amplitudes(cqed.DispersiveModel(0, 0, 0.1, 0.0, 1.0))


def test_small_chi_limit():
    reps = [cqed.stark_and_dephasing(cqed.DispersiveModel(0, 0, chi, 2.0, 1.0)) for chi in (1e-2, 1e-4, 1e-6)]
    for r, chi in zip(reps, (1e-2, 1e-4, 1e-6)):
        assert abs(r.dephasing_rate) < 10 * chi**2
        assert abs(r.stark_shift) < 10 * chi


def test_wideband_agreement():
    kappa = 10.0
    rep = cqed.stark_and_dephasing(cqed.DispersiveModel(0, 0, 0.01 * kappa, kappa, 1.0, 0.0))
    assert rep.wideband_reliable
    assert rep.dephasing_rel_deviation < 1e-3
    assert rep.dephasing_rate > 0
    d = rep.as_dict()
    assert d["frame"] == "drive" and "dephasing_rate" in d


def test_wideband_flagged_unreliable():
    rep = cqed.stark_and_dephasing(cqed.DispersiveModel(0, 0, 2.0, 1.0, 1.0))
    assert not rep.wideband_reliable
