import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from chainstirap import (
    ChainSpec,
    DensityMatrix,
    DomainError,
    ProtocolSpec,
    StateVector,
    basis_state,
    bound_state,
    build_total_hamiltonian,
    default_step,
    effective_hamiltonian,
    evolve_effective,
    evolve_master,
    evolve_schrodinger,
    sample_disorder,
)
from chainstirap import _kernels


def reference_evolution(spec, times, psi0, h_of_t):
    """Adaptive high-order reference for the same Schrödinger equation."""
    sol = solve_ivp(
        lambda t, y: -1j * (h_of_t(min(t, spec.t_max)) @ y),
        (0.0, spec.t_max), psi0.astype(complex), t_eval=times, method="DOP853", rtol=1e-11, atol=1e-12,
    )
    return sol.y.T


def test_default_step_rule():
    assert default_step(1000.0) == 0.02
    assert default_step(100.0) == pytest.approx(0.005)


def test_full_evolution_matches_adaptive_reference(small_spec):
    traj = evolve_schrodinger(small_spec, n_samples=7)
    ref = reference_evolution(
        small_spec, traj.times, basis_state(small_spec.dim, 0).amplitudes,
        lambda t: build_total_hamiltonian(small_spec, t),
    )
    assert np.abs(ref[-1] - traj.final_state.amplitudes).max() < 1e-8


def test_endpoint_populations_match_reference(small_spec):
    traj = evolve_schrodinger(small_spec, n_samples=13)
    ref = reference_evolution(
        small_spec, traj.times, basis_state(small_spec.dim, 0).amplitudes,
        lambda t: build_total_hamiltonian(small_spec, t),
    )
    pops = np.abs(ref) ** 2
    assert np.allclose(traj.pop_a, pops[:, 0], atol=1e-8)
    assert np.allclose(traj.pop_b, pops[:, -1], atol=1e-8)
    assert np.allclose(traj.pop_medium, pops[:, 1:-1].sum(axis=1), atol=1e-8)


def test_effective_evolution_matches_adaptive_reference(headline_chain):
    spec = ProtocolSpec.from_distance(headline_chain, 5, 0.1, 150.0)
    b = bound_state(headline_chain)
    traj = evolve_effective(spec, b, n_samples=11)
    ref = reference_evolution(spec, traj.times, np.array([1, 0, 0]), lambda t: effective_hamiltonian(spec, b, t).matrix())
    assert np.allclose(traj.pop_b, np.abs(ref[:, 2]) ** 2, atol=1e-9)
    assert np.allclose(traj.final_state.amplitudes, ref[-1], atol=1e-9)


def test_headline_run_invariants(headline_spec):
    traj = evolve_schrodinger(headline_spec, check_step=True)
    assert traj.kind == "pure" and traj.basis == "full"
    assert traj.times.size == 501
    assert traj.diagnostics["norm_drift"] <= 1e-9
    assert traj.diagnostics["step_halving_delta"] <= 1e-8
    assert traj.pop_a[0] == 1.0
    assert traj.pop_b[-1] >= 0.995
    total = traj.pop_a + traj.pop_b + traj.pop_medium
    assert np.allclose(total, 1.0, atol=1e-9)
    assert np.all(traj.pop_defect <= traj.pop_medium + 1e-12)
    assert traj.metadata["dt"] <= 0.02


def test_effective_model_keeps_bus_mode_dark(headline_spec):
    traj = evolve_effective(headline_spec, bound_state(headline_spec.chain))
    assert traj.pop_b[-1] >= 0.995
    assert traj.pop_defect.max() < 0.1
    assert traj.diagnostics["norm_drift"] <= 1e-9


def test_mirror_two_way_symmetry(headline_chain):
    spec = ProtocolSpec.from_distance(headline_chain, 7, 0.1, 15 * math.pi / 0.1)
    forward = evolve_schrodinger(spec, n_samples=2)
    backward = evolve_schrodinger(spec.replace(reverse=True), initial=basis_state(spec.dim, spec.dim - 1), n_samples=2)
    assert abs(forward.pop_b[-1] - backward.pop_a[-1]) < 1e-10


def test_initial_state_validation(small_spec):
    with pytest.raises(DomainError):
        evolve_schrodinger(small_spec, initial=np.ones(small_spec.dim))
    with pytest.raises(DomainError):
        evolve_schrodinger(small_spec, initial=np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        evolve_schrodinger(small_spec, n_samples=1)
    with pytest.raises(DomainError):
        evolve_master(small_spec, gamma=-1.0)


def test_zero_disorder_gives_identical_trajectory(small_spec):
    clean = evolve_schrodinger(small_spec, n_samples=5)
    dirty = evolve_schrodinger(small_spec, sample_disorder(0.0, small_spec.chain, 99), n_samples=5)
    assert np.array_equal(clean.final_state.amplitudes, dirty.final_state.amplitudes)
    assert np.array_equal(clean.pop_b, dirty.pop_b)


def test_disorder_changes_trajectory_and_is_recorded(small_spec):
    d = sample_disorder(0.2, small_spec.chain, 5)
    traj = evolve_schrodinger(small_spec, d, n_samples=3)
    assert traj.metadata["seed"] == 5 and traj.metadata["delta"] == 0.2
    assert not np.allclose(traj.pop_b, evolve_schrodinger(small_spec, n_samples=3).pop_b)


def test_master_without_dephasing_matches_schrodinger(small_spec):
    pure = evolve_schrodinger(small_spec, n_samples=9)
    mixed = evolve_master(small_spec, gamma=0.0, n_samples=9)
    assert mixed.kind == "mixed"
    assert np.allclose(mixed.pop_b, pure.pop_b, atol=1e-6)
    assert np.allclose(mixed.pop_a, pure.pop_a, atol=1e-6)
    psi = pure.final_state.amplitudes
    assert np.allclose(mixed.final_state.entries, np.outer(psi, psi.conj()), atol=1e-6)


def test_master_invariants_with_dephasing(small_spec):
    traj = evolve_master(small_spec, gamma=0.01, n_samples=5, check_step=True)
    assert traj.diagnostics["trace_drift"] <= 1e-9
    assert traj.diagnostics["hermiticity_error"] <= 1e-10
    assert traj.diagnostics["min_eigenvalue"] >= -1e-8
    assert traj.diagnostics["step_halving_delta"] <= 1e-8
    traj.final_state.validate()
    # dephasing destroys coherences, so the final state is mixed
    rho = traj.final_state.entries
    assert np.trace(rho @ rho).real < 1.0 - 1e-3


def test_pure_dephasing_closed_form():
    # with H = 0 populations freeze and every coherence decays as exp(-gamma t)
    rng = np.random.default_rng(4)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    rho0 = a @ a.conj().T
    rho0 /= np.trace(rho0).real
    gamma, t_max, n_samples = 0.3, 4.0, 5
    empty = np.zeros(6, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=complex)
    out = _kernels.propagate_master(*empty, 1, 3, 0.0, t_max, False, gamma, rho0, n_samples, 200, 0.005)
    times = np.linspace(0, t_max, n_samples)
    off = ~np.eye(5, dtype=bool)
    for rho, t in zip(out, times):
        assert np.allclose(np.diag(rho), np.diag(rho0), atol=1e-14)
        assert np.allclose(rho[off], rho0[off] * math.exp(-gamma * t), rtol=1e-10)


def test_density_matrix_validation():
    good = DensityMatrix.pure(StateVector(np.array([0.6, 0.8j])))
    good.validate()
    assert good.trace == pytest.approx(1.0)
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.1], [0.3, 0.5]])).validate()
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.7, 0.4])).validate()
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.1, -0.1])).validate()
