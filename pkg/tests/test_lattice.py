import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chainstirap import (
    ChainSpec,
    InvalidSpecError,
    NoBoundStateError,
    bound_state,
    build_medium_hamiltonian,
    diagonalize_medium,
    energy_gap,
    solve_wavevectors,
)


def dense_spectrum(chain):
    return np.linalg.eigvalsh(build_medium_hamiltonian(chain))


@pytest.mark.parametrize("n_sites, mu0", [(4, 1.0), (1, 1.0), (39, -0.5), (39.5, 1.0)])
def test_chain_spec_rejects_invalid(n_sites, mu0):
    with pytest.raises(InvalidSpecError):
        ChainSpec(n_sites, mu0)


def test_medium_hamiltonian_structure():
    chain = ChainSpec(7, 0.8)
    h = build_medium_hamiltonian(chain)
    assert h.shape == (7, 7)
    assert np.array_equal(h, h.T)
    assert h[3, 3] == -0.8
    assert np.all(np.diag(h, 1) == -1.0)
    assert np.count_nonzero(h) == 1 + 2 * 6


def test_bound_state_closed_form_values():
    # xi = 0.5: q = asinh(1/2), energy -2 sqrt(5/4), Lambda = sqrt(5/4)/(1/2)
    b = bound_state(ChainSpec(39, 1.0))
    assert b.q == pytest.approx(0.4812118250596, rel=1e-12)
    assert b.energy == pytest.approx(-math.sqrt(5.0), rel=1e-14)
    assert b.norm_lambda == pytest.approx(math.sqrt(5.0), rel=1e-14)
    assert b.amplitude(20) == pytest.approx(5.0 ** -0.25, rel=1e-12)
    assert b.amplitude(19) == pytest.approx(5.0 ** -0.25 * math.exp(-b.q), rel=1e-12)
    assert b.amplitude(19) == pytest.approx(0.413307, abs=5e-6)


def test_bound_profile_is_mirror_symmetric_and_nearly_normalized():
    chain = ChainSpec(79, 1.0)
    b = bound_state(chain)
    assert np.allclose(b.profile, b.profile[::-1], rtol=0, atol=1e-15)
    # unit norm in the infinite chain; truncation error ~ e^(-2 q N0)
    assert np.sum(b.profile**2) == pytest.approx(1.0, abs=1e-12)


def test_no_bound_state_without_defect():
    chain = ChainSpec(39, 0.0)
    with pytest.raises(NoBoundStateError):
        bound_state(chain)
    with pytest.raises(NoBoundStateError):
        solve_wavevectors(chain)
    n = np.arange(1, 40)
    expected = np.sort(-2.0 * np.cos(n * np.pi / 40))
    assert np.allclose(dense_spectrum(chain), expected, atol=1e-12)


def test_odd_roots_are_integer_multiples_of_pi_over_n0():
    waves = solve_wavevectors(ChainSpec(39, 1.0))
    odd = sorted(r.k for r in waves.roots if r.parity == "odd")
    assert np.allclose(odd, np.arange(1, 20) * math.pi / 20, atol=1e-13)
    for r in waves.roots:
        assert r.energy == pytest.approx(-2.0 * math.cos(r.k), abs=1e-15)


@pytest.mark.parametrize("n_sites", [19, 39, 79])
@pytest.mark.parametrize("mu0", [0.25, 0.5, 1.0])
def test_wavevector_spectrum_matches_dense_diagonalization(n_sites, mu0):
    chain = ChainSpec(n_sites, mu0)
    waves = solve_wavevectors(chain)
    assert len(waves.roots) == n_sites - 1
    numeric = dense_spectrum(chain)
    assert np.allclose(waves.all_energies(), numeric, rtol=0, atol=1e-10)
    assert waves.bound_q == pytest.approx(math.asinh(chain.xi), abs=20 * math.exp(-2 * chain.xi * n_sites / 2))


def test_short_chain_without_localized_state_is_rejected():
    with pytest.raises(NoBoundStateError, match="too short"):
        solve_wavevectors(ChainSpec(3, 0.5))


def test_root_count_for_mu_half():
    assert len(solve_wavevectors(ChainSpec(39, 0.5)).roots) == 38


@settings(max_examples=40, deadline=None)
@given(half=st.integers(1, 40), mu0=st.floats(0.02, 4.0))
def test_spectrum_oracle_property(half, mu0):
    chain = ChainSpec(2 * half + 1, mu0)
    if chain.xi * chain.defect_site <= 1.0:
        with pytest.raises(NoBoundStateError):
            solve_wavevectors(chain)
        return
    waves = solve_wavevectors(chain)
    assert np.allclose(waves.all_energies(), dense_spectrum(chain), rtol=0, atol=1e-9)


def test_energy_gap_formula():
    assert energy_gap(ChainSpec(39, 1.0)) == pytest.approx(2 * (math.sqrt(1.25) - 1), rel=1e-14)
    assert energy_gap(ChainSpec(39, 0.5)) == pytest.approx(2 * (math.sqrt(1 + 1 / 16) - 1), rel=1e-14)


def test_numeric_gap_approaches_formula_from_above():
    # the finite chain's lowest band state sits about (pi/N0)^2 above the band edge
    errors = []
    for n in (39, 79, 159, 319):
        chain = ChainSpec(n, 1.0)
        errors.append(diagonalize_medium(chain).finite_gap - energy_gap(chain))
        n0 = chain.defect_site
        assert errors[-1] == pytest.approx((math.pi / n0) ** 2, rel=0.1)
    assert all(e > 0 for e in errors)
    assert all(a > b for a, b in zip(errors, errors[1:]))


def test_diagonalize_medium_orthonormal_with_sign_convention():
    spec = diagonalize_medium(ChainSpec(19, 0.5))
    vecs = spec.eigenvectors
    assert np.allclose(vecs.T @ vecs, np.eye(19), atol=1e-12)
    for v in vecs.T:
        big = np.flatnonzero(np.abs(v) >= np.abs(v).max() - 1e-9)[0]
        assert v[big] > 0
    assert np.all(np.diff(spec.eigenvalues) > 0)


def test_ground_state_matches_bound_profile():
    chain = ChainSpec(79, 1.0)
    ground = diagonalize_medium(chain).eigenvectors[:, 0]
    assert np.allclose(ground, bound_state(chain).profile, atol=1e-8)
