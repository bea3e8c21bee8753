import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chainstirap import (
    ChainSpec,
    DomainError,
    InvalidSpecError,
    ProtocolSpec,
    bound_state,
    build_total_hamiltonian,
    mixing_angle,
    pulse_amplitudes,
    resonant_onsite_energy,
    sample_disorder,
    static_hamiltonian,
)


def test_resonant_energy_is_minus_bound_energy(headline_chain):
    assert resonant_onsite_energy(headline_chain) == pytest.approx(-bound_state(headline_chain).energy, rel=1e-15)
    assert resonant_onsite_energy(headline_chain) == pytest.approx(math.sqrt(5.0), rel=1e-15)


def test_distance_and_offset(headline_chain):
    spec = ProtocolSpec.from_distance(headline_chain, 9, 0.1, 10.0)
    assert spec.l == 3
    assert spec.distance == 9
    assert (spec.site_a, spec.site_b) == (17, 23)
    assert spec.dim == 41


@pytest.mark.parametrize("distance", [3, 6, 7.5])
def test_invalid_distance(headline_chain, distance):
    with pytest.raises(InvalidSpecError):
        ProtocolSpec.from_distance(headline_chain, distance, 0.1, 10.0)


@pytest.mark.parametrize("l, j0, t_max", [(0, 0.1, 1.0), (20, 0.1, 1.0), (1, 0.0, 1.0), (1, 0.1, -1.0)])
def test_invalid_protocol(headline_chain, l, j0, t_max):
    with pytest.raises(InvalidSpecError):
        ProtocolSpec(headline_chain, l, j0, t_max)


def test_pulse_endpoints_and_sum(headline_spec):
    spec = headline_spec
    assert pulse_amplitudes(spec, 0.0) == (0.0, 0.1)
    j_a, j_b = pulse_amplitudes(spec, spec.t_max)
    assert j_a == pytest.approx(0.1, abs=1e-16) and j_b == pytest.approx(0.0, abs=1e-16)
    j_a, j_b = pulse_amplitudes(spec, spec.t_max / 2)
    assert j_a == pytest.approx(0.05) and j_b == pytest.approx(0.05)
    for t in np.linspace(0, spec.t_max, 17):
        assert sum(pulse_amplitudes(spec, t)) == pytest.approx(0.1, rel=1e-14)


def test_reverse_swaps_pulses(headline_spec):
    rev = headline_spec.replace(reverse=True)
    for t in np.linspace(0, headline_spec.t_max, 9):
        assert pulse_amplitudes(rev, t) == pulse_amplitudes(headline_spec, t)[::-1]


def test_mixing_angle_monotone(headline_spec):
    ts = np.linspace(0, headline_spec.t_max, 201)
    theta = np.array([mixing_angle(headline_spec, t) for t in ts])
    assert theta[0] == 0.0
    assert theta[-1] == pytest.approx(math.pi / 2)
    assert np.all(np.diff(theta) > 0)


def test_time_outside_protocol_rejected(headline_spec):
    with pytest.raises(DomainError):
        pulse_amplitudes(headline_spec, -1.0)
    with pytest.raises(DomainError):
        build_total_hamiltonian(headline_spec, 1.01 * headline_spec.t_max)


def test_hamiltonian_at_start(headline_spec):
    h = build_total_hamiltonian(headline_spec, 0.0)
    mu = headline_spec.mu
    assert h.shape == (41, 41)
    assert h[0, 0] == -mu and h[-1, -1] == -mu
    assert np.count_nonzero(h[0]) == 1
    assert h[-1, headline_spec.site_b] == -0.1
    assert np.count_nonzero(h[-1]) == 2
    assert h[20, 20] == -1.0


def test_hamiltonian_midway_couplings(headline_spec):
    h = build_total_hamiltonian(headline_spec, headline_spec.t_max / 2)
    assert h[0, 19] == pytest.approx(-0.05) and h[19, 0] == h[0, 19]
    assert h[-1, 21] == pytest.approx(-0.05)


def test_weak_coupling_triplet_near_minus_mu(headline_chain):
    splits = []
    for j0 in (1e-3, 2e-3):
        spec = ProtocolSpec.from_distance(headline_chain, 5, j0, 100.0)
        vals = np.linalg.eigvalsh(build_total_hamiltonian(spec, 50.0))[:3]
        assert np.all(np.abs(vals + spec.mu) < 2 * j0)
        splits.append(vals[2] - vals[0])
    # first-order splitting is linear in J0
    assert splits[1] / splits[0] == pytest.approx(2.0, rel=1e-3)


def test_disorder_is_deterministic(headline_chain):
    a = sample_disorder(0.1, headline_chain, 12345)
    b = sample_disorder(0.1, headline_chain, 12345)
    c = sample_disorder(0.1, headline_chain, 12346)
    assert np.array_equal(a.epsilons, b.epsilons)
    assert not np.array_equal(a.epsilons, c.epsilons)
    assert a.epsilons.shape == (38,)
    assert np.all(np.abs(a.epsilons) <= 1.0)
    with pytest.raises(ValueError):
        a.epsilons[0] = 0.0


def test_disorder_moments(headline_chain):
    pooled = np.concatenate([sample_disorder(0.1, headline_chain, s).epsilons for s in range(264)])
    assert pooled.size >= 10_000
    assert abs(pooled.mean()) <= 0.02
    assert abs(pooled.var() - 1.0 / 3.0) <= 0.02


def test_zero_disorder_is_bitwise_clean(headline_spec):
    d = sample_disorder(0.0, headline_spec.chain, 7)
    for t in (0.0, 123.0, headline_spec.t_max):
        assert np.array_equal(build_total_hamiltonian(headline_spec, t, d), build_total_hamiltonian(headline_spec, t))


def test_disorder_scales_bonds_only(headline_spec):
    d = sample_disorder(0.3, headline_spec.chain, 3)
    clean = static_hamiltonian(headline_spec).matrix
    dirty = static_hamiltonian(headline_spec, d).matrix
    assert np.array_equal(np.diag(clean), np.diag(dirty))
    assert np.allclose(np.diag(dirty, 1)[1:-1], -(1.0 + 0.3 * d.epsilons))


def test_negative_delta_rejected(headline_chain):
    with pytest.raises(DomainError):
        sample_disorder(-0.1, headline_chain, 0)


@settings(max_examples=50, deadline=None)
@given(frac=st.floats(0.0, 1.0), seed=st.integers(0, 2**63), delta=st.floats(0.0, 0.5), reverse=st.booleans())
def test_hamiltonian_hermitian(frac, seed, delta, reverse):
    spec = ProtocolSpec.from_distance(ChainSpec(39, 1.0), 5, 0.1, 600.0, reverse=reverse)
    d = sample_disorder(delta, spec.chain, seed)
    h = build_total_hamiltonian(spec, frac * spec.t_max, d)
    assert np.array_equal(h, h.conj().T)
