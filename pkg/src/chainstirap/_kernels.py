"""Compiled fixed-step RK4 propagators.

The Hamiltonian is passed as a CSR static part plus two pulse "ports": the
sender hop between index 0 and ``port_a`` and the receiver hop between the
last index and ``port_b``.  Pulse amplitudes are evaluated inside the loop
with the same sin^2 formula as :func:`chainstirap.protocol.pulse_amplitudes`.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _pulses(t, j0, t_max, reverse):
    s = math.sin(math.pi * t / (2.0 * t_max)) ** 2
    if reverse:
        return j0 * (1.0 - s), j0 * s
    return j0 * s, j0 * (1.0 - s)


@njit(cache=True, nogil=True)
def _apply_h(indptr, indices, data, port_a, port_b, ja, jb, x, out):
    n = x.shape[0]
    last = n - 1
    for i in range(n):
        acc = 0j
        for p in range(indptr[i], indptr[i + 1]):
            acc += data[p] * x[indices[p]]
        out[i] = acc
    out[0] -= ja * x[port_a]
    out[port_a] -= ja * x[0]
    out[last] -= jb * x[port_b]
    out[port_b] -= jb * x[last]


@njit(cache=True, nogil=True)
def propagate_pure(indptr, indices, data, port_a, port_b, j0, t_max, reverse,
                   psi0, n_samples, steps_per_sample, h):
    """Integrate i dpsi/dt = H(t) psi; returns the state at each sample time."""
    n = psi0.shape[0]
    out = np.empty((n_samples, n), dtype=np.complex128)
    psi = psi0.copy()
    out[0] = psi
    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty(n, dtype=np.complex128)
    k3 = np.empty(n, dtype=np.complex128)
    k4 = np.empty(n, dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)
    step = 0
    for s in range(1, n_samples):
        for _ in range(steps_per_sample):
            t = step * h
            ja, jb = _pulses(t, j0, t_max, reverse)
            _apply_h(indptr, indices, data, port_a, port_b, ja, jb, psi, k1)
            for i in range(n):
                k1[i] *= -1j
                tmp[i] = psi[i] + 0.5 * h * k1[i]
            ja, jb = _pulses(t + 0.5 * h, j0, t_max, reverse)
            _apply_h(indptr, indices, data, port_a, port_b, ja, jb, tmp, k2)
            for i in range(n):
                k2[i] *= -1j
                tmp[i] = psi[i] + 0.5 * h * k2[i]
            _apply_h(indptr, indices, data, port_a, port_b, ja, jb, tmp, k3)
            for i in range(n):
                k3[i] *= -1j
                tmp[i] = psi[i] + h * k3[i]
            ja, jb = _pulses(t + h, j0, t_max, reverse)
            _apply_h(indptr, indices, data, port_a, port_b, ja, jb, tmp, k4)
            for i in range(n):
                psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] - 1j * k4[i])
            step += 1
        out[s] = psi
    return out


@njit(cache=True, nogil=True)
def _dephasing_rhs(indptr, indices, data, port_a, port_b, ja, jb, gamma, rho, m, out):
    # out = -i[H, rho] - gamma (rho - diag rho), using rho H = (H rho)^dagger
    n = rho.shape[0]
    last = n - 1
    for i in range(n):
        for c in range(n):
            m[i, c] = 0j
        for p in range(indptr[i], indptr[i + 1]):
            v = data[p]
            k = indices[p]
            for c in range(n):
                m[i, c] += v * rho[k, c]
    for c in range(n):
        m[0, c] -= ja * rho[port_a, c]
        m[port_a, c] -= ja * rho[0, c]
        m[last, c] -= jb * rho[port_b, c]
        m[port_b, c] -= jb * rho[last, c]
    for i in range(n):
        for j in range(n):
            v = -1j * (m[i, j] - np.conj(m[j, i]))
            if i != j:
                v -= gamma * rho[i, j]
            out[i, j] = v


@njit(cache=True, nogil=True)
def propagate_master(indptr, indices, data, port_a, port_b, j0, t_max, reverse, gamma,
                     rho0, n_samples, steps_per_sample, h):
    """Integrate the site-basis dephasing master equation; returns sampled rho."""
    n = rho0.shape[0]
    out = np.empty((n_samples, n, n), dtype=np.complex128)
    rho = rho0.copy()
    out[0] = rho
    m = np.empty((n, n), dtype=np.complex128)
    k1 = np.empty((n, n), dtype=np.complex128)
    k2 = np.empty((n, n), dtype=np.complex128)
    k3 = np.empty((n, n), dtype=np.complex128)
    k4 = np.empty((n, n), dtype=np.complex128)
    tmp = np.empty((n, n), dtype=np.complex128)
    step = 0
    for s in range(1, n_samples):
        for _ in range(steps_per_sample):
            t = step * h
            ja, jb = _pulses(t, j0, t_max, reverse)
            _dephasing_rhs(indptr, indices, data, port_a, port_b, ja, jb, gamma, rho, m, k1)
            for i in range(n):
                for j in range(n):
                    tmp[i, j] = rho[i, j] + 0.5 * h * k1[i, j]
            ja, jb = _pulses(t + 0.5 * h, j0, t_max, reverse)
            _dephasing_rhs(indptr, indices, data, port_a, port_b, ja, jb, gamma, tmp, m, k2)
            for i in range(n):
                for j in range(n):
                    tmp[i, j] = rho[i, j] + 0.5 * h * k2[i, j]
            _dephasing_rhs(indptr, indices, data, port_a, port_b, ja, jb, gamma, tmp, m, k3)
            for i in range(n):
                for j in range(n):
                    tmp[i, j] = rho[i, j] + h * k3[i, j]
            ja, jb = _pulses(t + h, j0, t_max, reverse)
            _dephasing_rhs(indptr, indices, data, port_a, port_b, ja, jb, gamma, tmp, m, k4)
            for i in range(n):
                for j in range(n):
                    rho[i, j] += h / 6.0 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
            step += 1
        out[s] = rho
    return out
