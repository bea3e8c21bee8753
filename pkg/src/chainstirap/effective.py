"""Three-level reduction {A, lambda_0, B} and its adiabaticity diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrumError
from .lattice import BoundState
from .protocol import ProtocolSpec, _check_time, pulse_amplitudes

__all__ = [
    "EffectiveHamiltonian",
    "AdiabaticTriple",
    "effective_hamiltonian",
    "adiabatic_triple",
    "adiabaticity",
    "max_adiabaticity",
    "adiabatic_time_scale",
    "coupling_profile_value",
]


@dataclass(frozen=True)
class EffectiveHamiltonian:
    omega_a: float
    omega_b: float
    mu: float

    def matrix(self) -> np.ndarray:
        """3 x 3 matrix in the ordering (A, lambda_0, B)."""
        return np.array(
            [
                [-self.mu, -self.omega_a, 0.0],
                [-self.omega_a, -self.mu, -self.omega_b],
                [0.0, -self.omega_b, -self.mu],
            ]
        )


@dataclass(frozen=True)
class AdiabaticTriple:
    """Instantaneous eigenpairs of the effective model.

    Energies are ordered ``e_plus < e_zero < e_minus``; ``d_zero`` is the
    dark state and has no weight on the bus mode.
    """

    d_minus: np.ndarray
    d_zero: np.ndarray
    d_plus: np.ndarray
    e_minus: float
    e_zero: float
    e_plus: float
    theta: float


def coupling_profile_value(spec: ProtocolSpec, bound: BoundState) -> float:
    """Localized-state amplitude at the attachment site ``N0 - l``.

    The profile is mirror symmetric, so the same value serves ``N0 + l``.
    """
    return bound.amplitude(spec.site_a)


def effective_hamiltonian(spec: ProtocolSpec, bound: BoundState, t: float) -> EffectiveHamiltonian:
    u = coupling_profile_value(spec, bound)
    j_a, j_b = pulse_amplitudes(spec, t)
    return EffectiveHamiltonian(omega_a=j_a * u, omega_b=j_b * u, mu=spec.mu)


def adiabatic_triple(h: EffectiveHamiltonian) -> AdiabaticTriple:
    omega = math.hypot(h.omega_a, h.omega_b)
    if omega == 0.0:
        raise DegenerateSpectrumError("omega_a = omega_b = 0: all three levels coincide")
    theta = math.atan2(h.omega_a, h.omega_b)
    s, c = math.sin(theta), math.cos(theta)
    r = 1.0 / math.sqrt(2.0)
    return AdiabaticTriple(
        d_minus=np.array([r * s, -r, r * c]),
        d_zero=np.array([c, 0.0, -s]),
        d_plus=np.array([r * s, r, r * c]),
        e_minus=-h.mu + omega,
        e_zero=-h.mu,
        e_plus=-h.mu - omega,
        theta=theta,
    )


def adiabaticity(spec: ProtocolSpec, bound: BoundState, t: float) -> float:
    """Nonadiabatic coupling of the dark state over the squared level gap.

    For the sin^2 / cos^2 pulses with phase ``phi = pi t / (2 t_max)`` the
    quotient collapses to

        A = sin(2 phi) phi' / (sqrt(2) J0 u (sin^4 phi + cos^4 phi)^(3/2)),

    which is finite everywhere and vanishes at both endpoints.  Swapping the
    pulse roles only flips the sign of the numerator, so reversed specs give
    the same value.
    """
    t = _check_time(spec, t)
    u = coupling_profile_value(spec, bound)
    phi = math.pi * t / (2.0 * spec.t_max)
    phi_dot = math.pi / (2.0 * spec.t_max)
    s2, c2 = math.sin(phi) ** 2, math.cos(phi) ** 2
    quartic = s2 * s2 + c2 * c2
    return math.sin(2.0 * phi) * phi_dot / (math.sqrt(2.0) * spec.j0_max * u * quartic**1.5)


def max_adiabaticity(spec: ProtocolSpec, bound: BoundState) -> float:
    """Peak adiabaticity, reached where the two pulses cross."""
    return math.pi / (spec.j0_max * coupling_profile_value(spec, bound) * spec.t_max)


def adiabatic_time_scale(spec: ProtocolSpec, bound: BoundState) -> float:
    """``pi / (J0 u0(N0 - l))``; adiabatic transfer needs ``t_max`` well above it."""
    return math.pi / (spec.j0_max * coupling_profile_value(spec, bound))
