"""Pulse schedule, endpoint dots, coupling disorder and the full Hamiltonian.

The full single-excitation basis is ordered ``[A, 1, 2, ..., N, B]``: index 0
is the sender dot, index ``j`` is medium site ``j`` and index ``N + 1`` is
the receiver dot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidSpecError
from .lattice import ChainSpec, build_medium_hamiltonian

__all__ = [
    "ProtocolSpec",
    "DisorderRealization",
    "StaticHamiltonian",
    "pulse_amplitudes",
    "resonant_onsite_energy",
    "mixing_angle",
    "sample_disorder",
    "static_hamiltonian",
    "build_total_hamiltonian",
]

# 1 ulp of slack for grids computed as k * t_max / n
_T_SLACK = 1e-12


def resonant_onsite_energy(chain: ChainSpec) -> float:
    """Endpoint energy that makes A, B and the localized level degenerate."""
    xi = chain.xi
    return 2.0 * chain.hopping * math.sqrt(xi * xi + 1.0)


@dataclass(frozen=True)
class ProtocolSpec:
    """One transfer experiment.

    ``l`` is the attachment offset: A couples to site ``N0 - l`` and B to
    ``N0 + l``.  ``onsite_mu=None`` selects the resonant value.  ``reverse``
    swaps the pulse roles so the protocol carries B to A.
    """

    chain: ChainSpec
    l: int
    j0_max: float
    t_max: float
    onsite_mu: float | None = None
    reverse: bool = False

    def __post_init__(self):
        if isinstance(self.l, bool) or int(self.l) != self.l:
            raise InvalidSpecError(f"l must be an integer, got {self.l!r}")
        object.__setattr__(self, "l", int(self.l))
        n0 = self.chain.defect_site
        if not 1 <= self.l <= n0 - 1:
            raise InvalidSpecError(f"l must lie in [1, {n0 - 1}] for N={self.chain.n_sites}, got {self.l}")
        if not (math.isfinite(self.j0_max) and self.j0_max > 0):
            raise InvalidSpecError(f"j0_max must be > 0, got {self.j0_max}")
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise InvalidSpecError(f"t_max must be > 0, got {self.t_max}")
        if self.onsite_mu is not None and not math.isfinite(self.onsite_mu):
            raise InvalidSpecError("onsite_mu must be finite")

    @classmethod
    def from_distance(cls, chain: ChainSpec, distance: int, j0_max: float, t_max: float, **kw) -> "ProtocolSpec":
        if int(distance) != distance or distance < 5 or distance % 2 == 0:
            raise InvalidSpecError(f"distance must be an odd integer >= 5, got {distance}")
        return cls(chain, (int(distance) - 3) // 2, j0_max, t_max, **kw)

    @property
    def distance(self) -> int:
        return 2 * self.l + 3

    @property
    def mu(self) -> float:
        if self.onsite_mu is not None:
            return self.onsite_mu
        return resonant_onsite_energy(self.chain)

    @property
    def dim(self) -> int:
        return self.chain.n_sites + 2

    @property
    def site_a(self) -> int:
        """Medium site (1-based, equal to its full-basis index) coupled to A."""
        return self.chain.defect_site - self.l

    @property
    def site_b(self) -> int:
        return self.chain.defect_site + self.l

    def replace(self, **changes) -> "ProtocolSpec":
        from dataclasses import replace

        return replace(self, **changes)


def _check_time(spec: ProtocolSpec, t: float) -> float:
    if not (-_T_SLACK * spec.t_max <= t <= spec.t_max * (1 + _T_SLACK)):
        raise DomainError(f"t={t} outside [0, t_max={spec.t_max}]")
    return min(max(t, 0.0), spec.t_max)


def pulse_amplitudes(spec: ProtocolSpec, t: float) -> tuple[float, float]:
    """Sender and receiver tunnelling ``(J_A, J_B)`` at time ``t``.

    The receiver pulse comes first (counter-intuitive order) unless the spec
    is reversed.
    """
    t = _check_time(spec, t)
    s = math.sin(math.pi * t / (2.0 * spec.t_max)) ** 2
    rising, falling = spec.j0_max * s, spec.j0_max * (1.0 - s)
    if spec.reverse:
        return falling, rising
    return rising, falling


def mixing_angle(spec: ProtocolSpec, t: float) -> float:
    j_a, j_b = pulse_amplitudes(spec, t)
    # atan2 supplies the arctan(inf) = pi/2 limit at the J_B = 0 endpoint
    return math.atan2(j_a, j_b)


@dataclass(frozen=True)
class DisorderRealization:
    """Quenched relative offsets on the N-1 medium bonds.

    ``epsilons`` come from NumPy's PCG64 generator seeded with ``seed``;
    the bond amplitudes are ``J (1 + delta * eps_j)``.
    """

    delta: float
    epsilons: np.ndarray = field(repr=False)
    seed: int

    def hoppings(self, chain: ChainSpec) -> np.ndarray:
        if self.epsilons.shape != (chain.n_sites - 1,):
            raise InvalidSpecError("disorder realization does not match the chain length")
        return chain.hopping * (1.0 + self.delta * self.epsilons)


def sample_disorder(delta: float, chain: ChainSpec, seed: int) -> DisorderRealization:
    if not math.isfinite(delta) or delta < 0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    eps = rng.uniform(-1.0, 1.0, size=chain.n_sites - 1)
    eps.setflags(write=False)
    return DisorderRealization(float(delta), eps, int(seed))


@dataclass(frozen=True)
class StaticHamiltonian:
    """Time-independent part of the full Hamiltonian plus the pulse ports.

    The full operator is ``matrix - J_A(t) X_A - J_B(t) X_B`` where ``X_A``
    is the symmetric unit hop between index 0 and ``port_a``, and ``X_B``
    the one between index ``dim - 1`` and ``port_b``.
    """

    matrix: np.ndarray
    port_a: int
    port_b: int


def static_hamiltonian(spec: ProtocolSpec, disorder: DisorderRealization | None = None) -> StaticHamiltonian:
    chain = spec.chain
    n = chain.n_sites
    hoppings = None if disorder is None else disorder.hoppings(chain)
    h = np.zeros((n + 2, n + 2))
    h[1 : n + 1, 1 : n + 1] = build_medium_hamiltonian(chain, hoppings)
    h[0, 0] = -spec.mu
    h[n + 1, n + 1] = -spec.mu
    return StaticHamiltonian(h, spec.site_a, spec.site_b)


def build_total_hamiltonian(
    spec: ProtocolSpec, t: float, disorder: DisorderRealization | None = None
) -> np.ndarray:
    """Dense complex Hermitian ``(N+2) x (N+2)`` Hamiltonian at time ``t``."""
    j_a, j_b = pulse_amplitudes(spec, t)
    static = static_hamiltonian(spec, disorder)
    h = static.matrix.astype(complex)
    last = spec.dim - 1
    h[0, static.port_a] = h[static.port_a, 0] = -j_a
    h[last, static.port_b] = h[static.port_b, last] = -j_b
    return h
