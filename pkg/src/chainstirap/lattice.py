"""Tight-binding medium chain with a single diagonal defect at its centre.

Sites are numbered 1..N in the physics but stored 0-based in arrays, so
site ``j`` lives at index ``j - 1`` of every profile or eigenvector returned
here.  Energies are in units of the hopping ``J``.

The analytic spectrum (wavevector roots plus the localized state) and the
dense numerical spectrum are computed independently so each can check the
other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidSpecError, NoBoundStateError, SolverFailure

__all__ = [
    "ChainSpec",
    "BoundState",
    "WavevectorRoot",
    "WavevectorSet",
    "MediumSpectrum",
    "build_medium_hamiltonian",
    "bound_state",
    "energy_gap",
    "solve_wavevectors",
    "diagonalize_medium",
]

_ROOT_XTOL = 1e-14


@dataclass(frozen=True)
class ChainSpec:
    """Static description of the defected medium chain."""

    n_sites: int
    defect_energy: float
    hopping: float = 1.0

    def __post_init__(self):
        if isinstance(self.n_sites, bool) or int(self.n_sites) != self.n_sites:
            raise InvalidSpecError(f"n_sites must be an integer, got {self.n_sites!r}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        if self.n_sites < 3 or self.n_sites % 2 == 0:
            raise InvalidSpecError(f"n_sites must be odd and >= 3, got {self.n_sites}")
        if not math.isfinite(self.defect_energy) or self.defect_energy < 0:
            raise InvalidSpecError(f"defect_energy must be >= 0, got {self.defect_energy}")
        if not math.isfinite(self.hopping) or self.hopping <= 0:
            raise InvalidSpecError(f"hopping must be > 0, got {self.hopping}")

    @property
    def defect_site(self) -> int:
        """1-based index N0 of the central defect."""
        return (self.n_sites + 1) // 2

    @property
    def xi(self) -> float:
        return self.defect_energy / (2.0 * self.hopping)


@dataclass(frozen=True)
class BoundState:
    """Thermodynamic-limit localized state of the medium."""

    q: float
    energy: float
    norm_lambda: float
    profile: np.ndarray = field(repr=False)

    def amplitude(self, site: int) -> float:
        """Profile value at 1-based ``site``."""
        return float(self.profile[site - 1])


@dataclass(frozen=True)
class WavevectorRoot:
    k: float
    parity: Literal["odd", "even"]
    energy: float


@dataclass(frozen=True)
class WavevectorSet:
    """Real wavevector roots plus the finite-chain imaginary branch.

    ``bound_q`` solves the imaginary-axis continuation of the even-parity
    condition, ``coth(q N0) sinh q = xi``, for the actual finite chain; it
    tends to ``asinh(xi)`` as N grows.
    """

    roots: tuple[WavevectorRoot, ...]
    bound_q: float
    bound_energy: float

    @property
    def energies(self) -> np.ndarray:
        return np.sort(np.array([r.energy for r in self.roots]))

    def all_energies(self) -> np.ndarray:
        """Sorted real-root energies together with the bound energy."""
        return np.sort(np.append(self.energies, self.bound_energy))


@dataclass(frozen=True)
class MediumSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, sign-fixed

    @property
    def finite_gap(self) -> float:
        """Gap between the two lowest levels of the finite chain."""
        return float(self.eigenvalues[1] - self.eigenvalues[0])


def build_medium_hamiltonian(spec: ChainSpec, hoppings: np.ndarray | None = None) -> np.ndarray:
    """Real symmetric N x N medium Hamiltonian.

    ``hoppings`` optionally replaces the N-1 uniform bond amplitudes (used
    for quenched coupling disorder); each bond enters with a minus sign.
    """
    n = spec.n_sites
    if hoppings is None:
        bonds = np.full(n - 1, spec.hopping)
    else:
        bonds = np.asarray(hoppings, dtype=float)
        if bonds.shape != (n - 1,):
            raise InvalidSpecError(f"expected {n - 1} hoppings, got shape {bonds.shape}")
    h = np.zeros((n, n))
    idx = np.arange(n - 1)
    h[idx, idx + 1] = -bonds
    h[idx + 1, idx] = -bonds
    h[spec.defect_site - 1, spec.defect_site - 1] = -spec.defect_energy
    return h


def bound_state(spec: ChainSpec) -> BoundState:
    if spec.defect_energy == 0:
        raise NoBoundStateError("defect_energy = 0: the clean chain has no localized state")
    xi = spec.xi
    root = math.sqrt(xi * xi + 1.0)
    q = math.log(xi + root)
    norm_lambda = root / xi  # cosh q / sinh q
    j = np.arange(1, spec.n_sites + 1)
    profile = norm_lambda ** -0.5 * np.exp(-q * np.abs(spec.defect_site - j))
    return BoundState(q=q, energy=-2.0 * spec.hopping * root, norm_lambda=norm_lambda, profile=profile)


def energy_gap(spec: ChainSpec) -> float:
    """Thermodynamic-limit gap between the localized level and the band edge."""
    xi = spec.xi
    return 2.0 * spec.hopping * (math.sqrt(xi * xi + 1.0) - 1.0)


def _even_condition(k: float, n0: int, xi: float) -> float:
    # cot(k N0) sin k - xi, multiplied through by sin(k N0) to remove the poles
    return math.cos(k * n0) * math.sin(k) - xi * math.sin(k * n0)


def _imaginary_condition(q: float, n0: int, xi: float) -> float:
    # continuation k = i q of the even condition, coth(q N0) sinh q = xi,
    # divided by coth(q N0) to stay finite
    return math.sinh(q) - xi * math.tanh(q * n0)


def solve_wavevectors(spec: ChainSpec) -> WavevectorSet:
    """Solve the mirror-symmetric wavevector conditions of the defected chain.

    Antisymmetric (odd) states vanish on the defect and are unaffected by it:
    ``sin(k N0) = 0``, i.e. ``k = m pi / N0``.  Symmetric (even) states solve
    ``cot(k N0) sin k = xi``; (0, pi) is cut at the poles ``k N0 = m pi`` and
    each bracket is searched for one root.  For ``xi N0 > 1`` (required) the
    lowest bracket's root moves to the imaginary branch, the bound state.
    """
    if spec.defect_energy <= 0:
        raise NoBoundStateError("wavevector analysis requires defect_energy > 0")
    n0 = spec.defect_site
    xi = spec.xi
    if xi * n0 <= 1.0:
        raise NoBoundStateError(
            f"xi * N0 = {xi * n0:.4g} <= 1: the finite chain is too short to hold a localized state"
        )
    two_j = 2.0 * spec.hopping
    roots: list[WavevectorRoot] = []

    for m in range(1, n0):
        k = m * math.pi / n0
        roots.append(WavevectorRoot(k, "odd", -two_j * math.cos(k)))

    width = math.pi / n0
    for m in range(n0):
        lo, hi = m * width, (m + 1) * width
        if m == 0:
            # g(k) ~ k (1 - xi N0) near 0: this root has moved to the imaginary branch
            continue
        if m == n0 - 1:
            hi = math.pi - width * 1e-6
        f_lo = _even_condition(lo, n0, xi)
        f_hi = _even_condition(hi, n0, xi)
        if f_lo == 0.0:
            k = lo
        elif f_lo * f_hi > 0:
            continue
        else:
            k = brentq(_even_condition, lo, hi, args=(n0, xi), xtol=_ROOT_XTOL, rtol=4 * np.finfo(float).eps)
        roots.append(WavevectorRoot(k, "even", -two_j * math.cos(k)))

    if len(roots) != spec.n_sites - 1:
        raise SolverFailure(
            f"found {len(roots)} real wavevectors, expected {spec.n_sites - 1} "
            f"(xi * N0 = {xi * n0:.4g}; a localized state needs xi * N0 > 1)"
        )

    # imaginary branch: negative near 0+ (xi N0 > 1), positive just above asinh(xi);
    # for long chains the root sits within rounding of asinh(xi), hence the nudge
    q_hi = math.asinh(xi) * (1.0 + 1e-9) + 1e-12
    q_lo = q_hi
    while _imaginary_condition(q_lo, n0, xi) >= 0:
        q_lo *= 0.5
    q = brentq(_imaginary_condition, q_lo, q_hi, args=(n0, xi), xtol=_ROOT_XTOL, rtol=4 * np.finfo(float).eps)
    roots.sort(key=lambda r: r.k)
    return WavevectorSet(tuple(roots), bound_q=q, bound_energy=-two_j * math.cosh(q))


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for col in range(out.shape[1]):
        v = out[:, col]
        mags = np.abs(v)
        # first component within rounding of the maximum; ties occur for antisymmetric states
        lead = int(np.argmax(mags >= mags.max() * (1 - 1e-9)))
        if v[lead] < 0:
            out[:, col] = -v
    return out


def diagonalize_medium(spec: ChainSpec, hoppings: np.ndarray | None = None) -> MediumSpectrum:
    h = build_medium_hamiltonian(spec, hoppings)
    values, vectors = np.linalg.eigh(h)
    return MediumSpectrum(eigenvalues=values, eigenvectors=_fix_signs(vectors))
