"""Figures of merit: transfer fidelities, the dark-state operator fidelity,
and the minimal-transfer-time search."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dynamics import DensityMatrix, StateVector, Trajectory, evolve_effective, evolve_schrodinger
from .errors import AmbiguousEigenstateError, DomainError, NotFoundError, WrongMetricError
from .lattice import bound_state
from .protocol import ProtocolSpec, build_total_hamiltonian

__all__ = [
    "ReducedEndpointOperator",
    "transfer_fidelity_pure",
    "transfer_fidelity_mixed",
    "reduce_to_endpoints",
    "dark_state_overlap",
    "operator_fidelity",
    "final_fidelity",
    "minimal_transfer_time",
]

DEGENERACY_GUARD = 1e-12


@dataclass(frozen=True)
class ReducedEndpointOperator:
    """State of the endpoint dots after tracing out the medium.

    In the single-excitation sector the reduced state is block diagonal:
    the 2 x 2 ``block`` on {A, B} plus the probability ``vacuum_weight``
    that neither dot is occupied.
    """

    block: np.ndarray
    vacuum_weight: float


def transfer_fidelity_pure(traj: Trajectory) -> float:
    if traj.kind != "pure" or not isinstance(traj.final_state, StateVector):
        raise WrongMetricError("pure-state fidelity needs a Schrödinger trajectory; use transfer_fidelity_mixed")
    return float(abs(traj.final_state.amplitudes[-1]) ** 2)


def transfer_fidelity_mixed(rho_final: DensityMatrix | np.ndarray) -> float:
    entries = rho_final.entries if isinstance(rho_final, DensityMatrix) else np.asarray(rho_final)
    return float(entries[-1, -1].real)


def final_fidelity(traj: Trajectory) -> float:
    """Receiver population at ``t_max`` for either kind of trajectory."""
    if traj.kind == "pure":
        return transfer_fidelity_pure(traj)
    return transfer_fidelity_mixed(traj.final_state)


def reduce_to_endpoints(psi: StateVector | np.ndarray) -> ReducedEndpointOperator:
    amps = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    ends = np.array([amps[0], amps[-1]])
    block = np.outer(ends, ends.conj())
    return ReducedEndpointOperator(block, float(np.sum(np.abs(amps[1:-1]) ** 2)))


def dark_state_overlap(reduced: ReducedEndpointOperator) -> float:
    """Fidelity of ``reduced`` with the midpoint dark state ``(|A> - |B>)/sqrt(2)``.

    The dark state is pure, so the Uhlmann fidelity reduces to the
    expectation value ``<D0| rho_R |D0>``.
    """
    d0 = np.array([1.0, -1.0]) / math.sqrt(2.0)
    return float(np.real(d0 @ reduced.block @ d0))


def operator_fidelity(spec: ProtocolSpec) -> float:
    """Overlap of the midpoint first-excited state of the full model with the dark state.

    The full (clean) Hamiltonian at ``t_max / 2`` is diagonalized and the
    eigenvector of the second-lowest level is reduced to the endpoints.
    """
    h = build_total_hamiltonian(spec, spec.t_max / 2.0)
    values, vectors = np.linalg.eigh(h)
    if min(values[1] - values[0], values[2] - values[1]) < DEGENERACY_GUARD:
        raise AmbiguousEigenstateError(f"second level is degenerate within {DEGENERACY_GUARD:g}: {values[:3]}")
    return dark_state_overlap(reduce_to_endpoints(vectors[:, 1]))


def _fidelity_at(template: ProtocolSpec, method: str, dt: float | None) -> Callable[[float], float]:
    bound = bound_state(template.chain) if method == "effective" else None

    def fidelity(t_max: float) -> float:
        spec = template.replace(t_max=t_max)
        if method == "effective":
            return transfer_fidelity_pure(evolve_effective(spec, bound, n_samples=2, dt=dt))
        return transfer_fidelity_pure(evolve_schrodinger(spec, n_samples=2, dt=dt))

    return fidelity


def minimal_transfer_time(
    template: ProtocolSpec,
    target_error: float = 0.005,
    bounds: tuple[float, float] = (2.0, 60.0),
    tolerance: float = 0.25,
    method: str = "full",
    dt: float | None = None,
) -> float:
    """Shortest ``t_max`` with ``F >= 1 - target_error``, found by bisection.

    ``bounds`` and ``tolerance`` are in units of ``pi / J0``, as is the return
    value.  ``F(t_max)`` oscillates at short times, so a point only counts as
    meeting the target if the two points one and two tolerances later meet it
    as well.
    """
    if not 0 < target_error < 1:
        raise DomainError(f"target_error must be in (0, 1), got {target_error}")
    lo, hi = bounds
    if not 0 < lo < hi:
        raise DomainError(f"invalid search bounds {bounds}")
    unit = math.pi / template.j0_max
    threshold = 1.0 - target_error
    fidelity = _fidelity_at(template, method, dt)
    cache: dict[float, float] = {}

    def f(x: float) -> float:
        if x not in cache:
            cache[x] = fidelity(x * unit)
        return cache[x]

    def meets(x: float) -> bool:
        return all(f(x + k * tolerance) >= threshold for k in range(3))

    if not meets(hi):
        raise NotFoundError(
            f"F < {threshold} at the upper bound {hi} pi/J0 (best F seen {max(cache.values()):.6f})",
            best_value=max(cache.values()),
        )
    if meets(lo):
        return lo
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if meets(mid):
            hi = mid
        else:
            lo = mid
    return hi
