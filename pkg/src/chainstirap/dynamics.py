"""Time evolution: full and three-level Schrödinger equations, and the
site-basis dephasing master equation.

All three integrators use classical fixed-step RK4 (compiled in
:mod:`chainstirap._kernels`) with the default step
``min(0.02, t_max / 20000)``, shrunk so that an integer number of steps
separates consecutive sample times.

Pure-state runs are integrated in a frame shifted by the resonant energy
``-mu`` (a multiple of the identity), and the phase ``exp(i mu t)`` is put
back on every reported state.  The shift only changes the global phase, so
relative phases between the dark manifold and band states are untouched,
but it moves the populated levels to zero frequency where RK4 is nearly
exactly norm preserving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import DomainError, IntegrationError
from .lattice import BoundState, build_medium_hamiltonian
from .protocol import DisorderRealization, ProtocolSpec, static_hamiltonian
from .effective import coupling_profile_value

__all__ = [
    "StateVector",
    "DensityMatrix",
    "Trajectory",
    "default_step",
    "basis_state",
    "evolve_schrodinger",
    "evolve_effective",
    "evolve_master",
]

NORM_TOL = 1e-9
STEP_HALVING_TOL = 1e-8
POSITIVITY_ABORT = -1e-6
DEFAULT_SAMPLES = 501


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", np.asarray(self.amplitudes, dtype=complex))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "entries", np.asarray(self.entries, dtype=complex))

    @classmethod
    def pure(cls, psi: StateVector | np.ndarray, time: float | None = None) -> "DensityMatrix":
        if isinstance(psi, StateVector):
            vec, t = psi.amplitudes, psi.time
        else:
            vec, t = np.asarray(psi, dtype=complex), 0.0
        return cls(np.outer(vec, vec.conj()), t if time is None else time)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    @property
    def hermiticity_error(self) -> float:
        return float(np.abs(self.entries - self.entries.conj().T).max())

    @property
    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def validate(self, trace_tol: float = NORM_TOL) -> None:
        if self.hermiticity_error > 1e-10:
            raise DomainError(f"density matrix is not Hermitian (error {self.hermiticity_error:.2e})")
        if abs(self.trace - 1.0) > trace_tol:
            raise DomainError(f"density matrix trace {self.trace} != 1")
        if self.min_eigenvalue < -1e-8:
            raise DomainError(f"density matrix has negative eigenvalue {self.min_eigenvalue:.2e}")


@dataclass(frozen=True)
class Trajectory:
    """Sampled populations plus the final state of one integration.

    ``pop_defect`` is the weight on the localized medium mode (the ground
    state of the possibly disordered medium for full-space runs, ``|c_0|^2``
    in the three-level model); ``pop_medium`` is the total weight on the
    medium sites.
    """

    kind: Literal["pure", "mixed"]
    basis: Literal["full", "effective"]
    times: np.ndarray
    pop_a: np.ndarray
    pop_b: np.ndarray
    pop_defect: np.ndarray
    pop_medium: np.ndarray
    final_state: StateVector | DensityMatrix
    metadata: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return self.metadata["dt"]


def default_step(t_max: float) -> float:
    return min(0.02, t_max / 20000.0)


def basis_state(dim: int, index: int) -> StateVector:
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return StateVector(amps)


def _time_grid(t_max: float, n_samples: int, dt: float | None) -> tuple[np.ndarray, int, float]:
    if n_samples < 2:
        raise DomainError("n_samples must be >= 2")
    step = default_step(t_max) if dt is None else dt
    if not step > 0:
        raise DomainError(f"integrator step must be > 0, got {step}")
    interval = t_max / (n_samples - 1)
    per_sample = max(1, math.ceil(interval / step * (1 - 1e-12)))
    return np.linspace(0.0, t_max, n_samples), per_sample, interval / per_sample


def _csr(matrix: np.ndarray):
    m = sp.csr_matrix(matrix.astype(complex))
    m.sort_indices()
    return m.indptr.astype(np.int64), m.indices.astype(np.int64), m.data


def _initial_vector(initial, dim: int) -> np.ndarray:
    if initial is None:
        return basis_state(dim, 0).amplitudes
    amps = initial.amplitudes if isinstance(initial, StateVector) else np.asarray(initial, dtype=complex)
    if amps.shape != (dim,):
        raise DomainError(f"initial state must have {dim} amplitudes, got shape {amps.shape}")
    if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
        raise DomainError(f"initial state is not normalized (norm {np.linalg.norm(amps):.12g})")
    return amps.astype(complex)


def _defect_mode(spec: ProtocolSpec, disorder: DisorderRealization | None) -> np.ndarray:
    """Ground state of the medium embedded in the full basis."""
    hoppings = None if disorder is None else disorder.hoppings(spec.chain)
    _, vecs = np.linalg.eigh(build_medium_hamiltonian(spec.chain, hoppings))
    mode = np.zeros(spec.dim)
    mode[1:-1] = vecs[:, 0]
    return mode


def _metadata(spec: ProtocolSpec, disorder, dt: float, **extra) -> dict:
    meta = {
        "n_sites": spec.chain.n_sites,
        "mu0": spec.chain.defect_energy,
        "j0": spec.j0_max,
        "t_max": spec.t_max,
        "l": spec.l,
        "distance": spec.distance,
        "mu": spec.mu,
        "reverse": spec.reverse,
        "delta": 0.0 if disorder is None else disorder.delta,
        "seed": None if disorder is None else disorder.seed,
        "dt": dt,
    }
    meta.update(extra)
    return meta


def _run_pure(static: np.ndarray, port_a: int, port_b: int, j_scale: float, spec: ProtocolSpec,
              psi0: np.ndarray, n_samples: int, dt: float | None):
    times, per_sample, h = _time_grid(spec.t_max, n_samples, dt)
    e_ref = -spec.mu
    indptr, indices, data = _csr(static - e_ref * np.eye(static.shape[0]))
    frame = _kernels.propagate_pure(
        indptr, indices, data, port_a, port_b, j_scale, spec.t_max, spec.reverse,
        psi0, n_samples, per_sample, h,
    )
    states = frame * np.exp(-1j * e_ref * times)[:, None]
    return times, states, h


def evolve_schrodinger(
    spec: ProtocolSpec,
    disorder: DisorderRealization | None = None,
    initial: StateVector | np.ndarray | None = None,
    n_samples: int = DEFAULT_SAMPLES,
    dt: float | None = None,
    check_step: bool = False,
) -> Trajectory:
    """Unitary evolution of the full ``(N+2)``-site model, starting in ``|A>`` by default.

    With ``check_step`` the run is repeated at half the step and an
    :class:`IntegrationError` is raised if the final receiver population
    moves by more than ``STEP_HALVING_TOL``.
    """
    psi0 = _initial_vector(initial, spec.dim)
    st = static_hamiltonian(spec, disorder)
    times, states, h = _run_pure(st.matrix, st.port_a, st.port_b, spec.j0_max, spec, psi0, n_samples, dt)
    pops = np.abs(states) ** 2
    mode = _defect_mode(spec, disorder)
    norms = np.sqrt(pops.sum(axis=1))
    diagnostics = {"norm_drift": float(np.abs(norms - 1.0).max())}
    if check_step:
        _, half, _ = _run_pure(st.matrix, st.port_a, st.port_b, spec.j0_max, spec, psi0, 2, h / 2)
        delta = abs(abs(half[-1, -1]) ** 2 - pops[-1, -1])
        diagnostics["step_halving_delta"] = float(delta)
        if delta > STEP_HALVING_TOL:
            raise IntegrationError(f"halving the step changed the final fidelity by {delta:.2e}")
    return Trajectory(
        kind="pure",
        basis="full",
        times=times,
        pop_a=pops[:, 0],
        pop_b=pops[:, -1],
        pop_defect=np.abs(states @ mode) ** 2,
        pop_medium=pops[:, 1:-1].sum(axis=1),
        final_state=StateVector(states[-1], spec.t_max),
        metadata=_metadata(spec, disorder, h, gamma=0.0, method="full"),
        diagnostics=diagnostics,
    )


def evolve_effective(
    spec: ProtocolSpec,
    bound: BoundState,
    initial: StateVector | np.ndarray | None = None,
    n_samples: int = DEFAULT_SAMPLES,
    dt: float | None = None,
) -> Trajectory:
    """Three-level amplitude equations in the basis ``(A, lambda_0, B)``."""
    psi0 = _initial_vector(initial, 3)
    u = coupling_profile_value(spec, bound)
    static = -spec.mu * np.eye(3)
    # both pulses couple to the bus mode at index 1
    times, states, h = _run_pure(static, 1, 1, spec.j0_max * u, spec, psi0, n_samples, dt)
    pops = np.abs(states) ** 2
    norms = np.sqrt(pops.sum(axis=1))
    return Trajectory(
        kind="pure",
        basis="effective",
        times=times,
        pop_a=pops[:, 0],
        pop_b=pops[:, 2],
        pop_defect=pops[:, 1],
        pop_medium=pops[:, 1],
        final_state=StateVector(states[-1], spec.t_max),
        metadata=_metadata(spec, None, h, gamma=0.0, method="effective", profile_value=u),
        diagnostics={"norm_drift": float(np.abs(norms - 1.0).max())},
    )


def _run_master(spec, disorder, gamma, rho0, n_samples, dt):
    times, per_sample, h = _time_grid(spec.t_max, n_samples, dt)
    st = static_hamiltonian(spec, disorder)
    indptr, indices, data = _csr(st.matrix)
    rhos = _kernels.propagate_master(
        indptr, indices, data, st.port_a, st.port_b, spec.j0_max, spec.t_max, spec.reverse,
        float(gamma), rho0, n_samples, per_sample, h,
    )
    return times, rhos, h


def evolve_master(
    spec: ProtocolSpec,
    disorder: DisorderRealization | None = None,
    gamma: float = 0.0,
    initial: DensityMatrix | np.ndarray | None = None,
    n_samples: int = DEFAULT_SAMPLES,
    dt: float | None = None,
    check_step: bool = False,
) -> Trajectory:
    """Integrate ``drho/dt = -i[H, rho] - gamma (rho - diag rho)`` in the site basis.

    Positivity is monitored at every sample time; a minimum eigenvalue below
    ``POSITIVITY_ABORT`` raises :class:`IntegrationError`.
    """
    if not math.isfinite(gamma) or gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    if initial is None:
        rho0 = np.zeros((spec.dim, spec.dim), dtype=complex)
        rho0[0, 0] = 1.0
    else:
        dm = initial if isinstance(initial, DensityMatrix) else DensityMatrix(initial)
        if dm.entries.shape != (spec.dim, spec.dim):
            raise DomainError(f"initial density matrix must be {spec.dim} x {spec.dim}")
        dm.validate()
        rho0 = dm.entries.copy()

    times, rhos, h = _run_master(spec, disorder, gamma, rho0, n_samples, dt)
    pops = np.real(np.einsum("kii->ki", rhos))
    herm = 0.5 * (rhos + np.conj(np.swapaxes(rhos, 1, 2)))
    min_eigs = np.linalg.eigvalsh(herm)[:, 0]
    diagnostics = {
        "trace_drift": float(np.abs(pops.sum(axis=1) - 1.0).max()),
        "hermiticity_error": float(np.abs(rhos - np.conj(np.swapaxes(rhos, 1, 2))).max()),
        "min_eigenvalue": float(min_eigs.min()),
    }
    if diagnostics["min_eigenvalue"] < POSITIVITY_ABORT:
        raise IntegrationError(f"density matrix lost positivity (min eigenvalue {diagnostics['min_eigenvalue']:.2e})")
    if check_step:
        _, half, _ = _run_master(spec, disorder, gamma, rho0, 2, h / 2)
        delta = abs(half[-1, -1, -1].real - pops[-1, -1])
        diagnostics["step_halving_delta"] = float(delta)
        if delta > STEP_HALVING_TOL:
            raise IntegrationError(f"halving the step changed the final fidelity by {delta:.2e}")
    mode = _defect_mode(spec, disorder)
    return Trajectory(
        kind="mixed",
        basis="full",
        times=times,
        pop_a=pops[:, 0],
        pop_b=pops[:, -1],
        pop_defect=np.real(np.einsum("i,kij,j->k", mode, rhos, mode)),
        pop_medium=pops[:, 1:-1].sum(axis=1),
        final_state=DensityMatrix(rhos[-1], spec.t_max),
        metadata=_metadata(spec, disorder, h, gamma=float(gamma), method="master"),
        diagnostics=diagnostics,
    )
