"""Experiment configuration, sweep orchestration and record serialization.

Each ``run_*`` function turns an :class:`ExperimentConfig` into a list of
:class:`SweepRecord` rows.  Sweep points are independent tasks; with
``jobs > 1`` they run on a thread pool (the integration kernels release the
GIL) and the merged rows are stably sorted by their parameters, so output
does not depend on scheduling or on the order of the input grids.

User-facing times (``t_max``, ``t_max_grid``) are in units of ``pi / J0``
and dephasing rates (``gamma``) in units of ``J0``, matching the axes used
for the transfer-fidelity figures.  Records carry both ``t_max`` (in 1/J)
and ``t_max_pi_over_j0``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Iterable

import numpy as np

from .dynamics import evolve_effective, evolve_master, evolve_schrodinger
from .effective import adiabaticity, adiabatic_time_scale, max_adiabaticity
from .errors import ConfigError, NotFoundError
from .lattice import (
    ChainSpec,
    bound_state,
    diagonalize_medium,
    energy_gap,
    solve_wavevectors,
)
from .metrics import final_fidelity, minimal_transfer_time, operator_fidelity
from .protocol import ProtocolSpec, build_total_hamiltonian, sample_disorder

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "SweepRecord",
    "run_experiment",
    "run_spectrum",
    "run_eigen_flow",
    "run_operator_fidelity",
    "run_adiabaticity",
    "run_evolve",
    "run_fidelity_sweep",
    "run_robustness",
    "run_min_time_vs_distance",
    "derive_seeds",
    "records_to_csv",
    "records_to_json",
    "records_from_json",
]

OPERATOR_FIDELITY_TARGET = 0.995


@dataclass
class ExperimentConfig:
    """Flat experiment description; list-valued fields left as ``None`` take
    the per-experiment default grid.

    ``j0`` is absolute (units of J); when it is ``None`` the coupling is
    ``j0_ratio * mu0``, which gives the headline J0 = 0.1 J at mu0 = 1 J.
    """

    experiment: str = "evolve"
    n_sites: int = 39
    mu0: list[float] | None = None
    j0: float | None = None
    j0_ratio: list[float] | None = None
    distance: list[int] | None = None
    t_max: float = 19.0
    t_max_grid: list[float] | None = None
    gamma: list[float] | None = None
    delta: list[float] | None = None
    realizations: int = 100
    seed: int = 0
    jobs: int = 1
    method: str | None = None
    n_samples: int = 501
    format: str = "csv"
    out: str | None = None
    timestamp: bool = True

    KEYS = (
        "experiment", "n_sites", "mu0", "j0", "j0_ratio", "distance", "t_max", "t_max_grid",
        "gamma", "delta", "realizations", "seed", "jobs", "method", "n_samples", "format", "out",
        "timestamp",
    )
    LIST_KEYS = {"mu0": float, "j0_ratio": float, "distance": int, "t_max_grid": float, "gamma": float, "delta": float}

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> "ExperimentConfig":
        """Build a config from flat key/value pairs, rejecting unknown keys.

        ``d`` is accepted for ``distance`` and ``l`` (attachment offset) is
        converted with ``d = 2 l + 3``; ``no_timestamp`` negates ``timestamp``.
        """
        data = {str(k).replace("-", "_"): v for k, v in data.items()}
        if "d" in data:
            data["distance"] = data.pop("d")
        if "n_realizations" in data:
            data["realizations"] = data.pop("n_realizations")
        if "l" in data:
            if "distance" in data:
                raise ConfigError("give either l or distance, not both")
            data["distance"] = [2 * int(x) + 3 for x in _as_list(data.pop("l"), int, "l")]
        if "no_timestamp" in data:
            data["timestamp"] = not _as_bool(data.pop("no_timestamp"), "no_timestamp")
        unknown = sorted(set(data) - set(cls.KEYS))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        kwargs: dict[str, Any] = {}
        for key, value in data.items():
            if value is None:
                kwargs[key] = None
            elif key in cls.LIST_KEYS:
                kwargs[key] = _as_list(value, cls.LIST_KEYS[key], key)
            elif key in ("n_sites", "realizations", "seed", "jobs", "n_samples"):
                kwargs[key] = _as_int(value, key)
            elif key in ("t_max", "j0"):
                kwargs[key] = _as_float(value, key)
            elif key == "timestamp":
                kwargs[key] = _as_bool(value, key)
            else:
                kwargs[key] = str(value)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.method is not None and self.method not in ("full", "effective", "both", "master"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.n_samples < 2:
            raise ConfigError("n_samples must be >= 2")
        if not self.t_max > 0:
            raise ConfigError("t_max must be > 0")
        if self.j0 is not None and not self.j0 > 0:
            raise ConfigError("j0 must be > 0")
        for name in ("gamma", "delta"):
            if any(v < 0 for v in getattr(self, name) or ()):
                raise ConfigError(f"{name} values must be >= 0")
        if any(v <= 0 for v in self.t_max_grid or ()):
            raise ConfigError("t_max_grid values must be > 0")
        if any(v <= 0 for v in self.j0_ratio or ()):
            raise ConfigError("j0_ratio values must be > 0")

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    # per-experiment resolution of unset grids

    def mu0_values(self, default: Iterable[float] = (1.0,)) -> list[float]:
        return list(self.mu0) if self.mu0 is not None else list(default)

    def distances(self, default: Iterable[int] = (5,)) -> list[int]:
        return list(self.distance) if self.distance is not None else list(default)

    def ratios(self, default: Iterable[float] = (0.1,)) -> list[float]:
        return list(self.j0_ratio) if self.j0_ratio is not None else list(default)

    def coupling(self, mu0: float) -> float:
        if self.j0 is not None:
            return self.j0
        ratios = self.ratios()
        if len(ratios) != 1:
            raise ConfigError("several j0_ratio values given; set j0 explicitly for this experiment")
        if mu0 <= 0:
            raise ConfigError("mu0 = 0 needs an explicit j0")
        return ratios[0] * mu0

    def scalar(self, name: str, default):
        values = getattr(self, name)
        if values is None:
            return default
        if len(values) != 1:
            raise ConfigError(f"experiment {self.experiment!r} takes a single {name} value, got {values}")
        return values[0]

    def protocol(self, mu0: float | None = None, distance: int | None = None, t_max_units: float | None = None) -> ProtocolSpec:
        mu0 = self.scalar("mu0", 1.0) if mu0 is None else mu0
        distance = self.scalar("distance", 5) if distance is None else distance
        j0 = self.coupling(mu0)
        t_units = self.t_max if t_max_units is None else t_max_units
        return ProtocolSpec.from_distance(ChainSpec(self.n_sites, mu0), distance, j0, t_units * math.pi / j0)


def _as_list(value, kind, key) -> list:
    if isinstance(value, str):
        items = [v for v in value.replace(";", ",").split(",") if v.strip()]
    elif isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [value]
    try:
        out = [_as_int(v, key) if kind is int else float(v) for v in items]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    if not out:
        raise ConfigError(f"{key} must not be empty")
    return out


def _as_int(value, key) -> int:
    try:
        f = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
    if not f.is_integer():
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return int(f)


def _as_float(value, key) -> float:
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a number, got {value!r}") from exc


def _as_bool(value, key) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {value!r}")


@dataclass
class SweepRecord:
    params: dict[str, Any]
    metric: str
    value: float
    seed: int | None = None
    dt: float | None = None
    wall_time: float | None = None

    def to_dict(self) -> dict[str, Any]:
        row = dict(self.params)
        row.update(metric=self.metric, value=self.value, seed=self.seed, dt=self.dt, wall_time=self.wall_time)
        return row

    @classmethod
    def from_dict(cls, row: dict[str, Any]) -> "SweepRecord":
        row = dict(row)
        kw = {k: row.pop(k, None) for k in ("metric", "value", "seed", "dt", "wall_time")}
        return cls(params=row, **kw)


def derive_seeds(base_seed: int, count: int) -> list[int]:
    """Independent 64-bit seeds for ensemble members, reproducible from ``base_seed``."""
    children = np.random.SeedSequence(int(base_seed)).spawn(count)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


# ---------------------------------------------------------------- execution

Task = Callable[[], list[SweepRecord]]


def _timed(task: Task) -> list[SweepRecord]:
    start = time.perf_counter()
    records = task()
    elapsed = time.perf_counter() - start
    for r in records:
        r.wall_time = elapsed
    return records


def _execute(tasks: list[Task], jobs: int) -> list[SweepRecord]:
    if jobs <= 1 or len(tasks) <= 1:
        chunks = [_timed(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_timed, tasks))
    records = [r for chunk in chunks for r in chunk]
    return sort_records(records)


def _sort_key(value):
    if value is None:
        return (0, 0.0, "")
    if isinstance(value, bool):
        return (1, float(value), "")
    if isinstance(value, (int, float)):
        return (1, float(value), "")
    return (2, 0.0, str(value))


def sort_records(records: list[SweepRecord]) -> list[SweepRecord]:
    columns = _param_columns(records)
    return sorted(
        records,
        key=lambda r: tuple(_sort_key(r.params.get(c)) for c in columns)
        + (_sort_key(r.metric), _sort_key(r.seed)),
    )


def _base_params(spec: ProtocolSpec, experiment: str) -> dict[str, Any]:
    return {
        "experiment": experiment,
        "n_sites": spec.chain.n_sites,
        "mu0": spec.chain.defect_energy,
        "j0": spec.j0_max,
        "distance": spec.distance,
        "l": spec.l,
        "t_max": spec.t_max,
        "t_max_pi_over_j0": spec.t_max * spec.j0_max / math.pi,
    }


# ---------------------------------------------------------------- spectrum


def _chain_records(chain: ChainSpec) -> list[SweepRecord]:
    params = {"experiment": "spectrum", "n_sites": chain.n_sites, "mu0": chain.defect_energy}
    bound = bound_state(chain)
    waves = solve_wavevectors(chain)
    numeric = diagonalize_medium(chain)
    rows = [
        SweepRecord(dict(params), "bound_q", bound.q),
        SweepRecord(dict(params), "bound_energy_analytic", bound.energy),
        SweepRecord(dict(params), "bound_energy_finite_chain", waves.bound_energy),
        SweepRecord(dict(params), "bound_energy_numeric", float(numeric.eigenvalues[0])),
        SweepRecord(dict(params), "norm_lambda", bound.norm_lambda),
        SweepRecord(dict(params), "energy_gap_analytic", energy_gap(chain)),
        SweepRecord(dict(params), "energy_gap_numeric", numeric.finite_gap),
        SweepRecord(dict(params), "root_count", float(len(waves.roots))),
        SweepRecord(
            dict(params), "max_spectrum_deviation",
            float(np.abs(waves.all_energies()[1:] - numeric.eigenvalues[1:]).max()),
        ),
    ]
    for i, root in enumerate(waves.roots):
        p = dict(params, root_index=i, parity=root.parity)
        rows.append(SweepRecord(dict(p), "wavevector_k", root.k))
        rows.append(SweepRecord(dict(p), "root_energy", root.energy))
    return rows


def _flow_records(spec: ProtocolSpec, n_samples: int, experiment: str) -> list[SweepRecord]:
    rows = []
    base = _base_params(spec, experiment)
    for t in np.linspace(0.0, spec.t_max, n_samples):
        values = np.linalg.eigvalsh(build_total_hamiltonian(spec, float(t)))[:4]
        p = dict(base, t=float(t), t_pi_over_j0=float(t) * spec.j0_max / math.pi, t_over_t_max=float(t) / spec.t_max)
        for k, v in enumerate(values):
            rows.append(SweepRecord(dict(p), f"eigenvalue_{k}", float(v)))
    return rows


def run_spectrum(config: ExperimentConfig) -> list[SweepRecord]:
    """Localized-state analysis, wavevector roots and the four-level eigenvalue flow."""
    mus = config.mu0_values()
    tasks: list[Task] = []
    for mu0 in mus:
        chain = ChainSpec(config.n_sites, mu0)
        bound_state(chain)  # surfaces the no-bound-state diagnostic before any work
        tasks.append(lambda chain=chain: _chain_records(chain))
        spec = config.protocol(mu0=mu0)
        tasks.append(lambda spec=spec: _flow_records(spec, config.n_samples, "spectrum"))
    return _execute(tasks, config.jobs)


def run_eigen_flow(config: ExperimentConfig) -> list[SweepRecord]:
    """Four lowest instantaneous eigenvalues of the full Hamiltonian over the pulse."""
    spec = config.protocol()
    return _execute([lambda: _flow_records(spec, config.n_samples, "eigen-flow")], config.jobs)


# ---------------------------------------------------------------- operator fidelity


def _max_ratio_for_target(chain: ChainSpec, distance: int, target: float) -> float:
    """Largest J0/mu0 (bisection, 1e-4 relative) keeping the operator fidelity >= target."""

    def ok(ratio: float) -> bool:
        j0 = ratio * chain.defect_energy
        return operator_fidelity(ProtocolSpec.from_distance(chain, distance, j0, 1.0)) >= target

    lo, hi = 1e-4, 1.0
    if not ok(lo):
        return float("nan")
    if ok(hi):
        return hi
    while hi / lo - 1.0 > 1e-4:
        mid = math.sqrt(lo * hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def run_operator_fidelity(config: ExperimentConfig) -> list[SweepRecord]:
    """Operator fidelity versus J0/mu0 and distance, and the largest coupling
    that keeps it above 99.5 %."""
    mus = config.mu0_values((0.5, 1.0))
    ds = config.distances((5, 13, 21))
    ratios = config.ratios((0.02, 0.05, 0.1, 0.2, 0.4))
    tasks: list[Task] = []
    for mu0 in mus:
        chain = ChainSpec(config.n_sites, mu0)
        for d in ds:
            def task(chain=chain, d=d):
                rows = []
                for r in ratios:
                    spec = ProtocolSpec.from_distance(chain, d, r * chain.defect_energy, 1.0)
                    p = {"experiment": "operator-fidelity", "n_sites": chain.n_sites, "mu0": chain.defect_energy,
                         "distance": d, "j0_ratio": r, "j0": spec.j0_max}
                    rows.append(SweepRecord(p, "operator_fidelity", operator_fidelity(spec)))
                ratio = _max_ratio_for_target(chain, d, OPERATOR_FIDELITY_TARGET)
                p = {"experiment": "operator-fidelity", "n_sites": chain.n_sites, "mu0": chain.defect_energy,
                     "distance": d, "target": OPERATOR_FIDELITY_TARGET}
                rows.append(SweepRecord(dict(p), "max_j0_ratio", ratio))
                rows.append(SweepRecord(dict(p), "max_j0", ratio * chain.defect_energy))
                return rows
            tasks.append(task)
    return _execute(tasks, config.jobs)


# ---------------------------------------------------------------- adiabaticity


def run_adiabaticity(config: ExperimentConfig) -> list[SweepRecord]:
    """Adiabaticity over one protocol, its peak versus distance, and versus t_max.

    Both ``A_max`` and ``A_max * t_max`` are emitted.
    """
    rows: list[SweepRecord] = []
    spec = config.protocol()
    bound = bound_state(spec.chain)
    base = _base_params(spec, "adiabaticity")
    for t in np.linspace(0.0, spec.t_max, config.n_samples):
        a = adiabaticity(spec, bound, float(t))
        p = dict(base, panel="profile", t=float(t), t_over_t_max=float(t) / spec.t_max)
        rows.append(SweepRecord(dict(p), "adiabaticity", a))
        rows.append(SweepRecord(dict(p), "adiabaticity_times_t_max", a * spec.t_max))

    mus = config.mu0_values((0.5, 1.0)) if config.mu0 is not None or config.j0 is None else config.mu0_values()
    n0 = (config.n_sites + 1) // 2
    ds = config.distances(range(5, 2 * (n0 - 1) + 4, 2))
    for mu0 in mus:
        for d in ds:
            s = config.protocol(mu0=mu0, distance=d)
            b = bound_state(s.chain)
            p = dict(_base_params(s, "adiabaticity"), panel="distance")
            a_max = max_adiabaticity(s, b)
            rows.append(SweepRecord(dict(p), "max_adiabaticity", a_max))
            rows.append(SweepRecord(dict(p), "max_adiabaticity_times_t_max", a_max * s.t_max))
            rows.append(SweepRecord(dict(p), "adiabatic_time_scale", adiabatic_time_scale(s, b)))

    grid = config.t_max_grid or list(np.arange(5.0, 51.0, 1.0))
    for units in grid:
        s = config.protocol(t_max_units=float(units))
        p = dict(_base_params(s, "adiabaticity"), panel="t_max")
        rows.append(SweepRecord(dict(p), "max_adiabaticity", max_adiabaticity(s, bound_state(s.chain))))
    return sort_records(rows)


# ---------------------------------------------------------------- dynamics


def _trajectory_rows(traj, base: dict[str, Any], seed) -> list[SweepRecord]:
    rows = []
    for k, t in enumerate(traj.times):
        p = dict(base, t=float(t), t_over_t_max=float(t) / base["t_max"])
        for name in ("pop_a", "pop_b", "pop_defect", "pop_medium"):
            rows.append(SweepRecord(dict(p), name, float(getattr(traj, name)[k]), seed, traj.dt))
    rows.append(SweepRecord(dict(base), "fidelity", final_fidelity(traj), seed, traj.dt))
    for name, value in traj.diagnostics.items():
        rows.append(SweepRecord(dict(base), name, float(value), seed, traj.dt))
    return rows


def run_evolve(config: ExperimentConfig) -> list[SweepRecord]:
    """Population dynamics of one protocol (population-versus-time panels)."""
    spec = config.protocol()
    gamma_units = config.scalar("gamma", 0.0)
    delta = config.scalar("delta", 0.0)
    method = config.method or ("master" if gamma_units > 0 else "full")
    base = dict(_base_params(spec, "evolve"), method=method, gamma=gamma_units, delta=delta)
    disorder = sample_disorder(delta, spec.chain, config.seed) if delta > 0 else None
    seed = config.seed if disorder is not None else None

    def task():
        if method in ("effective", "both"):
            rows = _trajectory_rows(
                evolve_effective(spec, bound_state(spec.chain), n_samples=config.n_samples),
                dict(base, method="effective"), None,
            )
            if method == "effective":
                return rows
        else:
            rows = []
        if method == "master" or gamma_units > 0:
            traj = evolve_master(spec, disorder, gamma_units * spec.j0_max, n_samples=config.n_samples)
            rows += _trajectory_rows(traj, dict(base, method="master"), seed)
        else:
            traj = evolve_schrodinger(spec, disorder, n_samples=config.n_samples)
            rows += _trajectory_rows(traj, dict(base, method="full"), seed)
        return rows

    return _execute([task], 1)


def run_fidelity_sweep(config: ExperimentConfig) -> list[SweepRecord]:
    """Final transfer fidelity versus t_max for the full and the three-level model."""
    if any(config.gamma or ()) or any(config.delta or ()):
        raise ConfigError("fidelity-sweep models the clean, coherent protocol; use robustness for gamma/delta")
    grid = config.t_max_grid or list(np.arange(2.0, 51.0, 1.0))
    method = config.method or "both"
    methods = ("full", "effective") if method == "both" else (method,)
    if "master" in methods:
        raise ConfigError("fidelity-sweep methods are full, effective or both")
    tasks: list[Task] = []
    for mu0 in config.mu0_values():
        for d in config.distances():
            for units in grid:
                for m in methods:
                    spec = config.protocol(mu0=mu0, distance=d, t_max_units=float(units))

                    def task(spec=spec, m=m):
                        if m == "full":
                            traj = evolve_schrodinger(spec, n_samples=2)
                        else:
                            traj = evolve_effective(spec, bound_state(spec.chain), n_samples=2)
                        p = dict(_base_params(spec, "fidelity-sweep"), method=m)
                        return [SweepRecord(p, "fidelity", final_fidelity(traj), None, traj.dt)]

                    tasks.append(task)
    return _execute(tasks, config.jobs)


def _ensemble_fidelity(spec: ProtocolSpec, delta: float, gamma: float, seed: int | None) -> tuple[float, float]:
    disorder = sample_disorder(delta, spec.chain, seed) if seed is not None else None
    if gamma > 0:
        traj = evolve_master(spec, disorder, gamma, n_samples=2)
    else:
        traj = evolve_schrodinger(spec, disorder, n_samples=2)
    return final_fidelity(traj), traj.dt


def run_robustness(config: ExperimentConfig) -> list[SweepRecord]:
    """Transfer fidelity under coupling disorder and dephasing.

    For every (delta, gamma, t_max) the ensemble rows ``fidelity_mean``,
    ``fidelity_std``, ``fidelity_min`` and ``fidelity_max`` are emitted along
    with one ``fidelity`` row per realization carrying its replay seed.
    ``delta = 0`` needs no ensemble and runs a single clean realization.
    """
    deltas = config.delta if config.delta is not None else [0.0, 0.1]
    gammas = config.gamma if config.gamma is not None else [0.0]
    grid = config.t_max_grid or [10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]
    seeds = derive_seeds(config.seed, config.realizations)
    tasks: list[Task] = []
    groups: dict[tuple, dict[str, Any]] = {}
    for delta in deltas:
        for g in gammas:
            for units in grid:
                spec = config.protocol(t_max_units=float(units))
                members = seeds if delta > 0 else [None]
                p = dict(_base_params(spec, "robustness"), delta=delta, gamma=g, n_realizations=len(members))
                groups[(delta, g, units)] = p
                for s in members:
                    def task(spec=spec, delta=delta, g=g, s=s, p=p):
                        f, dt = _ensemble_fidelity(spec, delta, g * spec.j0_max, s)
                        return [SweepRecord(dict(p), "fidelity", f, s, dt)]
                    tasks.append(task)
    rows = _execute(tasks, config.jobs)

    summary = []
    for key, p in groups.items():
        members = [r for r in rows if r.params == p]
        values = np.array([r.value for r in members])
        dt = members[0].dt
        seed = config.seed if key[0] > 0 else None
        wall = float(sum(r.wall_time or 0.0 for r in members))
        for name, v in (("fidelity_mean", values.mean()), ("fidelity_std", values.std()),
                        ("fidelity_min", values.min()), ("fidelity_max", values.max())):
            summary.append(SweepRecord(dict(p), name, float(v), seed, dt, wall))
    return sort_records(rows + summary)


def run_min_time_vs_distance(config: ExperimentConfig, target_error: float = 0.005) -> list[SweepRecord]:
    """Shortest t_max reaching ``F >= 1 - target_error`` for each distance and mu0,
    plus a least-squares fit of ``log t_min`` against distance per mu0.

    Times are reported in ``pi / J0`` and in ``pi / J``; a point whose search
    bound is too small is reported as NaN with its best fidelity instead of
    aborting the sweep.
    """
    mus = config.mu0_values((0.5, 1.0))
    ds = config.distances((5, 7, 9, 11, 13))
    method = config.method or "full"
    if method not in ("full", "effective"):
        raise ConfigError("min-time-vs-distance methods are full or effective")
    tasks: list[Task] = []
    for mu0 in mus:
        for d in ds:
            spec = config.protocol(mu0=mu0, distance=d, t_max_units=1.0)

            def task(spec=spec):
                scale = adiabatic_time_scale(spec, bound_state(spec.chain)) * spec.j0_max / math.pi
                upper = max(60.0, 25.0 * scale)
                p = dict(_base_params(spec, "min-time-vs-distance"), method=method, target_error=target_error)
                for k in ("t_max", "t_max_pi_over_j0"):
                    p.pop(k)
                try:
                    units = minimal_transfer_time(spec, target_error, (2.0, upper), method=method)
                except NotFoundError as exc:
                    return [
                        SweepRecord(dict(p), "min_transfer_time_pi_over_j0", float("nan")),
                        SweepRecord(dict(p), "best_fidelity", float(exc.best_value)),
                    ]
                pi_over_j = units / spec.j0_max
                return [
                    SweepRecord(dict(p), "min_transfer_time_pi_over_j0", units),
                    SweepRecord(dict(p), "min_transfer_time_pi_over_j", pi_over_j),
                    SweepRecord(dict(p), "log_min_transfer_time_pi_over_j", math.log(pi_over_j)),
                ]

            tasks.append(task)
    rows = _execute(tasks, config.jobs)

    for mu0 in mus:
        pts = [(r.params["distance"], r.value) for r in rows
               if r.metric == "log_min_transfer_time_pi_over_j" and r.params["mu0"] == mu0]
        if len(pts) < 2:
            continue
        x, y = np.array(pts, dtype=float).T
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (slope * x + intercept)
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
        p = {"experiment": "min-time-vs-distance", "n_sites": config.n_sites, "mu0": mu0, "method": method}
        rows += [
            SweepRecord(dict(p), "log_fit_slope", float(slope)),
            SweepRecord(dict(p), "log_fit_intercept", float(intercept)),
            SweepRecord(dict(p), "log_fit_r2", r2),
        ]
    return sort_records(rows)


EXPERIMENTS: dict[str, Callable[[ExperimentConfig], list[SweepRecord]]] = {
    "spectrum": run_spectrum,
    "eigen-flow": run_eigen_flow,
    "operator-fidelity": run_operator_fidelity,
    "adiabaticity": run_adiabaticity,
    "evolve": run_evolve,
    "fidelity-sweep": run_fidelity_sweep,
    "robustness": run_robustness,
    "min-time-vs-distance": run_min_time_vs_distance,
}


def run_experiment(config: ExperimentConfig) -> list[SweepRecord]:
    config.validate()
    return EXPERIMENTS[config.experiment](config)


# ---------------------------------------------------------------- serialization

_TRAILING = ("metric", "value", "seed", "dt", "wall_time")


def _param_columns(records: list[SweepRecord]) -> list[str]:
    seen: dict[str, None] = {}
    for r in records:
        for k in r.params:
            seen.setdefault(k, None)
    return list(seen)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def records_to_csv(records: list[SweepRecord], timestamp: str | None = None) -> str:
    """CSV text: optional ``# generated ...`` line, snake_case header, 12 significant digits.

    Without a timestamp the ``wall_time`` column is left out so repeated runs
    produce identical bytes.
    """
    trailing = [c for c in _TRAILING if timestamp is not None or c != "wall_time"]
    columns = _param_columns(records) + trailing
    buf = io.StringIO()
    if timestamp is not None:
        buf.write(f"# generated {timestamp}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        row = r.to_dict()
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def records_to_json(records: list[SweepRecord], include_wall_time: bool = True) -> str:
    rows = []
    for r in records:
        row = {k: _json_safe(v) for k, v in r.to_dict().items()}
        if not include_wall_time:
            row.pop("wall_time", None)
        rows.append(row)
    return json.dumps(rows, indent=1, allow_nan=False)


def records_from_json(text: str) -> list[SweepRecord]:
    rows = json.loads(text)
    out = []
    for row in rows:
        for k, v in list(row.items()):
            if isinstance(v, str) and v in ("nan", "inf", "-inf"):
                row[k] = float(v)
        out.append(SweepRecord.from_dict(row))
    return out
