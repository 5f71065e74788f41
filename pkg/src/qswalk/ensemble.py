"""Seeded ensembles of disordered networks and decay-law fits.

Realization ``r`` (1-based) always draws its geometry from
:func:`realization_seed` ``(master_seed, r)``, a SeedSequence spawn key, so
results never depend on execution order. Work is split into fixed-size
blocks of realizations; each block is summed in index order and the block
sums are reduced in index order, so the floating-point result is the same
for any number of workers.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import SystemSpec, Trajectory, assemble_superoperator, evolve
from .errors import QSWError, RealizationError, ValidationError
from .est import ESTCurve, est_laplace
from .network import build_dipole_hamiltonian, sample_disordered_network

log = logging.getLogger(__name__)

__all__ = [
    "EnsembleSpec",
    "DecayFit",
    "realization_seed",
    "realization_spec",
    "run_ensemble",
    "ensemble_est_sweep",
    "fit_power_law",
    "fit_exponential",
]

BLOCK_SIZE = 10


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    n_nodes: int = 7
    radius: float = 1.0
    realisations: int = 500
    master_seed: int = 0
    alpha: float = 0.0
    Gamma: float = 0.5
    gamma: float = 1.0
    time_grid: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 80.0, 161))
    min_separation: float = 0.0

    def __post_init__(self):
        if self.realisations < 1:
            raise ValidationError("realisations must be >= 1")
        if self.n_nodes < 2:
            raise ValidationError("n_nodes must be >= 2")
        t = np.asarray(self.time_grid, dtype=float)
        if t.ndim != 1 or len(t) == 0 or t[0] < 0 or np.any(np.diff(t) < 0):
            raise ValidationError("time_grid must be ascending and start at t >= 0")
        object.__setattr__(self, "time_grid", t)

    def replace(self, **changes) -> "EnsembleSpec":
        kwargs = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kwargs.update(changes)
        return EnsembleSpec(**kwargs)

    def metadata(self) -> dict:
        return {
            "N": self.n_nodes,
            "radius": self.radius,
            "realisations": self.realisations,
            "seed": self.master_seed,
            "Gamma": self.Gamma,
            "gamma": self.gamma,
        }


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    window: tuple[float, float]
    residual: float
    amplitude: float = 1.0


def realization_seed(master_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def realization_spec(spec: EnsembleSpec, index: int, alpha: float | None = None) -> SystemSpec:
    config = sample_disordered_network(
        spec.n_nodes, spec.radius, realization_seed(spec.master_seed, index), spec.min_separation
    )
    H = build_dipole_hamiltonian(config)
    return SystemSpec(
        hamiltonian=H,
        alpha=spec.alpha if alpha is None else alpha,
        source_rate=spec.Gamma,
        drain_rate=spec.gamma,
    )


def _blocks(n: int):
    return [range(lo, min(lo + BLOCK_SIZE, n + 1)) for lo in range(1, n + 1, BLOCK_SIZE)]


def _trajectory_block(spec: EnsembleSpec, indices) -> np.ndarray:
    total = None
    for r in indices:
        try:
            traj = evolve(assemble_superoperator(realization_spec(spec, r)), times=spec.time_grid)
        except QSWError as exc:
            raise RealizationError(r, exc) from exc
        total = traj.states.copy() if total is None else total + traj.states
    return total


def _est_block(spec: EnsembleSpec, alphas, indices) -> np.ndarray:
    out = np.empty((len(indices), len(alphas)))
    for i, r in enumerate(indices):
        base = realization_spec(spec, r)
        try:
            out[i] = [est_laplace(base.replace(alpha=float(a))) for a in alphas]
        except QSWError as exc:
            raise RealizationError(r, exc) from exc
    return out


def _map_blocks(func, args_list, jobs: int):
    if jobs <= 1 or len(args_list) == 1:
        return [func(*args) for args in args_list]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(func, *args) for args in args_list]
        return [f.result() for f in futures]


def run_ensemble(spec: EnsembleSpec, jobs: int = 1) -> Trajectory:
    """Ensemble-averaged density matrix at each time of ``spec.time_grid``."""
    blocks = _blocks(spec.realisations)
    partial = _map_blocks(_trajectory_block, [(spec, b) for b in blocks], jobs)
    total = partial[0]
    for p in partial[1:]:
        total = total + p
    mean = total / spec.realisations
    meta = spec.metadata()
    meta["alpha"] = spec.alpha
    return Trajectory(times=spec.time_grid, states=mean, meta=meta)


def ensemble_est_sweep(spec: EnsembleSpec, alphas, jobs: int = 1) -> ESTCurve:
    """Mean EST over realizations for each alpha; the same geometries serve every alpha."""
    alphas = np.asarray(alphas, dtype=float)
    if np.any((alphas < 0) | (alphas > 1)):
        raise ValidationError("alphas must lie in [0, 1]")
    blocks = _blocks(spec.realisations)
    parts = _map_blocks(_est_block, [(spec, alphas, b) for b in blocks], jobs)
    etas = np.vstack(parts)
    return ESTCurve(alphas, etas.mean(axis=0), spec.metadata())


def _window_mask(t, y, window):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    lo, hi = window
    if lo > hi:
        raise ValidationError(f"empty window {window}")
    mask = (t >= lo) & (t <= hi)
    if mask.sum() < 2:
        raise ValidationError(f"window {window} holds fewer than two samples")
    if np.any(y[mask] <= 0):
        raise ValidationError("decay fits need strictly positive data in the window")
    return t[mask], y[mask]


def _line_fit(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return slope, intercept, float(np.sqrt(np.mean(resid**2)))


def fit_power_law(times, values, window=(5.0, 40.0)) -> DecayFit:
    """Fit ``values ~ c t^-beta`` by least squares in log-log coordinates."""
    t, y = _window_mask(times, values, window)
    if np.any(t <= 0):
        raise ValidationError("power-law window must exclude t <= 0")
    slope, intercept, rms = _line_fit(np.log(t), np.log(y))
    return DecayFit(exponent=-slope, window=tuple(window), residual=rms, amplitude=float(np.exp(intercept)))


def fit_exponential(times, values, window=(10.0, 60.0)) -> DecayFit:
    """Fit ``values ~ c exp(-mu t)`` by least squares in log-linear coordinates."""
    t, y = _window_mask(times, values, window)
    slope, intercept, rms = _line_fit(t, np.log(y))
    return DecayFit(exponent=-slope, window=tuple(window), residual=rms, amplitude=float(np.exp(intercept)))
