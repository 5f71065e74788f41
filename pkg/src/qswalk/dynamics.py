"""Quantum stochastic walk generator with source and drain, and its propagation.

Basis ordering of the full ``(N+2)``-dimensional space: index 0 is the
source, ``1..N`` are the network nodes, ``N+1`` is the drain. Network node
indices in the public API use this same numbering, so the first network node
is ``1`` and the last is ``N``.

Density matrices are vectorized column-major (``rho.reshape(-1, order="F")``),
under which ``vec(A X B) = kron(B.T, A) vec(X)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NonFiniteResult, ValidationError
from .network import coupling_rates_from_hamiltonian

log = logging.getLogger(__name__)

__all__ = [
    "SystemSpec",
    "Superoperator",
    "Trajectory",
    "vec",
    "unvec",
    "dissipator",
    "assemble_superoperator",
    "source_state",
    "evolve",
    "classical_generator",
    "evolve_classical",
    "effective_hamiltonian_evolve",
    "check_density_matrix",
]

HERMITICITY_TOL = 1e-10


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.shape[-1])))
    return v.reshape(v.shape[:-1] + (dim, dim), order="F")


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Network Hamiltonian plus mixing parameter and the two incoherent channels.

    ``source_node`` and ``drain_node`` count network nodes from 1; ``None``
    means the first resp. last node. ``rates`` defaults to ``|H|`` entrywise.
    """

    hamiltonian: np.ndarray
    alpha: float
    source_rate: float
    drain_rate: float
    source_node: int | None = None
    drain_node: int | None = None
    rates: np.ndarray | None = None

    def __post_init__(self):
        H = np.array(self.hamiltonian, dtype=float, ndmin=2)
        if H.shape[0] != H.shape[1]:
            raise ValidationError(f"hamiltonian must be square, got {H.shape}")
        if not np.allclose(H, H.T, rtol=0, atol=1e-12 * max(1.0, np.abs(H).max())):
            raise ValidationError("hamiltonian must be symmetric")
        n = len(H)
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.source_rate > 0:
            raise ValidationError(f"source rate must be positive, got {self.source_rate}")
        if not self.drain_rate > 0:
            raise ValidationError(f"drain rate must be positive, got {self.drain_rate}")
        src = 1 if self.source_node is None else int(self.source_node)
        drn = n if self.drain_node is None else int(self.drain_node)
        for name, idx in (("source", src), ("drain", drn)):
            if not 1 <= idx <= n:
                raise ValidationError(f"{name} node must lie in 1..{n}, got {idx}")
        rates = coupling_rates_from_hamiltonian(H) if self.rates is None else np.array(self.rates, dtype=float)
        if rates.shape != H.shape:
            raise ValidationError(f"rates shape {rates.shape} does not match hamiltonian {H.shape}")
        if np.any(rates < 0):
            raise ValidationError("rates must be nonnegative")
        H.setflags(write=False)
        rates.setflags(write=False)
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "source_node", src)
        object.__setattr__(self, "drain_node", drn)

    @property
    def n_nodes(self) -> int:
        return len(self.hamiltonian)

    @property
    def dim(self) -> int:
        return self.n_nodes + 2

    def replace(self, **changes) -> "SystemSpec":
        kwargs = dict(
            hamiltonian=self.hamiltonian,
            alpha=self.alpha,
            source_rate=self.source_rate,
            drain_rate=self.drain_rate,
            source_node=self.source_node,
            drain_node=self.drain_node,
            rates=self.rates,
        )
        kwargs.update(changes)
        if "hamiltonian" in changes and "rates" not in changes:
            kwargs["rates"] = None
        return SystemSpec(**kwargs)


@dataclass(frozen=True, eq=False)
class Superoperator:
    generator: np.ndarray
    spec: SystemSpec

    @property
    def dim(self) -> int:
        return self.spec.dim

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Time derivative of ``rho`` under this generator."""
        return unvec(self.generator @ vec(rho), self.dim)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States at ascending times.

    ``states`` has shape ``(T, d, d)`` for density matrices or ``(T, d)`` for
    population vectors. ``hermiticity_drift`` is the largest anti-Hermitian
    part removed during propagation.
    """

    times: np.ndarray
    states: np.ndarray
    hermiticity_drift: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def populations(self) -> np.ndarray:
        if self.states.ndim == 2:
            return self.states
        return np.real(np.diagonal(self.states, axis1=1, axis2=2))

    @property
    def survival(self) -> np.ndarray:
        """Probability of not yet having reached the drain, ``1 - rho_drain``."""
        return 1.0 - self.populations[:, -1]


def _unit(dim: int, k: int, l: int) -> np.ndarray:
    m = np.zeros((dim, dim))
    m[k, l] = 1.0
    return m


def dissipator(L: np.ndarray) -> np.ndarray:
    """Matrix of ``rho -> L rho L^+ - 1/2 {L^+ L, rho}`` on column-stacked ``rho``."""
    dim = L.shape[0]
    eye = np.eye(dim)
    LdL = L.conj().T @ L
    return np.kron(L.conj(), L) - 0.5 * np.kron(eye, LdL) - 0.5 * np.kron(LdL.T, eye)


def assemble_superoperator(spec: SystemSpec) -> Superoperator:
    """Build the full Lindblad generator for ``spec``.

    ``(1 - alpha) * (-i[H, .]) + alpha * sum_kl rates_kl D(|k><l|)`` on the
    network block, plus ``Gamma D(|src><0|)`` and ``gamma D(|N+1><drn|)``.
    """
    n, dim = spec.n_nodes, spec.dim
    H = np.zeros((dim, dim))
    H[1 : n + 1, 1 : n + 1] = spec.hamiltonian
    eye = np.eye(dim)
    gen = (1.0 - spec.alpha) * (-1j) * (np.kron(eye, H) - np.kron(H.T, eye))

    if spec.alpha > 0:
        # D(|k><l|) in closed form: jump term at (kk, ll), anticommutator at l
        lam = spec.rates
        d2 = dim * dim
        jump = np.zeros((d2, d2))
        for k in range(n):
            for l in range(n):
                rate = lam[k, l]
                if rate == 0:
                    continue
                K, Lx = k + 1, l + 1
                jump[K + K * dim, Lx + Lx * dim] += rate
        # sum_kl lam_kl |l><l| is the decay operator; coherences decay by half its entries
        outflow = np.zeros(dim)
        outflow[1 : n + 1] = lam.sum(axis=0)
        anti = -0.5 * (np.kron(eye, np.diag(outflow)) + np.kron(np.diag(outflow), eye))
        gen = gen + spec.alpha * (jump + anti)

    gen = gen + spec.source_rate * dissipator(_unit(dim, spec.source_node, 0))
    gen = gen + spec.drain_rate * dissipator(_unit(dim, n + 1, spec.drain_node))
    return Superoperator(generator=gen, spec=spec)


def source_state(dim: int) -> np.ndarray:
    """``|0><0|``, the excitation sitting in the source."""
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def check_density_matrix(rho: np.ndarray, atol: float = 1e-10) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > atol:
        raise ValidationError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol:
        raise ValidationError(f"density matrix trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise ValidationError("density matrix has negative eigenvalues")


def _propagators(generator: np.ndarray, times: np.ndarray):
    """Yield ``exp(dt * generator)`` for each consecutive gap, reusing repeats."""
    cache: dict[float, np.ndarray] = {}
    prev = 0.0
    for t in times:
        dt = float(t - prev)
        prev = float(t)
        if dt == 0.0:
            yield None
            continue
        key = round(dt, 12)
        if key not in cache:
            cache[key] = scipy.linalg.expm(dt * generator)
        yield cache[key]


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValidationError("times must be a non-empty 1-d sequence")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValidationError("times must be ascending and start at t >= 0")
    return times


def evolve(superop: Superoperator, initial: np.ndarray | None = None, times=(0.0,)) -> Trajectory:
    """Propagate ``initial`` (default ``|0><0|``) to each of ``times``.

    Uses the exact matrix exponential of the generator. After each step the
    state is re-symmetrized; the largest correction is reported on the
    returned trajectory.

    Raises
    ------
    NonFiniteResult
        If the propagated state contains inf or nan.
    """
    dim = superop.dim
    times = _check_times(times)
    rho0 = source_state(dim) if initial is None else np.asarray(initial, dtype=complex)
    check_density_matrix(rho0)

    states = np.empty((len(times), dim, dim), dtype=complex)
    v = vec(rho0).copy()
    drift = 0.0
    for i, P in enumerate(_propagators(superop.generator, times)):
        if P is not None:
            v = P @ v
            rho = unvec(v, dim)
            if not np.all(np.isfinite(rho)):
                raise NonFiniteResult(f"state at t={times[i]} is not finite; couplings too stiff?")
            herm = 0.5 * (rho + rho.conj().T)
            drift = max(drift, float(np.abs(rho - herm).max()))
            v = vec(herm)
        states[i] = unvec(v, dim)
    if drift > HERMITICITY_TOL:
        log.warning("hermiticity drift %.3g exceeds %.1g", drift, HERMITICITY_TOL)
    return Trajectory(times=times, states=states, hermiticity_drift=drift)


def classical_generator(rates, source: tuple[int, float], drain: tuple[int, float]) -> np.ndarray:
    """Population rate matrix of the classical walk with source and drain.

    ``rates[k, l]`` is the rate from network node ``l+1`` to ``k+1``;
    ``source`` and ``drain`` are ``(node, rate)`` pairs with 1-based nodes.
    Entry ``(k, l)`` of the result is the rate into ``k`` from ``l``, and every
    column sums to zero.
    """
    lam = np.array(rates, dtype=float, ndmin=2)
    if np.any(lam < 0):
        raise ValidationError("rates must be nonnegative")
    n = len(lam)
    (src, Gamma), (drn, gamma) = source, drain
    for idx in (src, drn):
        if not 1 <= idx <= n:
            raise ValidationError(f"node index must lie in 1..{n}, got {idx}")
    M = np.zeros((n + 2, n + 2))
    off = lam * (1.0 - np.eye(n))
    M[1 : n + 1, 1 : n + 1] = off - np.diag(off.sum(axis=0))
    M[src, 0] += Gamma
    M[0, 0] -= Gamma
    M[n + 1, drn] += gamma
    M[drn, drn] -= gamma
    return M


def evolve_classical(generator, initial, times) -> Trajectory:
    """``p(t) = exp(t * generator) p(0)`` at each requested time."""
    M = np.asarray(generator, dtype=float)
    times = _check_times(times)
    p = np.asarray(initial, dtype=float).copy()
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValidationError("initial populations must be nonnegative and sum to 1")
    out = np.empty((len(times), len(p)))
    for i, P in enumerate(_propagators(M, times)):
        if P is not None:
            p = P @ p
            if not np.all(np.isfinite(p)):
                raise NonFiniteResult(f"populations at t={times[i]} are not finite")
        out[i] = p
    return Trajectory(times=times, states=out)


def effective_hamiltonian_evolve(H, trap_node: int, trap_rate: float, initial, times) -> Trajectory:
    """Network-only evolution with an absorbing term ``-i trap_rate |m><m|`` in ``H``.

    Solves ``d rho/dt = -i[H, rho] - {G, rho}`` with ``G = trap_rate |m><m|``
    (``trap_node`` is 1-based). The trace decays; it matches the network block
    of a Lindblad drain whose rate is ``2 * trap_rate``.
    """
    H = np.array(H, dtype=float, ndmin=2)
    n = len(H)
    if trap_rate < 0:
        raise ValidationError(f"trap rate must be >= 0, got {trap_rate}")
    if not 1 <= trap_node <= n:
        raise ValidationError(f"trap node must lie in 1..{n}, got {trap_node}")
    G = np.zeros((n, n))
    G[trap_node - 1, trap_node - 1] = trap_rate
    eye = np.eye(n)
    gen = -1j * (np.kron(eye, H) - np.kron(H.T, eye)) - (np.kron(eye, G) + np.kron(G.T, eye))
    times = _check_times(times)
    v = vec(np.asarray(initial, dtype=complex)).copy()
    states = np.empty((len(times), n, n), dtype=complex)
    for i, P in enumerate(_propagators(gen, times)):
        if P is not None:
            v = P @ v
        states[i] = unvec(v, n)
    return Trajectory(times=times, states=states)
