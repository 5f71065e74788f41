"""Node configurations and network Hamiltonians.

Hamiltonians and rate matrices are plain ``(N, N)`` float arrays in units
where hbar = 1. Every construction here yields zero row sums except the
dimer, whose on-site offset is explicit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    CoincidentNodes,
    NonSymmetricAdjacency,
    SamplingBudgetExceeded,
    ValidationError,
)

__all__ = [
    "NodeConfiguration",
    "sample_disordered_network",
    "build_dipole_hamiltonian",
    "build_graph_hamiltonian",
    "build_dimer_hamiltonian",
    "coupling_rates_from_hamiltonian",
    "pairwise_distances",
    "write_hamiltonian_csv",
    "read_hamiltonian_csv",
]


@dataclass(frozen=True, eq=False)
class NodeConfiguration:
    """Positions of ``N`` nodes in a ball of radius ``radius``.

    Node 0 and node N-1 are the fixed boundary endpoints on the x-axis; the
    source attaches to the first and the drain to the last.
    """

    positions: np.ndarray
    radius: float
    seed: int
    endpoint_indices: tuple[int, int] = field(default=(0, -1))

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValidationError(f"positions must have shape (N, 3), got {pos.shape}")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        first, last = self.endpoint_indices
        object.__setattr__(self, "endpoint_indices", (first % len(pos), last % len(pos)))

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "seed": self.seed,
            "positions": self.positions.tolist(),
            "endpoints": list(self.endpoint_indices),
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "NodeConfiguration":
        return cls(
            positions=np.array(data["positions"], dtype=float),
            radius=float(data["radius"]),
            seed=int(data["seed"]),
            endpoint_indices=tuple(data.get("endpoints", (0, -1))),
        )

    @classmethod
    def from_json(cls, path) -> "NodeConfiguration":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _uniform_ball_point(rng: np.random.Generator, radius: float) -> np.ndarray:
    # isotropic direction from a normal draw, radius ~ R * U^(1/3)
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    return radius * rng.random() ** (1.0 / 3.0) * direction


def sample_disordered_network(
    n_nodes: int,
    radius: float = 1.0,
    seed: int = 0,
    min_separation: float = 0.0,
    max_attempts: int = 10_000,
) -> NodeConfiguration:
    """Draw a random network configuration inside a sphere.

    The endpoints sit at ``(-radius, 0, 0)`` and ``(radius, 0, 0)``; the
    ``n_nodes - 2`` interior nodes are uniform in the ball. When
    ``min_separation > 0`` each interior candidate is redrawn until it keeps
    that distance to every node already placed; ``max_attempts`` bounds the
    total number of redraws.

    Raises
    ------
    SamplingBudgetExceeded
        If the separation constraint could not be met within the budget.
    """
    if n_nodes < 2:
        raise ValidationError(f"n_nodes must be >= 2, got {n_nodes}")
    if radius <= 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    if min_separation < 0:
        raise ValidationError(f"min_separation must be >= 0, got {min_separation}")

    rng = np.random.default_rng(seed)
    placed = [np.array([-radius, 0.0, 0.0]), np.array([radius, 0.0, 0.0])]
    interior = []
    rejected = 0
    while len(interior) < n_nodes - 2:
        candidate = _uniform_ball_point(rng, radius)
        others = np.array(placed + interior)
        dists = np.linalg.norm(others - candidate, axis=1)
        if np.all(dists > 0) and np.all(dists >= min_separation):
            interior.append(candidate)
            continue
        rejected += 1
        if rejected > max_attempts:
            raise SamplingBudgetExceeded(
                f"could not place {n_nodes} nodes with min_separation={min_separation} "
                f"in radius {radius} after {max_attempts} rejections"
            )

    positions = np.vstack([placed[0], *interior, placed[1]]) if interior else np.vstack(placed)
    return NodeConfiguration(positions=positions, radius=float(radius), seed=int(seed))


def pairwise_distances(positions) -> np.ndarray:
    pos = np.asarray(positions, dtype=float)
    return np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)


def build_dipole_hamiltonian(config) -> np.ndarray:
    """Dipole-dipole Hamiltonian, ``H_kl = -d_kl^-3`` and ``H_kk = sum_j d_jk^-3``.

    Accepts a :class:`NodeConfiguration` or an ``(N, 3)`` array of positions.
    """
    positions = config.positions if isinstance(config, NodeConfiguration) else config
    d = pairwise_distances(positions)
    n = len(d)
    off = ~np.eye(n, dtype=bool)
    if np.any(d[off] == 0):
        k, l = np.argwhere((d == 0) & off)[0]
        raise CoincidentNodes(f"nodes {k} and {l} coincide; coupling d^-3 is singular")
    H = np.zeros((n, n))
    H[off] = -d[off] ** -3.0
    np.fill_diagonal(H, -H.sum(axis=1))
    return H


def build_graph_hamiltonian(adjacency, hop_rate: float = 1.0) -> np.ndarray:
    """``hop_rate`` times the connectivity matrix (degree on the diagonal, -1 per edge)."""
    A = np.asarray(adjacency, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NonSymmetricAdjacency(f"adjacency must be square, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise NonSymmetricAdjacency("adjacency matrix is not symmetric")
    if np.any(np.diag(A) != 0):
        raise NonSymmetricAdjacency("adjacency matrix must have zero diagonal")
    if not np.all((A == 0) | (A == 1)):
        raise NonSymmetricAdjacency("adjacency entries must be 0 or 1")
    if hop_rate <= 0:
        raise ValidationError(f"hop_rate must be positive, got {hop_rate}")
    return hop_rate * (np.diag(A.sum(axis=1)) - A)


def build_dimer_hamiltonian(V: float, delta: float) -> np.ndarray:
    return np.array([[0.0, -V], [-V, delta]], dtype=float)


def coupling_rates_from_hamiltonian(H) -> np.ndarray:
    """Incoherent hopping rates ``|H_kl|``, diagonal included.

    The diagonal entries only dephase; they never move population directly.
    """
    return np.abs(np.asarray(H, dtype=float))


def write_hamiltonian_csv(H, dest) -> None:
    """Row-major CSV under a ``# hamiltonian N=<n>`` header; ``dest`` is a path or text stream."""
    H = np.asarray(H, dtype=float)
    if hasattr(dest, "write"):
        dest.write(f"# hamiltonian N={len(H)}\n")
        np.savetxt(dest, H, delimiter=",", fmt="%.17g")
        return
    with open(dest, "w") as fh:
        write_hamiltonian_csv(H, fh)


def read_hamiltonian_csv(path) -> np.ndarray:
    H = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    return H
