import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qswalk.errors import CoincidentNodes, NonSymmetricAdjacency, SamplingBudgetExceeded
from qswalk.network import (
    NodeConfiguration,
    build_dimer_hamiltonian,
    build_dipole_hamiltonian,
    build_graph_hamiltonian,
    coupling_rates_from_hamiltonian,
    pairwise_distances,
    read_hamiltonian_csv,
    sample_disordered_network,
    write_hamiltonian_csv,
)


def test_two_nodes_are_the_endpoints():
    cfg = sample_disordered_network(2, radius=1.0, seed=99)
    np.testing.assert_array_equal(cfg.positions, [[-1, 0, 0], [1, 0, 0]])
    assert cfg.endpoint_indices == (0, 1)


def test_sampling_is_deterministic():
    a = sample_disordered_network(7, 1.0, seed=42)
    b = sample_disordered_network(7, 1.0, seed=42)
    assert a.positions.tobytes() == b.positions.tobytes()
    c = sample_disordered_network(7, 1.0, seed=43)
    assert not np.array_equal(a.positions, c.positions)


def test_interior_radial_mean_matches_uniform_ball():
    # uniform ball: E[r] = 3R/4
    radii = []
    for seed in range(10_000):
        cfg = sample_disordered_network(7, 1.0, seed=seed)
        radii.append(np.linalg.norm(cfg.positions[1:-1], axis=1))
    mean = np.concatenate(radii).mean()
    assert abs(mean - 0.75) / 0.75 < 0.02


@given(n=st.integers(2, 12), radius=st.floats(0.1, 10), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_configuration_invariants(n, radius, seed):
    cfg = sample_disordered_network(n, radius, seed)
    norms = np.linalg.norm(cfg.positions, axis=1)
    assert np.all(norms <= radius * (1 + 1e-12))
    first, last = cfg.endpoint_indices
    assert norms[first] == pytest.approx(radius) and norms[last] == pytest.approx(radius)
    assert cfg.positions[first][0] < 0 < cfg.positions[last][0]
    d = pairwise_distances(cfg.positions)
    assert np.all(d[~np.eye(n, dtype=bool)] > 0)


def test_min_separation_is_enforced():
    cfg = sample_disordered_network(7, 1.0, seed=5, min_separation=0.4)
    d = pairwise_distances(cfg.positions)
    assert d[~np.eye(7, dtype=bool)].min() >= 0.4


def test_overconstrained_geometry_raises():
    with pytest.raises(SamplingBudgetExceeded):
        sample_disordered_network(30, 1.0, seed=0, min_separation=1.5, max_attempts=200)


def test_json_roundtrip(tmp_path):
    cfg = sample_disordered_network(5, 2.0, seed=7)
    path = tmp_path / "net.json"
    cfg.to_json(path)
    data = json.loads(path.read_text())
    assert set(data) == {"radius", "seed", "positions", "endpoints"}
    assert data["endpoints"] == [0, 4]
    back = NodeConfiguration.from_json(path)
    np.testing.assert_array_equal(back.positions, cfg.positions)
    assert back.seed == 7 and back.radius == 2.0


def test_dipole_pair():
    H = build_dipole_hamiltonian(np.array([[0, 0, 0], [2.0, 0, 0]]))
    np.testing.assert_allclose(H, [[1 / 8, -1 / 8], [-1 / 8, 1 / 8]], rtol=0, atol=1e-15)


def test_dipole_three_collinear():
    H = build_dipole_hamiltonian(np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0]]))
    assert (H[0, 1], H[1, 2], H[0, 2]) == pytest.approx((-1, -1, -1 / 8))
    np.testing.assert_allclose(np.diag(H), [1.125, 2, 1.125])


def test_dipole_single_node():
    np.testing.assert_array_equal(build_dipole_hamiltonian(np.zeros((1, 3))), [[0.0]])


def test_dipole_coincident_nodes():
    with pytest.raises(CoincidentNodes):
        build_dipole_hamiltonian(np.array([[0.0, 0, 0], [1, 0, 0], [0, 0, 0]]))


@given(seed=st.integers(0, 10_000), c=st.sampled_from([0.5, 2.0, 3.0, 0.25]))
@settings(max_examples=30, deadline=None)
def test_dipole_radius_rescaling(seed, c):
    cfg = sample_disordered_network(6, 1.0, seed)
    H1 = build_dipole_hamiltonian(cfg)
    Hc = build_dipole_hamiltonian(cfg.positions * c)
    # powers of two are exact in floating point; others to rounding
    tol = 0 if c in (0.5, 2.0, 0.25) else 1e-14
    np.testing.assert_allclose(Hc, H1 * c**-3.0, rtol=tol, atol=0)


@given(seed=st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_dipole_symmetric_zero_row_sums(seed):
    H = build_dipole_hamiltonian(sample_disordered_network(7, 1.0, seed))
    np.testing.assert_array_equal(H, H.T)
    assert np.abs(H.sum(axis=1)).max() <= 1e-12 * max(1.0, np.abs(H).max())


def test_graph_dimer_and_path():
    np.testing.assert_array_equal(build_graph_hamiltonian([[0, 1], [1, 0]], 1.0), [[1, -1], [-1, 1]])
    H = build_graph_hamiltonian([[0, 1, 0], [1, 0, 1], [0, 1, 0]], 1.0)
    np.testing.assert_array_equal(np.diag(H), [1, 2, 1])
    assert H[0, 1] == H[1, 2] == -1 and H[0, 2] == 0


def test_graph_complete_four():
    A = np.ones((4, 4)) - np.eye(4)
    H = build_graph_hamiltonian(A, 2.0)
    np.testing.assert_array_equal(np.diag(H), [6, 6, 6, 6])
    assert np.all(H[~np.eye(4, dtype=bool)] == -2)


def test_graph_rejects_asymmetric():
    with pytest.raises(NonSymmetricAdjacency):
        build_graph_hamiltonian([[0, 1], [0, 0]])


def test_graph_row_sums(rng):
    from conftest import random_adjacency

    for _ in range(20):
        H = build_graph_hamiltonian(random_adjacency(6, rng), 1.7)
        np.testing.assert_array_equal(H, H.T)
        assert np.abs(H.sum(axis=1)).max() <= 1e-12
        assert np.all(H[~np.eye(6, dtype=bool)] <= 0)


@pytest.mark.parametrize(
    "V, delta, expected",
    [(1, 0, [[0, -1], [-1, 0]]), (0, 2, [[0, 0], [0, 2]]), (0.61, 1.8, [[0, -0.61], [-0.61, 1.8]])],
)
def test_dimer(V, delta, expected):
    np.testing.assert_array_equal(build_dimer_hamiltonian(V, delta), expected)


def test_coupling_rates():
    np.testing.assert_array_equal(coupling_rates_from_hamiltonian(build_dimer_hamiltonian(1, 0)), [[0, 1], [1, 0]])
    np.testing.assert_array_equal(coupling_rates_from_hamiltonian(build_dimer_hamiltonian(1, 1.8)), [[0, 1], [1, 1.8]])
    H = build_dipole_hamiltonian(np.array([[0, 0, 0], [2.0, 0, 0]]))
    np.testing.assert_allclose(coupling_rates_from_hamiltonian(H), np.full((2, 2), 1 / 8))


@given(seed=st.integers(0, 1000))
@settings(max_examples=20, deadline=None)
def test_coupling_rates_nonnegative_symmetric(seed):
    H = build_dipole_hamiltonian(sample_disordered_network(5, 1.0, seed))
    lam = coupling_rates_from_hamiltonian(H)
    assert np.all(lam >= 0)
    np.testing.assert_array_equal(lam, lam.T)


def test_hamiltonian_csv_roundtrip(tmp_path):
    H = build_dipole_hamiltonian(sample_disordered_network(4, 1.0, 3))
    path = tmp_path / "h.csv"
    write_hamiltonian_csv(H, path)
    assert path.read_text().splitlines()[0] == "# hamiltonian N=4"
    np.testing.assert_array_equal(read_hamiltonian_csv(path), H)
