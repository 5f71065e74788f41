import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph_hamiltonian
from qswalk.dynamics import SystemSpec
from qswalk.errors import SingularGenerator
from qswalk.est import ESTCurve, est_laplace, est_sweep, est_time_integral
from qswalk.network import build_dimer_hamiltonian, build_dipole_hamiltonian, sample_disordered_network


def dimer(V, delta, Gamma, gamma, alpha):
    return SystemSpec(build_dimer_hamiltonian(V, delta), alpha, Gamma, gamma)


@pytest.mark.parametrize("alpha", [0.0, 0.3, 1.0])
def test_monomer(alpha):
    assert est_laplace(SystemSpec(np.zeros((1, 1)), alpha, 0.5, 1.0)) == pytest.approx(3.0, abs=1e-12)


def test_dimer_classical_end():
    assert est_laplace(dimer(1, 0, 0.5, 0.5, 1.0)) == pytest.approx(7.0, abs=1e-12)


def test_dimer_half_alpha():
    # hand evaluation: 2 + 1 + 2 - 4 * 0.25 / (0.5 * 1.5 + 0.25) = 4
    assert est_laplace(dimer(1, 0, 1, 1, 0.5)) == pytest.approx(4.0, abs=1e-12)


def test_unreachable_drain_is_reported():
    with pytest.raises(SingularGenerator):
        est_laplace(dimer(0, 1.0, 0.5, 0.5, 0.5))


@pytest.mark.parametrize(
    "spec, expected",
    [(SystemSpec(np.zeros((1, 1)), 0.4, 0.5, 1.0), 3.0), (dimer(1, 0, 0.5, 0.5, 1.0), 7.0)],
)
def test_time_integral_known_values(spec, expected):
    eta = est_time_integral(spec)
    assert abs(eta - expected) <= max(1e-6, 1e-4 * expected)


@given(seed=st.integers(0, 10_000), alpha=st.floats(0.05, 1), n=st.integers(2, 7))
@settings(max_examples=25, deadline=None)
def test_time_integral_agrees_with_laplace(seed, alpha, n):
    rng = np.random.default_rng(seed)
    H = random_graph_hamiltonian(n, seed, hop_rate=rng.uniform(0.3, 2))
    spec = SystemSpec(H, alpha, rng.uniform(0.2, 2), rng.uniform(0.2, 2))
    a, b = est_laplace(spec), est_time_integral(spec)
    assert abs(a - b) <= max(1e-6, 1e-4 * a)


@pytest.mark.parametrize("seed", [0, 4])
@pytest.mark.parametrize("alpha", [0.1, 1.0])
def test_time_integral_agrees_on_disordered_network(seed, alpha):
    H = build_dipole_hamiltonian(sample_disordered_network(7, 1.0, seed))
    spec = SystemSpec(H, alpha, 0.5, 1.0)
    a, b = est_laplace(spec), est_time_integral(spec)
    assert abs(a - b) <= max(1e-6, 1e-4 * a)


@given(seed=st.integers(0, 10_000), alpha=st.floats(0.01, 1), G1=st.floats(0.05, 5), G2=st.floats(0.05, 5))
@settings(max_examples=30, deadline=None)
def test_source_rate_enters_additively(seed, alpha, G1, G2):
    # alpha > 0: symmetric graphs can hide dark states from a purely coherent walk
    H = random_graph_hamiltonian(4, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        e1 = est_laplace(SystemSpec(H, alpha, G1, 0.8))
        e2 = est_laplace(SystemSpec(H, alpha, G2, 0.8))
    assert e1 - e2 == pytest.approx(1 / G1 - 1 / G2, abs=1e-8 * max(1.0, e1))


def test_sweep_monomer_constant():
    curve = est_sweep(SystemSpec(np.zeros((1, 1)), 0.0, 0.5, 1.0), np.linspace(0, 1, 11))
    assert np.abs(curve.etas - 3.0).max() < 1e-10
    assert curve.meta["Gamma"] == 0.5


def test_sweep_dimer_has_interior_maximum():
    alphas = np.linspace(0, 1, 101)
    curve = est_sweep(dimer(1, 0, 0.5, 0.5, 0.0), alphas)
    i = int(np.argmax(curve.etas))
    assert 0 < i < 100
    assert abs(alphas[i] - 0.77) <= 0.05


def test_sweep_detuned_dimer_decreasing():
    curve = est_sweep(dimer(1, 1.8, 0.5, 0.5, 0.0), np.linspace(0, 1, 51))
    assert np.all(np.diff(curve.etas) < 0)


def test_curve_csv_roundtrip(tmp_path):
    curve = ESTCurve([0, 0.5, 1], [3.0, 2.5, 2.0], {"gamma": 1.0, "seed": 4})
    path = tmp_path / "c.csv"
    text = curve.to_csv(path)
    assert text.splitlines()[:3] == ["# gamma=1.0", "# seed=4", "alpha,eta"]
    back = ESTCurve.from_csv(path)
    np.testing.assert_array_equal(back.etas, curve.etas)
    assert back.meta["seed"] == "4"
