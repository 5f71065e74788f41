import numpy as np
import pytest

from qswalk.network import build_graph_hamiltonian

ACCEPTANCE_LINES = []


def random_adjacency(n, rng, p=0.5):
    """Connected random graph: a random spanning path plus extra edges."""
    A = np.zeros((n, n))
    order = rng.permutation(n)
    for a, b in zip(order[:-1], order[1:]):
        A[a, b] = A[b, a] = 1
    extra = np.triu(rng.random((n, n)) < p, 1)
    A = np.maximum(A, extra + extra.T)
    np.fill_diagonal(A, 0)
    return A


def random_graph_hamiltonian(n, seed, hop_rate=1.0):
    return build_graph_hamiltonian(random_adjacency(n, np.random.default_rng(seed)), hop_rate)


def lindblad_rhs(H_full, jumps, rho):
    """Direct matrix-form Lindblad right-hand side; independent of the Kronecker assembly."""
    out = -1j * (H_full @ rho - rho @ H_full)
    for rate, L in jumps:
        Ld = L.conj().T
        out = out + rate * (L @ rho @ Ld - 0.5 * (Ld @ L @ rho + rho @ Ld @ L))
    return out


def reference_jumps(spec):
    """Jump operators and rates of a SystemSpec, written out one by one."""
    n, dim = spec.n_nodes, spec.dim
    jumps = []

    def ket_bra(k, l):
        m = np.zeros((dim, dim))
        m[k, l] = 1
        return m

    for k in range(n):
        for l in range(n):
            if spec.rates[k, l]:
                jumps.append((spec.alpha * spec.rates[k, l], ket_bra(k + 1, l + 1)))
    jumps.append((spec.source_rate, ket_bra(spec.source_node, 0)))
    jumps.append((spec.drain_rate, ket_bra(n + 1, spec.drain_node)))
    H = np.zeros((dim, dim))
    H[1 : n + 1, 1 : n + 1] = (1 - spec.alpha) * spec.hamiltonian
    return H, jumps


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
