"""Shared fixtures and circuit generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from qpest import Circuit, GateOp, wigner_frame


@pytest.fixture(scope="session")
def wigner3():
    return wigner_frame(3)


@pytest.fixture(scope="session")
def wigner5():
    return wigner_frame(5)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_mixed_circuit(rng: np.random.Generator, n_max: int = 3, l_max: int = 6) -> Circuit:
    """Random qutrit circuit mixing Cliffords, M9 gates, explicit unitaries,
    magic and stabilizer and generic pure inputs, ket/id effects."""
    n = int(rng.integers(1, n_max + 1))
    depth = int(rng.integers(0, l_max + 1))
    states = []
    for _ in range(n):
        r = rng.random()
        if r < 0.4:
            states.append(("ket", int(rng.integers(3))))
        elif r < 0.7:
            states.append(("magic",))
        else:
            states.append(("vec", random_pure_state(rng, 3)))
    gates = []
    for _ in range(depth):
        r = rng.random()
        q = int(rng.integers(n))
        if r < 0.35:
            gates.append(GateOp(["F", "P", "X", "Z"][int(rng.integers(4))], (q,)))
        elif r < 0.55 and n > 1:
            c = q
            t = int(rng.integers(n - 1))
            if t >= c:
                t += 1
            gates.append(GateOp("SUM", (c, t)))
        elif r < 0.75:
            gates.append(GateOp("M9", (q,)))
        elif r < 0.9 or n == 1:
            gates.append(GateOp("U", (q,), random_unitary(rng, 3)))
        else:
            c = q
            t = int(rng.integers(n - 1))
            if t >= c:
                t += 1
            gates.append(GateOp("U", (c, t), random_unitary(rng, 9)))
    effects = []
    for _ in range(n):
        r = rng.random()
        if r < 0.6:
            effects.append(("ket", int(rng.integers(3))))
        else:
            effects.append(("id",))
    return Circuit(dim=3, n_qudits=n, states=states, gates=gates, effects=effects)


@pytest.fixture(scope="session")
def mixed_circuits():
    """A reusable batch of 60 random small circuits (seeded)."""
    rng = np.random.default_rng(20240811)
    return [random_mixed_circuit(rng) for _ in range(60)]


def random_clifford_word(rng: np.random.Generator, d: int, arity: int) -> np.ndarray:
    """Random word over the Clifford generators, as a dense matrix."""
    from qpest import standard_element

    names = ["F", "P", "X", "Z"]
    if arity == 1:
        u = np.eye(d, dtype=complex)
        for _ in range(int(rng.integers(1, 6))):
            u = standard_element(names[int(rng.integers(4))], d) @ u
        return u
    u = np.eye(d * d, dtype=complex)
    for _ in range(int(rng.integers(1, 6))):
        r = int(rng.integers(6))
        if r < 4:
            g = standard_element(names[r], d)
            g = np.kron(g, np.eye(d)) if rng.random() < 0.5 else np.kron(np.eye(d), g)
        else:
            g = standard_element("SUM", d)
            if r == 5:  # reversed control/target
                g = g.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)
        u = g @ u
    return u


def enumerate_path_weights(rep) -> np.ndarray:
    """Signed weight of every trajectory, one tensor axis per time step
    (last axis is lam_0).  Brute-force oracle for tiny circuits only."""
    from qpest.oracle import _embed_joint_table

    L = rep.n_gates
    m_local = rep.d * rep.d
    m = m_local ** rep.n_qudits
    assert m ** (L + 1) <= 2_000_000
    tables = [
        _embed_joint_table(g.table_clipped, g.support, m_local, rep.n_qudits)
        for g in rep.gates
    ]
    init = rep.init_clipped[0]
    eff = rep.effect_clipped[0]
    for q in range(1, rep.n_qudits):
        init = np.kron(init, rep.init_clipped[q])
        eff = np.kron(eff, rep.effect_clipped[q])
    letters = "abcdefgh"
    operands = [eff]
    script = letters[L]
    for l in range(L - 1, -1, -1):
        operands.append(tables[l])
        script += "," + letters[l + 1] + letters[l]
    operands.append(init)
    script += "," + letters[0] + "->" + letters[: L + 1][::-1]
    return np.einsum(script, *operands)
