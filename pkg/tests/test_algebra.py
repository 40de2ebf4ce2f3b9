import numpy as np
import pytest

from qpest import QpestError, apply_local, standard_element, tensor
from qpest.algebra import GATE_ARITY, is_hermitian, is_odd_prime, is_unitary

CLIFFORD_NAMES = ["I", "X", "Z", "F", "P", "SUM"]


def _pauli(a: int, b: int, d: int) -> np.ndarray:
    x = standard_element("X", d)
    z = standard_element("Z", d)
    return np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b)


def _proportional_to_some_pauli(m: np.ndarray, d: int, n_qudits: int) -> bool:
    paulis = []
    for a in range(d):
        for b in range(d):
            paulis.append(_pauli(a, b, d))
    if n_qudits == 2:
        paulis = [np.kron(p, q) for p in paulis for q in paulis]
    for p in paulis:
        nz = np.flatnonzero(np.abs(p.reshape(-1)) > 0.5)[0]
        phase = m.reshape(-1)[nz] / p.reshape(-1)[nz]
        if abs(abs(phase) - 1.0) < 1e-10 and np.abs(m - phase * p).max() < 1e-10:
            return True
    return False


def test_is_odd_prime():
    assert [n for n in range(20) if is_odd_prime(n)] == [3, 5, 7, 11, 13, 17, 19]


def test_ket():
    assert np.array_equal(standard_element("ket", 3, 0), [1, 0, 0])
    assert np.array_equal(standard_element("ket", 5, 4), [0, 0, 0, 0, 1])


def test_magic_state_value():
    xi = np.exp(2j * np.pi / 9)
    want = np.array([1.0, xi, xi**8]) / np.sqrt(3)
    assert np.abs(standard_element("magic", 3) - want).max() < 1e-15
    assert abs(np.linalg.norm(want) - 1.0) < 1e-12


def test_fourier_conjugates_z_to_x():
    f = standard_element("F", 3)
    z = standard_element("Z", 3)
    x = standard_element("X", 3)
    m = f.conj().T @ z @ f
    phase = m[1, 0] / x[1, 0]
    assert abs(abs(phase) - 1.0) < 1e-12
    assert np.abs(m - phase * x).max() < 1e-12


@pytest.mark.parametrize("d", [3, 5, 7])
@pytest.mark.parametrize("name", CLIFFORD_NAMES)
def test_catalog_gates_unitary(name, d):
    assert is_unitary(standard_element(name, d), 1e-12)


def test_m9_unitary_and_d3_only():
    assert is_unitary(standard_element("M9", 3), 1e-12)
    with pytest.raises(QpestError):
        standard_element("M9", 5)
    with pytest.raises(QpestError):
        standard_element("magic", 5)


def test_catalog_errors():
    with pytest.raises(QpestError):
        standard_element("H", 3)
    with pytest.raises(QpestError):
        standard_element("X", 4)
    with pytest.raises(QpestError):
        standard_element("ket", 3, 3)
    with pytest.raises(QpestError):
        standard_element("ket", 3)


@pytest.mark.parametrize("name", ["F", "P"])
def test_single_qudit_cliffords_map_paulis_to_paulis(name):
    u = standard_element(name, 3)
    for a in range(3):
        for b in range(3):
            if a == b == 0:
                continue
            conj = u @ _pauli(a, b, 3) @ u.conj().T
            assert _proportional_to_some_pauli(conj, 3, 1)


def test_sum_maps_paulis_to_paulis():
    u = standard_element("SUM", 3)
    for a in range(3):
        for b in range(3):
            p = np.kron(_pauli(a, b, 3), np.eye(3))
            q = np.kron(np.eye(3), _pauli(a, b, 3))
            assert _proportional_to_some_pauli(u @ p @ u.conj().T, 3, 2)
            assert _proportional_to_some_pauli(u @ q @ u.conj().T, 3, 2)


def test_tensor():
    eye3 = np.eye(3)
    assert np.array_equal(tensor([eye3]), eye3)
    assert np.array_equal(tensor([eye3, eye3]), np.eye(9))
    x, z = standard_element("X", 3), standard_element("Z", 3)
    assert abs(np.trace(tensor([x, z]))) < 1e-14
    a, b, c = x, z, standard_element("F", 3)
    assert np.abs(tensor([a, tensor([b, c])]) - tensor([tensor([a, b]), c])).max() < 1e-12
    with pytest.raises(QpestError):
        tensor([])


def test_apply_local_identity_and_shift():
    psi = np.zeros(9, dtype=complex)
    psi[0] = 1.0  # |00>
    out = apply_local(np.eye(3), (1,), psi, 2)
    assert np.abs(out - psi).max() < 1e-15
    out = apply_local(standard_element("X", 3), (0,), psi, 2)
    want = np.zeros(9)
    want[3] = 1.0  # |10>
    assert np.abs(out - want).max() < 1e-15


def test_apply_local_sum_gate():
    # SUM on (0,1) of |12> -> |10>
    psi = np.zeros(9, dtype=complex)
    psi[1 * 3 + 2] = 1.0
    out = apply_local(standard_element("SUM", 3), (0, 1), psi, 2)
    want = np.zeros(9)
    want[1 * 3 + 0] = 1.0
    assert np.abs(out - want).max() < 1e-15
    # reversed support: control is qudit 1
    psi = np.zeros(9, dtype=complex)
    psi[2 * 3 + 1] = 1.0  # |21>: control(q1)=1, target(q0)=2 -> |01>
    out = apply_local(standard_element("SUM", 3), (1, 0), psi, 2)
    want = np.zeros(9)
    want[0 * 3 + 1] = 1.0
    assert np.abs(out - want).max() < 1e-15


def test_apply_local_preserves_norm():
    rng = np.random.default_rng(5)
    psi = rng.normal(size=27) + 1j * rng.normal(size=27)
    psi /= np.linalg.norm(psi)
    z = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    q, r = np.linalg.qr(z)
    u = q * (np.diag(r) / np.abs(np.diag(r)))
    out = apply_local(u, (2, 0), psi, 3)
    assert abs(np.linalg.norm(out) - 1.0) < 1e-10


def test_apply_local_errors():
    psi = np.zeros(9, dtype=complex)
    psi[0] = 1.0
    with pytest.raises(QpestError):
        apply_local(np.eye(3), (0, 0), psi, 2)
    with pytest.raises(QpestError):
        apply_local(np.eye(3), (2,), psi, 2)
    with pytest.raises(QpestError):
        apply_local(np.eye(9), (0,), psi, 2)


def test_hermitian_predicate():
    assert is_hermitian(np.diag([1.0, 2.0, 3.0]))
    assert not is_hermitian(standard_element("X", 3))
    assert GATE_ARITY["SUM"] == 2
