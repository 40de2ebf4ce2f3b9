import numpy as np
import pytest

from qpest import (
    QpestError,
    forward_bound,
    make_frame,
    negativity_effect,
    negativity_state,
    rep_effect,
    rep_state,
    rep_unitary,
    reverse_bound,
    reverse_rep,
    standard_element,
    wigner_frame,
)
from qpest.frames import CLIP, build_circuit_rep
from tests.conftest import random_clifford_word, random_unitary


def _dm(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    return np.outer(v, v.conj())


def _ket_dm(j: int, d: int = 3) -> np.ndarray:
    return _dm(standard_element("ket", d, j))


def _magic_dm() -> np.ndarray:
    return _dm(standard_element("magic", 3))


# ---------------------------------------------------------------------------
# Frame construction


@pytest.mark.parametrize("d", [3, 5, 7])
def test_wigner_frame_basics(d, wigner3):
    f = wigner_frame(d) if d != 3 else wigner3
    assert f.n_points == d * d
    assert len(f.points) == d * d
    # each F(lam) has trace 1/d
    traces = np.einsum("laa->l", f.F)
    assert np.abs(traces - 1.0 / d).max() < 1e-12
    assert np.abs(f.F.sum(axis=0) - np.eye(d)).max() < 1e-10


@pytest.mark.parametrize("bad", [2, 4, 9, 15])
def test_wigner_frame_rejects_bad_dimension(bad):
    with pytest.raises(QpestError, match="odd prime"):
        wigner_frame(bad)


def test_wigner_frame_cap():
    with pytest.raises(QpestError, match="cap"):
        wigner_frame(17)


@pytest.mark.parametrize("d", [3, 5])
def test_duality_reconstructs_random_hermitians(d):
    f = wigner_frame(d)
    rng = np.random.default_rng(d)
    for _ in range(50):
        z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        a = z + z.conj().T
        rebuilt = np.einsum("lij,l->ij", f.G, np.einsum("lab,ba->l", f.F, a).real)
        assert np.abs(rebuilt - a).max() < 1e-9


def test_make_frame_rejects_broken_pairs(wigner3):
    with pytest.raises(QpestError):
        make_frame(3, wigner3.F, 2.0 * wigner3.G)
    with pytest.raises(QpestError):
        make_frame(3, 2.0 * wigner3.F, wigner3.G)


# ---------------------------------------------------------------------------
# States


def test_rep_state_ket0(wigner3):
    w = rep_state(wigner3, [_ket_dm(0)]).vectors[0]
    on_line = [wigner3.index(0, p) for p in range(3)]
    assert np.abs(w[on_line] - 1.0 / 3.0).max() < 1e-12
    off = [i for i in range(9) if i not in on_line]
    assert np.abs(w[off]).max() < 1e-12
    assert abs(w.sum() - 1.0) < 1e-10


def test_rep_state_maximally_mixed(wigner3):
    w = rep_state(wigner3, [np.eye(3) / 3.0])
    assert np.abs(w.vectors[0] - 1.0 / 9.0).max() < 1e-12
    assert abs(negativity_state(w) - 1.0) < 1e-12


def test_rep_state_magic_is_negative(wigner3):
    w = rep_state(wigner3, [_magic_dm()])
    assert w.vectors[0].min() < -1e-3
    assert negativity_state(w) > 1.0 + 1e-3


def test_rep_state_validation(wigner3):
    with pytest.raises(QpestError, match="unit trace"):
        rep_state(wigner3, [np.eye(3)])
    with pytest.raises(QpestError, match="Hermitian"):
        rep_state(wigner3, [np.triu(np.ones((3, 3))) / 2.0])
    with pytest.raises(QpestError, match="positive"):
        rep_state(wigner3, [np.diag([1.5, -0.5, 0.0])])


def test_state_negativity_values(wigner3):
    assert abs(negativity_state(rep_state(wigner3, [_ket_dm(0)] * 3)) - 1.0) < 1e-10
    m9 = np.abs(rep_state(wigner3, [_magic_dm()]).vectors[0]).sum()
    w = rep_state(wigner3, [_magic_dm(), _ket_dm(0), _ket_dm(1)])
    assert abs(negativity_state(w) - m9) < 1e-12
    assert m9 > 1.5


# ---------------------------------------------------------------------------
# Gates


def test_rep_identity_gate_is_delta(wigner3):
    g = rep_unitary(wigner3, np.eye(3), (0,))
    assert np.abs(g.table - np.eye(9)).max() < 1e-10
    assert abs(g.negativity - 1.0) < 1e-10
    assert g.permutation is not None
    assert np.array_equal(g.permutation, np.arange(9))


def test_rep_fourier_is_permutation(wigner3):
    g = rep_unitary(wigner3, standard_element("F", 3), (0,))
    assert g.permutation is not None
    assert sorted(g.permutation.tolist()) == list(range(9))
    assert abs(g.negativity - 1.0) < 1e-10


def test_rep_m9_has_negativity(wigner3):
    g = rep_unitary(wigner3, standard_element("M9", 3), (0,))
    assert g.permutation is None
    assert g.point_negativity.max() > 1.0 + 1e-6
    assert g.negativity == g.point_negativity.max()


def test_rep_unitary_columns_normalized(wigner3):
    rng = np.random.default_rng(11)
    for arity in (1, 2):
        u = random_unitary(rng, 3 ** arity)
        g = rep_unitary(wigner3, u, (0,) if arity == 1 else (0, 1))
        assert np.abs(g.table.sum(axis=0) - 1.0).max() < 1e-10
        assert g.negativity >= 1.0 - 1e-12
        assert np.abs(g.point_negativity - np.abs(g.table).sum(axis=0)).max() == 0.0


def test_rep_unitary_global_phase_invariance(wigner3):
    rng = np.random.default_rng(3)
    u = random_unitary(rng, 3)
    a = rep_unitary(wigner3, u, (0,))
    b = rep_unitary(wigner3, np.exp(0.7j) * u, (0,))
    assert np.abs(a.table - b.table).max() < 1e-12


def test_rep_unitary_validation(wigner3):
    with pytest.raises(QpestError, match="not unitary"):
        rep_unitary(wigner3, np.ones((3, 3)), (0,))
    with pytest.raises(QpestError, match="arity"):
        rep_unitary(wigner3, np.eye(27), (0, 1, 2))
    with pytest.raises(QpestError, match="repeated"):
        rep_unitary(wigner3, np.eye(9), (0, 0))
    with pytest.raises(QpestError, match="shape"):
        rep_unitary(wigner3, np.eye(3), (0, 1))


def test_clifford_nonnegativity_hundred_gates(wigner3):
    rng = np.random.default_rng(77)
    for i in range(100):
        arity = 1 if i % 2 == 0 else 2
        u = random_clifford_word(rng, 3, arity)
        g = rep_unitary(wigner3, u, (0,) if arity == 1 else (0, 1))
        assert abs(g.negativity - 1.0) <= 1e-10
        t = g.table
        assert np.all((np.abs(t) <= 1e-10) | (np.abs(t - 1.0) <= 1e-10))
        assert g.permutation is not None


# ---------------------------------------------------------------------------
# Effects


def test_rep_effect_ket0(wigner3):
    e = rep_effect(wigner3, [_ket_dm(0)])
    on_line = [wigner3.index(0, p) for p in range(3)]
    v = e.vectors[0]
    assert np.abs(v[on_line] - 1.0).max() < 1e-10
    assert np.abs(np.delete(v, on_line)).max() < 1e-10
    assert abs(e.max_abs - 1.0) < 1e-10
    assert abs(negativity_effect(e) - 3.0) < 1e-10


def test_rep_effect_identity_all_ones(wigner3):
    e = rep_effect(wigner3, [np.eye(3)])
    assert np.abs(e.vectors[0] - 1.0).max() < 1e-10
    # literal 1-norm over the d^2 phase points: d * Tr(E) = 9
    assert abs(negativity_effect(e) - 9.0) < 1e-10


def test_rep_effect_zero(wigner3):
    e = rep_effect(wigner3, [np.zeros((3, 3))])
    assert np.abs(e.vectors[0]).max() == 0.0
    assert e.max_abs == 0.0
    assert negativity_effect(e) == 0.0


def test_rep_effect_validation(wigner3):
    with pytest.raises(QpestError, match="eigenvalues"):
        rep_effect(wigner3, [np.diag([1.5, 0.0, 0.0])])
    with pytest.raises(QpestError, match="Hermitian"):
        rep_effect(wigner3, [np.triu(np.ones((3, 3)))])


# ---------------------------------------------------------------------------
# Whole-circuit bounds and reversal


def _rep_for(frame, states, unitaries, effects):
    return build_circuit_rep(frame, states, unitaries, effects)


def test_forward_bound_stabilizer_circuit(wigner3):
    f3 = standard_element("F", 3)
    sumg = standard_element("SUM", 3)
    rep = _rep_for(
        wigner3,
        [_ket_dm(0), _ket_dm(0)],
        [(f3, (0,)), (sumg, (0, 1))],
        [_ket_dm(0), np.eye(3)],
    )
    assert abs(forward_bound(rep) - 1.0) < 1e-10


def test_forward_bound_magic_product(wigner3):
    m9 = np.abs(rep_state(wigner3, [_magic_dm()]).vectors[0]).sum()
    rep = _rep_for(
        wigner3,
        [_magic_dm(), _magic_dm(), _ket_dm(0)],
        [(standard_element("F", 3), (2,))],
        [_ket_dm(0), np.eye(3), np.eye(3)],
    )
    assert abs(forward_bound(rep) - m9 ** 2) < 1e-12 * m9 ** 2


def test_forward_bound_m9_gate_multiplies(wigner3):
    base = _rep_for(wigner3, [_ket_dm(0)], [], [_ket_dm(0)])
    g = rep_unitary(wigner3, standard_element("M9", 3), (0,))
    with_gate = _rep_for(
        wigner3, [_ket_dm(0)], [(standard_element("M9", 3), (0,))], [_ket_dm(0)]
    )
    assert abs(with_gate.m_forward - base.m_forward * g.negativity) < 1e-12


def test_reverse_bound_stabilizer_is_one(wigner3):
    rep = _rep_for(
        wigner3,
        [_ket_dm(0), _ket_dm(1)],
        [(standard_element("SUM", 3), (1, 0))],
        [_ket_dm(0), _ket_dm(1)],
    )
    assert abs(reverse_bound(rep) - 1.0) < 1e-10


def test_reverse_bound_magic_qutrit(wigner3):
    rep = _rep_for(wigner3, [_magic_dm()], [], [_ket_dm(0)])
    w = rep_state(wigner3, [_magic_dm()]).vectors[0]
    want = 3.0 * np.abs(w).max()  # M_E(|0><0|) = 3 times max |W_rho|
    assert abs(reverse_bound(rep) - want) < 1e-12


def test_reverse_rep_swaps_and_matches_bounds(wigner3):
    rng = np.random.default_rng(8)
    rep = _rep_for(
        wigner3,
        [_magic_dm(), _ket_dm(0)],
        [(random_unitary(rng, 9), (0, 1)), (standard_element("M9", 3), (1,))],
        [_ket_dm(0), np.eye(3)],
    )
    rev = reverse_rep(rep)
    assert rev.n_qudits == rep.n_qudits
    assert rev.n_gates == rep.n_gates
    # forward bound of the reversed representation is the reverse bound
    assert abs(rev.m_forward - rep.m_reverse) < 1e-12 * max(1.0, rep.m_reverse)
    assert abs(rev.m_reverse - rep.m_forward) < 1e-12 * max(1.0, rep.m_forward)
    # reversing twice restores the original tables
    back = reverse_rep(rev)
    for g0, g1 in zip(rep.gates, back.gates):
        assert np.abs(g0.table - g1.table).max() < 1e-12


def test_reverse_rep_zero_effect_rejected(wigner3):
    rep = _rep_for(wigner3, [_ket_dm(0)], [], [np.zeros((3, 3))])
    with pytest.raises(QpestError, match="zero effect"):
        reverse_rep(rep)


def test_ratio_identity_on_random_circuits(wigner3, mixed_circuits):
    from qpest import represent

    for circ in mixed_circuits[:25]:
        rep = represent(circ, wigner3)
        lhs = rep.m_reverse / rep.m_forward
        gate_ratio = 1.0
        for g, a in zip(rep.gates, rep.adjoint_gates):
            gate_ratio *= a.negativity / g.negativity
        rhs = (
            (rep.m_effect / rep.m_state)
            * (rep.state_max_abs / rep.effect_max_abs)
            * gate_ratio
        )
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_born_consistency_single_qudit(wigner3):
    rng = np.random.default_rng(21)
    for _ in range(20):
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
        u = random_unitary(rng, 3)
        evec = rng.normal(size=3) + 1j * rng.normal(size=3)
        evec /= np.linalg.norm(evec)
        e = np.outer(evec, evec.conj())
        w_rho = rep_state(wigner3, [rho]).vectors[0]
        w_u = rep_unitary(wigner3, u, (0,)).table
        w_e = rep_effect(wigner3, [e]).vectors[0]
        lhs = float(w_e @ w_u @ w_rho)
        rhs = float(np.trace(e @ u @ rho @ u.conj().T).real)
        assert abs(lhs - rhs) < 1e-9


def test_clip_constant_sane():
    assert 0.0 < CLIP <= 1e-10
