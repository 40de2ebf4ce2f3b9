"""Discrete Wigner frames and quasiprobability representations.

A frame over the single-qudit phase space Lambda = Z_d x Z_d is a pair of
Hermitian operator lists ``F(lam)``, ``G(lam)`` reconstructing every
operator through ``A = sum_lam G(lam) Tr[A F(lam)]``.  Circuit elements map
to real distributions on Lambda^N:

    state   rho -> W_rho(lam)      = Tr[F(lam) rho]          (sums to 1)
    gate    U   -> W_U(lam'|lam)   = Tr[F(lam') U G(lam) U+]  (columns sum to 1)
    effect  E   -> W(E|lam)        = Tr[E G(lam)]

The 1-norms of these distributions (their "negativity") control how
expensive each element is for Monte Carlo estimation; nonnegatively
represented elements cost nothing extra.

The built-in frame is the odd-prime-d discrete Wigner function built from
phase-point operators

    D(q,p) = omega^{qp/2} X^q Z^p      (1/2 the inverse of 2 mod d)
    A_0    = (1/d) sum_{q,p} D(q,p)    (the parity operator)
    A(q,p) = D(q,p) A_0 D(q,p)+,       F = A/d,  G = A.

With this convention every stabilizer state, Clifford gate and basis
measurement is nonnegatively represented.  Any other (F, G) pair that
passes :func:`verify_frame` is accepted wherever a Frame is.

Phase points are indexed ``q*d + p``; joint points of a k-qudit gate are
indexed ``i_0 * d^2 + i_1`` in support order (first support qudit most
significant).  Gate tables are laid out ``table[lam_out, lam_in]``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from .algebra import is_hermitian, is_odd_prime, is_unitary, omega
from .errors import QpestError

# Entries smaller than this are treated as exact zeros when sampling
# tables are built, so sign noise cannot manufacture spurious negativity.
CLIP = 1e-12

_FRAME_TOL = 1e-10
_MAX_WIGNER_D = 13


# ---------------------------------------------------------------------------
# Frame construction


@dataclass(frozen=True)
class Frame:
    """Operator frame (F) and dual frame (G) over one qudit's phase space."""

    d: int
    points: tuple[tuple[int, int], ...]
    F: np.ndarray  # (d^2, d, d) complex, Hermitian slices
    G: np.ndarray  # (d^2, d, d)
    fingerprint: str = field(compare=False, default="")

    @property
    def n_points(self) -> int:
        return self.d * self.d

    def index(self, q: int, p: int) -> int:
        return (q % self.d) * self.d + (p % self.d)


def verify_frame(d: int, F: np.ndarray, G: np.ndarray, tol: float = _FRAME_TOL) -> None:
    """Check normalization sum_lam F = I and exact duality of (F, G)."""
    if np.abs(F.sum(axis=0) - np.eye(d)).max() > tol:
        raise QpestError("frame is not normalized: sum_lam F(lam) != I")
    for name, stack in (("F", F), ("G", G)):
        if np.abs(stack - stack.conj().transpose(0, 2, 1)).max() > tol:
            raise QpestError(f"{name}(lam) must all be Hermitian")
    # A = sum_lam G(lam) Tr[A F(lam)] for all A  <=>
    # sum_lam G[i,j] F[a,b] == delta_{ib} delta_{ja}
    e = np.einsum("lij,lab->ijab", G, F)
    ident = np.einsum("ib,ja->ijab", np.eye(d), np.eye(d))
    if np.abs(e - ident).max() > tol:
        raise QpestError("duality identity fails for the supplied (F, G)")


def make_frame(d: int, F: np.ndarray, G: np.ndarray) -> Frame:
    """Build a Frame from explicit operator stacks, validating invariants."""
    F = np.asarray(F, dtype=complex)
    G = np.asarray(G, dtype=complex)
    if F.shape != (d * d, d, d) or G.shape != (d * d, d, d):
        raise QpestError("frame stacks must have shape (d^2, d, d)")
    verify_frame(d, F, G)
    points = tuple((q, p) for q in range(d) for p in range(d))
    fp = hashlib.sha1(
        str(d).encode() + F.tobytes() + G.tobytes()
    ).hexdigest()
    return Frame(d=d, points=points, F=F, G=G, fingerprint=fp)


def wigner_frame(d: int) -> Frame:
    """The discrete Wigner frame for odd prime d (d <= 13)."""
    if not is_odd_prime(d):
        raise QpestError(f"d must be an odd prime, got {d}")
    if d > _MAX_WIGNER_D:
        raise QpestError(f"d = {d} exceeds the supported cap of {_MAX_WIGNER_D}")
    w = omega(d)
    inv2 = pow(2, -1, d)
    X = np.zeros((d, d), dtype=complex)
    for j in range(d):
        X[(j + 1) % d, j] = 1.0
    Z = np.diag(w ** np.arange(d))
    disp = np.empty((d * d, d, d), dtype=complex)
    for q in range(d):
        xq = np.linalg.matrix_power(X, q)
        for p in range(d):
            disp[q * d + p] = w ** (inv2 * q * p % d) * xq @ np.linalg.matrix_power(Z, p)
    a0 = disp.sum(axis=0) / d
    A = np.einsum("lab,bc,ldc->lad", disp, a0, disp.conj())
    return make_frame(d, A / d, A)


# ---------------------------------------------------------------------------
# Quasiprobability containers


@dataclass
class StateQuasi:
    """Per-qudit real distributions of a product input, rows of shape (d^2,)."""

    vectors: np.ndarray  # (N, d^2)

    @property
    def per_qudit_negativity(self) -> np.ndarray:
        return np.abs(self.vectors).sum(axis=1)

    @property
    def negativity(self) -> float:
        return float(np.prod(self.per_qudit_negativity))

    @property
    def max_abs(self) -> float:
        return float(np.prod(np.abs(self.vectors).max(axis=1)))


@dataclass
class EffectQuasi:
    """Per-qudit effect distributions W(E_n|lam) with cached maxima."""

    vectors: np.ndarray  # (N, d^2)
    per_qudit_max_abs: np.ndarray = field(init=False)
    per_qudit_negativity: np.ndarray = field(init=False)

    def __post_init__(self):
        a = np.abs(self.vectors)
        self.per_qudit_max_abs = a.max(axis=1)
        self.per_qudit_negativity = a.sum(axis=1)

    @property
    def negativity(self) -> float:
        return float(np.prod(self.per_qudit_negativity))

    @property
    def max_abs(self) -> float:
        return float(np.prod(self.per_qudit_max_abs))


@dataclass
class GateQuasi:
    """Transition quasidistribution of one gate plus its sampling tables.

    ``table[lam_out, lam_in]`` is the raw representation.  The sampling
    model is built from a copy with sub-CLIP entries zeroed: ``cum_t[lam_in]``
    is the cumulative conditional distribution over outputs, ``sign_t`` the
    matching sign lookup, and ``permutation`` is set when every column is a
    single unit entry (Clifford gates), enabling a draw-free update.
    """

    support: tuple[int, ...]
    table: np.ndarray                    # (m, m) raw
    point_negativity: np.ndarray         # (m,) raw column 1-norms
    negativity: float                    # max point negativity
    table_clipped: np.ndarray
    point_negativity_clipped: np.ndarray
    cum_t: np.ndarray                    # (m, m) rows: cumulative over outputs
    sign_t: np.ndarray                   # (m, m) int8, [lam_in, lam_out]
    permutation: np.ndarray | None

    @property
    def arity(self) -> int:
        return len(self.support)


def _build_gate_tables(table: np.ndarray):
    m = table.shape[0]
    clipped = np.where(np.abs(table) < CLIP, 0.0, table)
    col_abs = np.abs(clipped)
    col_sums = col_abs.sum(axis=0)
    if np.any(col_sums == 0.0):
        raise QpestError("gate representation has an all-zero column")
    cum_t = np.cumsum((col_abs / col_sums).T, axis=1)
    cum_t[:, -1] = 1.0
    sign_t = np.sign(clipped.T).astype(np.int8)
    perm = None
    if int((col_abs > 0).sum()) == m:
        hits = col_abs.argmax(axis=0)
        if np.abs(clipped[hits, np.arange(m)] - 1.0).max() <= 1e-10:
            perm = hits.astype(np.int64)
    return clipped, col_sums, cum_t, sign_t, perm


# ---------------------------------------------------------------------------
# Representation maps (state / unitary / effect)


_stack_cache: dict[tuple[str, int], tuple[np.ndarray, np.ndarray]] = {}
_gate_cache: dict[tuple[str, int, bytes], GateQuasi] = {}


def _joint_stacks(frame: Frame, arity: int):
    """F and G tensored over ``arity`` qudits: shape (d^{2k}, d^k, d^k)."""
    key = (frame.fingerprint, arity)
    hit = _stack_cache.get(key)
    if hit is not None:
        return hit
    if arity == 1:
        stacks = (frame.F, frame.G)
    else:
        d = frame.d
        m, dim = d * d, d
        f = np.einsum("iab,jcd->ijacbd", frame.F, frame.F).reshape(
            m * m, dim * dim, dim * dim
        )
        g = np.einsum("iab,jcd->ijacbd", frame.G, frame.G).reshape(
            m * m, dim * dim, dim * dim
        )
        stacks = (f, g)
    if len(_stack_cache) > 8:
        _stack_cache.clear()
    _stack_cache[key] = stacks
    return stacks


def rep_state(frame: Frame, states) -> StateQuasi:
    """Represent per-qudit density matrices: vector entries Tr[F(lam) rho]."""
    rows = []
    for n, rho in enumerate(states):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (frame.d, frame.d):
            raise QpestError(f"state {n} has shape {rho.shape}, want ({frame.d}, {frame.d})")
        if not is_hermitian(rho, 1e-10):
            raise QpestError(f"state {n} is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-10:
            raise QpestError(f"state {n} does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise QpestError(f"state {n} is not positive semidefinite")
        v = np.einsum("lab,ba->l", frame.F, rho)
        if np.abs(v.imag).max() > 1e-10:
            raise QpestError(f"state {n} produced a non-real distribution")
        rows.append(v.real)
    return StateQuasi(vectors=np.array(rows))


def rep_unitary(frame: Frame, u: np.ndarray, support) -> GateQuasi:
    """Represent a 1- or 2-qudit unitary as a transition table on phase space."""
    support = tuple(int(q) for q in support)
    k = len(support)
    if k not in (1, 2):
        raise QpestError(f"gate arity must be 1 or 2, got {k}")
    if len(set(support)) != k:
        raise QpestError(f"repeated qudit in gate support {support}")
    u = np.asarray(u, dtype=complex)
    dim = frame.d ** k
    if u.shape != (dim, dim):
        raise QpestError(f"gate matrix shape {u.shape} does not match support {support}")
    if not is_unitary(u, 1e-8):
        raise QpestError("gate matrix is not unitary")

    key = (frame.fingerprint, k, u.tobytes())
    hit = _gate_cache.get(key)
    if hit is not None:
        return replace(hit, support=support)

    fk, gk = _joint_stacks(frame, k)
    m = fk.shape[0]
    v = (u @ gk) @ u.conj().T                      # (m, dim, dim)
    w = fk.reshape(m, dim * dim) @ v.transpose(0, 2, 1).reshape(m, dim * dim).T
    if np.abs(w.imag).max() > 1e-10:
        raise QpestError("gate representation is not real; invalid frame")
    table = np.ascontiguousarray(w.real)
    col_sums = table.sum(axis=0)
    if np.abs(col_sums - 1.0).max() > 1e-10:
        raise QpestError("gate columns do not sum to one; invalid frame")
    clipped, cs, cum_t, sign_t, perm = _build_gate_tables(table)
    point_neg = np.abs(table).sum(axis=0)
    gate = GateQuasi(
        support=support,
        table=table,
        point_negativity=point_neg,
        negativity=float(point_neg.max()),
        table_clipped=clipped,
        point_negativity_clipped=cs,
        cum_t=cum_t,
        sign_t=sign_t,
        permutation=perm,
    )
    if len(_gate_cache) > 128:
        _gate_cache.clear()
    _gate_cache[key] = gate
    return gate


def rep_effect(frame: Frame, effects) -> EffectQuasi:
    """Represent per-qudit measurement effects: entries Tr[E G(lam)]."""
    rows = []
    for n, e in enumerate(effects):
        e = np.asarray(e, dtype=complex)
        if e.shape != (frame.d, frame.d):
            raise QpestError(f"effect {n} has shape {e.shape}, want ({frame.d}, {frame.d})")
        if not is_hermitian(e, 1e-10):
            raise QpestError(f"effect {n} is not Hermitian")
        ev = np.linalg.eigvalsh(e)
        if ev.min() < -1e-10 or ev.max() > 1.0 + 1e-10:
            raise QpestError(f"effect {n} has eigenvalues outside [0, 1]")
        v = np.einsum("lab,ba->l", frame.G, e)
        if np.abs(v.imag).max() > 1e-10:
            raise QpestError(f"effect {n} produced a non-real distribution")
        rows.append(v.real)
    return EffectQuasi(vectors=np.array(rows))


def negativity_state(w: StateQuasi) -> float:
    """Product over qudits of the 1-norms of the input distributions."""
    return w.negativity


def negativity_effect(w: EffectQuasi) -> float:
    """Product over qudits of the 1-norms of the effect distributions."""
    return w.negativity


# ---------------------------------------------------------------------------
# Whole-circuit representation


@dataclass
class CircuitRep:
    """Quasiprobability representation of a full circuit, ready to sample.

    Holds the per-element distributions, the resolved matrices they came
    from (needed for direction reversal and exact oracles), the negativity
    bounds of both simulation directions, and the clipped sampling tables
    for the initial distribution.  Immutable once built; safe to share
    across worker threads.
    """

    frame: Frame
    n_qudits: int
    state: StateQuasi
    gates: list[GateQuasi]
    effect: EffectQuasi
    states: list[np.ndarray]
    unitaries: list[tuple[np.ndarray, tuple[int, ...]]]
    effects: list[np.ndarray]
    adjoint_gates: list[GateQuasi]
    m_state: float
    m_effect: float
    state_max_abs: float
    effect_max_abs: float
    m_forward: float
    m_reverse: float
    init_clipped: np.ndarray      # (N, d^2)
    init_cum: np.ndarray          # (N, d^2)
    init_sign: np.ndarray         # (N, d^2) int8
    init_negativity: np.ndarray   # (N,) clipped 1-norms
    m_init_sampling: float        # product of init_negativity
    effect_clipped: np.ndarray    # (N, d^2) terminal factors for estimates

    @property
    def d(self) -> int:
        return self.frame.d

    @property
    def n_gates(self) -> int:
        return len(self.gates)


def _init_tables(vectors: np.ndarray):
    clipped = np.where(np.abs(vectors) < CLIP, 0.0, vectors)
    a = np.abs(clipped)
    sums = a.sum(axis=1)
    if np.any(sums == 0.0):
        raise QpestError("initial distribution is identically zero on some qudit")
    cum = np.cumsum(a / sums[:, None], axis=1)
    cum[:, -1] = 1.0
    return clipped, cum, np.sign(clipped).astype(np.int8), sums


def _assemble(
    frame: Frame,
    init: StateQuasi,
    gates: list[GateQuasi],
    adjoint_gates: list[GateQuasi],
    term: EffectQuasi,
    states,
    unitaries,
    effects,
) -> CircuitRep:
    n = init.vectors.shape[0]
    gate_neg = float(np.prod([g.negativity for g in gates])) if gates else 1.0
    adj_neg = float(np.prod([g.negativity for g in adjoint_gates])) if adjoint_gates else 1.0
    m_state = init.negativity
    m_effect = term.negativity
    init_clipped, init_cum, init_sign, init_sums = _init_tables(init.vectors)
    return CircuitRep(
        frame=frame,
        n_qudits=n,
        state=init,
        gates=gates,
        effect=term,
        states=list(states),
        unitaries=list(unitaries),
        effects=list(effects),
        adjoint_gates=adjoint_gates,
        m_state=m_state,
        m_effect=m_effect,
        state_max_abs=init.max_abs,
        effect_max_abs=term.max_abs,
        m_forward=m_state * gate_neg * term.max_abs,
        m_reverse=m_effect * adj_neg * init.max_abs,
        init_clipped=init_clipped,
        init_cum=init_cum,
        init_sign=init_sign,
        init_negativity=init_sums,
        m_init_sampling=float(np.prod(init_sums)),
        effect_clipped=np.where(np.abs(term.vectors) < CLIP, 0.0, term.vectors),
    )


def build_circuit_rep(frame: Frame, states, unitaries, effects) -> CircuitRep:
    """Represent resolved circuit elements (matrices) over ``frame``.

    ``states`` and ``effects`` are per-qudit (d, d) matrices; ``unitaries``
    is an ordered list of ``(matrix, support)`` pairs.
    """
    states = [np.asarray(s, dtype=complex) for s in states]
    effects = [np.asarray(e, dtype=complex) for e in effects]
    unitaries = [(np.asarray(u, dtype=complex), tuple(s)) for u, s in unitaries]
    init = rep_state(frame, states)
    gates = [rep_unitary(frame, u, s) for u, s in unitaries]
    adj = [rep_unitary(frame, u.conj().T, s) for u, s in unitaries]
    term = rep_effect(frame, effects)
    return _assemble(frame, init, gates, adj, term, states, unitaries, effects)


def forward_bound(rep: CircuitRep) -> float:
    """Negativity bound on a forward-direction single-sample estimate."""
    return rep.m_forward


def reverse_bound(rep: CircuitRep) -> float:
    """Negativity bound of the reversed-direction protocol for ``rep``."""
    return rep.m_reverse


def reverse_rep(rep: CircuitRep) -> CircuitRep:
    """Time-reversed representation estimating the same Born probability.

    Initial distributions become Tr[F(lam) E_n], the gate list is replaced
    by the representations of the adjoint unitaries in reverse order, and
    the terminal vectors become Tr[rho_n G(lam)].  The duality identity
    telescopes exactly, so the reversed estimator has the same expectation.
    """
    if rep.m_effect <= 0.0:
        raise QpestError("reverse direction undefined for a zero effect")
    frame = rep.frame
    init_vecs = []
    for e in rep.effects:
        v = np.einsum("lab,ba->l", frame.F, e)
        init_vecs.append(v.real)
    term_vecs = []
    for rho in rep.states:
        v = np.einsum("lab,ba->l", frame.G, rho)
        term_vecs.append(v.real)
    init = StateQuasi(vectors=np.array(init_vecs))
    term = EffectQuasi(vectors=np.array(term_vecs))
    unitaries = [(u.conj().T, s) for u, s in reversed(rep.unitaries)]
    gates = list(reversed(rep.adjoint_gates))
    adj = list(reversed(rep.gates))
    return _assemble(
        frame, init, gates, adj, term,
        states=rep.effects, unitaries=unitaries, effects=rep.states,
    )
