"""Exact small-scale references the sampler is checked against.

Everything here is exact (up to double precision) and size-capped:

* :func:`born_exact` evolves a dense statevector and applies the product
  effect directly.
* :func:`trajectory_sum` / :func:`circuit_negativity` contract the full
  phase-space weight (or its absolute value) gate by gate: a real vector
  over the joint phase space is propagated through each transition table.
  The weight of a path factorizes, so the sums never enumerate paths.
* :class:`OptimalSampler` draws whole trajectories exactly from the
  distribution proportional to the absolute path weight (backward suffix
  sums, then forward conditional sampling); its single-draw estimate has
  the smallest possible variance over trajectory distributions.
* :func:`variance_report` returns the exact mean and variance of the
  Markov-chain estimator together with that optimal variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import apply_local, tensor
from .circuit import Circuit
from .errors import OracleCapError, QpestError
from .estimator import Trajectory
from .frames import CircuitRep

DENSE_CAP = 3 ** 10       # max d^N for statevector evolution
CONTRACT_CAP = 3 ** 16    # max d^(2N) for phase-space contraction vectors
FULL_TABLE_CAP = 3 ** 6   # max d^(2N) for whole-phase-space transition tables
DENSITY_CAP = 3 ** 6      # max d^N for density-matrix evolution


def _check_cap(value: int, cap: int, what: str) -> None:
    if value > cap:
        raise OracleCapError(f"{what} size {value} exceeds oracle cap {cap}")


def born_exact(circuit: Circuit) -> float:
    """Dense Born probability of the circuit's fixed measurement outcome."""
    d, n = circuit.dim, circuit.n_qudits
    _check_cap(d ** n, DENSE_CAP, "statevector")
    psi = tensor([circuit.state_vector(q) for q in range(n)])
    for index, g in enumerate(circuit.gates):
        psi = apply_local(circuit.gate_matrix(index), g.support, psi, n)
    phi = psi
    for q in range(n):
        phi = apply_local(circuit.effect_matrix(q), (q,), phi, n)
    p = complex(np.vdot(psi, phi))
    if abs(p.imag) > 1e-10 or p.real < -1e-10 or p.real > 1.0 + 1e-10:
        raise QpestError(f"Born probability {p} outside [0, 1]; invalid circuit")
    return float(min(max(p.real, 0.0), 1.0))


def _born_from_elements(states, unitaries, effects, d: int) -> float:
    """Born value for resolved elements; initial elements may be mixed."""
    n = len(states)
    pure = []
    for s in states:
        ev, vec = np.linalg.eigh(s)
        if abs(np.trace(s).real - 1.0) < 1e-10 and abs(ev[-1] - 1.0) < 1e-8:
            pure.append(vec[:, -1])
        else:
            pure = None
            break
    if pure is not None:
        _check_cap(d ** n, DENSE_CAP, "statevector")
        psi = tensor(pure)
        for u, sup in unitaries:
            psi = apply_local(u, sup, psi, n)
        phi = psi
        for q in range(n):
            phi = apply_local(effects[q], (q,), phi, n)
        return float(np.vdot(psi, phi).real)
    _check_cap(d ** n, DENSITY_CAP, "density matrix")
    rho = tensor(states)
    for u, sup in unitaries:
        full = _embed_full(u, sup, n, d)
        rho = full @ rho @ full.conj().T
    e_full = tensor(effects)
    return float(np.trace(e_full @ rho).real)


def _embed_full(u: np.ndarray, support, n: int, d: int) -> np.ndarray:
    support = tuple(support)
    k = len(support)
    rest = tuple(q for q in range(n) if q not in support)
    full = np.kron(u, np.eye(d ** (n - k), dtype=complex))
    t = full.reshape((d,) * (2 * n))
    inv = np.argsort(support + rest)
    t = t.transpose(tuple(inv) + tuple(n + i for i in inv))
    return t.reshape(d ** n, d ** n)


# ---------------------------------------------------------------------------
# Phase-space contraction


def _product_tensor(rows: np.ndarray) -> np.ndarray:
    t = np.asarray(rows[0], dtype=float)
    for row in rows[1:]:
        t = np.multiply.outer(t, row)
    return t


def _apply_table(t: np.ndarray, table: np.ndarray, support: tuple[int, ...], m: int):
    if len(support) == 1:
        out = np.tensordot(table, t, axes=([1], [support[0]]))
        return np.moveaxis(out, 0, support[0])
    a, b = support
    t4 = table.reshape(m, m, m, m)
    out = np.tensordot(t4, t, axes=([2, 3], [a, b]))
    return np.moveaxis(out, [0, 1], [a, b])


def _embed_joint_table(
    table: np.ndarray, support: tuple[int, ...], m_local: int, n_qudits: int
) -> np.ndarray:
    """Lift a local transition table onto the whole joint phase space."""
    m = m_local ** n_qudits
    basis = np.eye(m).reshape((m_local,) * n_qudits + (m,))
    out = _apply_table(basis, table, support, m_local)
    return out.reshape(m, m)


def _contract(rep: CircuitRep, init_rows, tables, effect_rows) -> float:
    m = rep.d * rep.d
    _check_cap(m ** rep.n_qudits, CONTRACT_CAP, "phase-space vector")
    t = _product_tensor(init_rows)
    for table, g in zip(tables, rep.gates):
        t = _apply_table(t, table, g.support, m)
    for row in effect_rows:
        t = np.tensordot(np.asarray(row, dtype=float), t, axes=([0], [0]))
    return float(t)


def trajectory_sum(rep: CircuitRep) -> float:
    """Sum of the signed path weight over all trajectories (= Born value)."""
    return _contract(
        rep,
        rep.state.vectors,
        [g.table for g in rep.gates],
        rep.effect.vectors,
    )


def circuit_negativity(rep: CircuitRep) -> float:
    """1-norm of the full path weight; the optimal sampler's range constant."""
    return _contract(
        rep,
        np.abs(rep.state.vectors),
        [np.abs(g.table) for g in rep.gates],
        np.abs(rep.effect.vectors),
    )


def _markov_moments(rep: CircuitRep) -> tuple[float, float]:
    """Exact first and second moments of the Markov-chain estimate.

    Both factorize over the chain: the mean contracts the clipped signed
    tables the sampler actually uses, and the second moment contracts
    |W| * M weights per factor (probability times squared estimate).
    """
    mean = _contract(
        rep,
        rep.init_clipped,
        [g.table_clipped for g in rep.gates],
        rep.effect_clipped,
    )
    second = _contract(
        rep,
        np.abs(rep.init_clipped) * rep.init_negativity[:, None],
        [
            np.abs(g.table_clipped) * g.point_negativity_clipped[None, :]
            for g in rep.gates
        ],
        rep.effect_clipped ** 2,
    )
    return mean, second


@dataclass
class VarianceReport:
    """Exact Born value and estimator-variance data for a small circuit."""

    born: float
    m_c: float
    v_min: float          # optimal-sampler variance: m_c^2 - born^2
    v_markov: float       # variance of the Markov-chain estimate
    mean_markov: float    # exact mean of the Markov-chain estimate


def variance_report(rep: CircuitRep) -> VarianceReport:
    born = _born_from_elements(rep.states, rep.unitaries, rep.effects, rep.d)
    m_c = circuit_negativity(rep)
    mean, second = _markov_moments(rep)
    return VarianceReport(
        born=born,
        m_c=m_c,
        v_min=m_c * m_c - born * born,
        v_markov=second - mean * mean,
        mean_markov=mean,
    )


# ---------------------------------------------------------------------------
# Exact sampling from the optimal trajectory distribution


class OptimalSampler:
    """Draws trajectories with probability |W(path)| / M_c, exactly.

    Built by embedding every transition table on the whole joint phase
    space (hence the tight size cap), accumulating absolute suffix weights
    backward, and sampling forward from the resulting conditionals.  The
    estimate attached to a draw is ``M_c * Sign[W(path)]``.
    """

    def __init__(self, rep: CircuitRep):
        m_local = rep.d * rep.d
        m = m_local ** rep.n_qudits
        _check_cap(m, FULL_TABLE_CAP, "joint transition table")
        self._rep = rep
        self._m = m
        self._n = rep.n_qudits
        self._m_local = m_local

        init = _product_tensor(rep.init_clipped).reshape(-1)
        effect = _product_tensor(rep.effect_clipped).reshape(-1)
        tables = [
            _embed_joint_table(g.table_clipped, g.support, m_local, rep.n_qudits)
            for g in rep.gates
        ]

        suffix = np.abs(effect)
        suffixes = [suffix]
        for table in reversed(tables):
            suffix = np.abs(table).T @ suffix
            suffixes.append(suffix)
        suffixes.reverse()  # suffixes[l] pairs with lam_l

        p0 = np.abs(init) * suffixes[0]
        self.m_c = float(p0.sum())
        if self.m_c <= 0.0:
            raise QpestError("circuit weight is identically zero; nothing to sample")
        self._cum0 = np.cumsum(p0 / self.m_c)
        self._cum0[-1] = 1.0
        self._sign0 = np.sign(init).astype(np.int8)
        self._sign_e = np.sign(effect).astype(np.int8)
        self._signs = [np.sign(t.T).astype(np.int8) for t in tables]

        self._cums = []
        for table, nxt in zip(tables, suffixes[1:]):
            weighted = np.abs(table) * nxt[:, None]
            cols = weighted.sum(axis=0)
            safe = np.where(cols > 0.0, cols, 1.0)
            cum = np.cumsum((weighted / safe).T, axis=1)
            cum[cols > 0.0, -1] = 1.0
            self._cums.append(cum)

    def _decode(self, flat: np.ndarray) -> np.ndarray:
        points = np.empty(flat.shape + (self._n,), dtype=np.int64)
        rem = flat.astype(np.int64)
        for q in range(self._n - 1, -1, -1):
            points[..., q] = rem % self._m_local
            rem //= self._m_local
        return points

    def sample_batch(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Vectorized estimates of ``size`` independent draws."""
        lam = np.searchsorted(self._cum0, rng.random(size), side="right")
        sign = self._sign0[lam].astype(np.float64)
        for cum, sgn in zip(self._cums, self._signs):
            u = rng.random(size)
            nxt = (u[:, None] >= cum[lam]).sum(axis=1)
            sign *= sgn[lam, nxt]
            lam = nxt
        sign *= self._sign_e[lam]
        return self.m_c * sign

    def sample(self, rng: np.random.Generator) -> tuple[Trajectory, float]:
        """One exact draw: the trajectory and its estimate M_c * Sign[W]."""
        lam = int(np.searchsorted(self._cum0, rng.random(), side="right"))
        flats = [lam]
        sign = float(self._sign0[lam])
        for cum, sgn in zip(self._cums, self._signs):
            nxt = int(np.searchsorted(cum[lam], rng.random(), side="right"))
            sign *= sgn[lam, nxt]
            lam = nxt
            flats.append(lam)
        sign *= float(self._sign_e[lam])
        indices = self._decode(np.array(flats))
        return Trajectory(d=self._rep.d, indices=indices), self.m_c * sign


def optimal_sample(rep: CircuitRep, rng: np.random.Generator) -> tuple[Trajectory, float]:
    """Single draw from the optimal trajectory distribution of ``rep``.

    Builds the sampler on the fly; use :class:`OptimalSampler` directly
    when drawing many samples from one circuit.
    """
    return OptimalSampler(rep).sample(rng)
