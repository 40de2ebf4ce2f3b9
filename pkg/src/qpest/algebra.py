"""Dense complex linear algebra for small qudit systems (odd prime d).

Gate and state catalog, with omega = exp(2*pi*i/d), xi = exp(2*pi*i/9) and
index arithmetic mod d:

    I            identity
    X            X|j> = |j+1>
    Z            Z|j> = omega^j |j>
    F            (1/sqrt d) sum_{j,k} omega^{jk} |j><k|
    P            diag(omega^{j(j-1)/2}), 1/2 the inverse of 2 mod d
    SUM          SUM|c,t> = |c, t+c>; first support qudit is the control
    M9           diag(1, xi, xi^8), d = 3 only
    ket j        computational basis vector |j>
    magic        (|0> + xi|1> + xi^8|2>)/sqrt(3), d = 3 only

Gate phases are fixed once by these formulas; quasiprobability
representations are invariant under a global phase, so the choice carries
no physical content.  Everything is double precision and dense: the exact
oracles this module feeds are capped at a few thousand amplitudes.
"""

from __future__ import annotations

import numpy as np

from .errors import QpestError

GATE_ARITY = {"I": 1, "X": 1, "Z": 1, "F": 1, "P": 1, "M9": 1, "SUM": 2}
STATE_NAMES = ("ket", "magic")


def is_odd_prime(n: int) -> bool:
    if n < 3 or n % 2 == 0:
        return False
    return all(n % k for k in range(3, int(n ** 0.5) + 1, 2))


def omega(d: int) -> complex:
    return np.exp(2j * np.pi / d)


def _require_odd_prime(d: int) -> None:
    if not is_odd_prime(d):
        raise QpestError(f"d must be an odd prime, got {d}")


def standard_element(name: str, d: int, index: int | None = None) -> np.ndarray:
    """Return a catalog gate matrix or state vector for dimension ``d``.

    ``index`` is required for ``ket`` and ignored otherwise.  Raises
    :class:`QpestError` for unknown names or unsupported dimensions
    (``M9`` and ``magic`` exist only for d = 3).
    """
    _require_odd_prime(d)
    w = omega(d)
    if name == "I":
        return np.eye(d, dtype=complex)
    if name == "X":
        m = np.zeros((d, d), dtype=complex)
        for j in range(d):
            m[(j + 1) % d, j] = 1.0
        return m
    if name == "Z":
        return np.diag(w ** np.arange(d))
    if name == "F":
        j = np.arange(d)
        return w ** np.outer(j, j) / np.sqrt(d)
    if name == "P":
        inv2 = pow(2, -1, d)
        j = np.arange(d)
        return np.diag(w ** (inv2 * j * (j - 1) % d))
    if name == "SUM":
        m = np.zeros((d * d, d * d), dtype=complex)
        for c in range(d):
            for t in range(d):
                m[d * c + (t + c) % d, d * c + t] = 1.0
        return m
    if name == "M9":
        if d != 3:
            raise QpestError("M9 is defined only for d = 3")
        xi = np.exp(2j * np.pi / 9)
        return np.diag([1.0, xi, xi ** 8])
    if name == "ket":
        if index is None:
            raise QpestError("ket requires a basis index")
        if not 0 <= index < d:
            raise QpestError(f"ket index {index} out of range for d={d}")
        v = np.zeros(d, dtype=complex)
        v[index] = 1.0
        return v
    if name == "magic":
        if d != 3:
            raise QpestError("the magic state is defined only for d = 3")
        xi = np.exp(2j * np.pi / 9)
        return np.array([1.0, xi, xi ** 8]) / np.sqrt(3)
    raise QpestError(f"unknown catalog element {name!r}")


def tensor(factors) -> np.ndarray:
    """Kronecker product of matrices (or vectors) in the given order."""
    factors = list(factors)
    if not factors:
        raise QpestError("tensor of an empty list")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=complex))
    return out


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.abs(m.conj().T @ m - np.eye(m.shape[0])).max() <= tol


def is_hermitian(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.abs(m - m.conj().T).max() <= tol


def apply_local(u: np.ndarray, support, psi: np.ndarray, n_qudits: int) -> np.ndarray:
    """Apply operator ``u`` to the ``support`` qudits of an N-qudit vector.

    ``psi`` has length d^N with qudit 0 as the most significant digit;
    ``u`` must be square with dimension d^len(support).  ``u`` need not be
    unitary (effects are applied the same way).
    """
    support = tuple(support)
    psi = np.asarray(psi, dtype=complex)
    if len(set(support)) != len(support):
        raise QpestError(f"repeated qudit index in support {support}")
    if any(not 0 <= q < n_qudits for q in support):
        raise QpestError(f"support {support} out of range for {n_qudits} qudits")
    d = round(psi.size ** (1.0 / n_qudits))
    if d ** n_qudits != psi.size:
        raise QpestError("state length is not d^N")
    k = len(support)
    if u.shape != (d ** k, d ** k):
        raise QpestError(
            f"operator shape {u.shape} does not match {k} qudits of dimension {d}"
        )
    t = psi.reshape((d,) * n_qudits)
    rest = [a for a in range(n_qudits) if a not in support]
    t = np.transpose(t, support + tuple(rest))
    t = u @ t.reshape(d ** k, -1)
    t = t.reshape((d,) * n_qudits)
    inverse = np.argsort(support + tuple(rest))
    return np.transpose(t, inverse).reshape(-1)


def check_state(psi: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Validate a pure-state amplitude vector (finite, 2-norm 1)."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise QpestError("state must be a 1-d amplitude vector")
    if not np.all(np.isfinite(psi)):
        raise QpestError("state amplitudes must be finite")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise QpestError(f"state is not normalized (|. |_2 = {norm})")
    return psi
