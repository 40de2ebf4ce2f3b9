"""Circuit intermediate representation, text format, and transforms.

File format (one directive per line, ``#`` starts a comment):

    dim <odd-prime>
    qudits <N>
    state <i> ket <j> | state <i> magic | state <i> vec <d complex entries>
    gate <NAME> <i> [<j>]             NAME in {X, Z, F, P, SUM, M9}
    gate U <i> <d^2 entries>          explicit 1-qudit unitary, row-major
    gate U <i> <j> <d^4 entries>      explicit 2-qudit unitary, row-major
    measure <i> ket <j> | measure <i> id | measure <i> mat <d^2 entries>

``dim`` and ``qudits`` must precede all other directives.  Complex entries
are written like ``0.5-0.5i``.  Every qudit needs exactly one ``state``;
qudits without a ``measure`` line get the identity effect (the outcome is
marginalized over them at no sampling cost).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import algebra
from .algebra import GATE_ARITY, is_odd_prime, standard_element
from .errors import CircuitSyntaxError, QpestError
from .frames import CircuitRep, Frame, build_circuit_rep

StateSpec = tuple
EffectSpec = tuple


def _specs_equal(a, b) -> bool:
    if a[0] != b[0] or len(a) != len(b):
        return False
    return all(
        np.array_equal(x, y) if isinstance(x, np.ndarray) else x == y
        for x, y in zip(a[1:], b[1:])
    )


@dataclass(eq=False)
class GateOp:
    """One gate: a catalog name or an explicit matrix, plus its support."""

    name: str
    support: tuple[int, ...]
    matrix: np.ndarray | None = None

    def __eq__(self, other):
        if not isinstance(other, GateOp):
            return NotImplemented
        if self.name != other.name or self.support != other.support:
            return False
        if (self.matrix is None) != (other.matrix is None):
            return False
        return self.matrix is None or np.array_equal(self.matrix, other.matrix)


@dataclass(eq=False)
class Circuit:
    """A product-input, product-measurement qudit circuit."""

    dim: int
    n_qudits: int
    states: list[StateSpec]
    gates: list[GateOp]
    effects: list[EffectSpec] = field(default_factory=list)

    def __post_init__(self):
        if not is_odd_prime(self.dim):
            raise QpestError(f"dim must be an odd prime, got {self.dim}")
        if self.n_qudits < 1:
            raise QpestError("need at least one qudit")
        if not self.effects:
            self.effects = [("id",) for _ in range(self.n_qudits)]
        if len(self.states) != self.n_qudits or len(self.effects) != self.n_qudits:
            raise QpestError("need exactly one state and one effect per qudit")
        for g in self.gates:
            self._check_gate(g)

    def _check_gate(self, g: GateOp) -> None:
        if len(set(g.support)) != len(g.support):
            raise QpestError(f"repeated qudit index in gate support {g.support}")
        if any(not 0 <= q < self.n_qudits for q in g.support):
            raise QpestError(f"qudit index out of range in gate support {g.support}")
        if g.name == "U":
            if g.matrix is None:
                raise QpestError("explicit gate requires a matrix")
            want = self.dim ** len(g.support)
            if g.matrix.shape != (want, want):
                raise QpestError(
                    f"explicit gate matrix shape {g.matrix.shape} does not match "
                    f"support {g.support}"
                )
        else:
            arity = GATE_ARITY.get(g.name)
            if arity is None:
                raise QpestError(f"unknown gate {g.name!r}")
            if arity != len(g.support):
                raise QpestError(f"gate {g.name} expects {arity} qudit(s)")
            if g.name == "M9" and self.dim != 3:
                raise QpestError("M9 is defined only for d = 3")

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.n_qudits == other.n_qudits
            and all(_specs_equal(a, b) for a, b in zip(self.states, other.states))
            and self.gates == other.gates
            and all(_specs_equal(a, b) for a, b in zip(self.effects, other.effects))
            and len(self.states) == len(other.states)
            and len(self.gates) == len(other.gates)
        )

    # -- resolution to concrete arrays ------------------------------------

    @property
    def n_gates(self) -> int:
        return len(self.gates)

    @property
    def outcomes(self) -> dict[int, int]:
        """Measured qudits and their target outcome labels."""
        return {n: s[1] for n, s in enumerate(self.effects) if s[0] == "ket"}

    def state_vector(self, n: int) -> np.ndarray:
        kind = self.states[n]
        if kind[0] == "ket":
            return standard_element("ket", self.dim, kind[1])
        if kind[0] == "magic":
            return standard_element("magic", self.dim)
        if kind[0] == "vec":
            return np.asarray(kind[1], dtype=complex)
        raise QpestError(f"unknown state spec {kind[0]!r}")

    def state_matrix(self, n: int) -> np.ndarray:
        v = self.state_vector(n)
        return np.outer(v, v.conj())

    def gate_matrix(self, index: int) -> np.ndarray:
        g = self.gates[index]
        if g.name == "U":
            return g.matrix
        return standard_element(g.name, self.dim)

    def effect_matrix(self, n: int) -> np.ndarray:
        kind = self.effects[n]
        if kind[0] == "ket":
            v = standard_element("ket", self.dim, kind[1])
            return np.outer(v, v.conj())
        if kind[0] == "id":
            return np.eye(self.dim, dtype=complex)
        if kind[0] == "mat":
            return np.asarray(kind[1], dtype=complex)
        raise QpestError(f"unknown effect spec {kind[0]!r}")


# ---------------------------------------------------------------------------
# Parsing and serialization


def _parse_complex(tok: str, line: int, col: int) -> complex:
    try:
        z = complex(tok.replace("i", "j").replace("I", "j"))
    except ValueError:
        raise CircuitSyntaxError(f"bad complex number {tok!r}", line, col) from None
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise CircuitSyntaxError(f"non-finite entry {tok!r}", line, col)
    return z


def _parse_int(tok: str, line: int, col: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise CircuitSyntaxError(f"expected {what}, got {tok!r}", line, col) from None


def parse_circuit(text: str) -> Circuit:
    """Parse the circuit text format; errors carry line/column locations."""
    dim = None
    n_qudits = None
    states: dict[int, StateSpec] = {}
    effects: dict[int, EffectSpec] = {}
    gates: list[GateOp] = []
    body_seen = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", body)]
        if not toks:
            continue
        (word, col0), args = toks[0], toks[1:]

        if word == "dim":
            if dim is not None:
                raise CircuitSyntaxError("duplicate dim directive", lineno, col0)
            if body_seen:
                raise CircuitSyntaxError("dim must precede all other directives", lineno, col0)
            if len(args) != 1:
                raise CircuitSyntaxError("dim takes one argument", lineno, col0)
            dim = _parse_int(args[0][0], lineno, args[0][1], "a dimension")
            if not is_odd_prime(dim):
                raise CircuitSyntaxError("dim must be an odd prime", lineno, args[0][1])
            continue
        if word == "qudits":
            if n_qudits is not None:
                raise CircuitSyntaxError("duplicate qudits directive", lineno, col0)
            if body_seen:
                raise CircuitSyntaxError("qudits must precede all other directives", lineno, col0)
            if len(args) != 1:
                raise CircuitSyntaxError("qudits takes one argument", lineno, col0)
            n_qudits = _parse_int(args[0][0], lineno, args[0][1], "a qudit count")
            if n_qudits < 1:
                raise CircuitSyntaxError("qudits must be positive", lineno, args[0][1])
            continue

        if dim is None or n_qudits is None:
            raise CircuitSyntaxError(
                "dim and qudits must precede all other directives", lineno, col0
            )
        body_seen = True

        def qudit_arg(pos: int) -> int:
            tok, col = args[pos]
            q = _parse_int(tok, lineno, col, "a qudit index")
            if not 0 <= q < n_qudits:
                raise CircuitSyntaxError("qudit index out of range", lineno, col)
            return q

        if word == "state":
            if len(args) < 2:
                raise CircuitSyntaxError("state needs a qudit index and a kind", lineno, col0)
            q = qudit_arg(0)
            if q in states:
                raise CircuitSyntaxError(f"duplicate state for qudit {q}", lineno, col0)
            kind = args[1][0]
            if kind == "ket":
                if len(args) != 3:
                    raise CircuitSyntaxError("state ... ket takes one basis index", lineno, col0)
                j = _parse_int(args[2][0], lineno, args[2][1], "a basis index")
                if not 0 <= j < dim:
                    raise CircuitSyntaxError("basis index out of range", lineno, args[2][1])
                states[q] = ("ket", j)
            elif kind == "magic":
                if dim != 3:
                    raise CircuitSyntaxError("the magic state requires dim 3", lineno, args[1][1])
                states[q] = ("magic",)
            elif kind == "vec":
                entries = args[2:]
                if len(entries) != dim:
                    raise CircuitSyntaxError(
                        f"state ... vec needs {dim} amplitudes, got {len(entries)}",
                        lineno, col0,
                    )
                amps = np.array([_parse_complex(t, lineno, c) for t, c in entries])
                norm = np.linalg.norm(amps)
                if abs(norm - 1.0) > 1e-6:
                    raise CircuitSyntaxError("state vector is not normalized", lineno, col0)
                if abs(norm - 1.0) > 1e-12:
                    amps = amps / norm
                states[q] = ("vec", amps)
            else:
                raise CircuitSyntaxError(f"unknown state kind {kind!r}", lineno, args[1][1])
            continue

        if word == "gate":
            if not args:
                raise CircuitSyntaxError("gate needs a name", lineno, col0)
            name = args[0][0]
            rest = args[1:]
            if name == "U":
                d2, d4 = dim ** 2, dim ** 4
                if len(rest) == 1 + d2:
                    support = (qudit_arg(1),)
                    entry_toks = rest[1:]
                elif len(rest) == 2 + d4:
                    support = (qudit_arg(1), qudit_arg(2))
                    entry_toks = rest[2:]
                else:
                    raise CircuitSyntaxError(
                        f"gate U expects <i> plus {d2} entries or <i> <j> plus {d4} entries",
                        lineno, col0,
                    )
                if len(set(support)) != len(support):
                    raise CircuitSyntaxError("repeated qudit index in gate", lineno, col0)
                side = dim ** len(support)
                m = np.array(
                    [_parse_complex(t, lineno, c) for t, c in entry_toks]
                ).reshape(side, side)
                gates.append(GateOp("U", support, m))
            else:
                arity = GATE_ARITY.get(name)
                if arity is None:
                    raise CircuitSyntaxError(f"unknown gate {name!r}", lineno, args[0][1])
                if name == "M9" and dim != 3:
                    raise CircuitSyntaxError("M9 requires dim 3", lineno, args[0][1])
                if len(rest) != arity:
                    raise CircuitSyntaxError(
                        f"gate {name} takes {arity} qudit index(es)", lineno, col0
                    )
                support = tuple(qudit_arg(1 + i) for i in range(arity))
                if len(set(support)) != len(support):
                    raise CircuitSyntaxError("repeated qudit index in gate", lineno, col0)
                gates.append(GateOp(name, support))
            continue

        if word == "measure":
            if len(args) < 2:
                raise CircuitSyntaxError("measure needs a qudit index and a kind", lineno, col0)
            q = qudit_arg(0)
            if q in effects:
                raise CircuitSyntaxError(f"duplicate measure for qudit {q}", lineno, col0)
            kind = args[1][0]
            if kind == "ket":
                if len(args) != 3:
                    raise CircuitSyntaxError("measure ... ket takes one outcome index", lineno, col0)
                j = _parse_int(args[2][0], lineno, args[2][1], "an outcome index")
                if not 0 <= j < dim:
                    raise CircuitSyntaxError("outcome index out of range", lineno, args[2][1])
                effects[q] = ("ket", j)
            elif kind == "id":
                if len(args) != 2:
                    raise CircuitSyntaxError("measure ... id takes no arguments", lineno, col0)
                effects[q] = ("id",)
            elif kind == "mat":
                entries = args[2:]
                if len(entries) != dim ** 2:
                    raise CircuitSyntaxError(
                        f"measure ... mat needs {dim ** 2} entries", lineno, col0
                    )
                m = np.array(
                    [_parse_complex(t, lineno, c) for t, c in entries]
                ).reshape(dim, dim)
                effects[q] = ("mat", m)
            else:
                raise CircuitSyntaxError(f"unknown measure kind {kind!r}", lineno, args[1][1])
            continue

        raise CircuitSyntaxError(f"unknown directive {word!r}", lineno, col0)

    if dim is None or n_qudits is None:
        raise CircuitSyntaxError("missing dim/qudits directive", 1, 1)
    missing = [q for q in range(n_qudits) if q not in states]
    if missing:
        raise CircuitSyntaxError(f"no state directive for qudit(s) {missing}", 1, 1)
    return Circuit(
        dim=dim,
        n_qudits=n_qudits,
        states=[states[q] for q in range(n_qudits)],
        gates=gates,
        effects=[effects.get(q, ("id",)) for q in range(n_qudits)],
    )


def _fmt_complex(z: complex) -> str:
    re_, im = float(np.real(z)), float(np.imag(z))
    sign = "+" if im >= 0 else "-"
    return f"{re_!r}{sign}{abs(im)!r}i"


def serialize_circuit(circuit: Circuit) -> str:
    """Render a Circuit back to its text form (parse round-trips exactly)."""
    lines = [f"dim {circuit.dim}", f"qudits {circuit.n_qudits}"]
    for q, s in enumerate(circuit.states):
        if s[0] == "ket":
            lines.append(f"state {q} ket {s[1]}")
        elif s[0] == "magic":
            lines.append(f"state {q} magic")
        else:
            amps = " ".join(_fmt_complex(z) for z in s[1])
            lines.append(f"state {q} vec {amps}")
    for g in circuit.gates:
        sup = " ".join(str(q) for q in g.support)
        if g.name == "U":
            entries = " ".join(_fmt_complex(z) for z in g.matrix.reshape(-1))
            lines.append(f"gate U {sup} {entries}")
        else:
            lines.append(f"gate {g.name} {sup}")
    for q, e in enumerate(circuit.effects):
        if e[0] == "ket":
            lines.append(f"measure {q} ket {e[1]}")
        elif e[0] == "id":
            lines.append(f"measure {q} id")
        else:
            entries = " ".join(_fmt_complex(z) for z in e[1].reshape(-1))
            lines.append(f"measure {q} mat {entries}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Representation over a frame


def represent(circuit: Circuit, frame: Frame) -> CircuitRep:
    """Map every circuit element to its quasidistribution over ``frame``."""
    if circuit.dim != frame.d:
        raise QpestError(
            f"circuit dimension {circuit.dim} does not match frame dimension {frame.d}"
        )
    states = [circuit.state_matrix(n) for n in range(circuit.n_qudits)]
    unitaries = []
    for index, g in enumerate(circuit.gates):
        m = circuit.gate_matrix(index)
        if not algebra.is_unitary(m, 1e-8):
            raise QpestError(f"gate {index} ({g.name}) is not unitary")
        unitaries.append((m, g.support))
    effects = [circuit.effect_matrix(n) for n in range(circuit.n_qudits)]
    return build_circuit_rep(frame, states, unitaries, effects)


# ---------------------------------------------------------------------------
# Gate regrouping


@dataclass(frozen=True)
class Grouping:
    """Partition of the gate list into consecutive blocks, by block sizes."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        if any(s < 1 for s in self.sizes):
            raise QpestError("grouping blocks must be nonempty")

    @classmethod
    def singletons(cls, n_gates: int) -> "Grouping":
        return cls(sizes=(1,) * n_gates)

    def blocks(self):
        start = 0
        for s in self.sizes:
            yield start, start + s
            start += s


def _embed_in_block(u: np.ndarray, gate_support, block_support, d: int) -> np.ndarray:
    """Lift a gate matrix onto the (sorted) block support."""
    if tuple(gate_support) == tuple(block_support):
        return u
    if len(block_support) == 1:
        return u
    a, b = block_support
    if len(gate_support) == 1:
        eye = np.eye(d, dtype=complex)
        return np.kron(u, eye) if gate_support[0] == a else np.kron(eye, u)
    # both qudits, reversed order: swap the tensor factors
    return (
        u.reshape(d, d, d, d).transpose(1, 0, 3, 2).reshape(d * d, d * d)
    )


def regroup(circuit: Circuit, grouping: Grouping) -> Circuit:
    """Compose consecutive gate blocks into single gates.

    The Born probability is unchanged; the negativity bounds (and hence the
    sampling cost) generally are not, except when the composed gates are
    all nonnegatively represented.
    """
    if sum(grouping.sizes) != circuit.n_gates:
        raise QpestError(
            f"grouping covers {sum(grouping.sizes)} gates, circuit has {circuit.n_gates}"
        )
    d = circuit.dim
    new_gates: list[GateOp] = []
    for start, stop in grouping.blocks():
        block = list(range(start, stop))
        if len(block) == 1:
            g = circuit.gates[block[0]]
            new_gates.append(GateOp(g.name, g.support, g.matrix))
            continue
        union = sorted({q for i in block for q in circuit.gates[i].support})
        if len(union) > 2:
            raise QpestError(
                f"regrouped block {start}:{stop} acts on {len(union)} qudits (max 2)"
            )
        side = d ** len(union)
        total = np.eye(side, dtype=complex)
        for i in block:
            u = _embed_in_block(
                circuit.gate_matrix(i), circuit.gates[i].support, tuple(union), d
            )
            total = u @ total
        new_gates.append(GateOp("U", tuple(union), total))
    return Circuit(
        dim=circuit.dim,
        n_qudits=circuit.n_qudits,
        states=list(circuit.states),
        gates=new_gates,
        effects=list(circuit.effects),
    )


# ---------------------------------------------------------------------------
# Random experiment circuits


def random_clifford_circuit(
    n_qudits: int, depth: int, magic_count: int, seed: int
) -> Circuit:
    """Random qutrit Clifford circuit with ``magic_count`` magic inputs.

    Gates are uniform words over the generators {F, P, SUM} on uniformly
    chosen (distinct) qudits.  The first ``magic_count`` qudits start in
    the magic state, the rest in |0>; qudit 0 is measured against |0><0|
    and everything else is marginalized.  Deterministic in all arguments.
    """
    if n_qudits < 1:
        raise QpestError("need at least one qudit")
    if not 0 <= magic_count <= n_qudits:
        raise QpestError(f"magic_count {magic_count} outside 0..{n_qudits}")
    if depth < 0:
        raise QpestError("depth must be nonnegative")
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    gates: list[GateOp] = []
    n_kinds = 3 if n_qudits > 1 else 2
    for _ in range(depth):
        kind = int(rng.integers(n_kinds))
        if kind < 2:
            gates.append(GateOp("F" if kind == 0 else "P", (int(rng.integers(n_qudits)),)))
        else:
            c = int(rng.integers(n_qudits))
            t = int(rng.integers(n_qudits - 1))
            if t >= c:
                t += 1
            gates.append(GateOp("SUM", (c, t)))
    states: list[StateSpec] = [
        ("magic",) if q < magic_count else ("ket", 0) for q in range(n_qudits)
    ]
    effects: list[EffectSpec] = [("ket", 0)] + [("id",) for _ in range(n_qudits - 1)]
    return Circuit(dim=3, n_qudits=n_qudits, states=states, gates=gates, effects=effects)
