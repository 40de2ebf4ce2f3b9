"""Command-line front end.

Subcommands::

    qpest inspect  CIRCUIT                 negativity diagnostics as JSON
    qpest estimate CIRCUIT [flags]         one estimation run -> CSV row
    qpest oracle   CIRCUIT                 exact small-circuit values as JSON
    qpest fig1     [flags]                 magic-state scaling experiment -> CSV (+figure)

Exit codes: 0 success, 1 usage errors, 2 domain errors (parse failures,
validation, oracle caps).

CSV rows share the header::

    circuit,direction,M_forward,M_reverse,epsilon,delta,samples,
    baseline_samples,p_hat,p_exact,abs_error,seed,wall_time_ms

(one line; optional fields are left empty).  ``wall_time_ms`` is
environmental and excluded from the determinism guarantee; everything else
is byte-identical across reruns with the same flags and seed, for any
worker count (``QPE_THREADS`` bounds the thread pool).

``inspect`` emits a JSON object with keys ``dim``, ``qudits``, ``n_gates``,
``state_negativity``, ``per_qudit_state_negativity``, ``state_max_abs``,
``effect_negativity``, ``per_qudit_effect_max_abs``, ``effect_max_abs``,
``gates`` (list of {index, name, support, negativity, adjoint_negativity}),
``M_forward``, ``M_reverse`` and ``reverse_to_forward_ratio``.  ``oracle``
emits ``born``, ``trajectory_sum``, ``m_c``, ``v_min``, ``v_markov``,
``mean_markov``, ``M_forward``, ``M_reverse``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import oracle as oracle_mod
from .circuit import parse_circuit, random_clifford_circuit, represent
from .errors import QpestError
from .estimator import plan_direct, plan_samples, run
from .frames import wigner_frame
from .rng import derive_seed

CSV_HEADER = (
    "circuit,direction,M_forward,M_reverse,epsilon,delta,samples,"
    "baseline_samples,p_hat,p_exact,abs_error,seed,wall_time_ms"
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _unit_open(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must be strictly between 0 and 1: {text}")
    return v


@dataclass
class RunRecord:
    """One CSV row of an estimation run."""

    circuit: str
    direction: str
    m_forward: float
    m_reverse: float
    epsilon: float
    delta: float
    samples: int
    baseline_samples: int
    p_hat: float
    p_exact: float | None
    abs_error: float | None
    seed: int
    wall_time_ms: int

    def to_row(self) -> str:
        opt = lambda v: "" if v is None else repr(float(v))
        return ",".join(
            [
                self.circuit,
                self.direction,
                repr(float(self.m_forward)),
                repr(float(self.m_reverse)),
                repr(float(self.epsilon)),
                repr(float(self.delta)),
                str(self.samples),
                str(self.baseline_samples),
                repr(float(self.p_hat)),
                opt(self.p_exact),
                opt(self.abs_error),
                str(self.seed),
                str(self.wall_time_ms),
            ]
        )


def _load_circuit(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise QpestError(f"cannot read {path}: {exc}")
    return parse_circuit(text)


def _emit_rows(rows: list[str], out: str | None, append: bool) -> None:
    if out is None:
        print(CSV_HEADER)
        for r in rows:
            print(r)
        return
    p = Path(out)
    if append and p.exists() and p.stat().st_size > 0:
        with p.open("a") as fh:
            fh.writelines(r + "\n" for r in rows)
    else:
        with p.open("w") as fh:
            fh.write(CSV_HEADER + "\n")
            fh.writelines(r + "\n" for r in rows)


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_inspect(args) -> int:
    circ = _load_circuit(args.circuit)
    rep = represent(circ, wigner_frame(circ.dim))
    gates = [
        {
            "index": i,
            "name": circ.gates[i].name,
            "support": list(g.support),
            "negativity": g.negativity,
            "adjoint_negativity": rep.adjoint_gates[i].negativity,
        }
        for i, g in enumerate(rep.gates)
    ]
    doc = {
        "dim": circ.dim,
        "qudits": circ.n_qudits,
        "n_gates": circ.n_gates,
        "state_negativity": rep.m_state,
        "per_qudit_state_negativity": rep.state.per_qudit_negativity.tolist(),
        "state_max_abs": rep.state_max_abs,
        "effect_negativity": rep.m_effect,
        "per_qudit_effect_max_abs": rep.effect.per_qudit_max_abs.tolist(),
        "effect_max_abs": rep.effect_max_abs,
        "gates": gates,
        "M_forward": rep.m_forward,
        "M_reverse": rep.m_reverse,
        "reverse_to_forward_ratio": (
            rep.m_reverse / rep.m_forward if rep.m_forward > 0 else None
        ),
    }
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_estimate(args) -> int:
    circ = _load_circuit(args.circuit)
    rep = represent(circ, wigner_frame(circ.dim))
    if args.direction == "reverse":
        bound = rep.m_reverse
        if rep.m_effect <= 0.0:
            raise QpestError("reverse direction undefined for a zero effect")
    else:
        # auto re-plans inside run(); seed the plan with the forward bound
        bound = rep.m_forward
    plan = plan_samples(args.epsilon, args.delta, bound)
    result = run(rep, plan, seed=args.seed, direction=args.direction)
    record = RunRecord(
        circuit=args.circuit,
        direction=result.direction,
        m_forward=rep.m_forward,
        m_reverse=rep.m_reverse,
        epsilon=args.epsilon,
        delta=args.delta,
        samples=result.samples_used,
        baseline_samples=plan_direct(args.epsilon, args.delta),
        p_hat=result.p_hat,
        p_exact=None,
        abs_error=None,
        seed=args.seed,
        wall_time_ms=int(round(result.elapsed_s * 1000)),
    )
    _emit_rows([record.to_row()], args.out, append=True)
    if args.out is not None:
        print(
            f"p_hat={result.p_hat!r} direction={result.direction} "
            f"samples={result.samples_used} -> {args.out}"
        )
    return 0


def _cmd_oracle(args) -> int:
    circ = _load_circuit(args.circuit)
    rep = represent(circ, wigner_frame(circ.dim))
    report = oracle_mod.variance_report(rep)
    doc = {
        "born": oracle_mod.born_exact(circ),
        "trajectory_sum": oracle_mod.trajectory_sum(rep),
        "m_c": report.m_c,
        "v_min": report.v_min,
        "v_markov": report.v_markov,
        "mean_markov": report.mean_markov,
        "M_forward": rep.m_forward,
        "M_reverse": rep.m_reverse,
    }
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_fig1(args) -> int:
    if args.kmax > args.qudits:
        raise QpestError(f"kmax {args.kmax} exceeds qudit count {args.qudits}")
    frame = wigner_frame(3)
    rows, ks, errors, samples = [], [], [], []
    for k in range(args.kmax + 1):
        for trial in range(1, args.trials + 1):
            i = k * args.trials + (trial - 1)
            circ = random_clifford_circuit(
                args.qudits, args.depth, k, derive_seed(args.seed, i, 1)
            )
            rep = represent(circ, frame)
            p_exact = oracle_mod.born_exact(circ)
            plan = plan_samples(args.epsilon, args.delta, rep.m_forward)
            run_seed = derive_seed(args.seed, i, 2)
            t0 = time.perf_counter()
            result = run(rep, plan, seed=run_seed, direction="forward")
            wall = int(round((time.perf_counter() - t0) * 1000))
            err = abs(result.p_hat - p_exact)
            rows.append(
                RunRecord(
                    circuit=f"fig1-N{args.qudits}-D{args.depth}-k{k}-t{trial:02d}",
                    direction="forward",
                    m_forward=rep.m_forward,
                    m_reverse=rep.m_reverse,
                    epsilon=args.epsilon,
                    delta=args.delta,
                    samples=result.samples_used,
                    baseline_samples=plan_direct(args.epsilon, args.delta),
                    p_hat=result.p_hat,
                    p_exact=p_exact,
                    abs_error=err,
                    seed=run_seed,
                    wall_time_ms=wall,
                ).to_row()
            )
            ks.append(k)
            errors.append(result.p_hat - p_exact)
            samples.append(result.samples_used)
    _emit_rows(rows, args.out, append=False)
    if args.out is not None and not args.no_fig:
        fig_path = args.fig or str(Path(args.out).with_suffix(".png"))
        from .plotting import render_error_scaling

        render_error_scaling(
            ks, errors, samples, args.epsilon, fig_path,
            title=f"N={args.qudits}, depth={args.depth}, "
                  f"eps={args.epsilon}, delta={args.delta}",
        )
        print(f"wrote {len(rows)} rows -> {args.out}; figure -> {fig_path}")
    elif args.out is not None:
        print(f"wrote {len(rows)} rows -> {args.out}")
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="qpest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inspect", help="negativity diagnostics of a circuit file")
    p.add_argument("circuit")
    p.set_defaults(func=_cmd_inspect)

    p = sub.add_parser("estimate", help="run the Monte Carlo estimator")
    p.add_argument("circuit")
    p.add_argument("--epsilon", type=_unit_open, default=0.05)
    p.add_argument("--delta", type=_unit_open, default=0.05)
    p.add_argument(
        "--direction", choices=["forward", "reverse", "auto"], default="forward"
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="append a CSV row to this file")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("oracle", help="exact references for a small circuit")
    p.add_argument("circuit")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser(
        "fig1", help="magic-state scaling experiment on random Clifford circuits"
    )
    p.add_argument("--qudits", type=int, default=8)
    p.add_argument("--depth", type=int, default=100)
    p.add_argument("--kmax", type=int, default=3)
    p.add_argument("--epsilon", type=_unit_open, default=0.02)
    p.add_argument("--delta", type=_unit_open, default=0.05)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the CSV here")
    p.add_argument("--fig", default=None, help="figure path (default: CSV path .png)")
    p.add_argument("--no-fig", action="store_true", help="skip the figure")
    p.set_defaults(func=_cmd_fig1)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"qpest: usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except QpestError as exc:
        print(f"qpest: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
