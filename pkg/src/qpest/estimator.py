"""Trajectory sampling, single-sample estimates, and batched estimation runs.

A trajectory lam_0..lam_L is grown as a Markov chain: the initial N-qudit
point is drawn per qudit from the normalized absolute input distributions,
and gate l resamples only its support coordinates from the column of the
normalized absolute transition table selected by lam_{l-1}.  The matching
single-trajectory estimate multiplies the negativity weights and signs the
chain dropped, times the terminal effect value; it is unbiased for the
Born probability and bounded in magnitude by the total negativity bound of
the direction being run.

Randomness is counter-based (see :mod:`qpest.rng`): the uniform consumed
by sample ``i`` at draw slot ``j`` is a pure function of ``(seed, i, j)``.
Slots 0..N-1 feed the initial per-qudit draws and slot N+l feeds gate l
(gates with permutation tables consume no randomness).  Batched runs are
therefore bit-identical for any chunking or worker count; partial sums are
combined with exact (compensated) summation in fixed chunk order.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as crng
from .errors import QpestError
from .frames import CircuitRep, reverse_rep

CHUNK = 16384


def _check_unit(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise QpestError(f"{name} must lie strictly between 0 and 1, got {value}")


@dataclass(frozen=True)
class SamplingPlan:
    """Sample budget guaranteeing |p_hat - p| <= epsilon w.p. >= 1 - delta."""

    epsilon: float
    delta: float
    bound: float
    samples: int


def plan_samples(epsilon: float, delta: float, bound: float) -> SamplingPlan:
    """Hoeffding sample count for estimates bounded by ``bound`` in magnitude:

    ceil(2 * bound^2 * ln(2/delta) / epsilon^2).
    """
    _check_unit("epsilon", epsilon)
    _check_unit("delta", delta)
    if not bound > 0.0:
        raise QpestError(f"bound must be positive, got {bound}")
    s = math.ceil(2.0 * bound * bound * math.log(2.0 / delta) / (epsilon * epsilon))
    return SamplingPlan(epsilon=epsilon, delta=delta, bound=bound, samples=int(s))


def plan_direct(epsilon: float, delta: float) -> int:
    """Samples needed by direct quantum-hardware frequency estimation:
    ceil(ln(2/delta) / (2 epsilon^2)).  Reported as a comparison baseline.
    """
    _check_unit("epsilon", epsilon)
    _check_unit("delta", delta)
    return int(math.ceil(math.log(2.0 / delta) / (2.0 * epsilon * epsilon)))


@dataclass
class Trajectory:
    """Phase-space path: row l holds the N per-qudit point indices (q*d+p)."""

    d: int
    indices: np.ndarray  # (L+1, N) int

    @property
    def coords(self) -> np.ndarray:
        """View as (L+1, N, 2) arrays of (q, p) pairs."""
        q, p = np.divmod(self.indices, self.d)
        return np.stack([q, p], axis=-1)

    def __len__(self) -> int:
        return self.indices.shape[0]


def _pick(cum: np.ndarray, u: float) -> int:
    return int(np.searchsorted(cum, u, side="right"))


def sample_trajectory(rep: CircuitRep, rng: np.random.Generator) -> Trajectory:
    """Draw one trajectory from the Markov chain of ``rep``.

    Consumes one uniform per qudit for the initial point and one per
    non-permutation gate, in circuit order.
    """
    n, d2 = rep.n_qudits, rep.d * rep.d
    path = np.empty((rep.n_gates + 1, n), dtype=np.int64)
    for q in range(n):
        path[0, q] = _pick(rep.init_cum[q], rng.random())
    for l, g in enumerate(rep.gates):
        path[l + 1] = path[l]
        col = _joint_index(path[l], g.support, d2)
        if g.permutation is not None:
            out = int(g.permutation[col])
        else:
            out = _pick(g.cum_t[col], rng.random())
        _write_joint(path[l + 1], g.support, out, d2)
    return Trajectory(d=rep.d, indices=path)


def _joint_index(points: np.ndarray, support: tuple[int, ...], d2: int):
    if len(support) == 1:
        return points[..., support[0]]
    return points[..., support[0]] * d2 + points[..., support[1]]


def _write_joint(points: np.ndarray, support: tuple[int, ...], value, d2: int) -> None:
    if len(support) == 1:
        points[..., support[0]] = value
    else:
        points[..., support[0]] = value // d2
        points[..., support[1]] = value % d2


def estimate_single(rep: CircuitRep, trajectory: Trajectory) -> float:
    """The signed, weighted estimate attached to one sampled trajectory."""
    path = trajectory.indices
    n, d2 = rep.n_qudits, rep.d * rep.d
    if path.shape != (rep.n_gates + 1, n):
        raise QpestError(
            f"trajectory shape {path.shape} does not match circuit "
            f"({rep.n_gates + 1}, {n})"
        )
    if path.min() < 0 or path.max() >= d2:
        raise QpestError("trajectory contains out-of-range phase points")
    est = rep.m_init_sampling
    signs = rep.init_sign[np.arange(n), path[0]]
    if np.any(signs == 0):
        raise QpestError("trajectory starts at a zero-weight phase point")
    est *= float(signs.prod())
    for l, g in enumerate(rep.gates):
        off_support = np.delete(np.arange(n), np.array(g.support))
        if np.any(path[l + 1, off_support] != path[l, off_support]):
            raise QpestError(f"trajectory moves off-support coordinates at gate {l}")
        col = int(_joint_index(path[l], g.support, d2))
        out = int(_joint_index(path[l + 1], g.support, d2))
        if g.permutation is not None:
            if int(g.permutation[col]) != out:
                raise QpestError(f"trajectory is inconsistent with gate {l}")
            continue
        s = int(g.sign_t[col, out])
        if s == 0:
            raise QpestError(f"trajectory crosses a zero-weight transition at gate {l}")
        est *= g.point_negativity_clipped[col] * s
    for q in range(n):
        est *= rep.effect_clipped[q, path[-1, q]]
    return float(est)


# ---------------------------------------------------------------------------
# Batched kernel


def _chunk_estimates(rep: CircuitRep, seed: int, start: int, stop: int) -> np.ndarray:
    """Estimates for sample indices [start, stop), vectorized."""
    idx = np.arange(start, stop, dtype=np.uint64)
    n_s = idx.size
    n, d2 = rep.n_qudits, rep.d * rep.d
    est = np.full(n_s, rep.m_init_sampling)
    points = np.empty((n_s, n), dtype=np.int64)
    for q in range(n):
        u = crng.uniforms(seed, idx, q)
        pts = np.searchsorted(rep.init_cum[q], u, side="right")
        points[:, q] = pts
        est *= rep.init_sign[q, pts]
    for l, g in enumerate(rep.gates):
        col = _joint_index(points, g.support, d2)
        if g.permutation is not None:
            out = g.permutation[col]
        else:
            u = crng.uniforms(seed, idx, n + l)
            out = (u[:, None] >= g.cum_t[col]).sum(axis=1)
            est *= g.point_negativity_clipped[col] * g.sign_t[col, out]
        _write_joint(points, g.support, out, d2)
    for q in range(n):
        est *= rep.effect_clipped[q, points[:, q]]
    return est


def _worker_count(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("QPE_THREADS")
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise QpestError(f"QPE_THREADS must be an integer, got {env!r}")
        else:
            workers = min(4, os.cpu_count() or 1)
    if workers < 1:
        raise QpestError(f"worker count must be >= 1, got {workers}")
    return workers


@dataclass
class EstimatorResult:
    """Outcome of a batched estimation run."""

    p_hat: float
    samples_used: int
    plan: SamplingPlan
    direction: str
    bounds: tuple[float, float]  # (forward, reverse) of the input rep
    seed: int
    elapsed_s: float
    sum_estimates: float
    sum_squares: float

    @property
    def second_moment(self) -> float:
        return self.sum_squares / self.samples_used

    @property
    def sample_variance(self) -> float:
        return max(self.second_moment - self.p_hat ** 2, 0.0)

    @property
    def std_error(self) -> float:
        return math.sqrt(self.sample_variance / self.samples_used)


def run(
    rep: CircuitRep,
    plan: SamplingPlan,
    seed: int,
    direction: str = "forward",
    workers: int | None = None,
) -> EstimatorResult:
    """Average the single-trajectory estimate over ``plan.samples`` draws.

    ``direction`` is ``forward``, ``reverse``, or ``auto``; ``auto`` picks
    the direction with the smaller negativity bound and re-plans the sample
    count with it.  Results are a pure function of (rep, plan, seed,
    direction), independent of ``workers`` (which defaults to the
    QPE_THREADS environment variable).
    """
    bounds = (rep.m_forward, rep.m_reverse)
    if direction == "auto":
        use_reverse = rep.m_effect > 0.0 and rep.m_reverse < rep.m_forward
        direction = "reverse" if use_reverse else "forward"
        plan = plan_samples(plan.epsilon, plan.delta, bounds[1 if use_reverse else 0])
    if direction == "forward":
        krep = rep
    elif direction == "reverse":
        krep = reverse_rep(rep)  # rejects zero effects
    else:
        raise QpestError(f"unknown direction {direction!r}")

    workers = _worker_count(workers)
    total = plan.samples
    if total < 1:
        raise QpestError("plan must request at least one sample")
    t0 = time.perf_counter()
    spans = [(s, min(s + CHUNK, total)) for s in range(0, total, CHUNK)]

    def one(span):
        e = _chunk_estimates(krep, seed, *span)
        return float(np.sum(e)), float(np.sum(e * e))

    if workers == 1 or len(spans) == 1:
        partials = [one(s) for s in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(one, spans))
    sum_e = math.fsum(p[0] for p in partials)
    sum_sq = math.fsum(p[1] for p in partials)
    elapsed = time.perf_counter() - t0
    return EstimatorResult(
        p_hat=sum_e / total,
        samples_used=total,
        plan=plan,
        direction=direction,
        bounds=bounds,
        seed=seed,
        elapsed_s=elapsed,
        sum_estimates=sum_e,
        sum_squares=sum_sq,
    )
