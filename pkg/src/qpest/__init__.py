"""Monte Carlo estimation of qudit circuit outcome probabilities.

Circuit elements are mapped to quasiprobability distributions over a
discrete phase space; trajectories through that phase space are sampled
from the absolute distributions and reweighted with their signs and
1-norms, giving an unbiased estimate of the Born probability whose sample
cost is set by the circuit's total negativity.  Exact oracles verify every
step at small scale.
"""

from .algebra import apply_local, standard_element, tensor
from .circuit import (
    Circuit,
    GateOp,
    Grouping,
    parse_circuit,
    random_clifford_circuit,
    regroup,
    represent,
    serialize_circuit,
)
from .errors import CircuitSyntaxError, OracleCapError, QpestError
from .estimator import (
    EstimatorResult,
    SamplingPlan,
    Trajectory,
    estimate_single,
    plan_direct,
    plan_samples,
    run,
    sample_trajectory,
)
from .frames import (
    CircuitRep,
    EffectQuasi,
    Frame,
    GateQuasi,
    StateQuasi,
    forward_bound,
    make_frame,
    negativity_effect,
    negativity_state,
    rep_effect,
    rep_state,
    rep_unitary,
    reverse_bound,
    reverse_rep,
    wigner_frame,
)
from .oracle import (
    OptimalSampler,
    VarianceReport,
    born_exact,
    circuit_negativity,
    optimal_sample,
    trajectory_sum,
    variance_report,
)

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "CircuitRep",
    "CircuitSyntaxError",
    "EffectQuasi",
    "EstimatorResult",
    "Frame",
    "GateOp",
    "GateQuasi",
    "Grouping",
    "OptimalSampler",
    "OracleCapError",
    "QpestError",
    "SamplingPlan",
    "StateQuasi",
    "Trajectory",
    "VarianceReport",
    "apply_local",
    "born_exact",
    "circuit_negativity",
    "estimate_single",
    "forward_bound",
    "make_frame",
    "negativity_effect",
    "negativity_state",
    "optimal_sample",
    "parse_circuit",
    "plan_direct",
    "plan_samples",
    "random_clifford_circuit",
    "regroup",
    "rep_effect",
    "rep_state",
    "rep_unitary",
    "represent",
    "reverse_bound",
    "reverse_rep",
    "run",
    "sample_trajectory",
    "serialize_circuit",
    "standard_element",
    "tensor",
    "trajectory_sum",
    "variance_report",
    "wigner_frame",
]
