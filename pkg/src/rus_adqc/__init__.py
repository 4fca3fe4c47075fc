"""Ancilla-driven quantum computation with a single fixed gate and repeat-until-success synthesis."""

__version__ = "0.1.0"

from .qcore import (  # noqa: E402
    AxisAngle, IsingDecomposition, axis_angle, gate_distance, ising_decompose,
    make_gate,
)
from .channel import (  # noqa: E402
    ChannelSpec, KrausBranch, NonUnitaryBranchError, backaction,
    classify_two_qubit_branch, generalized_family, stinespring_kraus,
)
from .synth1q import (  # noqa: E402
    SynthTarget, expected_time_upper_bound, finite_group_walk, hitting_stats, run_until,
)
from .synth2q import (  # noqa: E402
    exact_reachable_set, increments, irrationality_witness, run_until_beta,
)
from .protocol import (  # noqa: E402
    Program, Synth1q, Synth2q, asymmetric_gate_demo, bell_demo, execute,
)
