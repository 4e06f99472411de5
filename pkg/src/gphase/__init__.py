"""Open-system geometric phase of a qubit dephased by a near-critical bath.

Library layout:

- :mod:`gphase.qmat`: small dense complex linear algebra (propagators,
  tensor products, partial trace, 2x2 eigendecomposition).
- :mod:`gphase.gp`: geometric phase from a sampled decoherence factor
  (closed form) and from the density-matrix trajectory (parallel transport).
- :mod:`gphase.two_level`: two-level model of a critical environment.
- :mod:`gphase.ising`: transverse-field Ising chain environment via the
  free-fermion mode product, with a dense small-N oracle.
- :mod:`gphase.perturbative`: small-coupling expansion of the phase and the
  Ising closed forms with complete elliptic integrals.
- :mod:`gphase.protocol`: software replica of the Trotterized two-qubit
  simulation protocol, including the baseline-subtracted phase correction.
- :mod:`gphase.cli`: parameter sweeps, presets and CSV/JSON output.
"""

from .gp import (
    DecoherenceTrace,
    GpResult,
    SystemParams,
    bloch_plus_angle,
    build_trace,
    density_trajectory,
    dynamical_phase,
    eps_plus,
    geometric_phase,
    gp_from_trajectory,
    trace_from_samples,
)
from .ising import (
    IsingBathParams,
    ModeFactors,
    brute_force_oracle,
    decoherence_product,
    mode_amplitude,
    mode_factors,
)
from .perturbative import (
    ExpansionCoefficients,
    IsingClosedForms,
    elliptic_E,
    elliptic_K,
    extract_coefficients_numeric,
    gp_approx_ising,
    gp_third_order,
    ising_closed_forms,
)
from .protocol import (
    Decomposition,
    ProtocolParams,
    ProtocolRun,
    build_target_hamiltonian,
    correction_experiment,
    pulse_decompositions_check,
    run_protocol,
    trotter_step,
)
from .two_level import (
    CouplingConvention,
    TwoLevelBathParams,
    bath_eigenenergies,
    decoherence_factor_analytic,
    decoherence_factor_oracle,
    gp_correction_curve,
    ground_state,
)

__version__ = "0.1.0"
