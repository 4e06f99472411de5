"""Software replica of the two-qubit quantum-simulation protocol.

The target Hamiltonian H = W Z_S + d Z_S Z_E + B Z_E + G X_E (system x
environment ordering) is evolved either exactly or with the symmetric
splitting

    U(dt) ~ e^{-i G dt X_E / 2} e^{-i d dt Z_S Z_E} e^{-i W dt Z_S}
            e^{-i B dt Z_E} e^{-i G dt X_E / 2},

optionally with the Z rotations realized as X-conjugated Y rotations
(pulse-level form).  The decoherence factor is read out from the system
coherence, the geometric phase computed from the resulting trace, and the
coupling-induced correction isolated by subtracting an uncoupled (d = 0)
baseline run, mirroring the experimental procedure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ValidationError
from .gp import (
    DecoherenceTrace,
    GpResult,
    SystemParams,
    build_trace,
    geometric_phase,
    trace_from_samples,
)
from .qmat import I2, X, Y, Z, expm_hermitian, kron, partial_trace_env
from .two_level import TwoLevelBathParams, decoherence_factor_oracle, ground_state

# Smallest power-of-two step count for which the full-cycle Trotter fidelity
# stays at or above 0.997 across B in [-0.2 W, 0.2 W] at the reference
# parameters (G = 0.02 W, d = 0.1 W); found by find_min_trotter_steps and
# frozen here as a regression anchor.  One step per cycle already misses the
# 0.3% budget (worst fidelity 0.9947); two steps give 0.99979.
PINNED_TROTTER_STEPS = 2


class Decomposition(enum.Enum):
    EXACT = "exact"
    COARSE_TROTTER = "coarse-trotter"
    PULSE_LEVEL = "pulse-level"


@dataclass(frozen=True)
class ProtocolParams:
    """One protocol configuration: system cycle, bath, stepping scheme."""

    sys: SystemParams
    bath: TwoLevelBathParams
    trotter_steps: int = 64
    decomposition: Decomposition = Decomposition.EXACT

    def __post_init__(self):
        if self.trotter_steps < 1:
            raise ValidationError(f"trotter_steps must be >= 1, got {self.trotter_steps}")


@dataclass(frozen=True)
class ProtocolRun:
    """Readout trace, per-sample fidelity against exact evolution, and the phase."""

    trace: DecoherenceTrace
    fidelity_vs_exact: np.ndarray = field(repr=False)
    gp: GpResult


def build_target_hamiltonian(p: ProtocolParams) -> np.ndarray:
    """Dense 4x4 H = W Z_S + d Z_S Z_E + B Z_E + G X_E."""
    b = p.bath
    return (
        p.sys.omega * kron(Z, I2)
        + b.coupling * kron(Z, Z)
        + b.b_field * kron(I2, Z)
        + b.delta_gap * kron(I2, X)
    )


def _pulse_z_rotation(angle: float, axis_y: np.ndarray, axis_x: np.ndarray) -> np.ndarray:
    """e^{-i angle Z} realized as e^{-i pi X/4} e^{-i angle Y} e^{+i pi X/4}."""
    wrap = expm_hermitian(axis_x, np.pi / 4.0)
    return wrap @ expm_hermitian(axis_y, angle) @ wrap.conj().T


def trotter_step(p: ProtocolParams, dt: float) -> np.ndarray:
    """One symmetric splitting step for time dt, as exact factor exponentials."""
    if dt <= 0:
        raise ValidationError("dt must be positive")
    b = p.bath
    half_x = expm_hermitian(kron(I2, X), b.delta_gap * dt / 2.0)
    zz = expm_hermitian(kron(Z, Z), b.coupling * dt)
    if p.decomposition is Decomposition.PULSE_LEVEL:
        z_s = _pulse_z_rotation(p.sys.omega * dt, kron(Y, I2), kron(X, I2))
        z_e = _pulse_z_rotation(b.b_field * dt, kron(I2, Y), kron(I2, X))
    else:
        z_s = expm_hermitian(kron(Z, I2), p.sys.omega * dt)
        z_e = expm_hermitian(kron(I2, Z), b.b_field * dt)
    return half_x @ zz @ z_s @ z_e @ half_x


@dataclass(frozen=True)
class PulseCheckReport:
    """Residuals of the pulse-level operator identities."""

    max_residual_env: float
    max_residual_sys: float
    n_angles: int
    coupling_angle_note: str

    @property
    def passed(self) -> bool:
        return max(self.max_residual_env, self.max_residual_sys) < 1e-12


def pulse_decompositions_check(n_angles: int = 100, seed: int = 7) -> PulseCheckReport:
    """Verify the X-conjugated Y-rotation identities over a grid of angles.

    Checks e^{-i a Z} == e^{-i pi X/4} e^{-i a Y} e^{+i pi X/4} on both
    qubits for fixed and random angles.  The two-qubit coupling gate angle
    bookkeeping (an evolution time 2 d t / (pi J) under a (pi J / 2) Z_S Z_E
    coupling) reduces to the abstract identity angle = d * t, which needs no
    numerical check.
    """
    rng = np.random.default_rng(seed)
    angles = np.concatenate([[0.0, np.pi / 3.0], rng.uniform(-2.0 * np.pi, 2.0 * np.pi, n_angles)])
    res_env = 0.0
    res_sys = 0.0
    for a in angles:
        direct_e = expm_hermitian(kron(I2, Z), a)
        pulse_e = _pulse_z_rotation(a, kron(I2, Y), kron(I2, X))
        res_env = max(res_env, float(np.max(np.abs(direct_e - pulse_e))))
        direct_s = expm_hermitian(kron(Z, I2), a)
        pulse_s = _pulse_z_rotation(a, kron(Y, I2), kron(X, I2))
        res_sys = max(res_sys, float(np.max(np.abs(direct_s - pulse_s))))
    return PulseCheckReport(
        max_residual_env=res_env,
        max_residual_sys=res_sys,
        n_angles=len(angles),
        coupling_angle_note="coupling gate angle = d*t (natural ZZ evolution)",
    )


def _initial_state(p: ProtocolParams, input_theta: float) -> np.ndarray:
    sys_part = np.array([np.sin(input_theta / 2.0), np.cos(input_theta / 2.0)], dtype=complex)
    return np.kron(sys_part, ground_state(p.bath))


def _exact_states(p: ProtocolParams, times: np.ndarray, psi0: np.ndarray) -> np.ndarray:
    h = build_target_hamiltonian(p)
    w, v = np.linalg.eigh(h)
    coeff = v.conj().T @ psi0
    phases = np.exp(-1j * np.outer(times, w))
    return (phases * coeff) @ v.T


def _stepped_states(p: ProtocolParams, times: np.ndarray, psi0: np.ndarray) -> np.ndarray:
    dt = p.sys.tau / p.trotter_steps
    ratio = times / dt
    idx = np.rint(ratio).astype(int)
    if np.max(np.abs(ratio - idx)) > 1e-9:
        raise ValidationError(
            "sample times must be integer multiples of tau/trotter_steps for "
            f"{p.decomposition.value} evolution"
        )
    u = trotter_step(p, dt)
    states = np.empty((len(times), 4), dtype=complex)
    psi = psi0.copy()
    step = 0
    for j, n in enumerate(idx):
        while step < n:
            psi = u @ psi
            step += 1
        states[j] = psi
    return states


def run_protocol(
    p: ProtocolParams,
    sample_times=None,
    input_theta: float = np.pi / 2.0,
) -> ProtocolRun:
    """Simulate the full measurement protocol over one cycle.

    The input state is (sin(th_in/2)|0> + cos(th_in/2)|1>) (x) |g>, evolved by
    the chosen decomposition and read out at each sample time: the system
    coherence <0|rho|1> is rescaled by 2 e^{+2 i W t} / sin(th_in) to recover
    the decoherence factor (the system's own precession enters the coherence
    at twice the cycle frequency).  The geometric phase is then evaluated for
    the analysis angle ``p.sys.theta``, which is independent of th_in because
    the coupling is purely dephasing.
    """
    if sample_times is None:
        sample_times = np.linspace(0.0, p.sys.tau, 65)
    times = np.asarray(sample_times, dtype=float)
    if not (0.0 < input_theta < np.pi):
        raise ValidationError("input_theta must lie strictly inside (0, pi)")

    psi0 = _initial_state(p, input_theta)
    exact = _exact_states(p, times, psi0)
    if p.decomposition is Decomposition.EXACT:
        states = exact
    else:
        states = _stepped_states(p, times, psi0)

    r_hat = np.empty(len(times), dtype=complex)
    for j, psi in enumerate(states):
        rho = np.outer(psi, psi.conj())
        rho_r = partial_trace_env(rho)
        r_hat[j] = rho_r[0, 1] * 2.0 / np.sin(input_theta) * np.exp(+2j * p.sys.omega * times[j])

    fidelity = np.abs(np.einsum("ti,ti->t", exact.conj(), states)) ** 2
    trace = trace_from_samples(times, r_hat)
    gp = geometric_phase(trace, p.sys)
    return ProtocolRun(trace=trace, fidelity_vs_exact=fidelity, gp=gp)


def cycle_fidelity(p: ProtocolParams, input_theta: float = np.pi / 2.0) -> float:
    """Full-cycle state fidelity of the stepped evolution against exact."""
    psi0 = _initial_state(p, input_theta)
    psi_exact = _exact_states(p, np.array([p.sys.tau]), psi0)[0]
    u = trotter_step(p, p.sys.tau / p.trotter_steps)
    psi = psi0.copy()
    for _ in range(p.trotter_steps):
        psi = u @ psi
    return float(np.abs(np.vdot(psi_exact, psi)) ** 2)


def find_min_trotter_steps(
    p: ProtocolParams,
    b_values,
    threshold: float = 0.997,
    max_steps: int = 512,
) -> int:
    """Smallest power-of-two step count meeting the fidelity threshold over B."""
    base = p if p.decomposition is not Decomposition.EXACT else replace(
        p, decomposition=Decomposition.COARSE_TROTTER
    )
    n = 1
    while n <= max_steps:
        trial = replace(base, trotter_steps=n)
        worst = min(
            cycle_fidelity(replace(trial, bath=trial.bath.with_b_field(b)))
            for b in np.asarray(b_values, dtype=float)
        )
        if worst >= threshold:
            return n
        n *= 2
    raise ValidationError(
        f"no power-of-two step count <= {max_steps} reaches fidelity {threshold}"
    )


@dataclass(frozen=True)
class CorrectionRecord:
    """Baseline-subtracted phase correction at one bath field value."""

    b_field: float
    dphi: float
    dphi_theory: float
    error: str | None = None


def correction_experiment(p: ProtocolParams, b_grid, theory_samples: int = 1024) -> list[CorrectionRecord]:
    """Coupling-induced phase correction across a field sweep.

    For each B the protocol runs coupled and uncoupled (d = 0); their phase
    difference is the correction.  A theory column computes the same
    correction from the branch-overlap decoherence factor without simulating
    the protocol.  Per-point failures are flagged, not dropped.
    """
    records: list[CorrectionRecord] = []
    theory_baseline = geometric_phase(
        build_trace(lambda t: np.ones_like(t, dtype=complex), p.sys, theory_samples), p.sys
    )
    for b in np.asarray(b_grid, dtype=float):
        bath_b = p.bath.with_b_field(b)
        try:
            coupled = run_protocol(replace(p, bath=bath_b))
            baseline = run_protocol(replace(p, bath=replace(bath_b, coupling=0.0)))
            dphi = coupled.gp.phi_total - baseline.gp.phi_total

            theory_trace = build_trace(
                lambda t: decoherence_factor_oracle(bath_b, t), p.sys, theory_samples
            )
            dphi_th = geometric_phase(theory_trace, p.sys).phi_total - theory_baseline.phi_total
            records.append(CorrectionRecord(float(b), dphi, dphi_th))
        except Exception as exc:
            records.append(
                CorrectionRecord(float(b), np.nan, np.nan, error=f"{type(exc).__name__}: {exc}")
            )
    return records
