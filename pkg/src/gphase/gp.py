"""Kinematic geometric phase of a dephased qubit from its decoherence factor.

A system spin precessing at angular frequency Omega while dephasing against
an environment has the reduced density matrix

    rho(t) = [[sin^2(theta/2),            c(t)],
              [c*(t),            cos^2(theta/2)]],   c(t) = (sin(theta)/2) e^{-i w t} r(t),

with r(t) the complex decoherence factor, r(0) = 1.  Over one cycle
tau = 2*pi/Omega the geometric phase splits into a quadrature term plus a
quadrant-aware arctangent closing term (``geometric_phase``).  The same
quantity is obtained independently from the eigenvector trajectory of
rho(t) by discrete parallel transport (``gp_from_trajectory``); the two
routes agree mod 2*pi and cross-validate each other.

Phase bookkeeping: a trace stores phi with r = |r| e^{-i phi}, unwrapped and
phi(0) = 0.  The closed-form engine consumes arg r = -phi; that single sign
flip happens inside ``geometric_phase`` and nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateEigenvector,
    EigenbranchCrossing,
    InvalidDensityMatrix,
    InvalidInitialValue,
    UnwrapFailure,
    ValidationError,
)

_POLE_TOL = 1e-12          # theta pinned to 0 or pi
_DEGENERACY_TOL = 1e-14    # eigenvector direction undefined below this
_UNWRAP_STEP_LIMIT = np.pi / 2
_MAX_REFINEMENTS = 6


@dataclass(frozen=True)
class SystemParams:
    """System-spin cycle: precession frequency, Bloch polar angle."""

    omega: float            # rad/s, > 0
    theta: float            # rad, in [0, pi]

    def __post_init__(self):
        if not (self.omega > 0 and np.isfinite(self.omega)):
            raise ValidationError(f"omega must be positive, got {self.omega}")
        if not (0.0 <= self.theta <= np.pi):
            raise ValidationError(f"theta must lie in [0, pi], got {self.theta}")

    @property
    def tau(self) -> float:
        """Cycle period 2*pi/omega."""
        return 2.0 * np.pi / self.omega


@dataclass(frozen=True)
class DecoherenceTrace:
    """Complex decoherence factor sampled on a uniform grid over one cycle.

    ``phase_unwrapped`` follows the r = |r| e^{-i phi} convention: it is the
    negated, continuously unwrapped argument of r with phi(0) = 0.
    """

    times: np.ndarray = field(repr=False)
    r_values: np.ndarray = field(repr=False)
    magnitude: np.ndarray = field(repr=False)
    phase_unwrapped: np.ndarray = field(repr=False)

    @property
    def samples(self) -> int:
        return len(self.times) - 1


def trace_from_samples(times, r_values) -> DecoherenceTrace:
    """Validate sampled r(t) values and build a trace with unwrapped phase.

    Raises InvalidInitialValue if r(0) deviates from 1, UnwrapFailure if the
    grid is too coarse to unwrap the phase unambiguously.
    """
    times = np.asarray(times, dtype=float)
    r = np.asarray(r_values, dtype=complex)
    if times.ndim != 1 or times.shape != r.shape:
        raise ValidationError("times and r_values must be matching 1-D arrays")
    if len(times) < 3:
        raise ValidationError("need at least 3 samples")
    dt = np.diff(times)
    if times[0] != 0.0 or np.any(dt <= 0) or np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
        raise ValidationError("times must be a uniform grid starting at 0")
    if abs(r[0] - 1.0) > 1e-9:
        raise InvalidInitialValue(f"r(0) = {r[0]!r} is not 1 within 1e-9")
    mag = np.abs(r)
    if np.max(mag) > 1.0 + 1e-9:
        raise ValidationError(f"|r| exceeds 1 beyond tolerance: max {np.max(mag)}")
    arg = np.unwrap(np.angle(r))
    steps = np.abs(np.diff(arg))
    if np.max(steps, initial=0.0) >= _UNWRAP_STEP_LIMIT:
        raise UnwrapFailure(
            f"phase step {np.max(steps):.3f} rad >= {_UNWRAP_STEP_LIMIT:.3f}; "
            "refine the grid or r(t) passes too close to 0"
        )
    phi = -(arg - arg[0])  # r = |r| e^{-i phi}, phi(0) = 0
    return DecoherenceTrace(times=times, r_values=r, magnitude=mag, phase_unwrapped=phi)


def _sample_trace(sampler, params: SystemParams, m: int) -> DecoherenceTrace:
    times = np.linspace(0.0, params.tau, m + 1)
    r = np.asarray(sampler(times), dtype=complex)
    if r.shape != times.shape:
        raise ValidationError("sampler must return one value per time point")
    return trace_from_samples(times, r)


def build_trace(sampler, params: SystemParams, samples: int = 256) -> DecoherenceTrace:
    """Sample ``sampler(t)`` on [0, tau] and unwrap, refining on failure.

    ``sampler`` is called with the full time grid (an ndarray) and must return
    the complex r values.  Unwrapping is accepted only if a grid of twice the
    density reproduces the same endpoint phase (an aliased winding cannot);
    otherwise the grid is doubled, up to 2^6 times.  A persistent phase step
    near pi (e.g. r crossing zero) raises UnwrapFailure.
    """
    if samples < 64:
        raise ValidationError("samples must be >= 64")
    m = samples + (samples % 2)  # composite Simpson needs an even interval count
    for _ in range(_MAX_REFINEMENTS + 1):
        try:
            trace = _sample_trace(sampler, params, m)
            check = _sample_trace(sampler, params, 2 * m)
        except UnwrapFailure:
            m *= 2
            continue
        if abs(trace.phase_unwrapped[-1] - check.phase_unwrapped[-1]) < 1e-6:
            return trace
        m *= 2
    raise UnwrapFailure(
        f"phase unwrapping not stable at {m // 2} samples (step >= "
        f"{_UNWRAP_STEP_LIMIT:.3f} rad or unresolved winding)"
    )


@dataclass(frozen=True)
class GpResult:
    """Total geometric phase and its decomposition over one cycle."""

    phi_total: float       # rad
    phi_unitary: float     # pi*(1 - cos theta)
    correction: float      # phi_total - phi_unitary
    integral_part: float   # quadrature term, not reduced mod 2*pi
    arctan_part: float     # quadrant-aware closing term
    eps_plus_final: float  # larger eigenvalue of rho at t = tau


def eps_plus(r_abs, theta):
    """Larger eigenvalue of the dephased qubit state, in [1/2, 1]."""
    r_abs = np.asarray(r_abs, dtype=float)
    return 0.5 * (1.0 + np.sqrt(np.cos(theta) ** 2 + r_abs**2 * np.sin(theta) ** 2))


def bloch_plus_angle(r_abs, theta, eps_plus_val):
    """Half-angle cosine/sine of the + eigenvector direction.

    Returns (cos_half, sin_half) with cos_half^2 + sin_half^2 = 1 and
    sin_half >= 0.  Raises DegenerateEigenvector when the direction is
    undefined (|r| sin(theta) = 0 with eps_plus = sin^2(theta/2)), which the
    caller resolves by continuity.
    """
    num_c = 2.0 * (np.asarray(eps_plus_val) - np.sin(theta / 2.0) ** 2)
    num_s = np.asarray(r_abs) * np.sin(theta)
    den = np.sqrt(num_s**2 + num_c**2)
    if np.any(den < _DEGENERACY_TOL):
        raise DegenerateEigenvector(
            "eigenvector direction undefined (fully mixed point on the trajectory)"
        )
    return num_c / den, num_s / den


def dynamical_phase(params: SystemParams) -> float:
    """Closed-system dynamical phase over one cycle, -pi*cos(theta)."""
    return -np.pi * np.cos(params.theta)


def _simpson(y: np.ndarray, dt: float) -> float:
    n = len(y) - 1
    if n % 2 != 0:
        raise ValidationError("composite Simpson needs an even number of intervals")
    return dt / 3.0 * (y[0] + y[-1] + 4.0 * np.sum(y[1:-1:2]) + 2.0 * np.sum(y[2:-1:2]))


def _central_diff(y: np.ndarray, dt: float) -> np.ndarray:
    d = np.empty_like(y)
    d[1:-1] = (y[2:] - y[:-2]) / (2.0 * dt)
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dt)
    d[-1] = (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2.0 * dt)
    return d


def geometric_phase(trace: DecoherenceTrace, params: SystemParams) -> GpResult:
    """Geometric phase over one cycle from a sampled decoherence factor.

    Evaluates the quadrature term integral((Omega - dphi/dt) sin^2(theta+/2))
    with the dphi/dt part integrated by parts (no differentiation of sampled
    phases), plus the quadrant-aware arctangent closing term.  The poles
    theta = 0, pi carry no bath dependence and return the unitary value.
    """
    theta = params.theta
    phi0 = np.pi * (1.0 - np.cos(theta))
    if theta < _POLE_TOL or np.pi - theta < _POLE_TOL:
        return GpResult(phi0, phi0, 0.0, phi0, 0.0, 1.0)

    tau = params.tau
    if abs(trace.times[-1] - tau) > 1e-9 * tau:
        raise ValidationError("trace must cover exactly one period tau")

    dt = trace.times[1] - trace.times[0]
    # engine-side sign flip: the closed form wants arg r = -phi
    phi = -trace.phase_unwrapped
    ep = eps_plus(trace.magnitude, theta)
    cos_half, sin_half = bloch_plus_angle(trace.magnitude, theta, ep)
    g = sin_half**2

    # integral (Omega - phi') g dt = Omega*S(g) - [phi*g]_0^tau + S(phi*g')
    g_dot = _central_diff(g, dt)
    int_phi_term = phi[-1] * g[-1] - _simpson(phi * g_dot, dt)
    integral_part = params.omega * _simpson(g, dt) - int_phi_term

    s0, c0 = np.sin(theta / 2.0), np.cos(theta / 2.0)
    num = np.sin(phi[-1]) * sin_half[-1] * s0
    den = np.cos(phi[-1]) * sin_half[-1] * s0 + cos_half[-1] * c0
    arctan_part = np.arctan2(num, den)

    total = integral_part + arctan_part
    return GpResult(
        phi_total=total,
        phi_unitary=phi0,
        correction=total - phi0,
        integral_part=integral_part,
        arctan_part=arctan_part,
        eps_plus_final=float(ep[-1]),
    )


def density_trajectory(trace: DecoherenceTrace, params: SystemParams) -> np.ndarray:
    """Reduced density matrices rho(t_i) reconstructed from a trace.

    The coherence rotates once per cycle (e^{-i omega t} r(t)), the
    convention under which the trajectory route and the closed form agree.
    """
    theta = params.theta
    a = np.sin(theta / 2.0) ** 2
    c = 0.5 * np.sin(theta) * np.exp(-1j * params.omega * trace.times) * trace.r_values
    rho = np.zeros((len(trace.times), 2, 2), dtype=complex)
    rho[:, 0, 0] = a
    rho[:, 1, 1] = 1.0 - a
    rho[:, 0, 1] = c
    rho[:, 1, 0] = c.conj()
    return rho


def gp_from_trajectory(rho_t) -> float:
    """Geometric phase by discrete parallel transport of the + eigenbranch.

    Diagonalizes every rho(t_i), gauge-smooths the + eigenvectors by maximal
    overlap with the previous step, accumulates the parallel-transport factor
    through the overlap chain and returns the argument of the + mode summand.
    Result is defined mod 2*pi.  Raises EigenbranchCrossing if the two
    eigenvalue branches approach within 1e-8 anywhere on the grid.
    """
    rho = np.asarray(rho_t, dtype=complex)
    if rho.ndim != 3 or rho.shape[1:] != (2, 2):
        raise ValidationError("expected an (M+1, 2, 2) stack of density matrices")
    if np.max(np.abs(rho - rho.conj().transpose(0, 2, 1))) > 1e-10:
        raise InvalidDensityMatrix("trajectory contains a non-Hermitian matrix")
    if np.max(np.abs(np.einsum("tii->t", rho).real - 1.0)) > 1e-10:
        raise InvalidDensityMatrix("trajectory contains a matrix with trace != 1")

    w, v = np.linalg.eigh(rho)
    if np.min(w[:, 1] - w[:, 0]) < 1e-8:
        raise EigenbranchCrossing("eigenvalue gap below 1e-8 on the trajectory")

    plus = v[:, :, 1]
    # gauge smoothing: rotate each vector so the step overlap is real positive
    ov = np.einsum("ti,ti->t", plus[:-1].conj(), plus[1:])
    gauge = np.concatenate([[1.0], np.exp(1j * np.cumsum(np.angle(ov)))])
    plus = plus * gauge[:, None].conj()

    transported = np.einsum("ti,ti->t", plus[:-1].conj(), plus[1:])
    # parallel-transport exponential: e^{-sum log <k_i|k_{i+1}>}; the smoothed
    # overlaps are real positive so only the endpoint overlap carries phase
    weight = np.sqrt(w[-1, 1] * w[0, 1]) * np.exp(-np.sum(np.log(transported.real)))
    summand = weight * np.vdot(plus[0], plus[-1])
    return float(np.angle(summand))
