"""Decoherence factor of a transverse-field Ising chain environment.

The chain H(lam) = -J (sum_n Z_n Z_{n+1} + lam X_n), periodic, N even, is
free-fermion solvable; momentum modes k = (2m-1) pi/N decouple into 2x2
blocks.  A system spin dephasing against the chain shifts the transverse
field between its two branches, so the decoherence factor is a product of
per-mode overlaps

    r(t) = prod_{k>0} R_k(t) exp(i (phi_k(t) - eps_k t)),

with eps_k = 2 J sqrt(1 + lam^2 - 2 lam cos k) and the Bogoliubov angle
theta_k = atan2(sin k, lam - cos k).  The branch fields are (lam, lam+delta)
by default ("one_sided", the convention under which the closed forms in
:mod:`gphase.perturbative` are written), or (lam-delta, lam+delta)
("symmetric").  ``brute_force_oracle`` checks the product against dense
2^N diagonalization for N <= 11.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionTooLarge, MagnitudeUnderflow, ValidationError
from .qmat import I2, X, Z
from .two_level import _ground_xz, _overlap_factor

_LOG_FLOOR = -700.0


@dataclass(frozen=True)
class IsingBathParams:
    """Transverse-field Ising chain environment and its field-shift coupling."""

    n_spins: int       # N, even, >= 2
    j_coupling: float  # J, rad/s
    lam: float         # dimensionless transverse field, critical at 1
    coupling: float    # delta, dimensionless shift of lam

    def __post_init__(self):
        if self.n_spins < 2 or self.n_spins % 2 != 0:
            raise ValidationError(f"n_spins must be even and >= 2, got {self.n_spins}")
        if not (self.j_coupling > 0):
            raise ValidationError(f"j_coupling must be positive, got {self.j_coupling}")


def momenta(n_spins: int) -> np.ndarray:
    """Positive momenta k = (2m - 1) pi / N, m = 1 .. N/2."""
    m = np.arange(1, n_spins // 2 + 1)
    return (2.0 * m - 1.0) * np.pi / n_spins


def dispersion(lam, k, j_coupling: float = 1.0):
    """Quasiparticle energy eps_k = 2 J sqrt(1 + lam^2 - 2 lam cos k)."""
    return 2.0 * j_coupling * np.sqrt(1.0 + lam**2 - 2.0 * lam * np.cos(k))


def bogoliubov_angle(lam, k):
    """theta_k with tan(theta_k) = sin k / (lam - cos k), quadrant-aware."""
    return np.arctan2(np.sin(k), lam - np.cos(k))


@dataclass(frozen=True)
class ModeFactors:
    """Per-mode quantities entering one factor of the decoherence product."""

    k: float
    eps_k: float               # rad/s, at field lam
    eps_tilde_k: float         # rad/s, at the shifted field lam + delta
    alpha_k: float             # half the Bogoliubov angle difference
    theta_k_lambda: float
    theta_k_lambda_shift: float


def mode_factors(p: IsingBathParams, k: float) -> ModeFactors:
    """Dispersion and Bogoliubov data of one mode for the (lam, lam+delta) pair."""
    if not (0.0 < k < np.pi):
        raise ValidationError(f"momentum must lie in (0, pi), got {k}")
    th = bogoliubov_angle(p.lam, k)
    th_s = bogoliubov_angle(p.lam + p.coupling, k)
    return ModeFactors(
        k=float(k),
        eps_k=float(dispersion(p.lam, k, p.j_coupling)),
        eps_tilde_k=float(dispersion(p.lam + p.coupling, k, p.j_coupling)),
        alpha_k=float(0.5 * (th_s - th)),
        theta_k_lambda=float(th),
        theta_k_lambda_shift=float(th_s),
    )


def mode_amplitude(mf: ModeFactors, t: float) -> tuple[float, float]:
    """One mode's magnitude R_k and continuously tracked phase phi_k at time t.

    The mode factor is R_k exp(i (phi_k - eps_k t)) with

        z_k(t) = cos(eps~_k t) + i cos(2 alpha_k) sin(eps~_k t),
        R_k = |z_k|,   phi_k = arg z_k continued from phi_k(0) = 0,

    so that delta = 0 gives phi_k = eps_k t and a unit factor.  The branch of
    arg z_k is tracked by substepping whenever eps~_k * t >= pi/4.
    """
    c2a = np.cos(2.0 * mf.alpha_k)
    wt = mf.eps_tilde_k * t
    r_k = float(np.sqrt(np.cos(wt) ** 2 + (c2a * np.sin(wt)) ** 2))
    n_sub = max(1, int(np.ceil(abs(wt) / (np.pi / 4.0))))
    wts = np.linspace(0.0, wt, n_sub + 1)
    z = np.cos(wts) + 1j * c2a * np.sin(wts)
    phi = float(np.sum(np.angle(z[1:] * z[:-1].conj())))
    return r_k, phi


def decoherence_product(p: IsingBathParams, t, shift: str = "one_sided"):
    """Decoherence factor as the product over positive momenta.

    Accumulates sum(log R_k) and the total phase in log space, so deep
    collapses do not underflow mode by mode.  If the summed log magnitude
    falls below -700 a MagnitudeUnderflow warning is issued and the value is
    flushed to zero.  delta = 0 returns exactly 1.  Vectorized in t.
    """
    t = np.asarray(t, dtype=float)
    k = momenta(p.n_spins)[:, None]
    tt = t[None, :] if t.ndim else t.reshape(1)[None, :]

    if shift == "one_sided":
        lam_lo, lam_hi = p.lam, p.lam + p.coupling
    elif shift == "symmetric":
        lam_lo, lam_hi = p.lam - p.coupling, p.lam + p.coupling
    else:
        raise ValidationError(f"unknown shift convention {shift!r}")

    th = bogoliubov_angle(p.lam, k)
    eps = dispersion(p.lam, k, p.j_coupling)
    if shift == "one_sided":
        # |g_k> is an eigenstate of the lower branch: per-mode closed form
        c2a = np.cos(bogoliubov_angle(lam_hi, k) - th)
        wt = dispersion(lam_hi, k, p.j_coupling) * tt
        z = np.cos(wt) + 1j * c2a * np.sin(wt)
        log_mag = np.sum(np.log(np.abs(z)), axis=0)
        phase = np.sum(np.angle(z), axis=0) - np.sum(eps) * tt[0]
    else:
        # generic two-branch overlap in each mode's 2x2 subspace
        cos_k = np.cos(k)
        sin_k = np.sin(k)
        zmodes = np.empty((len(k), tt.shape[1]), dtype=complex)
        for i in range(len(k)):
            b_g = 2.0 * p.j_coupling * (p.lam - cos_k[i, 0])
            gap = 2.0 * p.j_coupling * sin_k[i, 0]
            psi = _ground_xz(b_g, gap)
            b1 = 2.0 * p.j_coupling * (lam_lo - cos_k[i, 0])
            b0 = 2.0 * p.j_coupling * (lam_hi - cos_k[i, 0])
            zmodes[i] = _overlap_factor(b0, b1, gap, psi, tt[0])
        mags = np.abs(zmodes)
        safe = np.where(mags > 0, mags, 1.0)
        log_mag = np.sum(np.log(safe), axis=0)
        log_mag[np.any(mags == 0, axis=0)] = -np.inf
        phase = np.sum(np.angle(zmodes), axis=0)

    under = log_mag < _LOG_FLOOR
    if np.any(under):
        warnings.warn(
            f"product magnitude underflowed exp({_LOG_FLOOR}); flushed to 0",
            MagnitudeUnderflow,
            stacklevel=2,
        )
    out = np.where(under, 0.0, np.exp(np.maximum(log_mag, _LOG_FLOOR))) * np.exp(1j * phase)
    return out if t.ndim else complex(out[0])


def _dense_chain(n: int, lam: float, j_coupling: float) -> np.ndarray:
    """Dense -J (sum Z_n Z_{n+1} + lam sum X_n) with periodic boundaries."""
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for site in range(n):
        zz = np.ones((1, 1), dtype=complex)
        for m in range(n):
            on = Z if m in (site, (site + 1) % n) else I2
            zz = np.kron(zz, on)
        h -= j_coupling * zz
        xs = np.ones((1, 1), dtype=complex)
        for m in range(n):
            xs = np.kron(xs, X if m == site else I2)
        h -= j_coupling * lam * xs
    return h


def brute_force_oracle(p: IsingBathParams, t, shift: str = "one_sided"):
    """Exact 2^N decoherence factor <g| e^{+i H_- t} e^{-i H_+ t} |g>.

    |g> is the dense ground state of the chain at field lam; the branch
    Hamiltonians are the chain at the shifted fields.  N <= 11 only.
    """
    if p.n_spins > 11:
        raise DimensionTooLarge(f"dense oracle limited to N <= 11, got {p.n_spins}")
    t = np.asarray(t, dtype=float)
    tt = t if t.ndim else t.reshape(1)

    w_g, v_g = np.linalg.eigh(_dense_chain(p.n_spins, p.lam, p.j_coupling))
    g = v_g[:, 0]

    if shift == "one_sided":
        # e^{+i H(lam) t}|g> is a pure phase e^{-i E_g t} acting leftwards
        w_hi, v_hi = np.linalg.eigh(
            _dense_chain(p.n_spins, p.lam + p.coupling, p.j_coupling)
        )
        weights = np.abs(v_hi.conj().T @ g) ** 2
        out = np.exp(1j * w_g[0] * tt) * (weights @ np.exp(-1j * np.outer(w_hi, tt)))
    elif shift == "symmetric":
        w_lo, v_lo = np.linalg.eigh(
            _dense_chain(p.n_spins, p.lam - p.coupling, p.j_coupling)
        )
        w_hi, v_hi = np.linalg.eigh(
            _dense_chain(p.n_spins, p.lam + p.coupling, p.j_coupling)
        )
        a = v_lo.conj().T @ g
        b = v_hi.conj().T @ g
        mix = v_lo.conj().T @ v_hi
        phase_lo = np.exp(1j * np.outer(w_lo, tt))
        phase_hi = np.exp(-1j * np.outer(w_hi, tt))
        out = np.einsum("j,jt,jl,lt,l->t", a.conj(), phase_lo, mix, phase_hi, b)
    else:
        raise ValidationError(f"unknown shift convention {shift!r}")
    return out if t.ndim else complex(out[0])
