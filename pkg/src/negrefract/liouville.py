"""Exact steady state of the five-level density matrix.

The Lindblad equation in the rotating frame is written as a 25x25 linear
system whose first row is replaced by the trace condition. Field-parity
combinations of three solves isolate the four polarizabilities to all
orders in the probe amplitudes.

Unknown ordering: populations rho_11..rho_55, then the upper-triangle
coherences rho_ij (i < j) row by row, then their partners rho_ji in the
same order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import (
    FieldAmplitudeError,
    IllConditionedError,
    ReferenceZeroError,
    ResonanceError,
)
from .linear_response import BroadeningSpec, PolarizabilityQuartet
from .params import HBAR, ProbeDetunings, SystemParams, resonance_check

__all__ = [
    "LiouvillianSystem",
    "DensityVector25",
    "build_liouvillian",
    "steady_state",
    "separated_polarizabilities",
    "probe_fields",
    "deviation",
    "ORDER",
    "COND_LIMIT",
]

NLEV = 5
COND_LIMIT = 1e12
DEVIATION_FLOOR = -16.0

_UPPER = [(i, j) for i in range(NLEV) for j in range(i + 1, NLEV)]
# (i, j) zero-based level pairs in vector order
ORDER = [(i, i) for i in range(NLEV)] + _UPPER + [(j, i) for i, j in _UPPER]
# position of each vector entry inside the row-major flattened matrix
_PERM = np.array([i * NLEV + j for i, j in ORDER])
_INDEX = {pair: k for k, pair in enumerate(ORDER)}

# Pure dephasing from two independent Lorentzian frequency noises x and y
# (in units of gammap). Level energies shift as 1: 0, 2: y, 3: x + y, 4: y,
# 5: y, so DeltaE and deltac move together while DeltaB moves independently.
# Coherence |i><j| then decays at the L1 distance of the two shift vectors,
# which keeps the dissipator completely positive.
_LEVEL_SHIFTS = {1: (0, 0), 2: (0, 1), 3: (1, 1), 4: (0, 1), 5: (0, 1)}
_DEPHASING = {
    (i, j): float(sum(abs(a - b) for a, b in zip(_LEVEL_SHIFTS[i], _LEVEL_SHIFTS[j])))
    for i in range(1, NLEV + 1) for j in range(1, i)
}


@dataclass(frozen=True)
class LiouvillianSystem:
    """Steady-state system ``M rho = a`` in units of ``scale`` (rad/s)."""

    M: np.ndarray
    a: np.ndarray
    scale: float


@dataclass(frozen=True)
class DensityVector25:
    """Steady-state density matrix in the 25-entry vector ordering."""

    values: np.ndarray
    residual: float = 0.0
    condition: float = float("nan")

    def matrix(self) -> np.ndarray:
        rho = np.empty(NLEV * NLEV, dtype=complex)
        rho[_PERM] = self.values
        return rho.reshape(NLEV, NLEV)

    def element(self, i: int, j: int) -> complex:
        """``rho_ij`` with 1-based level labels."""
        return complex(self.values[_INDEX[(i - 1, j - 1)]])

    @property
    def populations(self) -> np.ndarray:
        return self.values[:NLEV].real.copy()

    def violations(self, tol=1e-10) -> list[str]:
        """Names of the density-matrix invariants broken beyond ``tol``."""
        out = []
        pops = self.values[:NLEV]
        if np.max(np.abs(pops.imag)) > tol:
            out.append("complex population")
        if np.any(pops.real < -tol) or np.any(pops.real > 1 + tol):
            out.append("population out of [0, 1]")
        if abs(np.sum(pops) - 1.0) > tol:
            out.append("trace")
        rho = self.matrix()
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            out.append("hermiticity")
        return out


def probe_fields(params: SystemParams, OmegaE, OmegaB):
    """Probe amplitudes ``(E, B)`` in statV/cm and G for given Rabi frequencies."""
    return HBAR * OmegaE / params.d34, HBAR * OmegaB / params.mu21


def build_liouvillian(
    params: SystemParams,
    det: ProbeDetunings,
    OmegaE,
    OmegaB,
    broadening: BroadeningSpec | None = None,
) -> LiouvillianSystem:
    """Assemble the trace-constrained steady-state system.

    Parameters
    ----------
    params : SystemParams
    det : ProbeDetunings
        Scalar detunings.
    OmegaE, OmegaB : float
        Probe Rabi frequencies ``d34 E / hbar`` and ``mu21 B / hbar`` (rad/s).
    broadening : BroadeningSpec, optional
        Homogeneous width added as pure dephasing.
    """
    chk = resonance_check(params)
    if not chk:
        raise ResonanceError(chk.residual)
    s = params.gamma2 if params.gamma2 > 0 else 1.0
    gp = 0.0 if broadening is None else broadening.gammap / s

    H = np.zeros((NLEV, NLEV), dtype=complex)
    H[1, 1] = float(det.DeltaB) / s
    H[2, 2] = float(det.DeltaE) / s

    def couple(i, j, v):
        H[i, j] += v
        H[j, i] += np.conj(v)

    couple(2, 3, -OmegaE / s / 2)
    couple(1, 0, -OmegaB / s / 2)
    couple(4, 0, -params.Omega1 / s / 2)
    couple(4, 3, -params.Omega2 / s / 2)
    couple(2, 1, -params.Omegac / s / 2)

    eye = np.eye(NLEV)
    M = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    # decay channels: 2->1, 3->4, 5->1 and 5->4 (equal split)
    jumps = [
        (params.gamma2, 0, 1),
        (params.gamma3, 3, 2),
        (params.gamma5 / 2, 0, 4),
        (params.gamma5 / 2, 3, 4),
    ]
    for rate, lo, hi in jumps:
        if rate == 0:
            continue
        L = np.zeros((NLEV, NLEV))
        L[lo, hi] = np.sqrt(rate / s)
        LdL = L.T @ L
        M += np.kron(L, L) - 0.5 * np.kron(LdL, eye) - 0.5 * np.kron(eye, LdL.T)
    # levels 1 and 4 are ground states; a nonzero gamma1/gamma4 only dephases
    for lvl, rate in ((0, params.gamma1), (3, params.gamma4)):
        if rate:
            for k in range(NLEV):
                if k != lvl:
                    M[lvl * NLEV + k, lvl * NLEV + k] -= 0.5 * rate / s
                    M[k * NLEV + lvl, k * NLEV + lvl] -= 0.5 * rate / s
    if gp:
        for (i, j), f in _DEPHASING.items():
            if f:
                M[(i - 1) * NLEV + (j - 1), (i - 1) * NLEV + (j - 1)] -= f * gp
                M[(j - 1) * NLEV + (i - 1), (j - 1) * NLEV + (i - 1)] -= f * gp

    M = M[np.ix_(_PERM, _PERM)]
    M[0, :] = 0
    M[0, :NLEV] = 1.0
    a = np.zeros(NLEV * NLEV, dtype=complex)
    a[0] = 1.0
    return LiouvillianSystem(M=M, a=a, scale=s)


def steady_state(sys: LiouvillianSystem, cond_limit=COND_LIMIT) -> DensityVector25:
    """LU solve with partial pivoting plus one refinement step.

    Raises
    ------
    IllConditionedError
        If the 1-norm condition estimate exceeds ``cond_limit``.
    """
    M, a = sys.M, sys.a
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=True)
    anorm = np.linalg.norm(M, 1)
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if info != 0 or not np.isfinite(cond) or cond > cond_limit:
        raise IllConditionedError(cond)
    x = sla.lu_solve((lu, piv), a)
    x = x + sla.lu_solve((lu, piv), a - M @ x)
    res = float(np.linalg.norm(M @ x - a) / np.linalg.norm(a))
    return DensityVector25(values=x, residual=res, condition=float(cond))


def separated_polarizabilities(
    params: SystemParams,
    det: ProbeDetunings,
    E: float,
    B: float,
    broadening: BroadeningSpec | None = None,
) -> PolarizabilityQuartet:
    """Exact polarizabilities at finite probe amplitudes.

    Solves at ``(E, B)``, ``(E, -B)`` and ``(-E, B)``; sums with one field
    reversed keep only the terms odd in the other field.

    Parameters
    ----------
    E, B : float
        Probe amplitudes in statV/cm and G, both nonzero.
    """
    if E == 0 or B == 0:
        raise FieldAmplitudeError("both probe amplitudes must be nonzero")
    d, mu = params.d34, params.mu21
    OE, OB = d * E / HBAR, mu * B / HBAR

    def solve(sE, sB):
        st = steady_state(build_liouvillian(params, det, sE * OE, sB * OB, broadening))
        return st.element(3, 4), st.element(2, 1)

    f_pp, g_pp = solve(1, 1)
    f_pm, g_pm = solve(1, -1)
    f_mp, g_mp = solve(-1, 1)
    return PolarizabilityQuartet(
        aEE=d / (2 * E) * (f_pp + f_pm),
        aEB=d / (2 * B) * (f_pp + f_mp),
        aBE=mu / (2 * E) * (g_pp + g_pm),
        aBB=mu / (2 * B) * (g_pp + g_mp),
    )


def deviation(alpha_exact, alpha_linear, part=None):
    """``log10 |1 - alpha_exact/alpha_linear|``, clamped at -16.

    Parameters
    ----------
    part : {None, 'real', 'imag'}
        Restrict to the real or imaginary part of the complex relative
        deviation ``1 - alpha_exact/alpha_linear``.
    """
    ex = np.asarray(alpha_exact, dtype=complex)
    lin = np.asarray(alpha_linear, dtype=complex)
    if np.any(lin == 0):
        raise ReferenceZeroError("linear reference value is zero")
    delta = 1.0 - ex / lin
    if part is None:
        mag = np.abs(delta)
    elif part == "real":
        mag = np.abs(delta.real)
    elif part == "imag":
        mag = np.abs(delta.imag)
    else:
        raise ValueError("part must be None, 'real' or 'imag'")
    with np.errstate(divide="ignore"):
        out = np.maximum(np.log10(mag), DEVIATION_FLOOR)
    return float(out) if out.ndim == 0 else out
