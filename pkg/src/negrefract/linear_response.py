"""First-order probe response of the driven five-level atom.

The four polarizabilities couple the probe E and B fields to the induced
electric and magnetic dipoles. Homogeneous broadening enters through
modified coherence decay rates; Doppler broadening is a Gauss-Hermite
average over a co-moving detuning shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import ConfigurationError, ResonanceError, SingularResponseError, TruncationError
from .params import (
    HBAR,
    DarkStateSolution,
    ProbeDetunings,
    SystemParams,
    dark_state_populations,
    resonance_check,
)

__all__ = [
    "PolarizabilityQuartet",
    "BroadeningSpec",
    "polarizability_quartet",
    "apply_doppler",
    "kramers_kronig_residual",
    "optimal_coupling_scan",
    "denominators",
]


@dataclass(frozen=True)
class PolarizabilityQuartet:
    """Complex polarizabilities in cm^3; fields may be scalars or arrays."""

    aEE: object
    aEB: object
    aBE: object
    aBB: object

    def as_array(self) -> np.ndarray:
        """Stack as shape ``(4, ...)`` in the order EE, EB, BE, BB."""
        return np.array([self.aEE, self.aEB, self.aBE, self.aBB], dtype=complex)

    @classmethod
    def from_array(cls, arr) -> "PolarizabilityQuartet":
        arr = np.asarray(arr, dtype=complex)
        return cls(*(arr[i] if arr[i].ndim else complex(arr[i]) for i in range(4)))

    def __getitem__(self, idx) -> "PolarizabilityQuartet":
        return PolarizabilityQuartet(
            *(complex(np.asarray(v)[idx]) if np.ndim(np.asarray(v)[idx]) == 0 else np.asarray(v)[idx]
              for v in (self.aEE, self.aEB, self.aBE, self.aBB))
        )


@dataclass(frozen=True)
class BroadeningSpec:
    """Homogeneous width ``gammap`` and Gaussian Doppler 1/e half-width, both rad/s."""

    gammap: float = 0.0
    doppler_sigma: float = 0.0
    doppler_nodes: int = 41

    def __post_init__(self):
        if self.gammap < 0:
            raise ConfigurationError("gammap must be >= 0")
        if self.doppler_sigma < 0:
            raise ConfigurationError("doppler_sigma must be >= 0")
        if int(self.doppler_nodes) != self.doppler_nodes or self.doppler_nodes < 1:
            raise ConfigurationError("doppler_nodes must be a positive integer")
        if self.doppler_nodes % 2 == 0:
            raise ConfigurationError("doppler_nodes must be odd")


def denominators(params: SystemParams, det: ProbeDetunings, gammap: float = 0.0):
    """Complex line factors ``(D42, D34, D31, D21)`` with broadened rates.

    Only the 2-4 coherence escapes the homogeneous broadening because
    levels 2 and 4 fluctuate together.
    """
    DE = np.asarray(det.DeltaE, dtype=float)
    DB = np.asarray(det.DeltaB, dtype=float)
    dc = np.asarray(det.deltac, dtype=float)
    D42 = params.gamma_ij(4, 2) + 1j * (DE - dc)
    D34 = params.gamma_ij(3, 4) + gammap + 1j * DE
    D31 = params.gamma_ij(3, 1) + 2.0 * gammap + 1j * (DB + dc)
    D21 = params.gamma_ij(2, 1) + gammap + 1j * DB
    return D42, D34, D31, D21


def _squeeze(x):
    x = np.asarray(x)
    return complex(x) if x.ndim == 0 else x


def polarizability_quartet(
    params: SystemParams,
    det: ProbeDetunings,
    dark: DarkStateSolution | None = None,
    broadening: BroadeningSpec | None = None,
) -> PolarizabilityQuartet:
    """Evaluate the four linear polarizabilities.

    Parameters
    ----------
    params : SystemParams
    det : ProbeDetunings
        Scalars or equally shaped arrays.
    dark : DarkStateSolution, optional
        Ground-state populations and coherence. Defaults to the dark state
        of ``params``.
    broadening : BroadeningSpec, optional
        Only ``gammap`` is used here; see :func:`apply_doppler` for the
        Gaussian part.

    Returns
    -------
    PolarizabilityQuartet
    """
    chk = resonance_check(params)
    if not chk:
        raise ResonanceError(chk.residual)
    if dark is None:
        dark = dark_state_populations(params.Omega1, params.Omega2)
    gp = 0.0 if broadening is None else broadening.gammap

    D42, D34, D31, D21 = denominators(params, det, gp)
    Oc = params.Omegac
    w2 = abs(Oc) ** 2 / 4.0
    den1 = D42 * D34 + w2
    den2 = D31 * D21 + w2
    if np.any(den1 == 0) or np.any(den2 == 0):
        raise SingularResponseError("vanishing resonance denominator")

    d, mu = params.d34, params.mu21
    aEE = 0.5j / HBAR * d**2 * dark.rho44 * D42 / den1
    aBB = 0.5j / HBAR * mu**2 * dark.rho11 * D31 / den2
    cross = -0.25 / HBAR * d * mu * dark.rho41
    aEB = cross * Oc / den1
    aBE = cross * np.conj(Oc) / den2
    return PolarizabilityQuartet(_squeeze(aEE), _squeeze(aEB), _squeeze(aBE), _squeeze(aBB))


def apply_doppler(quartet_fn, spec: BroadeningSpec, det: ProbeDetunings) -> PolarizabilityQuartet:
    """Average a quartet over a Gaussian velocity class distribution.

    Parameters
    ----------
    quartet_fn : callable
        Maps a :class:`ProbeDetunings` to a :class:`PolarizabilityQuartet`.
    spec : BroadeningSpec
        ``doppler_sigma`` is the 1/e half-width of the shift distribution
        ``exp(-x**2/sigma**2)``.
    det : ProbeDetunings

    Notes
    -----
    The shift ``x`` is added to DeltaE, deltac and DeltaB together, so the
    two-photon 2-4 resonance is untouched.
    """
    n = spec.doppler_nodes
    if n < 1:
        raise ConfigurationError("node count must be >= 1")
    if spec.doppler_sigma == 0:
        return quartet_fn(det)
    t, w = np.polynomial.hermite.hermgauss(n)
    w = w / math.sqrt(math.pi)
    acc = None
    for ti, wi in zip(t, w):
        q = quartet_fn(det.shifted(spec.doppler_sigma * ti)).as_array()
        acc = wi * q if acc is None else acc + wi * q
    return PolarizabilityQuartet.from_array(acc)


def _odd_hilbert(g):
    """Discrete Hilbert transform with the odd-offset kernel ``2/(pi m)``.

    Spacing independent: the grid step cancels between kernel and measure.
    """
    N = g.size
    m = np.arange(-(N - 1), N)
    safe = np.where(m == 0, 1, m)
    ker = np.where(m % 2 != 0, 2.0 / (np.pi * safe), 0.0)
    full = fftconvolve(g, ker[::-1], mode="full")
    return full[N - 1 : 2 * N - 1]


def kramers_kronig_residual(spectrum, edge_tol=1e-2) -> float:
    """Causality residual of a sampled complex response.

    Parameters
    ----------
    spectrum : array_like of complex
        Response sampled on a uniform, symmetric grid of the detuning that
        enters the line shape as ``gamma + i*DeltaE`` (ascending DeltaE).
    edge_tol : float
        Maximum allowed ``|Im|`` at the two grid ends relative to its peak.

    Returns
    -------
    float
        ``max |Re - Re_inf + H[Im]|`` over the central half of the grid,
        divided by the peak ``|response|``.

    Raises
    ------
    TruncationError
        If the absorptive part has not decayed at the grid edges.
    """
    f = np.asarray(spectrum, dtype=complex)
    if f.ndim != 1 or f.size < 8:
        raise ValueError("need a 1-D spectrum with at least 8 samples")
    peak = np.max(np.abs(f))
    if peak == 0:
        return 0.0
    im_peak = np.max(np.abs(f.imag))
    if im_peak > 0 and max(abs(f.imag[0]), abs(f.imag[-1])) > edge_tol * im_peak:
        raise TruncationError("grid too narrow: absorptive part not decayed at the edges")
    asym = 0.5 * (f.real[0] + f.real[-1])
    H = _odd_hilbert(f.imag)
    N = f.size
    c = slice(N // 4, 3 * N // 4)
    return float(np.max(np.abs((f.real - asym)[c] + H[c])) / peak)


def optimal_coupling_scan(params: SystemParams, broadening=None, omegac_grid=None, detuning_grid=None):
    """Scan |Omega_c| and report where each cross coupling peaks.

    For each coupling strength the peak of ``|aEB|`` and ``|aBE|`` over the
    detuning grid is recorded.

    Returns
    -------
    dict
        ``omegac`` (grid), ``peak_aEB``, ``peak_aBE`` (arrays) and the
        optimal ``omegac_aEB``, ``omegac_aBE`` (rad/s).
    """
    g2 = params.gamma2
    if omegac_grid is None:
        omegac_grid = g2 * np.logspace(0, 6, 241)
    if detuning_grid is None:
        gp = 0.0 if broadening is None else broadening.gammap
        width = max(10.0 * (params.gamma3 + gp), 1e4 * g2)
        detuning_grid = np.linspace(-width, width, 4001)
    det = ProbeDetunings.from_delta(detuning_grid)
    pEB = np.empty(len(omegac_grid))
    pBE = np.empty(len(omegac_grid))
    for i, oc in enumerate(omegac_grid):
        q = polarizability_quartet(params.with_coupling(oc), det, broadening=broadening)
        pEB[i] = np.max(np.abs(q.aEB))
        pBE[i] = np.max(np.abs(q.aBE))
    return {
        "omegac": np.asarray(omegac_grid),
        "peak_aEB": pEB,
        "peak_aBE": pBE,
        "omegac_aEB": float(omegac_grid[int(np.argmax(pEB))]),
        "omegac_aBE": float(omegac_grid[int(np.argmax(pBE))]),
    }
