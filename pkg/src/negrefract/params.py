"""Atomic-system parameters, detuning conventions and the Lambda dark state.

Everything is in Gaussian (CGS) units: rates and detunings in rad/s,
dipole moments in statC*cm (electric) or erg/G (magnetic).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import constants as _si

from .errors import (
    ConfigurationError,
    DegenerateDriveError,
    DetuningConstraintError,
    InvalidFrequencyError,
)

HBAR = _si.hbar * 1e7  # erg*s
C_LIGHT = _si.c * 1e2  # cm/s
FINE_STRUCTURE_INV = 137.0

# "1 kHz" decay rates are read as angular rates 2*pi*1e3 rad/s
UNIT_CONVENTION = "gamma2_hz is a linear frequency; gamma2 = 2*pi*gamma2_hz rad/s"


def wigner_weisskopf_dipole(gamma, omega):
    """Dipole moment reproducing a radiative decay rate.

    ``d = sqrt(3 gamma hbar c^3 / (4 omega^3))``. Works for the magnetic
    moment too, since in Gaussian units both share the same dimension.
    """
    if np.any(np.asarray(omega) <= 0):
        raise InvalidFrequencyError(f"angular frequency must be positive, got {omega!r}")
    if np.any(np.asarray(gamma) < 0):
        raise ValueError("decay rate must be non-negative")
    return np.sqrt(3.0 * gamma * HBAR * C_LIGHT**3 / (4.0 * omega**3))


@dataclass(frozen=True)
class SystemParams:
    """All atomic and drive constants of the five-level scheme."""

    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float
    gamma5: float
    d34: float
    mu21: float
    omega1: float
    omega2: float
    omegac: float
    Omega1: float
    Omega2: float
    Omegac_abs: float
    Omegac_phase: float
    lambda_probe: float

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma3", "gamma4", "gamma5"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")
        if self.Omegac_abs < 0:
            raise ConfigurationError("|Omega_c| must be >= 0")
        if self.lambda_probe <= 0:
            raise ConfigurationError("probe wavelength must be positive")

    @property
    def Omegac(self) -> complex:
        return self.Omegac_abs * complex(math.cos(self.Omegac_phase), math.sin(self.Omegac_phase))

    @property
    def omega_probe(self) -> float:
        return 2.0 * math.pi * C_LIGHT / self.lambda_probe

    def gamma_ij(self, i: int, j: int) -> float:
        """Coherence decay (gamma_i + gamma_j)/2; levels are numbered 1..5."""
        g = (self.gamma1, self.gamma2, self.gamma3, self.gamma4, self.gamma5)
        return 0.5 * (g[i - 1] + g[j - 1])

    def with_coupling(self, abs_value=None, phase=None) -> "SystemParams":
        kw = {}
        if abs_value is not None:
            kw["Omegac_abs"] = float(abs_value)
        if phase is not None:
            kw["Omegac_phase"] = float(phase)
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def build_params(
    gamma2_hz=1e3,
    gamma3_over_gamma2=FINE_STRUCTURE_INV**2,
    gamma5_over_gamma2=None,
    omega1_over_gamma2=1e2,
    omega2_over_gamma2=None,
    omegac_abs_over_gamma2=1e4,
    omegac_phase_rad=math.pi / 2,
    lambda_nm=600.0,
) -> SystemParams:
    """Build a parameter set from dimensionless ratios.

    Dipole moments follow from the decay rates of |3> and |2> at the probe
    wavelength. Drive carrier frequencies are not physically pinned by the
    model; they are set to satisfy the closed-loop condition exactly.
    """
    g2 = 2.0 * math.pi * gamma2_hz
    g3 = gamma3_over_gamma2 * g2
    g5 = g3 if gamma5_over_gamma2 is None else gamma5_over_gamma2 * g2
    if omega2_over_gamma2 is None:
        omega2_over_gamma2 = omega1_over_gamma2
    lam = lambda_nm * 1e-7
    w = 2.0 * math.pi * C_LIGHT / lam
    # |4> and |2> nearly degenerate => w_c ~ w_p; the Lambda pair sits at w and 2w
    omega_c = w
    omega2 = w
    omega1 = omega2 + omega_c
    return SystemParams(
        gamma1=0.0,
        gamma2=g2,
        gamma3=g3,
        gamma4=0.0,
        gamma5=g5,
        d34=float(wigner_weisskopf_dipole(g3, w)),
        mu21=float(wigner_weisskopf_dipole(g2, w)),
        omega1=omega1,
        omega2=omega2,
        omegac=omega_c,
        Omega1=omega1_over_gamma2 * g2,
        Omega2=omega2_over_gamma2 * g2,
        Omegac_abs=omegac_abs_over_gamma2 * g2,
        Omegac_phase=omegac_phase_rad,
        lambda_probe=lam,
    )


def default_params() -> SystemParams:
    """The reference parameter set used for all published spectra."""
    return build_params()


@dataclass(frozen=True)
class ResonanceCheck:
    passed: bool
    residual: float

    def __bool__(self):
        return self.passed


def resonance_check(params: SystemParams, tol=None) -> ResonanceCheck:
    """Check the closed-loop condition ``w_c = w_1 - w_2``.

    The default tolerance is ``1e-9 * w_1``.
    """
    residual = params.omegac - params.omega1 + params.omega2
    if tol is None:
        tol = 1e-9 * abs(params.omega1)
    return ResonanceCheck(abs(residual) <= tol, residual)


@dataclass(frozen=True)
class ProbeDetunings:
    """Probe and coupling detunings (rad/s).

    ``DeltaE = w34 - w_p``, ``DeltaB = w21 - w_p`` and ``deltac = w32 - w_c``,
    tied together by ``DeltaE = DeltaB + deltac``. Fields may be arrays.
    """

    DeltaE: object
    DeltaB: object
    deltac: object = 0.0
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if not self.check:
            return
        DE, DB, dc = (np.asarray(v, dtype=float) for v in (self.DeltaE, self.DeltaB, self.deltac))
        scale = np.maximum(np.maximum(np.abs(DE), np.abs(DB)), np.abs(dc))
        if np.any(np.abs(DE - DB - dc) > 1e-12 * scale + 1e-300):
            raise DetuningConstraintError("DeltaE must equal DeltaB + deltac")

    @classmethod
    def from_delta(cls, Delta, deltac=0.0) -> "ProbeDetunings":
        """Detunings for the plotting variable ``Delta = -DeltaE``."""
        DE = -np.asarray(Delta, dtype=float)
        if DE.ndim == 0:
            DE = float(DE)
        return cls(DE, DE - deltac, deltac)

    @property
    def Delta(self):
        return -np.asarray(self.DeltaE) if np.ndim(self.DeltaE) else -self.DeltaE

    def shifted(self, x) -> "ProbeDetunings":
        """Co-moving shift of all three detunings by ``x``.

        The shifted triple intentionally breaks the loop constraint: it is an
        integration variable, not a physical operating point.
        """
        return ProbeDetunings(
            np.add(self.DeltaE, x), np.add(self.DeltaB, x), np.add(self.deltac, x), check=False
        )


@dataclass(frozen=True)
class DarkStateSolution:
    rho11: float
    rho44: float
    rho41: float
    rho55: float = 0.0
    rho51: float = 0.0
    rho54: float = 0.0

    def __post_init__(self):
        if not (-1e-15 <= self.rho11 <= 1 + 1e-15 and -1e-15 <= self.rho44 <= 1 + 1e-15):
            raise ValueError("populations must lie in [0, 1]")
        if abs(self.rho11 + self.rho44 - 1.0) > 1e-12:
            raise ValueError("rho11 + rho44 must equal 1")

    def is_pure(self, tol=1e-12) -> bool:
        return abs(self.rho41**2 - self.rho11 * self.rho44) <= tol

    def without_coherence(self) -> "DarkStateSolution":
        """Same populations with the 1-4 coherence removed (non-chiral control)."""
        return replace(self, rho41=0.0)


def dark_state_populations(Omega1, Omega2) -> DarkStateSolution:
    norm = Omega1**2 + Omega2**2
    if norm <= 0:
        raise DegenerateDriveError("both Lambda Rabi frequencies vanish")
    return DarkStateSolution(
        rho11=Omega2**2 / norm,
        rho44=Omega1**2 / norm,
        rho41=-Omega1 * Omega2 / norm,
    )


CONFIG_KEYS = {
    "gamma2_hz",
    "gamma3_over_gamma2",
    "gamma5_over_gamma2",
    "omega1_over_gamma2",
    "omega2_over_gamma2",
    "omegac_abs_over_gamma2",
    "omegac_phase_rad",
    "lambda_nm",
    "gammap_over_gamma2",
    "density_cm3",
    "doppler_sigma_over_gamma2",
    "doppler_nodes",
}

CONFIG_DEFAULTS = {
    "gamma2_hz": 1e3,
    "gamma3_over_gamma2": FINE_STRUCTURE_INV**2,
    "gamma5_over_gamma2": None,
    "omega1_over_gamma2": 1e2,
    "omega2_over_gamma2": None,
    "omegac_abs_over_gamma2": 1e4,
    "omegac_phase_rad": math.pi / 2,
    "lambda_nm": 600.0,
    "gammap_over_gamma2": 1e3,
    "density_cm3": 5e16,
    "doppler_sigma_over_gamma2": 0.0,
    "doppler_nodes": 41,
}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines (``#`` comments allowed) into floats."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed configuration: {exc}") from exc
    out = {}
    for key, raw in cp["run"].items():
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"unknown configuration key {key!r}")
        try:
            out[key] = int(raw) if key == "doppler_nodes" else float(raw)
        except ValueError as exc:
            raise ConfigurationError(f"bad value for {key}: {raw!r}") from exc
    return out


def load_config(path=None, overrides=None) -> dict:
    """Merge defaults, an optional config file and explicit overrides."""
    cfg = dict(CONFIG_DEFAULTS)
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        cfg.update(parse_config_text(text))
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k not in CONFIG_KEYS:
            raise ConfigurationError(f"unknown configuration key {k!r}")
        cfg[k] = v
    return cfg


def params_from_config(cfg: dict) -> SystemParams:
    return build_params(
        gamma2_hz=cfg["gamma2_hz"],
        gamma3_over_gamma2=cfg["gamma3_over_gamma2"],
        gamma5_over_gamma2=cfg.get("gamma5_over_gamma2"),
        omega1_over_gamma2=cfg["omega1_over_gamma2"],
        omega2_over_gamma2=cfg.get("omega2_over_gamma2"),
        omegac_abs_over_gamma2=cfg["omegac_abs_over_gamma2"],
        omegac_phase_rad=cfg["omegac_phase_rad"],
        lambda_nm=cfg["lambda_nm"],
    )
