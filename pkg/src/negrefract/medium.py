"""Macroscopic constitutive parameters and derived optical quantities.

Polarizabilities are dressed by the Lorentz local field of the
surrounding atoms, giving epsilon, mu and the two magneto-electric
couplings. From those follow the index of refraction for circular modes,
the figure of merit, the interface impedance and Fresnel reflection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMediumError, InvalidResolutionError, LocalFieldSingularityError

__all__ = [
    "MediumResponse",
    "RefractiveResult",
    "local_field_correct",
    "refractive_index",
    "figure_of_merit",
    "fresnel_reflection",
    "inverse_impedance",
    "superlens_tolerance",
    "mirror_handedness",
    "LOCAL_FIELD_EPS",
]

LOCAL_FIELD_EPS = 1e-12
_K = 4.0 * math.pi / 3.0

BRANCH_PRINCIPAL = "principal"
BRANCH_FLIPPED = "flipped"
BRANCH_GAIN = "gain-medium-warning"


def _out(x):
    x = np.asarray(x)
    return complex(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class MediumResponse:
    """Dimensionless eps, mu, xiEH, xiHE at number density ``density`` (cm^-3)."""

    eps: object
    mu: object
    xiEH: object
    xiHE: object
    density: float = 0.0

    @classmethod
    def vacuum(cls) -> "MediumResponse":
        return cls(1 + 0j, 1 + 0j, 0j, 0j, 0.0)


@dataclass(frozen=True)
class RefractiveResult:
    n: object
    fom: object
    branch_flag: object


def local_field_correct(quartet, density: float, return_denominator=False) -> MediumResponse:
    """Lorentz local-field dressing of the four polarizabilities.

    Parameters
    ----------
    quartet : PolarizabilityQuartet
        Scalars or arrays (cm^3).
    density : float
        Number density in cm^-3.

    Raises
    ------
    LocalFieldSingularityError
        Where the shared denominator drops below ``1e-12`` in magnitude.
    """
    if density < 0:
        raise ValueError("density must be >= 0")
    aEE, aEB, aBE, aBB = (np.asarray(v, dtype=complex) for v in
                          (quartet.aEE, quartet.aEB, quartet.aBE, quartet.aBB))
    r = density
    X = aEB * aBE - aEE * aBB
    L = 1.0 - _K * r * aEE - _K * r * aBB - _K**2 * r**2 * X
    bad = np.abs(L) < LOCAL_FIELD_EPS
    if np.any(bad):
        idx = np.flatnonzero(np.atleast_1d(bad))
        raise LocalFieldSingularityError(
            f"local-field denominator vanishes at {idx.size} point(s)", indices=idx
        )
    f = 4.0 * math.pi * r / L
    m = MediumResponse(
        eps=_out(1.0 + f * (aEE + _K * r * X)),
        mu=_out(1.0 + f * (aBB + _K * r * X)),
        xiEH=_out(f * aEB),
        xiHE=_out(f * aBE),
        density=float(density),
    )
    if return_denominator:
        return m, _out(L)
    return m


def mirror_handedness(m: MediumResponse) -> MediumResponse:
    """Coefficients seen by the opposite circular polarization.

    With the sign relations of the Zeeman scheme the cross couplings flip
    while eps and mu are shared.
    """
    return MediumResponse(m.eps, m.mu, _out(-np.asarray(m.xiEH)), _out(-np.asarray(m.xiHE)), m.density)


def _select_branch(S, add):
    """Pick ``+S + add`` or ``-S + add`` by passivity."""
    n1 = S + add
    n2 = -S + add
    use1 = n1.imag >= 0
    use2 = ~use1 & (n2.imag >= 0)
    gain = ~use1 & ~use2
    keep1 = use1 | (gain & (n1.imag >= n2.imag))
    n = np.where(keep1, n1, n2)
    flag = np.where(gain, BRANCH_GAIN, np.where(use1, BRANCH_PRINCIPAL, BRANCH_FLIPPED))
    return n, flag


def figure_of_merit(n):
    """``-Re n / Im n``; ``+inf`` where ``Im n == 0``."""
    n = np.asarray(n, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        fom = np.where(n.imag == 0, np.inf, -n.real / np.where(n.imag == 0, 1.0, n.imag))
    return float(fom) if fom.ndim == 0 else fom


def _mode_root(m: MediumResponse, handedness: str):
    """Shared square root, passive sign and branch flag of one circular mode."""
    if handedness not in ("+", "-"):
        raise ValueError("handedness must be '+' or '-'")
    eps, mu, xe, xh = (np.asarray(v, dtype=complex) for v in (m.eps, m.mu, m.xiEH, m.xiHE))
    S = np.sqrt(eps * mu - (xe + xh) ** 2 / 4.0)
    s = 1.0 if handedness == "+" else -1.0
    n, flag = _select_branch(S, s * 0.5j * (xe - xh))
    root = np.where(n == S + s * 0.5j * (xe - xh), S, -S)
    return root, s, n, flag


def refractive_index(m: MediumResponse, handedness: str = "+") -> RefractiveResult:
    """Index of a circularly polarized mode travelling along the quantization axis.

    ``n = +-sqrt(eps*mu - (xiEH + xiHE)**2/4) + s*(i/2)*(xiEH - xiHE)`` with
    ``s = +1`` for ``handedness='+'`` and ``-1`` for ``'-'``. For ``'-'`` the
    caller passes the cross couplings that apply to that polarization.

    The root sign is chosen so that ``Im n >= 0``; if neither root is
    passive the one with larger ``Im n`` is kept and flagged.
    """
    _, _, n, flag = _mode_root(m, handedness)
    fom = figure_of_merit(n)
    if np.ndim(n) == 0:
        return RefractiveResult(complex(n), fom, str(flag))
    return RefractiveResult(n, fom, flag)


def inverse_impedance(m: MediumResponse, handedness: str = "+"):
    """Inverse wave impedance of the mode picked by :func:`refractive_index`.

    ``(+-S + s*(i/2)*(xiEH + xiHE)) / mu`` with
    ``S = sqrt(eps*mu - (xiEH + xiHE)**2/4)`` and the same root sign as the
    index, which equals ``(n + s*i*xiHE) / mu``. Index, impedance and
    reflection therefore describe one wave. For a passive mode carrying
    power forward this gives ``Re Z^-1 >= 0``.
    """
    root, s, _, _ = _mode_root(m, handedness)
    xe, xh = np.asarray(m.xiEH, dtype=complex), np.asarray(m.xiHE, dtype=complex)
    return _out((root + s * 0.5j * (xe + xh)) / np.asarray(m.mu, dtype=complex))


def fresnel_reflection(eps1, mu1, m2: MediumResponse, handedness: str = "+"):
    """Normal-incidence amplitude reflection ``E_r/E_i`` from a non-chiral medium 1.

    ``r = (1 - Y) / (1 + Y)`` with ``Y = sqrt(mu1/eps1) (n2 + s*i*xiHE) / mu2``.
    """
    if np.any(np.asarray(m2.mu) == 0):
        raise DegenerateMediumError("mu2 = 0: impedance undefined")
    Y = np.sqrt(complex(mu1) / complex(eps1)) * np.asarray(inverse_impedance(m2, handedness))
    return _out((1.0 - Y) / (1.0 + Y))


def superlens_tolerance(d, dx):
    """Index accuracy ``exp(-2*pi*d/dx)`` needed to resolve ``dx`` through a slab of width ``d``."""
    if dx <= 0:
        raise InvalidResolutionError("resolution dx must be positive")
    if d < 0:
        raise ValueError("slab thickness must be >= 0")
    return math.exp(-2.0 * math.pi * d / dx)
