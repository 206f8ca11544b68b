"""Direction-dependent response of the Zeeman-resolved scheme.

Tensors are stored in the circular basis {e+, e-, ez} with
``e+- = (ex +- i ey)/sqrt(2)``. The dispersion relation for an arbitrary
propagation direction is solved numerically from the Helmholtz
determinant, which is a quartic in the index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularCorrectionError, SingularPermeabilityError
from .medium import _select_branch

__all__ = [
    "Orientation",
    "PolarTensor3",
    "RabiComponents",
    "HelmholtzRoots",
    "angle_rabi",
    "cross_tensor",
    "ee_tensor",
    "bb_tensor",
    "index_vs_angle",
    "helmholtz_index_numeric",
    "CIRCULAR_BASIS",
]

_S2 = math.sqrt(2.0)
# columns are e+, e-, ez in Cartesian components
CIRCULAR_BASIS = np.array([[1 / _S2, 1 / _S2, 0], [1j / _S2, -1j / _S2, 0], [0, 0, 1]], dtype=complex)


@dataclass(frozen=True)
class Orientation:
    """Polar angle ``theta`` in [0, pi] and azimuth ``phi`` (wrapped into [0, 2 pi))."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError("theta must lie in [0, pi]")
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * math.pi))


@dataclass(frozen=True)
class PolarTensor3:
    """3x3 complex tensor with rows/columns ordered (+, -, z)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=complex)
        if arr.shape != (3, 3):
            raise ValueError("tensor must be 3x3")
        object.__setattr__(self, "data", arr)

    @classmethod
    def diagonal(cls, plus, minus, z) -> "PolarTensor3":
        return cls(np.diag([plus, minus, z]).astype(complex))

    @classmethod
    def isotropic(cls, value) -> "PolarTensor3":
        return cls(value * np.eye(3, dtype=complex))

    @classmethod
    def from_cartesian(cls, T) -> "PolarTensor3":
        U = CIRCULAR_BASIS
        return cls(U.conj().T @ np.asarray(T, dtype=complex) @ U)

    def to_cartesian(self) -> np.ndarray:
        U = CIRCULAR_BASIS
        return U @ self.data @ U.conj().T

    def __add__(self, other):
        return PolarTensor3(self.data + other.data)

    def __mul__(self, scalar):
        return PolarTensor3(self.data * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class RabiComponents:
    """Coupling Rabi frequencies of the six Zeeman channels (rad/s)."""

    Wpp: complex
    Wmm: complex
    Wp0: complex
    W0m: complex
    Wm0: complex
    W0p: complex

    def norm2(self) -> float:
        return sum(abs(getattr(self, k)) ** 2 for k in ("Wpp", "Wmm", "Wp0", "W0m", "Wm0", "W0p"))


def angle_rabi(Omegac0, o: Orientation) -> RabiComponents:
    """Split the coupling Rabi frequency over the Zeeman channels."""
    c, s = math.cos(o.theta), math.sin(o.theta)
    em = complex(math.cos(o.phi), -math.sin(o.phi))
    tilted = Omegac0 * s / _S2
    return RabiComponents(
        Wpp=Omegac0 * c,
        Wmm=-Omegac0 * c,
        Wp0=tilted * em,
        W0m=tilted * em,
        Wm0=tilted * em.conjugate(),
        W0p=tilted * em.conjugate(),
    )


def _angle_matrix(o: Orientation) -> np.ndarray:
    c, s = math.cos(o.theta), math.sin(o.theta)
    em = complex(math.cos(o.phi), -math.sin(o.phi)) * s / _S2
    ep = em.conjugate()
    return np.array([[c, 0, em], [0, -c, ep], [ep, em, 0]], dtype=complex)


def cross_tensor(o: Orientation, alpha) -> PolarTensor3:
    """Magneto-electric tensor for a coupling field at orientation ``o``.

    Serves both cross couplings; pass the matching scalar.
    """
    return PolarTensor3(alpha * _angle_matrix(o))


def _dressed_tensor(o, alpha, Omegac_abs, Da, Db):
    prod = Da * Db
    if prod == 0:
        raise SingularCorrectionError("vanishing D-factor product")
    c, s = math.cos(o.theta), math.sin(o.theta)
    e1 = complex(math.cos(o.phi), math.sin(o.phi))
    e2 = e1 * e1
    sc = s * c / (4.0 * _S2)
    corr = np.array(
        [
            [s**2 / 8, -(s**2) / 8 * e2, -sc * e1],
            [-(s**2) / 8 * e2.conjugate(), s**2 / 8, sc * e1.conjugate()],
            [-sc * e1.conjugate(), sc * e1, c**2 / 4],
        ],
        dtype=complex,
    )
    return PolarTensor3(alpha * np.eye(3) + alpha * Omegac_abs**2 / prod * corr)


def ee_tensor(o: Orientation, alphaEE, Omegac_abs, D42, D34) -> PolarTensor3:
    """Electric polarizability tensor including the orientation-dependent dressing."""
    return _dressed_tensor(o, alphaEE, Omegac_abs, D42, D34)


def bb_tensor(o: Orientation, alphaBB, Omegac_abs, D31, D21) -> PolarTensor3:
    """Magnetic counterpart of :func:`ee_tensor`."""
    return _dressed_tensor(o, alphaBB, Omegac_abs, D31, D21)


def index_vs_angle(eps, mu, xiEH, xiHE, theta):
    """Index for propagation at angle ``theta`` to the coupling polarization.

    Assumes isotropic eps and mu; identical for both circular modes.
    """
    eps, mu, xe, xh = (np.asarray(v, dtype=complex) for v in (eps, mu, xiEH, xiHE))
    c = np.cos(theta)
    S = np.sqrt(eps * mu - xe * xh - (xe - xh) ** 2 * c**2 / 4.0)
    n, _ = _select_branch(S, 0.5j * (xe - xh) * c)
    return complex(n) if np.ndim(n) == 0 else n


@dataclass(frozen=True)
class HelmholtzRoots:
    roots: np.ndarray
    physical: complex
    reduced_order: bool
    coefficients: np.ndarray


def _cross_matrix(k):
    return np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]], dtype=complex)


def _cluster(roots, rel=1e-5):
    """Average near-coincident root pairs.

    Double roots of the quartic split by ~sqrt(machine eps); averaging a
    pair restores full accuracy.
    """
    r = list(roots)
    out = []
    while r:
        x = r.pop(0)
        if r:
            j = int(np.argmin([abs(x - y) for y in r]))
            if abs(x - r[j]) < rel * max(1.0, abs(x)):
                m = 0.5 * (x + r.pop(j))
                out += [m, m]
                continue
        out.append(x)
    return np.array(out, dtype=complex)


def helmholtz_index_numeric(epsT, muT, xiEHT, xiHET, khat, previous=None) -> HelmholtzRoots:
    """All indices solving the Helmholtz determinant for direction ``khat``.

    Solves ``det[eps + (xiEH + n K) mu^-1 (n K - xiHE)] = 0`` with
    ``K = -[khat x]``. The quartic is recovered by interpolation at five
    scaled nodes and solved by companion-matrix eigenvalues.

    Parameters
    ----------
    epsT, muT, xiEHT, xiHET : PolarTensor3
    khat : array_like, shape (3,)
        Propagation direction (normalized internally).
    previous : complex, optional
        Root from a neighbouring sweep point, used to pick the physical root
        by continuity.

    Returns
    -------
    HelmholtzRoots
        ``roots`` sorted with passive ones (Im >= 0) first then by Re,
        the selected ``physical`` root and a ``reduced_order`` flag.
    """
    k = np.asarray(khat, dtype=float)
    k = k / np.linalg.norm(k)
    eps, mu, xe, xh = (t.to_cartesian() for t in (epsT, muT, xiEHT, xiHET))
    try:
        if np.linalg.cond(mu) > 1e14:
            raise np.linalg.LinAlgError
        mui = np.linalg.inv(mu)
    except np.linalg.LinAlgError:
        raise SingularPermeabilityError("permeability tensor is not invertible") from None
    K = -_cross_matrix(k)

    def det(n):
        return np.linalg.det(eps + (xe + n * K) @ mui @ (n * K - xh))

    scale = max(1.0, math.sqrt(np.linalg.norm(eps, 2) * np.linalg.norm(mu, 2)),
                np.linalg.norm(xe, 2), np.linalg.norm(xh, 2))
    # quartic in u = n/scale, highest power first
    u_nodes = np.array([0.0, 1.0, -1.0, 2.0, -2.0])
    vals = np.array([det(scale * u) for u in u_nodes])
    coef = np.linalg.solve(np.vander(u_nodes, 5), vals)
    big = np.max(np.abs(coef))
    reduced = False
    while coef.size > 1 and abs(coef[0]) < 1e-14 * big:
        coef = coef[1:]
        reduced = True
    if coef.size > 1 and big > 0:
        comp = np.polynomial.polynomial.polycompanion(coef[::-1])
        roots = scale * _cluster(np.linalg.eigvals(comp))
    else:
        roots = np.array([], dtype=complex)
    tol = 1e-12 * np.maximum(1.0, np.abs(roots))
    is_passive = roots.imag >= -tol
    order = np.lexsort((-roots.real, ~is_passive))
    roots, is_passive = roots[order], is_passive[order]
    pool = roots[is_passive] if np.any(is_passive) else roots
    if pool.size == 0:
        phys = complex("nan")
    elif previous is not None:
        phys = complex(pool[np.argmin(np.abs(pool - previous))])
    else:
        phys = complex(pool[np.argmax(pool.real)])
    return HelmholtzRoots(roots=roots, physical=phys, reduced_order=reduced, coefficients=coef)
