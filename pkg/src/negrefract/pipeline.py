"""Vectorized chain from detuning to optical observables.

One call evaluates polarizabilities, local-field dressing, index, figure
of merit and inverse impedance over an array of detunings. Points where a
module error fires are re-evaluated one by one so that a single bad point
only blanks its own row.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ResponseError
from .linear_response import BroadeningSpec, PolarizabilityQuartet, apply_doppler, polarizability_quartet
from .medium import inverse_impedance, local_field_correct, refractive_index
from .params import ProbeDetunings, SystemParams, dark_state_populations

COMPLEX_FIELDS = ("aEE", "aEB", "aBE", "aBB", "eps", "mu", "xiEH", "xiHE", "n", "zinv")


@dataclass
class ResponseTable:
    """Column-wise results; complex fields plus ``fom``, ``branch`` and ``error``."""

    columns: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.columns[key]

    def __len__(self):
        return len(self.columns["error"])

    @property
    def ok(self) -> np.ndarray:
        return np.array([e == "" for e in self.columns["error"]])


def quartet_for(params, det, broadening=None, nonchiral=False) -> PolarizabilityQuartet:
    """Polarizabilities including homogeneous and, if requested, Doppler broadening."""
    dark = dark_state_populations(params.Omega1, params.Omega2)
    if nonchiral:
        dark = dark.without_coherence()
    b = broadening or BroadeningSpec()

    def fn(d):
        return polarizability_quartet(params, d, dark, b)

    if b.doppler_sigma > 0:
        return apply_doppler(fn, b, det)
    return fn(det)


def _evaluate(params, det, density, broadening, nonchiral, handedness):
    q = quartet_for(params, det, broadening, nonchiral)
    m = local_field_correct(q, density)
    r = refractive_index(m, handedness)
    z = inverse_impedance(m, handedness)
    cols = {
        "aEE": q.aEE, "aEB": q.aEB, "aBE": q.aBE, "aBB": q.aBB,
        "eps": m.eps, "mu": m.mu, "xiEH": m.xiEH, "xiHE": m.xiHE,
        "n": r.n, "zinv": z,
    }
    return cols, r.fom, r.branch_flag


def evaluate_response(
    params: SystemParams,
    Delta,
    density: float,
    broadening: BroadeningSpec | None = None,
    nonchiral: bool = False,
    handedness: str = "+",
    deltac: float = 0.0,
) -> ResponseTable:
    """Full response for plotting detunings ``Delta = -DeltaE`` (rad/s).

    Parameters
    ----------
    params : SystemParams
    Delta : array_like
        Detunings in rad/s.
    density : float
        Number density in cm^-3.
    broadening : BroadeningSpec, optional
    nonchiral : bool
        Drop the ground-state coherence so the cross couplings vanish.
    handedness : {'+', '-'}

    Returns
    -------
    ResponseTable
    """
    Delta = np.atleast_1d(np.asarray(Delta, dtype=float))
    N = Delta.size
    out = {k: np.full(N, np.nan + 1j * np.nan) for k in COMPLEX_FIELDS}
    fom = np.full(N, np.nan)
    branch = np.full(N, "", dtype=object)
    err = np.full(N, "", dtype=object)
    try:
        cols, f, b = _evaluate(params, ProbeDetunings.from_delta(Delta, deltac), density,
                               broadening, nonchiral, handedness)
        for k, v in cols.items():
            out[k][:] = v
        fom[:] = f
        branch[:] = b
    except ResponseError:
        for i in range(N):
            try:
                cols, f, b = _evaluate(params, ProbeDetunings.from_delta(float(Delta[i]), deltac),
                                       density, broadening, nonchiral, handedness)
            except ResponseError as exc:
                err[i] = f"{type(exc).__name__}: {exc}"
                continue
            for k, v in cols.items():
                out[k][i] = v
            fom[i] = f
            branch[i] = b
    return ResponseTable({**out, "fom": fom, "branch": branch, "error": err})


def evaluate_point(params, Delta, density, broadening=None, nonchiral=False, handedness="+") -> dict:
    """Scalar convenience wrapper; raises on module errors."""
    cols, f, b = _evaluate(params, ProbeDetunings.from_delta(float(Delta)), density,
                           broadening, nonchiral, handedness)
    res = {k: complex(np.asarray(v)) for k, v in cols.items()}
    res["fom"] = float(f)
    res["branch"] = str(b)
    return res
