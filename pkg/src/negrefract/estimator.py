"""scikit-learn style front end to the response pipeline.

The estimator has nothing to learn: ``fit`` only validates the
hyperparameters and freezes the derived physical constants, after which
``transform`` maps detunings to constitutive parameters and ``predict``
returns the complex refractive index.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import ConfigurationError
from .linear_response import BroadeningSpec
from .params import build_params
from .pipeline import evaluate_response

_OUTPUTS = ("eps", "mu", "xiEH", "xiHE", "n")


def _check_detunings(X, n_features=None):
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 1:
        raise ValueError(f"expected a single detuning column, got {X.shape[1]} features")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError("feature count differs from fit")
    return X[:, 0]


class ChiralMediumResponse(TransformerMixin, BaseEstimator):
    """Map probe detunings to the macroscopic response of the atomic medium.

    Parameters
    ----------
    density : float, default=5e16
        Number density in cm^-3.
    gammap_over_gamma2 : float, default=1e3
        Homogeneous broadening in units of gamma2.
    omegac_abs_over_gamma2 : float, default=1e4
    omegac_phase_rad : float, default=pi/2
    nonchiral : bool, default=False
        Remove the ground-state coherence (no cross coupling).
    handedness : {'+', '-'}, default='+'
    units : {'gamma2', 'gammap', 'si'}, default='gammap'
        Unit of the input detunings.
    doppler_sigma_over_gamma2 : float, default=0.0

    Examples
    --------
    >>> est = ChiralMediumResponse(density=5e16).fit([[0.0]])
    >>> est.predict([[-0.045]]).real < 0
    array([ True])
    """

    def __init__(
        self,
        density=5e16,
        gammap_over_gamma2=1e3,
        omegac_abs_over_gamma2=1e4,
        omegac_phase_rad=np.pi / 2,
        nonchiral=False,
        handedness="+",
        units="gammap",
        doppler_sigma_over_gamma2=0.0,
    ):
        self.density = density
        self.gammap_over_gamma2 = gammap_over_gamma2
        self.omegac_abs_over_gamma2 = omegac_abs_over_gamma2
        self.omegac_phase_rad = omegac_phase_rad
        self.nonchiral = nonchiral
        self.handedness = handedness
        self.units = units
        self.doppler_sigma_over_gamma2 = doppler_sigma_over_gamma2

    def fit(self, X=None, y=None):
        if X is not None:
            _check_detunings(X)
        if self.density < 0:
            raise ConfigurationError("density must be >= 0")
        if self.handedness not in ("+", "-"):
            raise ConfigurationError("handedness must be '+' or '-'")
        self.params_ = build_params(
            omegac_abs_over_gamma2=self.omegac_abs_over_gamma2,
            omegac_phase_rad=self.omegac_phase_rad,
        )
        g2 = self.params_.gamma2
        self.broadening_ = BroadeningSpec(
            gammap=self.gammap_over_gamma2 * g2,
            doppler_sigma=self.doppler_sigma_over_gamma2 * g2,
        )
        scales = {"gamma2": g2, "gammap": self.broadening_.gammap, "si": 1.0}
        if self.units not in scales:
            raise ConfigurationError(f"unknown units {self.units!r}")
        if scales[self.units] == 0:
            raise ConfigurationError("gammap units need a nonzero gammap")
        self.unit_ = scales[self.units]
        self.n_features_in_ = 1
        return self

    def _table(self, X):
        check_is_fitted(self, "params_")
        D = _check_detunings(X, self.n_features_in_)
        return evaluate_response(self.params_, D * self.unit_, self.density, self.broadening_,
                                 self.nonchiral, self.handedness)

    def transform(self, X):
        """Real and imaginary parts of eps, mu, xiEH, xiHE and n, shape (n_samples, 10)."""
        t = self._table(X)
        return np.column_stack([f(t[k]) for k in _OUTPUTS for f in (np.real, np.imag)])

    def predict(self, X):
        """Complex refractive index per sample (NaN where the pipeline failed)."""
        return np.asarray(self._table(X)["n"])

    def figure_of_merit(self, X):
        return np.asarray(self._table(X)["fom"])

    def get_feature_names_out(self, input_features=None):
        return np.array([f"{k}_{p}" for k in _OUTPUTS for p in ("re", "im")], dtype=object)
