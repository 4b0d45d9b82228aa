"""scikit-learn style front end to the Coulomb spectrum solver."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .separation import PATHS, CoulombPotential, shoot_eigenvalue, _path_mats


class DiracSpectrum(RegressorMixin, BaseEstimator):
    """Map rows ``(n_r, kappa)`` to bound-state energies.

    ``fit`` validates the quantum numbers and solves each distinct state once;
    ``predict`` looks the energies up, solving any state not seen during fit.
    ``score`` is the usual R^2 against supplied energies.
    """

    def __init__(self, Zalpha=0.5, m=1.0, path="xio", N=4000, tol=1e-10):
        self.Zalpha = Zalpha
        self.m = m
        self.path = path
        self.N = N
        self.tol = tol

    def _states(self, X):
        X = check_array(X, dtype=None, ensure_min_features=2)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (n_r, kappa), got {X.shape[1]}")
        if not np.all(np.equal(np.mod(X, 1), 0)):
            raise ValueError("quantum numbers must be integers")
        return [(int(a), int(b)) for a, b in X]

    def _solve(self, n_r, kappa):
        return shoot_eigenvalue(
            kappa, n_r, self.pot_, m=self.m, tol=self.tol, N=self.N, mats=self.mats_
        )

    def fit(self, X, y=None):
        if self.path not in PATHS:
            raise ValueError(f"path must be one of {PATHS}")
        self.pot_ = CoulombPotential(self.Zalpha)
        self.mats_ = _path_mats(self.path)
        self.energies_ = {}
        for state in sorted(set(self._states(X))):
            self.energies_[state] = self._solve(*state)
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "energies_")
        out = []
        for state in self._states(X):
            if state not in self.energies_:
                self.energies_[state] = self._solve(*state)
            out.append(self.energies_[state])
        return np.array(out)
