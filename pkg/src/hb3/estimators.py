"""scikit-learn transformers over arrays of points (x, y, r).

These are stateless: fit only validates the input and records its width,
so they slot into Pipeline and clone like any other transformer.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_points, check_level, check_points
from .congruence import reduce
from .counting import CountParams, count_M
from .gon import lattice_of, successive_minima
from .h3geom import J

__all__ = ["FundamentalDomainReducer", "SuccessiveMinimaTransformer", "MatrixCountTransformer"]


class _PointTransformer(TransformerMixin, BaseEstimator):
    def fit(self, X, y=None):
        X = check_points(X)
        self._validate_params_extra()
        self.n_features_in_ = X.shape[1]
        return self

    def _validate_params_extra(self):
        pass

    def _points(self, X):
        check_is_fitted(self, "n_features_in_")
        return as_points(X)


class FundamentalDomainReducer(_PointTransformer):
    """Map each point to its representative in the fundamental domain of level N."""

    def __init__(self, level=1):
        self.level = level

    def _validate_params_extra(self):
        check_level(self.level)

    def transform(self, X):
        N = check_level(self.level)
        out = [reduce(P, N)[0] for P in self._points(X)]
        return np.array([[Q.zre, Q.zim, Q.r] for Q in out], dtype=float).reshape(-1, 3)

    def get_feature_names_out(self, input_features=None):
        return np.array(["x", "y", "r"], dtype=object)


class SuccessiveMinimaTransformer(_PointTransformer):
    """Successive minima (m1, m2, m3, m4) of the lattice cP + d."""

    def transform(self, X):
        rows = [successive_minima(lattice_of(P)).minima for P in self._points(X)]
        return np.array(rows, dtype=float).reshape(-1, 4)

    def get_feature_names_out(self, input_features=None):
        return np.array(["m1", "m2", "m3", "m4"], dtype=object)


class MatrixCountTransformer(_PointTransformer):
    """Counts (M, M0, M1, M2, M3) of close matrices at each point."""

    def __init__(self, level=1, L=5.0, calL=1.0, delta=0.1, jobs=1):
        self.level = level
        self.L = L
        self.calL = calL
        self.delta = delta
        self.jobs = jobs

    def _validate_params_extra(self):
        check_level(self.level)
        CountParams(J, check_level(self.level), self.L, self.calL, self.delta)

    def transform(self, X):
        N = check_level(self.level)
        rows = []
        for P in self._points(X):
            rep = count_M(CountParams(P, N, self.L, self.calL, self.delta), jobs=self.jobs, envelopes=False)
            rows.append((rep.M, rep.M0, rep.M1, rep.M2, rep.M3))
        return np.array(rows, dtype=np.int64).reshape(-1, 5)

    def get_feature_names_out(self, input_features=None):
        return np.array(["M", "M0", "M1", "M2", "M3"], dtype=object)

