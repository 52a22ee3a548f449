import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from hb3.congruence import is_fundamental
from hb3.estimators import FundamentalDomainReducer, MatrixCountTransformer, SuccessiveMinimaTransformer
from hb3.h3geom import H3Point

X = np.array([[0.0, 0.0, 1.0], [3.2, 0.1, 1.0], [0.0, 0.0, 0.05], [0.3, -0.2, 0.7]])


def test_reducer_output():
    out = FundamentalDomainReducer(level=1).fit_transform(X)
    assert out.shape == (4, 3)
    assert all(is_fundamental(H3Point(*row), 1) for row in out)
    assert np.isclose(out[2, 2], 20.0)


def test_minima_shape_and_names():
    t = SuccessiveMinimaTransformer().fit(X)
    out = t.transform(X)
    assert out.shape == (4, 4) and np.all(np.diff(out, axis=1) >= -1e-12)
    assert list(t.get_feature_names_out()) == ["m1", "m2", "m3", "m4"]
    assert t.n_features_in_ == 3


def test_count_transformer_example():
    out = MatrixCountTransformer(level=1, L=5, calL=1, delta=0.1).fit_transform(X[:1])
    assert out.tolist() == [[8, 4, 4, 0, 4]]


def test_pipeline_and_clone():
    pipe = Pipeline([("reduce", FundamentalDomainReducer(level=3)), ("minima", SuccessiveMinimaTransformer())])
    out = pipe.fit_transform(X)
    assert out.shape == (4, 4)
    c = clone(pipe)
    assert c.get_params()["reduce__level"] == 3
    assert np.array_equal(c.fit_transform(X), out)


def test_not_fitted_and_validation():
    with pytest.raises(NotFittedError):
        SuccessiveMinimaTransformer().transform(X)
    with pytest.raises(ValueError):
        SuccessiveMinimaTransformer().fit(X[:, :2])
    with pytest.raises(ValueError):
        SuccessiveMinimaTransformer().fit([[0, 0, -1.0]])
    with pytest.raises(ValueError):
        FundamentalDomainReducer(level=2).fit(X)
    with pytest.raises(ValueError):
        MatrixCountTransformer(delta=0).fit(X)
