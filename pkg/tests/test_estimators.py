import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from agency_phenotyper.estimators import ChannelCapacity
from agency_phenotyper.exceptions import InvalidChannel

T1 = np.array([[0.5, 0.5, 0, 0], [0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5]])


def test_params_and_clone():
    est = ChannelCapacity(tol=1e-7, max_iter=50)
    assert est.get_params() == {"tol": 1e-7, "max_iter": 50}
    twin = clone(est)
    assert twin.get_params() == est.get_params() and twin is not est
    est.set_params(max_iter=10)
    assert est.max_iter == 10


def test_fit_attributes():
    est = ChannelCapacity().fit(np.eye(3))
    assert est.capacity_ == pytest.approx(math.log2(3), abs=1e-9)
    np.testing.assert_allclose(est.input_distribution_, 1 / 3, atol=1e-9)
    assert est.converged_ and est.gap_ < 1e-9 and est.n_iter_ >= 1 and est.n_inputs_ == 3


def test_transform_and_score():
    est = ChannelCapacity().fit(T1)
    assert est.capacity_ == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(est.transform(T1).sum(), 1.0)
    assert est.score(T1) == pytest.approx(1.0, abs=1e-9)
    # the same input distribution on a noiseless channel
    assert est.score(np.eye(3)[:, :3]) <= math.log2(3)


def test_errors():
    with pytest.raises(NotFittedError):
        ChannelCapacity().score(T1)
    with pytest.raises(InvalidChannel):
        ChannelCapacity().fit([[0.5, 0.6]])
    with pytest.raises(ValueError):
        ChannelCapacity().fit(T1).score(np.eye(2))
