"""scikit-learn compatible wrapper around the capacity solver.

``X`` is a channel matrix: one row per action (input), one column per
observation (output), rows summing to one.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .empowerment import DEFAULT_MAX_ITER, DEFAULT_TOL, blahut_arimoto
from .prob import Channel, mutual_information_array
from .validation import check_channel


class ChannelCapacity(BaseEstimator):
    """Blahut-Arimoto channel capacity as an estimator.

    Parameters
    ----------
    tol : float
        Stopping tolerance on the capacity bracket, in bits.
    max_iter : int
        Iteration cap.

    Attributes
    ----------
    capacity_ : float
        Capacity of the fitted channel in bits.
    input_distribution_ : ndarray of shape (n_inputs,)
        Capacity-achieving action distribution.
    gap_ : float
        Width of the final upper/lower capacity bracket.
    n_iter_ : int
    converged_ : bool
    """

    def __init__(self, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        W = check_channel(X)
        ch = Channel(tuple(f"a{i}" for i in range(W.shape[0])), tuple(f"o{j}" for j in range(W.shape[1])), W)
        reading = blahut_arimoto(ch, tol=self.tol, max_iter=self.max_iter)
        self.capacity_ = reading.bits
        self.input_distribution_ = np.array(reading.optimal_input.probs)
        self.gap_ = reading.gap
        self.n_iter_ = reading.iterations
        self.converged_ = reading.converged
        self.n_inputs_ = W.shape[0]
        return self

    def transform(self, X):
        """Output marginal p(o) induced on ``X`` by the fitted input distribution."""
        check_is_fitted(self)
        W = self._check_inputs(X)
        return self.input_distribution_ @ W

    def score(self, X, y=None):
        """Mutual information (bits) of ``X`` at the fitted input distribution."""
        check_is_fitted(self)
        return mutual_information_array(self.input_distribution_, self._check_inputs(X))

    def _check_inputs(self, X):
        W = check_channel(X)
        if W.shape[0] != self.n_inputs_:
            raise ValueError(f"X has {W.shape[0]} inputs, estimator was fitted with {self.n_inputs_}")
        return W
