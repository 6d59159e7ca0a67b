"""
L2-regularized logistic regression fitted by trust-region Newton-CG.

The objective over parameters theta = (w, b) with labels y in {0, 1} is

    sum_i log(1 + exp(-s_i (x_i . w + b))) + ||w||^2 / (2 C),   s_i = 2 y_i - 1

so perfectly separable data still has a bounded optimum.
"""

import logging

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from deteriorate.errors import DomainError
from deteriorate.Models.standardize import Standardizer

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-8


def _signed(y):
    return 2.0 * np.asarray(y, dtype=float) - 1.0


def logistic_objective(theta, X, y, C=1.0):
    w, b = theta[:-1], theta[-1]
    margin = _signed(y) * (X @ w + b)
    return float(np.logaddexp(0.0, -margin).sum() + w @ w / (2.0 * C))


def logistic_gradient(theta, X, y, C=1.0):
    w, b = theta[:-1], theta[-1]
    s = _signed(y)
    weight = -s * expit(-s * (X @ w + b))
    return np.concatenate((X.T @ weight + w / C, [weight.sum()]))


def _hessian_product(theta, vector, X, y, C=1.0):
    w, b = theta[:-1], theta[-1]
    p = expit(X @ w + b)
    curvature = p * (1.0 - p)
    direction = X @ vector[:-1] + vector[-1]
    weighted = curvature * direction
    return np.concatenate((X.T @ weighted + vector[:-1] / C, [weighted.sum()]))


class LogisticModel:
    """Logistic regression returning deterioration probabilities as scores."""

    KIND = "logreg"

    def __init__(self, C=1.0, standardize=True):
        if C <= 0:
            raise DomainError("C must be positive")
        self.C = C
        self.standardize = standardize
        self.standardizer = None
        self.coef = None
        self.intercept = None
        self.converged = None

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        if np.unique(y).size < 2:
            raise DomainError("logistic regression needs both classes in the labels")
        if self.standardize:
            self.standardizer = Standardizer()
            X = self.standardizer.fit_transform(X)
        result = minimize(logistic_objective, np.zeros(X.shape[1] + 1), args=(X, y, self.C),
                          method="trust-ncg", jac=logistic_gradient, hessp=_hessian_product,
                          options={"gtol": GRADIENT_TOLERANCE, "maxiter": 1000})
        self.converged = bool(result.success)
        if not result.success:
            logger.warning("logistic regression: %s", result.message)
        self.coef, self.intercept = result.x[:-1], float(result.x[-1])
        return self

    def score(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[np.newaxis, :]
        if X.shape[1] != self.coef.size:
            raise DomainError(f"expected {self.coef.size} features, got {X.shape[1]}")
        if self.standardizer is not None:
            X = self.standardizer.transform(X)
        return expit(X @ self.coef + self.intercept)

    def predict(self, X):
        return (self.score(X) >= 0.5).astype(int)

    def to_dict(self):
        return {"C": self.C, "standardize": self.standardize, "coef": self.coef.tolist(),
                "intercept": self.intercept,
                "standardizer": self.standardizer.to_dict() if self.standardizer else None}

    @classmethod
    def from_dict(cls, data):
        model = cls(data["C"], data["standardize"])
        model.coef = np.asarray(data["coef"], dtype=float)
        model.intercept = data["intercept"]
        if data.get("standardizer"):
            model.standardizer = Standardizer.from_dict(data["standardizer"])
        return model


def logreg_train(X, y, C=1.0, standardize=True):
    return LogisticModel(C, standardize).fit(X, y)


def logreg_predict_proba(model, X):
    return model.score(X)
