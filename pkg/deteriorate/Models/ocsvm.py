"""
One-class SVMs: the standard nu-OC-SVM and the weighted-samples variant
trained by multi-stage relaxation.

Both solve the nu-OC-SVM dual with libsvm (scikit-learn ``OneClassSVM`` on a
precomputed Gram matrix) and rescale the solution so that the dual
coefficients sum to 1:

    decision(x) = sum_i alpha_i k(x_i, x) - rho

Negative decision values are anomalies.
"""

import logging

import numpy as np
from sklearn.svm import OneClassSVM

from deteriorate.errors import DomainError
from deteriorate.Models.kernels import KernelSpec, ensure_psd
from deteriorate.Models.standardize import Standardizer

logger = logging.getLogger(__name__)

SOLVER_TOLERANCE = 1e-6
SOLVER_MAX_ITER = 100_000
MAX_STAGES = 50


def _training_matrix(X):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DomainError("training data must be a 2-D matrix")
    if X.shape[0] < 2:
        raise DomainError("at least 2 training examples are required")
    if not np.all(np.isfinite(X)):
        raise DomainError("training data contains missing or non-finite values")
    if np.all(X == X[0]):
        raise DomainError("all training rows are identical")
    return X


class OcSvmModel:
    """
    Standard nu-OC-SVM.

    Attributes set by fit:
        support_vectors (np.ndarray): training rows with alpha > 0
        alpha (np.ndarray): their dual coefficients, summing to 1
        rho (float): offset
    """

    KIND = "ocsvm"

    def __init__(self, nu=0.09, kernel=None, standardize=False,
                 tol=SOLVER_TOLERANCE, max_iter=SOLVER_MAX_ITER):
        if not 0 < nu <= 1:
            raise DomainError("nu must lie in (0, 1]")
        self.nu = nu
        self.kernel = kernel if kernel is not None else KernelSpec()
        self.standardize = standardize
        self.tol = tol
        self.max_iter = max_iter
        self.threshold = 0.0
        self.standardizer = None
        self.support_vectors = None
        self.alpha = None
        self.rho = None
        self.n_train = None

    def _prepare(self, X):
        X = _training_matrix(X)
        self.n_train = X.shape[0]
        if self.standardize:
            self.standardizer = Standardizer()
            X = self.standardizer.fit_transform(X)
        self.kernel = self.kernel.resolve(X)
        return X

    def _solve(self, K, nu):
        """Normalized dual solution (alpha over the rows of K, rho)."""
        svm = OneClassSVM(kernel="precomputed", nu=nu, tol=self.tol, max_iter=self.max_iter)
        svm.fit(K)
        scale = nu * K.shape[0]
        alpha = np.zeros(K.shape[0])
        alpha[svm.support_] = svm.dual_coef_[0]
        rho = float(np.ravel(svm.offset_)[0])
        return alpha / scale, rho / scale

    def _store(self, X, alpha, rho):
        support = alpha > 0
        self.support_vectors = X[support]
        self.alpha = alpha[support]
        self.rho = rho

    def fit(self, X, y=None):
        X = self._prepare(X)
        K = ensure_psd(self.kernel(X, X))
        alpha, rho = self._solve(K, self.nu)
        self._store(X, alpha, rho)
        logger.debug("%s: %d support vectors of %d", self.KIND, self.alpha.size, X.shape[0])
        return self

    def _transform(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[np.newaxis, :]
        if self.support_vectors is None:
            raise DomainError("model is not trained")
        if X.shape[1] != self.support_vectors.shape[1]:
            raise DomainError(f"expected {self.support_vectors.shape[1]} features, got {X.shape[1]}")
        if self.standardizer is not None:
            X = self.standardizer.transform(X)
        return X

    def decision(self, X):
        """Signed decision values; negative means anomalous."""
        X = self._transform(X)
        return self.kernel(X, self.support_vectors) @ self.alpha - self.rho

    def score(self, X):
        """Anomaly score, higher is more anomalous."""
        return -self.decision(X)

    def predict(self, X):
        return (self.decision(X) < self.threshold).astype(int)

    def to_dict(self):
        return {
            "nu": self.nu,
            "kernel": self.kernel.to_dict(),
            "standardize": self.standardize,
            "threshold": self.threshold,
            "support_vectors": self.support_vectors.tolist(),
            "alpha": self.alpha.tolist(),
            "rho": self.rho,
            "n_train": self.n_train,
            "standardizer": self.standardizer.to_dict() if self.standardizer else None,
        }

    def _load_state(self, data):
        self.threshold = data["threshold"]
        self.support_vectors = np.asarray(data["support_vectors"], dtype=float)
        self.alpha = np.asarray(data["alpha"], dtype=float)
        self.rho = data["rho"]
        self.n_train = data["n_train"]
        if data.get("standardizer"):
            self.standardizer = Standardizer.from_dict(data["standardizer"])

    @classmethod
    def from_dict(cls, data):
        model = cls(nu=data["nu"], kernel=KernelSpec.from_dict(data["kernel"]),
                    standardize=data["standardize"])
        model._load_state(data)
        return model


class WeightedOcSvmModel(OcSvmModel):
    """
    OC-SVM with binary per-example weights eta under the budget
    sum(eta) >= beta * n.

    Training alternates two steps from eta = 1: solve the OC-SVM on the
    examples with eta = 1, then set eta = 1 on the ceil(beta * n) examples
    with the smallest hinge loss h_i = max(0, -decision(x_i)). It stops on
    an eta fixed point, when the objective

        0.5 * alpha' K alpha - rho + sum_i eta_i h_i / (nu * n)

    would increase (the previous stage is kept), or after ``max_stages``.
    Hinge ties are broken by the smaller index.

    Each stage solves with nu_stage = min(1, nu * n / m) on its m active
    examples, so the nu bounds hold in units of the full n only on the
    active set: at most nu * n + 1 active examples fall outside the boundary.
    Excluded examples are unconstrained, which for beta < 1 widens the
    bounds over all n examples to

        outside fraction       <= nu + (n - m + 1) / n
        support-vector fraction >= min(nu, m / n) - 1 / n

    With beta = 1 the model is the standard OC-SVM.
    """

    KIND = "weighted_ocsvm"

    def __init__(self, nu=0.09, beta=0.95, kernel=None, standardize=False,
                 max_stages=MAX_STAGES, tol=SOLVER_TOLERANCE, max_iter=SOLVER_MAX_ITER):
        super().__init__(nu, kernel, standardize, tol, max_iter)
        if not 0 < beta <= 1:
            raise DomainError("beta must lie in (0, 1]")
        self.beta = beta
        self.max_stages = max_stages
        self.eta = None
        self.hinge = None
        self.stages = 0
        self.objective_trace = []

    def budget(self, n):
        """Number of examples kept with eta = 1."""
        return max(1, int(np.ceil(self.beta * n - 1e-9)))

    def fit(self, X, y=None):
        X = self._prepare(X)
        n = X.shape[0]
        K = ensure_psd(self.kernel(X, X))
        keep = self.budget(n)
        eta = np.ones(n, dtype=bool)
        trace, best = [], None
        for stage in range(self.max_stages):
            active = np.flatnonzero(eta)
            nu_stage = min(1.0, self.nu * n / active.size)
            K_active = K[np.ix_(active, active)]
            alpha, rho = self._solve(K_active, nu_stage)
            hinge = np.maximum(0.0, rho - K[:, active] @ alpha)
            objective = 0.5 * alpha @ K_active @ alpha - rho + hinge[eta].sum() / (self.nu * n)
            if trace and objective > trace[-1]:
                logger.debug("stage %d objective %.6g rose above %.6g, keeping stage %d",
                             stage, objective, trace[-1], stage - 1)
                break
            trace.append(float(objective))
            best = (active, alpha, rho, eta, hinge)
            order = np.argsort(hinge, kind="stable")
            updated = np.zeros(n, dtype=bool)
            updated[order[:keep]] = True
            if np.array_equal(updated, eta):
                break
            eta = updated

        active, alpha, rho, eta, hinge = best
        self._store(X[active], alpha, rho)
        self.eta = eta.astype(int)
        self.hinge = hinge
        self.stages = len(trace)
        self.objective_trace = trace
        logger.debug("weighted OC-SVM: %d stage(s), %d of %d examples kept",
                     self.stages, int(eta.sum()), n)
        return self

    def to_dict(self):
        data = super().to_dict()
        data.update(beta=self.beta, max_stages=self.max_stages, eta=self.eta.tolist(),
                    stages=self.stages, objective_trace=self.objective_trace)
        return data

    @classmethod
    def from_dict(cls, data):
        model = cls(nu=data["nu"], beta=data["beta"], kernel=KernelSpec.from_dict(data["kernel"]),
                    standardize=data["standardize"], max_stages=data["max_stages"])
        model._load_state(data)
        model.eta = np.asarray(data["eta"], dtype=int)
        model.stages = data["stages"]
        model.objective_trace = list(data["objective_trace"])
        return model


def train_ocsvm(X, nu=0.09, kernel=None, standardize=False):
    """Train a standard nu-OC-SVM on normal examples."""
    return OcSvmModel(nu, kernel, standardize).fit(X)


def train_weighted_ocsvm(X, nu=0.09, beta=0.95, kernel=None, standardize=False,
                         max_stages=MAX_STAGES):
    """Train a weighted-samples OC-SVM by multi-stage relaxation."""
    return WeightedOcSvmModel(nu, beta, kernel, standardize, max_stages).fit(X)


def ocsvm_decide(model, x):
    """Decision value(s) sum_i alpha_i k(x_i, x) - rho; scalar for one example."""
    values = model.decision(x)
    return float(values[0]) if np.asarray(x).ndim == 1 else values


def feature_importance(model):
    """
    Absolute primal coefficients |sum_i alpha_i x_i| of a linear-kernel model,
    in the (standardized) training feature space.
    """
    if model.kernel.kind != "linear":
        raise DomainError("feature importance needs a linear kernel")
    return np.abs(model.support_vectors.T @ model.alpha)
