"""Kernel specification and Gram matrices."""

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.metrics.pairwise import linear_kernel, rbf_kernel

from deteriorate.errors import DomainError, InvariantError

logger = logging.getLogger(__name__)

PSD_TOLERANCE = 1e-8
JITTER = 1e-10


@dataclass(frozen=True)
class KernelSpec:
    """
    Kernel kind ('rbf' or 'linear') and RBF width. ``gamma=None`` means
    1 / (p * Var(X)) on the training matrix.
    """

    kind: str = "rbf"
    gamma: float = None

    def __post_init__(self):
        if self.kind not in ("rbf", "linear"):
            raise DomainError(f"unknown kernel {self.kind!r}")
        if self.gamma is not None and self.gamma <= 0:
            raise DomainError("gamma must be positive")

    def resolve(self, X):
        """Spec with gamma fixed from the training matrix."""
        if self.kind == "linear" or self.gamma is not None:
            return self
        variance = float(np.var(X))
        if variance == 0:
            raise DomainError("all training rows are identical")
        return KernelSpec(self.kind, 1.0 / (X.shape[1] * variance))

    def __call__(self, A, B):
        if self.kind == "linear":
            return linear_kernel(A, B)
        return rbf_kernel(A, B, gamma=self.gamma)

    def to_dict(self):
        return {"kind": self.kind, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, data):
        return cls(data["kind"], data.get("gamma"))


def ensure_psd(K):
    """
    Return a symmetric PSD version of a Gram matrix, adding diagonal jitter
    when round-off makes it slightly indefinite.

    Raises:
        InvariantError: still indefinite after jitter
    """
    K = 0.5 * (K + K.T)
    bound = PSD_TOLERANCE * max(1.0, float(np.abs(np.diag(K)).max()))
    smallest = float(np.linalg.eigvalsh(K)[0])
    if smallest >= -bound:
        return K
    jitter = max(JITTER, -2.0 * smallest)
    logger.debug("Gram matrix min eigenvalue %.3g, adding jitter %.3g", smallest, jitter)
    K = K + jitter * np.eye(K.shape[0])
    if float(np.linalg.eigvalsh(K)[0]) < -bound:
        raise InvariantError("kernel matrix is not positive semi-definite")
    return K
