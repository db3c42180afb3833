"""Finite-sample two-stage learning as scikit-learn estimators.

``PCAPretrainer`` extracts the top principal components of an (unlabelled)
sample; ``PretrainedRegressor`` fits a minimum-norm least-squares probe on
inputs projected through a fitted pretrainer; ``MinNormLinearRegression`` is
the plain min-norm baseline.  Principal component regression is just a
``PretrainedRegressor`` whose pretrainer was fitted on the labelled inputs
themselves.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array

from .errors import DomainError, NumericError

# Singular values below RANK_RTOL * sigma_max are treated as zero; well below
# the MP bulk edge at any realistic problem size.
RANK_RTOL = 1e-10


def pca_eigenbasis(
    X: np.ndarray, rng: np.random.Generator | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of ``X^T X / n`` in descending order, nullspace randomized.

    Returns ``(eigvals, basis)`` with ``basis`` a (p, p) orthonormal matrix
    whose columns are eigenvectors.  When n < p the trailing ``p - n`` columns
    span the nullspace; they are replaced by a Haar-uniform rotation of that
    nullspace (orthonormalized Gaussians) so that retaining extra directions
    matches the uniformly-random completion of the model, independent of the
    eigensolver's arbitrary nullspace basis.
    """
    X = np.asarray(X, dtype=np.float64)
    n, p = X.shape
    try:
        eigvals, eigvecs = np.linalg.eigh(X.T @ X / n)
    except np.linalg.LinAlgError as e:  # pragma: no cover - LAPACK failure
        raise NumericError(f"eigendecomposition failed: {e}") from e
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    basis = eigvecs[:, order]
    rank = min(n, p)
    if rank < p:
        null = basis[:, rank:]
        rng = rng if rng is not None else np.random.default_rng()
        q = _haar_orthogonal(p - rank, rng)
        basis = np.concatenate([basis[:, :rank], null @ q], axis=1)
    return eigvals, basis


def _haar_orthogonal(k: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((k, k))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def pretrain_pca(
    X_u: np.ndarray, m: int, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Top-``m`` PCA basis (p, m) of ``X_u^T X_u / n_u``, orthonormal columns.

    When ``m`` exceeds the sample rank, the basis is completed with
    Haar-uniform orthonormal directions from the nullspace (seeded via
    ``rng``).
    """
    X_u = np.asarray(X_u, dtype=np.float64)
    p = X_u.shape[1]
    if not 1 <= m <= p:
        raise DomainError(f"m must be in [1, p], got m={m}, p={p}")
    _, basis = pca_eigenbasis(X_u, rng=rng)
    return basis[:, :m]


def min_norm_lstsq(A: np.ndarray, y: np.ndarray, rank_rtol: float = RANK_RTOL) -> np.ndarray:
    """Minimum-norm least-squares solution via thin SVD with a rank cutoff."""
    A = np.asarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    u, s, vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0:
        return np.zeros(A.shape[1])
    keep = s > rank_rtol * s[0]
    coeff = (u[:, keep].T @ y) / s[keep]
    return vt[keep].T @ coeff


def pretrained_regression(
    X_l: np.ndarray, y: np.ndarray, U_m: np.ndarray, rank_rtol: float = RANK_RTOL
) -> np.ndarray:
    """Min-norm regression on the projected inputs; the estimate lies in
    span(U_m)."""
    latent = min_norm_lstsq(np.asarray(X_l) @ U_m, y, rank_rtol=rank_rtol)
    return U_m @ latent


class PCAPretrainer(BaseEstimator, TransformerMixin):
    """PCA representation learned from (unlabelled) samples.

    Parameters
    ----------
    n_components : int
        Number of retained directions m.
    random_state : int or Generator, optional
        Seeds the nullspace completion used when m exceeds the sample rank.
    """

    def __init__(self, n_components: int = 1, random_state=None):
        self.n_components = n_components
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        rng = np.random.default_rng(self.random_state)
        self.components_ = pretrain_pca(X, self.n_components, rng=rng).T
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        self._check_fitted()
        X = check_array(X, dtype=np.float64)
        return X @ self.components_.T

    def inverse_transform(self, Z):
        self._check_fitted()
        return np.asarray(Z) @ self.components_

    def _check_fitted(self):
        if not hasattr(self, "components_"):
            raise NotFittedError("PCAPretrainer is not fitted; call fit(X_u) first")


class MinNormLinearRegression(BaseEstimator, RegressorMixin):
    """Minimum-norm least squares (no intercept), SVD with a rank cutoff."""

    def __init__(self, rank_rtol: float = RANK_RTOL):
        self.rank_rtol = rank_rtol

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        self.coef_ = min_norm_lstsq(X, np.asarray(y, dtype=np.float64), self.rank_rtol)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError("MinNormLinearRegression is not fitted")
        return check_array(X, dtype=np.float64) @ self.coef_


class PretrainedRegressor(BaseEstimator, RegressorMixin):
    """Two-stage estimator: regress on inputs projected through a PCA basis.

    Parameters
    ----------
    pretrainer : PCAPretrainer
        A *fitted* pretrainer (fit it on the unlabelled sample; fitting it on
        the labelled inputs instead gives principal component regression).
    rank_rtol : float
        Relative singular-value cutoff of the projected design.
    """

    def __init__(self, pretrainer: PCAPretrainer | None = None, rank_rtol: float = RANK_RTOL):
        self.pretrainer = pretrainer
        self.rank_rtol = rank_rtol

    def fit(self, X, y):
        if self.pretrainer is None or not hasattr(self.pretrainer, "components_"):
            raise NotFittedError(
                "PretrainedRegressor needs a fitted PCAPretrainer"
            )
        X = check_array(X, dtype=np.float64)
        basis = self.pretrainer.components_.T  # (p, m)
        self.coef_ = pretrained_regression(
            X, np.asarray(y, dtype=np.float64), basis, rank_rtol=self.rank_rtol
        )
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError("PretrainedRegressor is not fitted")
        return check_array(X, dtype=np.float64) @ self.coef_
