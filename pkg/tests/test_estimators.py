import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from pcareg.errors import DomainError
from pcareg.estimators import (
    MinNormLinearRegression,
    PCAPretrainer,
    PretrainedRegressor,
    min_norm_lstsq,
    pca_eigenbasis,
    pretrain_pca,
    pretrained_regression,
)


@pytest.fixture
def rng():
    return np.random.default_rng(11)


class TestPcaBasis:
    def test_full_basis_spans_space(self, rng):
        X = rng.standard_normal((50, 8))
        U = pretrain_pca(X, 8)
        assert U.T @ U == pytest.approx(np.eye(8), abs=1e-10)

    def test_descending_eigenvalues(self, rng):
        X = rng.standard_normal((60, 10))
        eigvals, _ = pca_eigenbasis(X)
        assert np.all(np.diff(eigvals) <= 1e-12)

    def test_nullspace_completion_orthogonal_to_rows(self, rng):
        X = rng.standard_normal((2, 5))
        U = pretrain_pca(X, 3, rng=rng)
        assert U.T @ U == pytest.approx(np.eye(3), abs=1e-10)
        # third basis vector lives in the nullspace of the data
        assert X @ U[:, 2] == pytest.approx(np.zeros(2), abs=1e-10)

    def test_completion_is_seeded(self, rng):
        X = np.random.default_rng(0).standard_normal((3, 6))
        u1 = pretrain_pca(X, 5, rng=np.random.default_rng(42))
        u2 = pretrain_pca(X, 5, rng=np.random.default_rng(42))
        assert np.array_equal(u1, u2)

    def test_m_out_of_range(self, rng):
        X = rng.standard_normal((4, 3))
        with pytest.raises(DomainError):
            pretrain_pca(X, 4)
        with pytest.raises(DomainError):
            pretrain_pca(X, 0)


class TestMinNorm:
    def test_recovers_signal_when_well_posed(self, rng):
        X = rng.standard_normal((100, 10))
        w = rng.standard_normal(10)
        assert min_norm_lstsq(X, X @ w) == pytest.approx(w, rel=1e-8)

    def test_interpolates_when_underdetermined(self, rng):
        X = rng.standard_normal((5, 20))
        y = rng.standard_normal(5)
        w = min_norm_lstsq(X, y)
        assert X @ w == pytest.approx(y, rel=1e-8)

    def test_matches_pinv_solution(self, rng):
        X = rng.standard_normal((6, 15))
        y = rng.standard_normal(6)
        assert min_norm_lstsq(X, y) == pytest.approx(np.linalg.pinv(X) @ y, abs=1e-10)


class TestPretrainedRegression:
    def test_estimate_in_span(self, rng):
        X_u = rng.standard_normal((30, 12))
        X_l = rng.standard_normal((20, 12))
        y = rng.standard_normal(20)
        U = pretrain_pca(X_u, 4)
        w = pretrained_regression(X_l, y, U)
        residual = w - U @ (U.T @ w)
        assert np.linalg.norm(residual) < 1e-10 * max(np.linalg.norm(w), 1.0)

    def test_orthogonal_directions_get_zero_weight(self, rng):
        X_u = rng.standard_normal((30, 12))
        U = pretrain_pca(X_u, 4)
        w = pretrained_regression(rng.standard_normal((25, 12)), rng.standard_normal(25), U)
        # any direction outside the basis is untouched
        q, _ = np.linalg.qr(np.concatenate([U, rng.standard_normal((12, 8))], axis=1))
        for k in range(4, 12):
            assert abs(q[:, k] @ w) < 1e-10


class TestSklearnApi:
    def test_pretrainer_fit_transform(self, rng):
        X = rng.standard_normal((40, 9))
        tr = PCAPretrainer(n_components=3, random_state=0).fit(X)
        Z = tr.transform(X)
        assert Z.shape == (40, 3)
        assert tr.components_ @ tr.components_.T == pytest.approx(np.eye(3), abs=1e-10)

    def test_get_set_params_roundtrip(self):
        tr = PCAPretrainer(n_components=5, random_state=3)
        assert tr.get_params() == {"n_components": 5, "random_state": 3}
        tr.set_params(n_components=2)
        assert tr.n_components == 2
        assert clone(tr).get_params()["n_components"] == 2

    def test_unfitted_raises(self, rng):
        with pytest.raises(NotFittedError):
            PCAPretrainer(2).transform(rng.standard_normal((3, 4)))
        with pytest.raises(NotFittedError):
            MinNormLinearRegression().predict(rng.standard_normal((3, 4)))
        with pytest.raises(NotFittedError):
            PretrainedRegressor(PCAPretrainer(2)).fit(
                rng.standard_normal((3, 4)), np.zeros(3)
            )

    def test_two_stage_regressor(self, rng):
        X_u = rng.standard_normal((60, 10))
        X_l = rng.standard_normal((50, 10))
        w = rng.standard_normal(10)
        y = X_l @ w
        tr = PCAPretrainer(n_components=10).fit(X_u)
        reg = PretrainedRegressor(pretrainer=tr).fit(X_l, y)
        # full basis and well-posed design: exact recovery
        assert reg.coef_ == pytest.approx(w, rel=1e-8)
        assert reg.predict(X_l) == pytest.approx(y, rel=1e-8)

    def test_composes_in_pipeline(self, rng):
        X_u = rng.standard_normal((60, 10))
        X_l = rng.standard_normal((50, 10))
        y = X_l @ rng.standard_normal(10)
        pipe = Pipeline([
            ("pca", PCAPretrainer(n_components=4, random_state=0).fit(X_u)),
            ("reg", MinNormLinearRegression()),
        ])
        pipe.fit(X_l, y)
        assert pipe.predict(X_l).shape == (50,)

    def test_min_norm_score(self, rng):
        X = rng.standard_normal((80, 6))
        w = rng.standard_normal(6)
        y = X @ w
        reg = MinNormLinearRegression().fit(X, y)
        assert reg.score(X, y) == pytest.approx(1.0, abs=1e-10)
