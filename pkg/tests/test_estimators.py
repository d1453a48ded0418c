import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from lefschetz.estimators import (
    FiberedRicciFlow,
    MeyerSignature,
    NormalizedRicciFlow,
    SpectralFingerprint,
)
from lefschetz.fixtures import FIXTURE_WORDS, fixture_word
from lefschetz.mesh import MeshValidationError, vertex_curvature
from lefschetz.meshes import mutation_fixtures, torus_grid


def test_flow_estimator(genus2, rng):
    X = rng.uniform(-0.3, 0.3, (2, genus2.n_vertices))
    est = NormalizedRicciFlow(genus2)
    U = est.fit(X).transform(X)
    assert U.shape == X.shape
    assert est.n_features_in_ == genus2.n_vertices
    for row in U:
        K = vertex_curvature(genus2.state(row))
        assert np.max(np.abs(K - est.target_.k_star)) < 1e-8
    assert np.all(est.rates_ < 0)


def test_get_set_params_and_clone(genus2):
    est = NormalizedRicciFlow(genus2, tol=1e-6)
    assert est.get_params()["tol"] == 1e-6
    est.set_params(dt_init=0.01)
    assert clone(est).dt_init == 0.01


def test_not_fitted(genus2):
    with pytest.raises(NotFittedError):
        NormalizedRicciFlow(genus2).transform(np.zeros(genus2.n_vertices))


def test_validation_errors(genus2):
    with pytest.raises(TypeError):
        NormalizedRicciFlow("genus2").fit()
    with pytest.raises(MeshValidationError):
        NormalizedRicciFlow(mutation_fixtures(genus2)["deleted-face"]).fit()
    with pytest.raises(ValueError):
        NormalizedRicciFlow(genus2).fit(np.zeros((1, 3)))
    with pytest.raises(ValueError):
        NormalizedRicciFlow(genus2).fit(np.full((1, genus2.n_vertices), np.nan))
    with pytest.raises(ValueError):
        NormalizedRicciFlow(genus2, dt_init=-1).fit()


def test_fingerprint_estimator(genus2, rng):
    X = rng.uniform(-0.3, 0.3, (3, genus2.n_vertices))
    F = SpectralFingerprint(genus2, n_eigenvalues=5).fit_transform(X)
    assert F.shape == (3, 5)
    assert np.all(np.abs(F[:, 0]) <= 1e-9)
    with pytest.raises(ValueError):
        SpectralFingerprint(genus2, n_eigenvalues=0).fit()


def test_fibered_estimator():
    est = FiberedRicciFlow(torus_grid(6), n_points=4, amplitude=0.2, n_eigenvalues=4)
    F = est.fit().transform()
    assert F.shape == (4, 4)
    assert est.continuity_[1]
    assert est.envelope_.rate < 0
    with pytest.raises(ValueError):
        FiberedRicciFlow(torus_grid(6), base_kind="torus").fit()


def test_meyer_estimator():
    names = sorted(FIXTURE_WORDS)
    pred = MeyerSignature().fit().predict([fixture_word(n) for n in names])
    assert pred.tolist() == [FIXTURE_WORDS[n][1] for n in names]
    assert MeyerSignature().predict(fixture_word("E1")).tolist() == [-8]
    with pytest.raises(TypeError):
        MeyerSignature().predict(["E1"])
