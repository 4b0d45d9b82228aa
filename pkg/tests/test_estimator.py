import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from sta_dirac.estimator import DiracSpectrum
from sta_dirac.separation import sommerfeld_energy

X = np.array([[0, -1], [1, -1], [1, 1], [0, -1]])


def test_fit_predict_matches_closed_form():
    est = DiracSpectrum(Zalpha=0.3).fit(X)
    assert len(est.energies_) == 3
    want = [sommerfeld_energy(n_r, k, 0.3) for n_r, k in X]
    np.testing.assert_allclose(est.predict(X), want, rtol=1e-8)
    assert est.score(X, want) > 1 - 1e-10


def test_predict_extends_to_unseen_states():
    est = DiracSpectrum(Zalpha=0.3).fit(X[:1])
    e = est.predict([[0, -2]])
    assert abs(e[0] - sommerfeld_energy(0, -2, 0.3)) < 1e-8


def test_params_and_clone():
    est = DiracSpectrum(Zalpha=0.2, path="xis")
    assert est.get_params()["path"] == "xis"
    c = clone(est)
    assert c.get_params() == est.get_params() and not hasattr(c, "energies_")


def test_errors():
    with pytest.raises(NotFittedError):
        DiracSpectrum().predict(X)
    with pytest.raises(ValueError):
        DiracSpectrum().fit([[0.5, -1]])
    with pytest.raises(ValueError):
        DiracSpectrum().fit([[0, -1, 2]])
    with pytest.raises(ValueError):
        DiracSpectrum(path="bad").fit(X)
    with pytest.raises(ValueError):
        DiracSpectrum(Zalpha=1.5).fit(X)
