"""Recovery study for the fully parameterized model at reduced ensemble size."""

import numpy as np
import pytest

from hawkesvol.core import FullParams
from hawkesvol.estimate import fit_full
from hawkesvol.simulate import ConditionalGeometric, simulate_full

TRUE_FULL = FullParams(
    mu1=0.1461, mu2=0.1155,
    alpha11=0.3185, alpha22=0.3821, alpha12=0.9812, alpha21=1.4949,
    beta11=1.1799, beta22=1.9553, beta12=2.0952, beta21=2.5030,
    eta=0.1488,
)
SAMPLER = ConditionalGeometric(0.1, 1.0, 2.0)
# per-path estimator dispersion at the 5.5h horizon, used to size the band
FULL_STD = np.array([0.0038, 0.0032, 0.0150, 0.0219, 0.0282, 0.0334,
                     0.0567, 0.1195, 0.0697, 0.0587, 0.0235])


@pytest.fixture(scope="module")
def recovered():
    fits = []
    for s in range(5):
        res = simulate_full(TRUE_FULL, SAMPLER, 19_800.0, seed=500 + s)
        fits.append(fit_full(res.stream, n_starts=1, compute_stderr=False))
    return fits


def test_estimates_recover_truth(recovered):
    est = np.array([f.params.as_array() for f in recovered])
    mean = est.mean(axis=0)
    for name, m, truth, sd in zip(FullParams.names, mean, TRUE_FULL.as_array(), FULL_STD):
        assert abs(m - truth) < 3 * sd, f"{name}: {m:.4f} vs {truth:.4f}"


def test_fits_converged_with_finite_loglik(recovered):
    assert all(f.converged for f in recovered)
    assert all(np.isfinite(f.loglik) for f in recovered)
