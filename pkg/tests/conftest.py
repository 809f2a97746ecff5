import numpy as np
import pytest
from scipy.stats import qmc

from empcop.copulas import (
    CheckerboardCopula,
    FrechetLowerCopula,
    FrechetUpperCopula,
    GaussianCopula,
    IndependenceCopula,
    clayton,
    frank,
    gumbel,
    logistic,
)


def smooth_zoo():
    return [
        IndependenceCopula(),
        GaussianCopula(rho=0.5),
        GaussianCopula(rho=-0.7),
        clayton(1.0),
        clayton(3.0),
        gumbel(1.5),
        frank(5.0),
        frank(-3.0),
        logistic(0.5),
        logistic(0.8),
    ]


def counterexamples():
    return [FrechetUpperCopula(), FrechetLowerCopula(), CheckerboardCopula()]


SMOOTH = smooth_zoo()
ALL_MODELS = SMOOTH + counterexamples()


def model_id(m):
    return repr(m)


@pytest.fixture(scope="session")
def interior_points():
    """1000 scrambled Sobol' points in (0.05, 0.95)^2."""
    return qmc.Sobol(2, seed=11).random(1024)[:1000] * 0.9 + 0.05


@pytest.fixture(scope="session")
def unit_points():
    """1000 scrambled Sobol' points in (0, 1)^2."""
    return qmc.Sobol(2, seed=12).random(1024)[:1000]


def brute_force_empirical_copula(U, u):
    """Direct composition G_n(G_n1^-1(u_1), ...) with explicit loops."""
    n, d = U.shape
    thresholds = []
    for j in range(d):
        col = sorted(U[:, j])
        p = u[j]
        if p == 0:
            thresholds.append(0.0)
            continue
        k = 1
        while not ((k - 1) / n < p <= k / n):
            k += 1
        thresholds.append(col[k - 1])
    count = 0
    for i in range(n):
        if all(U[i, j] <= thresholds[j] for j in range(d)):
            count += 1
    return count / n


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
