"""Independence, the Frechet-Hoeffding bounds and the checkerboard copula."""

import numpy as np

from .base import Capabilities, Copula

_COUNTEREXAMPLE = Capabilities(
    analytic_first_derivs=True,
    analytic_second_derivs=False,
    satisfies_condition_2_1=False,
    satisfies_condition_4_1=False,
)


class IndependenceCopula(Copula):
    """Product copula; every smoothness condition holds trivially."""

    family = "independence"
    capabilities = Capabilities(
        analytic_second_derivs=True,
        satisfies_condition_2_1=True,
        satisfies_condition_4_1=True,
    )

    def _cdf(self, pts):
        return np.prod(pts, axis=1)

    def _partial(self, j, pts):
        return np.prod(np.delete(pts, j, axis=1), axis=1)

    _partial_lower_face = _partial
    _partial_upper_face = _partial

    def _second(self, i, j, pts):
        if i == j:
            return np.zeros(len(pts))
        return np.prod(np.delete(pts, [i, j], axis=1), axis=1)

    def _sample(self, n, rng):
        return rng.random((n, self.dim))


class FrechetUpperCopula(Copula):
    """Comonotone copula ``min(u_1, ..., u_d)``."""

    family = "frechet_upper"
    capabilities = _COUNTEREXAMPLE

    def _cdf(self, pts):
        return np.min(pts, axis=1)

    def _partial(self, j, pts):
        # right derivative at the kink u_j = min of the others
        others = np.min(np.delete(pts, j, axis=1), axis=1)
        return (pts[:, j] < others).astype(float)

    _partial_lower_face = _partial
    _partial_upper_face = _partial

    def _sample(self, n, rng):
        return np.repeat(rng.random((n, 1)), self.dim, axis=1)


class FrechetLowerCopula(Copula):
    """Countermonotone copula ``max(u + v - 1, 0)``; bivariate only."""

    family = "frechet_lower"
    capabilities = _COUNTEREXAMPLE

    def __init__(self, dim: int = 2):
        if int(dim) != 2:
            raise ValueError("the Frechet lower bound is a copula only for d = 2")
        super().__init__(2)

    def _cdf(self, pts):
        return np.maximum(pts.sum(axis=1) - 1.0, 0.0)

    def _partial(self, j, pts):
        return (pts.sum(axis=1) >= 1.0).astype(float)

    _partial_lower_face = _partial
    _partial_upper_face = _partial

    def _sample(self, n, rng):
        u = rng.random(n)
        return np.column_stack([u, 1.0 - u])


class CheckerboardCopula(Copula):
    """Copula with density 2 on [0, 1/2]^2 and [1/2, 1]^2, zero elsewhere."""

    family = "checkerboard"
    capabilities = _COUNTEREXAMPLE

    def __init__(self, dim: int = 2):
        if int(dim) != 2:
            raise ValueError("the checkerboard copula is implemented for d = 2")
        super().__init__(2)

    def _cdf(self, pts):
        u, v = pts[:, 0], pts[:, 1]
        low = np.minimum(u, 0.5) * np.minimum(v, 0.5)
        high = np.maximum(u - 0.5, 0.0) * np.maximum(v - 0.5, 0.0)
        return 2.0 * (low + high)

    def _partial(self, j, pts):
        x, y = pts[:, j], pts[:, 1 - j]
        # right derivative across x = 1/2
        return 2.0 * np.where(x < 0.5, np.minimum(y, 0.5), np.maximum(y - 0.5, 0.0))

    _partial_lower_face = _partial
    _partial_upper_face = _partial

    def _sample(self, n, rng):
        block = rng.integers(0, 2, size=(n, 1)).astype(float)
        return 0.5 * (block + rng.random((n, 2)))
