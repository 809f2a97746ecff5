"""Archimedean copulas built from strict generators."""

from __future__ import annotations

import numpy as np
from scipy import stats

from .._roots import solve_increasing
from .base import Capabilities, Copula


class Generator:
    """Strict Archimedean generator ``phi`` with ``phi(0) = inf`` and ``phi(1) = 0``.

    Subclasses supply ``phi``, its inverse, the first two derivatives and
    ``tail_ratio(s) = lim_{x -> inf} psi'(x + s) / psi'(x)`` with
    ``psi = phi^{-1}``, which gives the exact partial derivative on the
    face ``u_j = 0``.
    """

    name = "generator"

    def __init__(self, theta: float):
        self.theta = float(theta)

    def phi(self, t):
        raise NotImplementedError

    def phi_inv(self, x):
        raise NotImplementedError

    def dphi(self, t):
        raise NotImplementedError

    def d2phi(self, t):
        raise NotImplementedError

    def tail_ratio(self, s):
        raise NotImplementedError

    def completely_monotone(self) -> bool:
        """Whether ``phi^{-1}`` is completely monotone (a copula in every d)."""
        return True

    def frailty(self, size, rng):
        """Mixing variable whose Laplace transform is ``phi^{-1}``, or None."""
        return None

    def frailty_transform(self, x):
        """Map ``E / V`` to the unit scale; ``phi_inv`` unless rescaled."""
        return self.phi_inv(x)

    def __repr__(self):
        return f"{type(self).__name__}(theta={self.theta!r})"


class ClaytonGenerator(Generator):
    """``phi(t) = (t^-theta - 1) / theta``, theta > 0."""

    name = "clayton"

    def __init__(self, theta):
        super().__init__(theta)
        if not self.theta > 0:
            raise ValueError("Clayton requires theta > 0")

    def phi(self, t):
        return np.expm1(-self.theta * np.log(t)) / self.theta

    def phi_inv(self, x):
        return np.exp(-np.log1p(self.theta * x) / self.theta)

    def dphi(self, t):
        return -np.power(t, -self.theta - 1.0)

    def d2phi(self, t):
        return (self.theta + 1.0) * np.power(t, -self.theta - 2.0)

    def tail_ratio(self, s):
        return np.ones_like(s)

    def frailty(self, size, rng):
        return rng.gamma(1.0 / self.theta, 1.0, size=size)

    def frailty_transform(self, x):
        # Laplace transform of Gamma(1/theta, 1) is (1 + s)^(-1/theta)
        return np.exp(-np.log1p(x) / self.theta)


class GumbelGenerator(Generator):
    """``phi(t) = (-log t)^theta``, theta >= 1."""

    name = "gumbel"

    def __init__(self, theta):
        super().__init__(theta)
        if not self.theta >= 1:
            raise ValueError("Gumbel requires theta >= 1")

    def phi(self, t):
        return np.power(-np.log(t), self.theta)

    def phi_inv(self, x):
        return np.exp(-np.power(x, 1.0 / self.theta))

    def dphi(self, t):
        lg = -np.log(t)
        return -self.theta * np.power(lg, self.theta - 1.0) / t

    def d2phi(self, t):
        lg = -np.log(t)
        th = self.theta
        return th * np.power(lg, th - 2.0) * (th - 1.0 + lg) / (t * t)

    def tail_ratio(self, s):
        if self.theta > 1:
            return np.ones_like(s)
        return np.exp(-s)

    def frailty(self, size, rng):
        # positive stable law with Laplace transform exp(-s^alpha) (Kanter)
        alpha = 1.0 / self.theta
        if alpha == 1.0:
            return np.ones(size)
        w = rng.uniform(0.0, np.pi, size=size)
        e = rng.exponential(size=size)
        return (
            np.sin(alpha * w) / np.sin(w) ** (1.0 / alpha)
            * (np.sin((1.0 - alpha) * w) / e) ** ((1.0 - alpha) / alpha)
        )


class FrankGenerator(Generator):
    """``phi(t) = -log((exp(-theta t) - 1) / (exp(-theta) - 1))``, theta != 0.

    Negative theta gives a valid copula only in dimension 2.
    """

    name = "frank"

    def __init__(self, theta):
        super().__init__(theta)
        if self.theta == 0 or not np.isfinite(self.theta):
            raise ValueError("Frank requires a finite theta != 0")

    def phi(self, t):
        th = self.theta
        return -np.log(np.expm1(-th * t) / np.expm1(-th))

    def phi_inv(self, x):
        th = self.theta
        return -np.log1p(np.exp(-x) * np.expm1(-th)) / th

    def dphi(self, t):
        th = self.theta
        return -th / np.expm1(th * t)

    def d2phi(self, t):
        th = self.theta
        em = np.expm1(th * t)
        return th * th * (em + 1.0) / (em * em)

    def tail_ratio(self, s):
        return np.exp(-s)

    def completely_monotone(self) -> bool:
        return self.theta > 0

    def frailty(self, size, rng):
        if self.theta <= 0:
            return None
        return stats.logser.rvs(-np.expm1(-self.theta), size=size, random_state=rng).astype(float)


GENERATORS = {
    "clayton": ClaytonGenerator,
    "gumbel": GumbelGenerator,
    "frank": FrankGenerator,
}


class ArchimedeanCopula(Copula):
    """``C(u) = phi^{-1}(phi(u_1) + ... + phi(u_d))``.

    For ``d >= 3`` the generator inverse must be completely monotone,
    which is checked at construction.
    """

    def __init__(self, generator: Generator, dim: int = 2):
        super().__init__(dim)
        if self.dim >= 3 and not generator.completely_monotone():
            raise ValueError(
                f"{generator!r} is not completely monotone; only d = 2 is allowed"
            )
        self.generator = generator
        self.family = generator.name
        self.capabilities = Capabilities(
            analytic_second_derivs=True,
            satisfies_condition_2_1=True,
            satisfies_condition_4_1=self.dim == 2,
        )

    @property
    def theta(self) -> float:
        return self.generator.theta

    @property
    def params(self):
        return {"theta": self.theta}

    def _sum_phi(self, pts):
        with np.errstate(divide="ignore", over="ignore"):
            return np.sum(self.generator.phi(pts), axis=1)

    def _cdf(self, pts):
        return self.generator.phi_inv(self._sum_phi(pts))

    def _partial(self, j, pts):
        g = self.generator
        c = self._cdf(pts)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = g.dphi(pts[:, j]) / g.dphi(c)
        # C(u) underflowing to 0 means the quotient is 0 as well
        return np.where(np.isfinite(val), val, 0.0)

    def _partial_lower_face(self, j, pts):
        rest = np.delete(pts, j, axis=1)
        return self.generator.tail_ratio(self._sum_phi(rest))

    def _partial_upper_face(self, j, pts):
        return self._partial(j, pts)

    def _second(self, i, j, pts):
        g = self.generator
        c = self._cdf(pts)
        d1c = g.dphi(c)
        d2c = g.d2phi(c)
        if i != j:
            return -d2c * g.dphi(pts[:, i]) * g.dphi(pts[:, j]) / d1c**3
        uj = pts[:, j]
        return g.d2phi(uj) / d1c - d2c * g.dphi(uj) ** 2 / d1c**3

    def _sample(self, n, rng):
        if self.dim == 2:
            return self._sample_conditional(n, rng)
        v = self.generator.frailty(n, rng)
        e = rng.exponential(size=(n, self.dim))
        return self.generator.frailty_transform(e / v[:, None])

    def _sample_conditional(self, n, rng):
        u = rng.random(n)
        w = rng.random(n)
        v = self._conditional_inverse(u, w)
        return np.column_stack([u, v])

    def _conditional_inverse(self, u, w):
        """Solve dC/du(u, v) = w for v."""
        th = self.theta
        name = self.generator.name
        if name == "clayton":
            return np.power(
                (np.power(w, -th / (1.0 + th)) - 1.0) * np.power(u, -th) + 1.0, -1.0 / th
            )
        if name == "frank":
            return -np.log1p(w * np.expm1(-th) / (w + (1.0 - w) * np.exp(-th * u))) / th
        return solve_increasing(
            lambda v: self.partial_derivative(0, np.column_stack([u, v])), w
        )


def clayton(theta: float, dim: int = 2) -> ArchimedeanCopula:
    return ArchimedeanCopula(ClaytonGenerator(theta), dim)


def gumbel(theta: float, dim: int = 2) -> ArchimedeanCopula:
    return ArchimedeanCopula(GumbelGenerator(theta), dim)


def frank(theta: float, dim: int = 2) -> ArchimedeanCopula:
    return ArchimedeanCopula(FrankGenerator(theta), dim)
