"""Bivariate extreme-value copulas parametrized by a Pickands dependence function."""

from __future__ import annotations

import numpy as np

from .._roots import solve_increasing
from .base import Capabilities, Copula


class PickandsFunction:
    """Pickands dependence function ``A`` on [0, 1] with its derivatives.

    Parameters
    ----------
    A, dA : callable
        The function and its first derivative on (0, 1), vectorized.
    d2A : callable, optional
        Second derivative on (0, 1). Needed for second partials and for
        the weighted curvature bound.
    dA0, dA1 : float, optional
        One-sided derivatives ``A'(0+)`` and ``A'(1-)``. When omitted, the
        copula falls back to one-sided differencing on the faces.
    name : str
    """

    def __init__(self, A, dA, d2A=None, dA0=None, dA1=None, name="custom"):
        self._A, self._dA, self._d2A = A, dA, d2A
        self.dA0 = None if dA0 is None else float(dA0)
        self.dA1 = None if dA1 is None else float(dA1)
        self.name = name
        t = np.linspace(0.0, 1.0, 201)[1:-1]
        a = np.asarray(self.A(t))
        if np.any(a > 1 + 1e-12) or np.any(a < np.maximum(t, 1 - t) - 1e-12):
            raise ValueError("A must satisfy max(t, 1 - t) <= A(t) <= 1")

    @property
    def has_second(self) -> bool:
        return self._d2A is not None

    @property
    def params(self) -> dict:
        return {}

    def A(self, t):
        return self._A(t)

    def dA(self, t):
        return self._dA(t)

    def d2A(self, t):
        if self._d2A is None:
            raise NotImplementedError(f"{self.name}: second derivative not supplied")
        return self._d2A(t)

    def mu(self, t):
        return self.A(t) - t * self.dA(t)

    def nu(self, t):
        return self.A(t) + (1.0 - t) * self.dA(t)

    def __repr__(self):
        return f"PickandsFunction({self.name})"


class LogisticPickands(PickandsFunction):
    """``A(t) = (t^(1/theta) + (1 - t)^(1/theta))^theta`` for theta in (0, 1].

    ``theta = 1`` is independence; smaller theta means stronger dependence.
    """

    def __init__(self, theta: float):
        theta = float(theta)
        if not 0 < theta <= 1:
            raise ValueError("logistic theta must lie in (0, 1]")
        self.theta = theta
        self._a = 1.0 / theta
        indep = theta == 1.0
        super().__init__(
            self._A_impl,
            self._dA_impl,
            self._d2A_impl,
            dA0=0.0 if indep else -1.0,
            dA1=0.0 if indep else 1.0,
            name="logistic",
        )

    @property
    def params(self):
        return {"theta": self.theta}

    def _s(self, t):
        return np.power(t, self._a) + np.power(1.0 - t, self._a)

    def _A_impl(self, t):
        return np.power(self._s(t), self.theta)

    def _dA_impl(self, t):
        a = self._a
        return np.power(self._s(t), self.theta - 1.0) * (
            np.power(t, a - 1.0) - np.power(1.0 - t, a - 1.0)
        )

    def _d2A_impl(self, t):
        a = self._a
        return (a - 1.0) * np.power(self._s(t), self.theta - 2.0) * np.power(t * (1.0 - t), a - 2.0)

    def weighted_curvature(self, t):
        """``t (1 - t) A''(t)``, finite up to the endpoints for every theta."""
        a = self._a
        return (a - 1.0) * np.power(self._s(t), self.theta - 2.0) * np.power(t * (1.0 - t), a - 1.0)


def tail_dependence_function(pickands: PickandsFunction, x, y):
    """Stable tail dependence function ``l(x, y) = (x + y) A(y / (x + y))``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("l is defined on [0, inf)^2")
    s = x + y
    with np.errstate(invalid="ignore", divide="ignore"):
        val = s * pickands.A(np.where(s > 0, y / np.where(s > 0, s, 1.0), 0.5))
    return np.where(s > 0, val, 0.0)


class ExtremeValueCopula(Copula):
    """``C(u, v) = exp(log(uv) A(log v / log(uv)))``.

    Second partials are analytic when the Pickands function supplies
    ``A''``. The smoothness declarations default to what holds for a
    twice differentiable ``A`` with finite weighted curvature; pass
    ``declare_condition_4_1`` to override.
    """

    family = "extreme_value"

    def __init__(self, pickands: PickandsFunction, declare_condition_4_1: bool | None = None):
        super().__init__(2)
        self.pickands = pickands
        c41 = pickands.has_second if declare_condition_4_1 is None else bool(declare_condition_4_1)
        closed_faces = pickands.dA0 is not None and pickands.dA1 is not None
        self.capabilities = Capabilities(
            analytic_second_derivs=pickands.has_second,
            satisfies_condition_2_1=True,
            satisfies_condition_4_1=c41,
            boundary_extension="closed_form" if closed_faces else "one_sided_difference",
        )

    @property
    def params(self):
        return {"pickands": self.pickands.name, **self.pickands.params}

    def _parts(self, pts):
        lu, lv = np.log(pts[:, 0]), np.log(pts[:, 1])
        luv = lu + lv
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(luv < 0, lv / np.where(luv < 0, luv, -1.0), 0.5)
        c = np.exp(luv * self.pickands.A(t))
        return t, c, luv

    def _cdf(self, pts):
        return self._parts(pts)[1]

    def _partial(self, j, pts):
        t, c, _ = self._parts(pts)
        p = self.pickands
        if j == 0:
            return c / pts[:, 0] * p.mu(t)
        return c / pts[:, 1] * p.nu(t)

    def _partial_lower_face(self, j, pts):
        p = self.pickands
        other = pts[:, 1 - j]
        if j == 0 and p.dA0 is not None:
            return np.power(other, 1.0 + p.dA0)
        if j == 1 and p.dA1 is not None:
            return np.power(other, 1.0 - p.dA1)
        return super()._partial_lower_face(j, pts)

    def _partial_upper_face(self, j, pts):
        p = self.pickands
        other = pts[:, 1 - j]
        if j == 0 and p.dA1 is not None:
            return other * (1.0 - p.dA1)
        if j == 1 and p.dA0 is not None:
            return other * (1.0 + p.dA0)
        return super()._partial_upper_face(j, pts)

    def _second(self, i, j, pts):
        t, c, luv = self._parts(pts)
        p = self.pickands
        u, v = pts[:, 0], pts[:, 1]
        mu, nu, d2 = p.mu(t), p.nu(t), p.d2A(t)
        if i != j:
            return c / (u * v) * (mu * nu - t * (1.0 - t) * d2 / luv)
        if i == 0:
            return c / (u * u) * (-mu * (1.0 - mu) + t * t * d2 / luv)
        return c / (v * v) * (-nu * (1.0 - nu) + (1.0 - t) ** 2 * d2 / luv)

    def _sample(self, n, rng):
        u = rng.random(n)
        w = rng.random(n)
        v = solve_increasing(lambda x: self.partial_derivative(0, np.column_stack([u, x])), w)
        return np.column_stack([u, v])

    def _survival_diagonal_ratio(self, u):
        a_half = float(self.pickands.A(np.array([0.5]))[0])
        return (2.0 * u + np.expm1(2.0 * a_half * np.log1p(-u))) / u


def logistic(theta: float) -> ExtremeValueCopula:
    return ExtremeValueCopula(LogisticPickands(theta))
