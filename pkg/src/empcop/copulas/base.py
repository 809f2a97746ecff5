"""Common machinery for parametric copula families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

BOUNDARY_STEP = 1e-6


class UnsupportedOperation(NotImplementedError):
    """The model does not declare the capability an operation needs."""


@dataclass(frozen=True)
class Capabilities:
    """What a model can do, and which smoothness conditions it declares.

    ``boundary_extension`` says how first partials on the faces
    ``u_j in {0, 1}`` are obtained: ``"closed_form"`` (exact one-sided
    limit) or ``"one_sided_difference"`` (quotient at spacing 1e-6).
    """

    analytic_first_derivs: bool = True
    analytic_second_derivs: bool = False
    satisfies_condition_2_1: bool = True
    satisfies_condition_4_1: bool = False
    boundary_extension: str = "closed_form"


class TailDependence(NamedTuple):
    lower: float
    upper: float
    lower_converged: bool
    upper_converged: bool


def as_points(u, d: int) -> tuple[np.ndarray, bool]:
    """Coerce ``u`` to an ``(N, d)`` float array; flag whether it was one point."""
    arr = np.asarray(u, dtype=float)
    scalar = arr.ndim == 1
    pts = np.atleast_2d(arr)
    if pts.ndim != 2 or pts.shape[1] != d:
        raise ValueError(f"expected points with {d} coordinates, got shape {arr.shape}")
    if np.any(~np.isfinite(pts)) or np.any(pts < 0) or np.any(pts > 1):
        raise ValueError("copula arguments must lie in [0, 1]")
    return pts, scalar


def _finish(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


class Copula:
    """Base class for d-variate copulas.

    Subclasses implement ``_cdf`` on points in (0, 1]^d and ``_partial``
    on points with ``0 < u_j < 1`` and every other coordinate in (0, 1].
    Grounding, uniform margins and the conventions on the faces of the
    hypercube are handled here. Axis indices are 0-based.
    """

    family = "copula"
    capabilities = Capabilities()

    def __init__(self, dim: int = 2):
        dim = int(dim)
        if dim < 2:
            raise ValueError("copula dimension must be at least 2")
        self.dim = dim

    # -- parameters -------------------------------------------------------
    @property
    def params(self) -> dict:
        return {}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}(dim={self.dim}{', ' if args else ''}{args})"

    def _axis(self, j) -> int:
        j = int(j)
        if not 0 <= j < self.dim:
            raise IndexError(f"axis {j} out of range for a {self.dim}-variate copula")
        return j

    # -- evaluation -------------------------------------------------------
    def cdf(self, u):
        """Copula value at ``u`` (a point or an ``(N, d)`` array)."""
        pts, scalar = as_points(u, self.dim)
        out = np.zeros(len(pts))
        inner = np.all(pts > 0, axis=1)
        if inner.any():
            out[inner] = self._cdf(pts[inner])
        return _finish(np.clip(out, 0.0, 1.0), scalar)

    def partial_derivative(self, j, u):
        """First partial derivative in coordinate ``j``, extended to all of [0, 1]^d.

        On ``u_j in {0, 1}`` the one-sided limit is returned. The value is 0
        whenever another coordinate is 0 and 1 whenever all other
        coordinates equal 1.
        """
        j = self._axis(j)
        pts, scalar = as_points(u, self.dim)
        others = np.delete(pts, j, axis=1)
        zero = np.any(others == 0, axis=1)
        ones = np.all(others == 1, axis=1) & ~zero
        uj = pts[:, j]
        rest = ~(zero | ones)
        lo = rest & (uj == 0)
        hi = rest & (uj == 1)
        inner = rest & ~lo & ~hi
        out = np.zeros(len(pts))
        out[ones] = 1.0
        if inner.any():
            out[inner] = self._partial(j, pts[inner])
        if lo.any():
            out[lo] = self._partial_lower_face(j, pts[lo])
        if hi.any():
            out[hi] = self._partial_upper_face(j, pts[hi])
        return _finish(np.clip(out, 0.0, 1.0), scalar)

    def second_partial(self, i, j, u):
        """Second-order partial derivative; needs ``u_i`` and ``u_j`` interior."""
        if not self.capabilities.analytic_second_derivs:
            raise UnsupportedOperation(f"{self.family}: no analytic second derivatives")
        i, j = self._axis(i), self._axis(j)
        pts, scalar = as_points(u, self.dim)
        for k in {i, j}:
            if np.any((pts[:, k] <= 0) | (pts[:, k] >= 1)):
                raise ValueError(f"coordinate {k} must lie strictly inside (0, 1)")
        return _finish(self._second(i, j, pts), scalar)

    def sample(self, n: int, rng=None) -> np.ndarray:
        """Draw an ``(n, d)`` i.i.d. sample on the unit scale."""
        n = int(n)
        if n < 1:
            raise ValueError("n must be at least 1")
        rng = np.random.default_rng(rng)
        return self._sample(n, rng)

    # -- hooks ------------------------------------------------------------
    def _cdf(self, pts):
        raise NotImplementedError

    def _partial(self, j, pts):
        raise NotImplementedError

    def _partial_lower_face(self, j, pts):
        h = BOUNDARY_STEP
        up = pts.copy()
        up[:, j] = h
        return self.cdf(up) / h

    def _partial_upper_face(self, j, pts):
        h = BOUNDARY_STEP
        down = pts.copy()
        down[:, j] = 1.0 - h
        return (self.cdf(pts) - self.cdf(down)) / h

    def _second(self, i, j, pts):
        raise UnsupportedOperation(f"{self.family}: no analytic second derivatives")

    def _sample(self, n, rng):
        raise NotImplementedError

    # -- tail dependence --------------------------------------------------
    def _diagonal_ratio(self, u):
        """C(u, u) / u."""
        return self.cdf(np.column_stack([u, u])) / u

    def _survival_diagonal_ratio(self, u):
        """(1 - 2(1 - u) + C(1 - u, 1 - u)) / u, i.e. the upper-tail quotient at 1 - u."""
        w = 1.0 - u
        return (self.cdf(np.column_stack([w, w])) - 1.0 + 2.0 * u) / u

    def tail_dependence_coefficients(self, tol: float = 1e-6) -> TailDependence:
        """Lower and upper tail dependence coefficients of a bivariate copula.

        The quotients are evaluated at ``u = 2**-k``, ``k = 10..30``, and
        stabilized by a Richardson step that cancels the leading O(u) term.
        A coefficient is converged once two successive extrapolants differ
        by less than ``tol``; otherwise the last extrapolant is reported with
        the flag unset.
        """
        if self.dim != 2:
            raise ValueError("tail dependence coefficients are defined here for d = 2")
        u = 2.0 ** -np.arange(10, 31)
        lower, lc = _richardson_limit(self._diagonal_ratio(u), tol)
        upper, uc = _richardson_limit(self._survival_diagonal_ratio(u), tol)
        return TailDependence(lower, upper, lc, uc)


def _richardson_limit(values: np.ndarray, tol: float) -> tuple[float, bool]:
    # values[k] sampled at u = 2**-(k+10); error assumed ~ c*u
    extrap = 2.0 * values[1:] - values[:-1]
    for k in range(1, len(extrap)):
        if abs(extrap[k] - extrap[k - 1]) < tol:
            return float(np.clip(extrap[k], 0.0, 1.0)), True
    return float(np.clip(extrap[-1], 0.0, 1.0)), False
