"""Gaussian copula."""

from __future__ import annotations

import warnings

import numpy as np
from scipy import integrate, special, stats

from .base import Capabilities, Copula

BIVARIATE_ABS_TOL = 1e-10
CUBATURE_ABS_TOL = 1e-6


def correlation_matrix(corr) -> np.ndarray:
    """Validate a correlation matrix: symmetric, unit diagonal, positive definite."""
    r = np.array(corr, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] < 2:
        raise ValueError("correlation matrix must be square with size >= 2")
    if not np.allclose(r, r.T, atol=1e-12):
        raise ValueError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(r), 1.0, atol=1e-12):
        raise ValueError("correlation matrix must have a unit diagonal")
    off = r[~np.eye(len(r), dtype=bool)]
    if np.any(np.abs(off) >= 1):
        raise ValueError("off-diagonal correlations must satisfy |rho| < 1")
    try:
        np.linalg.cholesky(r)
    except np.linalg.LinAlgError:
        raise ValueError("correlation matrix is not positive definite") from None
    r = 0.5 * (r + r.T)
    np.fill_diagonal(r, 1.0)
    r.setflags(write=False)
    return r


def load_correlation(path) -> np.ndarray:
    """Read a whitespace-separated correlation matrix."""
    return correlation_matrix(np.loadtxt(path, ndmin=2))


def bivariate_normal_copula_cdf(u: float, v: float, rho: float) -> float:
    """Bivariate Gaussian copula by one-dimensional adaptive quadrature.

    Integrates the conditional distribution ``dC/du(s, v)`` over
    ``s in (0, u)``, along whichever coordinate is smaller. The absolute
    tolerance is ``1e-10`` scaled by ``min(u, v)`` so that tail values keep
    their relative accuracy.
    """
    if u <= 0 or v <= 0:
        return 0.0
    if u >= 1:
        return v
    if v >= 1:
        return u
    if rho == 0:
        return u * v
    a, b = (u, v) if u <= v else (v, u)
    sigma = np.sqrt(1.0 - rho * rho)
    y = special.ndtri(b)

    def integrand(s):
        return special.ndtr((y - rho * special.ndtri(s)) / sigma)

    # location where the integrand is steepest, if inside the range
    kink = special.ndtr(y / rho)
    points = [kink] if 0 < kink < a else None
    with warnings.catch_warnings():
        # deep-tail calls ask for more than double precision can deliver
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(
            integrand,
            0.0,
            a,
            epsabs=BIVARIATE_ABS_TOL * min(1.0, a),
            epsrel=1e-12,
            limit=200,
            points=points,
        )
    return float(min(max(val, 0.0), a))


def genz_normal_cdf(b, corr, tol: float = CUBATURE_ABS_TOL, max_log2: int = 18) -> float:
    """P(X <= b) for X ~ N(0, corr) by Genz's separation of variables.

    The transformed integrand is averaged over 8 independently scrambled
    Sobol' sequences with fixed seeds, doubling the point count until the
    standard error across scrambles drops below ``tol / 3``. Deterministic.
    """
    b = np.asarray(b, dtype=float)
    lower = np.linalg.cholesky(corr)
    d = len(b)
    n_rand = 8
    engines = [stats.qmc.Sobol(d - 1, scramble=True, seed=1000 + k) for k in range(n_rand)]
    sums = np.zeros(n_rand)
    count = 0
    log2 = 10
    while True:
        m = 2**log2 - count
        for k, eng in enumerate(engines):
            w = eng.random(m)
            e = np.full(m, special.ndtr(b[0] / lower[0, 0]))
            f = e.copy()
            y = np.zeros((m, d))
            for i in range(1, d):
                y[:, i - 1] = special.ndtri(np.clip(w[:, i - 1] * e, 1e-300, 1 - 1e-16))
                e = special.ndtr((b[i] - y[:, :i] @ lower[i, :i]) / lower[i, i])
                f *= e
            sums[k] += f.sum()
        count += m
        means = sums / count
        se = means.std(ddof=1) / np.sqrt(n_rand)
        if se <= tol / 3 or log2 >= max_log2:
            return float(np.clip(means.mean(), 0.0, 1.0))
        log2 += 1


class GaussianCopula(Copula):
    """Gaussian copula with a full-rank correlation matrix.

    Parameters
    ----------
    rho : float, optional
        Common correlation. For ``dim > 2`` this builds an
        equicorrelation matrix.
    corr : array_like, optional
        Full correlation matrix; overrides ``rho`` and ``dim``.
    dim : int, default 2

    Notes
    -----
    For ``d = 2`` the cdf is computed by adaptive quadrature (absolute
    tolerance 1e-10) and second derivatives are analytic. For ``d >= 3`` the
    cdf uses a quasi-Monte Carlo Genz cubature with absolute tolerance
    1e-6, and no second derivatives are offered.
    """

    family = "gaussian"

    def __init__(self, rho: float | None = None, corr=None, dim: int = 2):
        if corr is None:
            if rho is None:
                raise ValueError("give rho or corr")
            dim = int(dim)
            corr = np.full((dim, dim), float(rho))
            np.fill_diagonal(corr, 1.0)
        self.corr = correlation_matrix(corr)
        super().__init__(len(self.corr))
        self._chol = np.linalg.cholesky(self.corr)
        self.capabilities = Capabilities(
            analytic_second_derivs=self.dim == 2,
            satisfies_condition_2_1=True,
            satisfies_condition_4_1=self.dim == 2,
        )

    @property
    def rho(self) -> float:
        if self.dim != 2:
            raise AttributeError("rho is defined for bivariate models; use corr")
        return float(self.corr[0, 1])

    @property
    def params(self):
        if self.dim == 2:
            return {"rho": self.rho}
        return {"corr": self.corr.tolist()}

    # -- cdf --------------------------------------------------------------
    def _cdf(self, pts):
        if self.dim == 2:
            rho = self.rho
            return np.array([bivariate_normal_copula_cdf(u, v, rho) for u, v in pts])
        return np.array([self._mvn_cdf(p, self.corr) for p in special.ndtri(pts)])

    @staticmethod
    def _mvn_cdf(x, cov, mean=None) -> float:
        x = np.asarray(x, dtype=float)
        mean = np.zeros(len(x)) if mean is None else np.asarray(mean, dtype=float)
        if np.any(x == -np.inf):
            return 0.0
        # +inf components impose no constraint
        keep = np.isfinite(x)
        if not keep.any():
            return 1.0
        x, mean, cov = x[keep], mean[keep], np.asarray(cov)[np.ix_(keep, keep)]
        sd = np.sqrt(np.diag(cov))
        z = (x - mean) / sd
        if len(z) == 1:
            return float(special.ndtr(z[0]))
        r = cov / np.outer(sd, sd)
        if len(z) == 2:
            return bivariate_normal_copula_cdf(
                float(special.ndtr(z[0])), float(special.ndtr(z[1])), float(r[0, 1])
            )
        return genz_normal_cdf(z, r)

    # -- first partials ---------------------------------------------------
    def _conditional(self, j):
        """Law of X_{-j} given X_j: regression coefficients and covariance."""
        r = np.delete(self.corr[:, j], j)
        cov = np.delete(np.delete(self.corr, j, axis=0), j, axis=1) - np.outer(r, r)
        return r, cov

    def _partial(self, j, pts):
        x = special.ndtri(pts)
        if self.dim == 2:
            rho = self.rho
            sigma = np.sqrt(1.0 - rho * rho)
            return special.ndtr((x[:, 1 - j] - rho * x[:, j]) / sigma)
        r, cov = self._conditional(j)
        rest = np.delete(x, j, axis=1)
        return np.array([self._mvn_cdf(xr, cov, r * xj) for xr, xj in zip(rest, x[:, j])])

    def _face_limit(self, j, pts, sign):
        # x_j -> sign * inf; components with sign*r_i > 0 have conditional
        # mean -> +inf (constraint fails), sign*r_i < 0 -> -inf (always met)
        r = np.delete(self.corr[:, j], j)
        rest_u = np.delete(pts, j, axis=1)
        x = special.ndtri(rest_u)
        out = np.empty(len(pts))
        blocking = sign * r > 0
        free = r == 0
        cov = np.delete(np.delete(self.corr, j, axis=0), j, axis=1)
        for k, xr in enumerate(x):
            if np.any(blocking & (xr < np.inf)):
                out[k] = 0.0
            elif not free.any():
                out[k] = 1.0
            else:
                out[k] = self._mvn_cdf(xr[free], cov[np.ix_(free, free)])
        return out

    def _partial_lower_face(self, j, pts):
        return self._face_limit(j, pts, -1.0)

    def _partial_upper_face(self, j, pts):
        return self._face_limit(j, pts, +1.0)

    # -- second partials (d = 2) -----------------------------------------
    def _second(self, i, j, pts):
        rho = self.rho
        s2 = 1.0 - rho * rho
        x = special.ndtri(pts)
        if i != j:
            q = (rho * rho * (x[:, 0] ** 2 + x[:, 1] ** 2) - 2.0 * rho * x[:, 0] * x[:, 1]) / (2.0 * s2)
            return np.exp(-q) / np.sqrt(s2)
        sigma = np.sqrt(s2)
        xi, xo = x[:, i], x[:, 1 - i]
        z = (xo - rho * xi) / sigma
        # phi(z) / phi(x_i) without underflow
        return -(rho / sigma) * np.exp(0.5 * (xi * xi - z * z))

    # -- sampling and tails -----------------------------------------------
    def _sample(self, n, rng):
        z = rng.standard_normal((n, self.dim)) @ self._chol.T
        return special.ndtr(z)

    def _survival_diagonal_ratio(self, u):
        # radial symmetry: the survival copula equals C
        return self._diagonal_ratio(u)
