"""Gaussian limit fields on grids: the C-Brownian bridge and the limit process.

The bridge covariance ``C(u ^ v) - C(u) C(v)`` is assembled over the grid
nodes; ``u ^ v`` is itself a node, so only the model values on the grid
are needed. Nodes with ``C(u) in {0, 1}`` have zero variance and are left
out of the factorization, which keeps those field values exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .empirical import model_grid_values
from .grid import Grid, GridShapeError, ProcessField

MAX_NODES = 10_000
JITTERS = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)


class SingularCovarianceError(np.linalg.LinAlgError):
    """The covariance could not be factorized even with the largest jitter."""


def bridge_covariance(model, u, v) -> float:
    """``C(u ^ v) - C(u) C(v)`` for two points."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(model.cdf(np.minimum(u, v)) - model.cdf(u) * model.cdf(v))


def grid_bridge_covariance(model, grid: Grid) -> np.ndarray:
    """Dense ``(size, size)`` bridge covariance over the grid nodes (C order)."""
    cgrid = model_grid_values(model, grid)["cdf"]
    idx = np.indices(grid.shape).reshape(grid.dim, -1)
    meet = np.ravel_multi_index(
        tuple(np.minimum(idx[k][:, None], idx[k][None, :]) for k in range(grid.dim)),
        grid.shape,
    )
    flat = cgrid.ravel()
    return flat[meet] - np.outer(flat, flat)


@dataclass
class CovarianceFactor:
    """Lower Cholesky factor of the bridge covariance restricted to active nodes.

    Attributes
    ----------
    grid : Grid
    active : ndarray of int
        Flat indices of nodes with positive variance.
    lower : ndarray
        Factor with ``lower @ lower.T = cov[active][:, active] + jitter I``.
    jitter : float
    """

    grid: Grid
    active: np.ndarray
    lower: np.ndarray
    jitter: float

    @classmethod
    def build(cls, model, grid: Grid) -> "CovarianceFactor":
        if grid.size > MAX_NODES:
            raise ValueError(f"grid has {grid.size} nodes; dense factorization is capped at {MAX_NODES}")
        if grid.dim != model.dim:
            raise ValueError(f"grid dim {grid.dim} differs from model dim {model.dim}")
        cflat = model_grid_values(model, grid)["cdf"].ravel()
        active = np.flatnonzero((cflat > 0) & (cflat < 1))
        cov = grid_bridge_covariance(model, grid)[np.ix_(active, active)]
        eye = np.eye(len(active))
        for jitter in JITTERS:
            try:
                lower = np.linalg.cholesky(cov + jitter * eye)
            except np.linalg.LinAlgError:
                continue
            return cls(grid, active, lower, jitter)
        raise SingularCovarianceError(
            f"bridge covariance on {grid!r} is not factorizable with jitter up to {JITTERS[-1]}"
        )

    def draw(self, size: int, rng) -> np.ndarray:
        """``(size, grid.size)`` matrix of independent bridge fields."""
        z = rng.standard_normal((size, len(self.active)))
        out = np.zeros((size, self.grid.size))
        out[:, self.active] = z @ self.lower.T
        return out


def sample_bridges(model, grid: Grid, size: int, rng=None, factor: CovarianceFactor | None = None) -> np.ndarray:
    """``size`` bridge fields, shape ``(size,) + grid.shape``."""
    rng = np.random.default_rng(rng)
    factor = factor or CovarianceFactor.build(model, grid)
    return factor.draw(int(size), rng).reshape((int(size),) + grid.shape)


def sample_bridge(model, grid: Grid, rng=None, factor: CovarianceFactor | None = None) -> ProcessField:
    """One C-Brownian bridge field; the jitter used is stored in ``meta``."""
    factor = factor or CovarianceFactor.build(model, grid)
    vals = sample_bridges(model, grid, 1, rng, factor)[0]
    return ProcessField(grid, vals, "bridge_alpha", {"jitter": factor.jitter})


def _check_edges(grid: Grid):
    for k, ax in enumerate(grid.axes):
        if ax[-1] != 1.0:
            raise GridShapeError(f"axis {k} lacks the node 1 needed for the marginal bridges")


def limit_fields(model, grid: Grid, bridges: np.ndarray) -> np.ndarray:
    """Map bridge fields ``(B,) + grid.shape`` to ``CC = alpha - sum_j C_j alpha_j``."""
    _check_edges(grid)
    partials = model_grid_values(model, grid)["partials"]
    d = grid.dim
    out = np.array(bridges, dtype=float, copy=True)
    for j in range(d):
        idx = [slice(None)] + [-1] * d
        idx[1 + j] = slice(None)
        aj = np.asarray(bridges)[tuple(idx)]
        shape = [aj.shape[0]] + [1] * d
        shape[1 + j] = -1
        out -= partials[j][None] * aj.reshape(shape)
    return out


def limit_process_field(model, bridge: ProcessField) -> ProcessField:
    """``CC(u) = alpha(u) - sum_j C_j(u) alpha(1, ..., u_j, ..., 1)``."""
    vals = limit_fields(model, bridge.grid, bridge.values[None])[0]
    return ProcessField(bridge.grid, vals, "limit_CC", dict(bridge.meta))
