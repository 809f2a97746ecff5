"""Empirical distribution functions, the empirical copula and its processes.

Everything here works from a unit-scale sample ``U`` of shape ``(n, d)``.
Pointwise functions accept a single point or an ``(N, d)`` array of
points; the ``*_grid`` and ``*_process`` functions evaluate on a
:class:`~empcop.grid.Grid` in ``O(n + size)`` time by binning every
observation to its first covering node and cumulating the histogram
along each axis.
"""

from __future__ import annotations

import csv
import weakref
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .copulas.base import as_points
from .grid import Grid, ProcessField


@dataclass(frozen=True)
class SampleMatrix:
    """An ``(n, d)`` observation matrix.

    Attributes
    ----------
    data : ndarray
    scale : {"raw", "unit"}
    ties : ndarray of bool
        One flag per column, set when the column has repeated values.
    """

    data: np.ndarray
    scale: str = "unit"
    ties: np.ndarray | None = None

    def __post_init__(self):
        arr = np.array(self.data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("sample must be a non-empty (n, d) matrix")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample contains non-finite values")
        if self.scale not in ("raw", "unit"):
            raise ValueError("scale must be 'raw' or 'unit'")
        if self.scale == "unit" and (arr.min() < 0 or arr.max() > 1):
            raise ValueError("unit-scale samples must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        ties = self.ties
        if ties is None:
            srt = np.sort(arr, axis=0)
            ties = np.any(np.diff(srt, axis=0) == 0, axis=0)
        object.__setattr__(self, "ties", np.asarray(ties, dtype=bool))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def _unit(sample) -> np.ndarray:
    if isinstance(sample, SampleMatrix):
        if sample.scale != "unit":
            raise ValueError("expected a unit-scale sample; call pseudo_observations first")
        return sample.data
    arr = np.asarray(sample, dtype=float)
    if arr.ndim != 2:
        raise ValueError("sample must be an (n, d) matrix")
    return arr


def pseudo_observations(raw) -> SampleMatrix:
    """Column ranks divided by ``n``, using maximal ranks for ties.

    Examples
    --------
    >>> pseudo_observations(np.array([[3.1], [-2.0], [7.7]])).data.ravel()
    array([0.66666667, 0.33333333, 1.        ])
    """
    data = raw.data if isinstance(raw, SampleMatrix) else np.asarray(raw, dtype=float)
    if data.ndim != 2:
        raise ValueError("sample must be an (n, d) matrix")
    n = data.shape[0]
    ranks = stats.rankdata(data, method="max", axis=0)
    srt = np.sort(data, axis=0)
    ties = np.any(np.diff(srt, axis=0) == 0, axis=0)
    return SampleMatrix(ranks / n, "unit", ties)


def read_sample_csv(path, delimiter: str = ",") -> SampleMatrix:
    """Load a raw sample, one observation per row; a header row is optional."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r]
    if not rows:
        raise ValueError(f"{path}: no data")
    try:
        [float(x) for x in rows[0]]
    except ValueError:
        rows = rows[1:]
    try:
        data = np.array([[float(x) for x in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    return SampleMatrix(data, "raw")


# -- pointwise evaluation ---------------------------------------------------
def _quantile_index(n: int, p) -> np.ndarray:
    """``k = ceil(n p)``, robust to representation error in ``n p``.

    A relative slack of 1e-12 absorbs the rounding in ``(k / n) * n`` while
    keeping ``k >= 1`` for every ``p > 0``.
    """
    return np.ceil(n * np.asarray(p, dtype=float) * (1 - 1e-12)).astype(np.int64)


def ecdf_joint(sample, u):
    """``G_n(u) = #{i : U_i <= u} / n``."""
    U = _unit(sample)
    pts, scalar = as_points(u, U.shape[1])
    vals = np.mean(np.all(U[None, :, :] <= pts[:, None, :], axis=2), axis=1)
    return float(vals[0]) if scalar else vals


def ecdf_marginal(sample, j: int, p):
    """``G_nj(p) = #{i : U_ij <= p} / n``."""
    U = _unit(sample)
    col = np.sort(U[:, j])
    p = np.asarray(p, dtype=float)
    return np.searchsorted(col, p, side="right") / len(col)


def marginal_quantile(sample, j: int, p):
    """Left-continuous inverse of ``G_nj``.

    Returns the order statistic ``U_{k:n,j}`` for ``(k-1)/n < p <= k/n``
    and 0 at ``p = 0``.
    """
    U = _unit(sample)
    col = np.sort(U[:, j])
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr < 0) | (p_arr > 1)):
        raise ValueError("p must lie in [0, 1]")
    k = _quantile_index(len(col), p_arr)
    out = np.where(k > 0, col[np.maximum(k, 1) - 1], 0.0)
    return float(out) if out.ndim == 0 else out


def empirical_copula(sample, u):
    """``C_n(u) = G_n(G_n1^{-1}(u_1), ..., G_nd^{-1}(u_d))``.

    A coordinate ``u_j = 0`` maps to the threshold 0 and is never
    exceeded by an observation with a positive minimal rank, so grounding
    holds exactly.
    """
    U = _unit(sample)
    n, d = U.shape
    pts, scalar = as_points(u, d)
    rmin = stats.rankdata(U, method="min", axis=0)
    k = _quantile_index(n, pts)
    vals = np.mean(np.all(rmin[None, :, :] <= k[:, None, :], axis=2), axis=1)
    return float(vals[0]) if scalar else vals


def empirical_process_alpha(sample, model, u):
    """``alpha_n(u) = sqrt(n) (G_n(u) - C(u))``."""
    U = _unit(sample)
    return np.sqrt(U.shape[0]) * (ecdf_joint(U, u) - model.cdf(u))


def marginal_alpha(sample, j: int, p):
    """``alpha_nj(p) = sqrt(n) (G_nj(p) - p)``; zero at ``p in {0, 1}`` for unit samples."""
    U = _unit(sample)
    p_arr = np.asarray(p, dtype=float)
    out = np.sqrt(U.shape[0]) * (ecdf_marginal(U, j, p_arr) - p_arr)
    return float(out) if out.ndim == 0 else out


# -- grid evaluation ----------------------------------------------------------
def _cumulate(bins: np.ndarray, shape, weights=None) -> np.ndarray:
    """Count observations with ``bins_i <= g`` componentwise at every index ``g``.

    ``weights`` may be ``(n,)`` or ``(B, n)``; the returned array has
    ``shape`` or ``(B,) + shape`` respectively. Bins past the last node
    (observations no node covers) are dropped.
    """
    keep = np.all(bins < np.asarray(shape), axis=1)
    if not keep.all():
        bins = bins[keep]
        if weights is not None:
            weights = np.asarray(weights)[..., keep]
    flat = np.ravel_multi_index(tuple(bins.T), shape)
    size = int(np.prod(shape))
    if weights is None:
        hist = np.bincount(flat, minlength=size).astype(float).reshape(shape)
        lead = 0
    else:
        w = np.atleast_2d(weights)
        hist = np.zeros((w.shape[0], size))
        # sum columns of w falling in the same cell
        if flat.size:
            order = np.argsort(flat, kind="stable")
            cells, starts = np.unique(flat[order], return_index=True)
            hist[:, cells] = np.add.reduceat(w[:, order], starts, axis=1)
        hist = hist.reshape((w.shape[0],) + tuple(shape))
        if np.ndim(weights) == 1:
            hist = hist[0]
        lead = hist.ndim - len(shape)
    for ax in range(len(shape)):
        np.cumsum(hist, axis=lead + ax, out=hist)
    return hist


def _copula_bins(U: np.ndarray, axes) -> np.ndarray:
    """First node index on each axis whose quantile threshold covers the observation.

    ``axes`` are nondecreasing vectors in [0, 1] (not necessarily a Grid).
    """
    n = U.shape[0]
    rmin = stats.rankdata(U, method="min", axis=0).astype(np.int64)
    cols = []
    for j, ax in enumerate(axes):
        k = _quantile_index(n, ax)
        cols.append(np.searchsorted(k, rmin[:, j], side="left"))
    return np.stack(cols, axis=1)


def _ecdf_bins(U: np.ndarray, axes) -> np.ndarray:
    return np.stack(
        [np.searchsorted(np.asarray(ax), U[:, j], side="left") for j, ax in enumerate(axes)],
        axis=1,
    )


def empirical_copula_on_axes(sample, axes) -> np.ndarray:
    """``C_n`` on the product of nondecreasing node vectors ``axes``."""
    U = _unit(sample)
    shape = tuple(len(a) for a in axes)
    return _cumulate(_copula_bins(U, axes), shape) / U.shape[0]


def empirical_copula_grid(sample, grid: Grid) -> np.ndarray:
    """``C_n`` at every node, shaped like the grid."""
    return empirical_copula_on_axes(sample, grid.axes)


def ecdf_joint_grid(sample, grid: Grid) -> np.ndarray:
    """``G_n`` at every node, shaped like the grid."""
    U = _unit(sample)
    return _cumulate(_ecdf_bins(U, grid.axes), grid.shape) / U.shape[0]


def edge_values(values: np.ndarray, j: int) -> np.ndarray:
    """Restriction of a grid field to the edge ``(1, ..., u_j, ..., 1)``."""
    idx = [-1] * values.ndim
    idx[j] = slice(None)
    return values[tuple(idx)]


def broadcast_axis(vec: np.ndarray, j: int, d: int) -> np.ndarray:
    """Reshape an axis-``j`` vector so it broadcasts against a d-dimensional grid."""
    shape = [1] * d
    shape[j] = -1
    return np.reshape(vec, shape)


# -- model values on grids ----------------------------------------------------
_MODEL_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def model_grid_values(model, grid: Grid) -> dict:
    """Cached ``{"cdf": C, "partials": [C_1, ..., C_d]}`` on the grid nodes.

    Models are immutable, so values are computed once per (model, grid).
    The partials use the boundary extension of the model.
    """
    per_model = _MODEL_CACHE.setdefault(model, {})
    hit = per_model.get(grid)
    if hit is None:
        nodes = grid.nodes()
        hit = {
            "cdf": np.asarray(model.cdf(nodes)).reshape(grid.shape),
            "partials": [
                np.asarray(model.partial_derivative(j, nodes)).reshape(grid.shape)
                for j in range(grid.dim)
            ],
        }
        for arr in [hit["cdf"], *hit["partials"]]:
            arr.setflags(write=False)
        per_model[grid] = hit
    return hit


def _check_dims(U, model, grid):
    if U.shape[1] != model.dim or grid.dim != model.dim:
        raise ValueError(
            f"sample has {U.shape[1]} columns, model dim {model.dim}, grid dim {grid.dim}"
        )


def empirical_copula_process(sample, model, grid: Grid) -> ProcessField:
    """``CC_n = sqrt(n) (C_n - C)`` on the grid."""
    U = _unit(sample)
    _check_dims(U, model, grid)
    cn = empirical_copula_grid(U, grid)
    vals = np.sqrt(U.shape[0]) * (cn - model_grid_values(model, grid)["cdf"])
    return ProcessField(grid, vals, "CC_n")


def alpha_process(sample, model, grid: Grid) -> ProcessField:
    """``alpha_n = sqrt(n) (G_n - C)`` on the grid."""
    U = _unit(sample)
    _check_dims(U, model, grid)
    gn = ecdf_joint_grid(U, grid)
    vals = np.sqrt(U.shape[0]) * (gn - model_grid_values(model, grid)["cdf"])
    return ProcessField(grid, vals, "alpha_n")


def oracle_tilde_process(sample, model, grid: Grid) -> ProcessField:
    """``alpha_n(u) - sum_j C_j(u) alpha_nj(u_j)`` with the model's true partials.

    The marginal processes are read from the edges of ``alpha_n``, which
    coincide with ``sqrt(n) (G_nj - u_j)`` because the margins of ``C``
    are uniform.
    """
    alpha = alpha_process(sample, model, grid).values
    partials = model_grid_values(model, grid)["partials"]
    d = grid.dim
    vals = alpha.copy()
    for j in range(d):
        aj = np.sqrt(_unit(sample).shape[0]) * (
            ecdf_marginal(sample, j, grid.axes[j]) - grid.axes[j]
        )
        vals -= partials[j] * broadcast_axis(aj, j, d)
    return ProcessField(grid, vals, "tildeCC_n")


def sup_remainder(sample, model, grid: Grid) -> float:
    """Grid supremum of ``|CC_n - tildeCC_n|``."""
    cc = empirical_copula_process(sample, model, grid).values
    tilde = oracle_tilde_process(sample, model, grid).values
    return float(np.max(np.abs(cc - tilde)))
