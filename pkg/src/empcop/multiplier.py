"""Multiplier bootstrap for the empirical copula process.

Given one unit-scale sample, each multiplier draw ``xi_1, ..., xi_n``
produces

    alpha'_n(u) = n^{-1/2} sum_i xi_i (1{U_i <= v_n(u)} - C_n(u)),
    CC'_n(u)    = alpha'_n(u) - sum_j dC_nj(u) alpha'_n(1, ..., u_j, ..., 1),

where ``v_n(u)`` collects the marginal empirical quantiles and ``dC_nj``
is a clamped finite-difference estimate of the j-th partial derivative.
The true copula is never used.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .copulas.base import as_points
from .empirical import (
    _copula_bins,
    _cumulate,
    _quantile_index,
    _unit,
    broadcast_axis,
    edge_values,
    empirical_copula,
    empirical_copula_grid,
    empirical_copula_on_axes,
)
from .grid import Grid, ProcessField, functional_value

MULTIPLIER_LAWS = ("standard_normal", "rademacher")
SUMMARY_QUANTILES = (0.5, 0.9, 0.95, 0.99)


def _draw_values(law: str, size, rng) -> np.ndarray:
    if law == "standard_normal":
        return rng.standard_normal(size)
    if law == "rademacher":
        return 2.0 * rng.integers(0, 2, size=size) - 1.0
    raise ValueError(f"unknown multiplier law {law!r}; use one of {MULTIPLIER_LAWS}")


@dataclass(frozen=True)
class MultiplierDraw:
    """One vector of i.i.d. mean-zero, unit-variance multipliers."""

    values: np.ndarray
    law: str = "standard_normal"

    def __post_init__(self):
        if self.law not in MULTIPLIER_LAWS + ("custom",):
            raise ValueError(f"unknown multiplier law {self.law!r}")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).ravel())

    @classmethod
    def draw(cls, n: int, rng=None, law: str = "standard_normal") -> "MultiplierDraw":
        rng = np.random.default_rng(rng)
        return cls(_draw_values(law, int(n), rng), law)

    @classmethod
    def zeros(cls, n: int) -> "MultiplierDraw":
        return cls(np.zeros(int(n)), "custom")

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class DerivativeEstimatorConfig:
    """Spacing ``h = c n^{-1/2}`` and clamp bound ``K`` for the derivative estimate."""

    c: float = 1.0
    K: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("spacing constant c must be positive")
        if not self.K >= 1:
            raise ValueError("clamp bound K must be at least 1")

    def spacing(self, n: int) -> float:
        return self.c / np.sqrt(n)


def finite_difference_partial(cdf, j: int, u, h: float, K: float = 1.0):
    """Clamped central difference of ``cdf`` in coordinate ``j``.

    The window ``[max(u_j - h, 0), min(u_j + h, 1)]`` is cut at the
    boundary and the difference is divided by its actual width, then
    clamped to ``[0, K]``.
    """
    pts, scalar = as_points(u, np.shape(np.atleast_2d(u))[1])
    up, down = pts.copy(), pts.copy()
    up[:, j] = np.minimum(pts[:, j] + h, 1.0)
    down[:, j] = np.maximum(pts[:, j] - h, 0.0)
    width = up[:, j] - down[:, j]
    val = (np.asarray(cdf(up)) - np.asarray(cdf(down))) / width
    val = np.clip(val, 0.0, K)
    return float(val[0]) if scalar else val


def fd_partial_estimate(sample, j: int, u, cfg: DerivativeEstimatorConfig | None = None, cdf=None):
    """Estimate the j-th partial derivative from the empirical copula.

    Parameters
    ----------
    sample : array_like or SampleMatrix
        Unit-scale sample; fixes ``n`` and hence the spacing.
    j : int
        0-based axis.
    u : array_like
    cfg : DerivativeEstimatorConfig, optional
    cdf : callable, optional
        Oracle mode: difference this function instead of ``C_n``.
    """
    cfg = cfg or DerivativeEstimatorConfig()
    U = _unit(sample)
    h = cfg.spacing(U.shape[0])
    target = cdf if cdf is not None else (lambda p: empirical_copula(U, p))
    return finite_difference_partial(target, j, u, h, cfg.K)


def fd_partial_grid(sample, grid: Grid, j: int, cfg: DerivativeEstimatorConfig | None = None) -> np.ndarray:
    """:func:`fd_partial_estimate` at every node of ``grid``, shaped like the grid."""
    cfg = cfg or DerivativeEstimatorConfig()
    U = _unit(sample)
    h = cfg.spacing(U.shape[0])
    ax = grid.axes[j]
    hi, lo = np.minimum(ax + h, 1.0), np.maximum(ax - h, 0.0)
    up_axes = list(grid.axes)
    up_axes[j] = hi
    down_axes = list(grid.axes)
    down_axes[j] = lo
    diff = empirical_copula_on_axes(U, up_axes) - empirical_copula_on_axes(U, down_axes)
    return np.clip(diff / broadcast_axis(hi - lo, j, grid.dim), 0.0, cfg.K)


def multiplier_alpha(sample, draw: MultiplierDraw, u):
    """``alpha'_n(u)`` at a point or an array of points."""
    U = _unit(sample)
    n, d = U.shape
    xi = draw.values if isinstance(draw, MultiplierDraw) else np.asarray(draw, dtype=float)
    if xi.size != n:
        raise ValueError(f"multiplier draw has length {xi.size}, sample has n = {n}")
    pts, scalar = as_points(u, d)
    rmin = stats.rankdata(U, method="min", axis=0)
    k = _quantile_index(n, pts)
    ind = np.all(rmin[None, :, :] <= k[:, None, :], axis=2).astype(float)
    cn = ind.mean(axis=1)
    vals = (ind - cn[:, None]) @ xi / np.sqrt(n)
    return float(vals[0]) if scalar else vals


class MultiplierEngine:
    """Precomputed pieces for many multiplier draws on one sample and grid.

    Binning, ``C_n`` and the derivative estimates depend only on the
    sample, so they are computed once.
    """

    def __init__(self, sample, grid: Grid, cfg: DerivativeEstimatorConfig | None = None):
        U = _unit(sample)
        if U.shape[1] != grid.dim:
            raise ValueError(f"sample has {U.shape[1]} columns, grid dim {grid.dim}")
        self.U, self.grid = U, grid
        self.cfg = cfg or DerivativeEstimatorConfig()
        self.n = U.shape[0]
        self._bins = _copula_bins(U, grid.axes)
        self.cn = empirical_copula_grid(U, grid)
        self.derivs = [fd_partial_grid(U, grid, j, self.cfg) for j in range(grid.dim)]

    def alpha_fields(self, xi: np.ndarray) -> np.ndarray:
        """``alpha'_n`` for a ``(B, n)`` batch of multipliers, shape ``(B,) + grid.shape``."""
        xi = np.atleast_2d(xi)
        if xi.shape[1] != self.n:
            raise ValueError(f"multipliers have length {xi.shape[1]}, sample has n = {self.n}")
        s = _cumulate(self._bins, self.grid.shape, xi)
        total = xi.sum(axis=1).reshape((-1,) + (1,) * self.grid.dim)
        return (s - self.cn[None] * total) / np.sqrt(self.n)

    def copula_fields(self, xi: np.ndarray) -> np.ndarray:
        """``CC'_n`` for a ``(B, n)`` batch of multipliers."""
        alpha = self.alpha_fields(xi)
        d = self.grid.dim
        out = alpha.copy()
        for j in range(d):
            aj = np.stack([edge_values(a, j) for a in alpha])
            shape = [alpha.shape[0]] + [1] * d
            shape[1 + j] = -1
            out -= self.derivs[j][None] * aj.reshape(shape)
        return out


def multiplier_copula_process(
    sample, draw: MultiplierDraw, grid: Grid, cfg: DerivativeEstimatorConfig | None = None
) -> ProcessField:
    """``CC'_n`` on the grid for one multiplier draw."""
    engine = MultiplierEngine(sample, grid, cfg)
    xi = draw.values if isinstance(draw, MultiplierDraw) else np.asarray(draw, dtype=float)
    return ProcessField(grid, engine.copula_fields(xi[None])[0], "CC_n_prime")


@dataclass
class ReplicateSet:
    """Functional values over replicates, with the seed that generated them."""

    values: np.ndarray
    master_seed: object
    functional: str
    law: str = "standard_normal"
    fields: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size < 1:
            raise ValueError("a replicate set needs at least one value")

    @property
    def B(self) -> int:
        return self.values.size

    def quantiles(self, probs=SUMMARY_QUANTILES) -> dict:
        return {str(p): float(np.quantile(self.values, p)) for p in probs}

    def summary(self) -> dict:
        return {
            "functional": self.functional,
            "law": self.law,
            "B": self.B,
            "master_seed": _jsonable(self.master_seed),
            "mean": float(self.values.mean()),
            "quantiles": self.quantiles(),
        }

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replicate_index", "functional_value"])
            for k, v in enumerate(self.values):
                w.writerow([k, repr(float(v))])
        return path

    def to_json(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        return path


def _jsonable(seed):
    if isinstance(seed, (list, tuple)):
        return [int(s) for s in seed]
    return int(seed)


def replicate_rng(master_seed, k: int) -> np.random.Generator:
    """Stream for replicate ``k``; depends only on ``(master_seed, k)``."""
    base = list(master_seed) if isinstance(master_seed, (list, tuple)) else [int(master_seed)]
    return np.random.default_rng(base + [int(k)])


def replicate_batch(
    sample,
    B: int,
    grid: Grid,
    cfg: DerivativeEstimatorConfig | None = None,
    functional: str = "sup_abs",
    master_seed=0,
    law: str = "standard_normal",
    zero_multipliers: bool = False,
    keep_fields: bool = False,
    chunk: int = 256,
) -> ReplicateSet:
    """``B`` multiplier replicates of ``CC'_n`` reduced by ``functional``.

    ``zero_multipliers`` replaces every draw by zeros (a test hook).
    """
    B = int(B)
    if B < 1:
        raise ValueError("B must be at least 1")
    engine = MultiplierEngine(sample, grid, cfg)
    n = engine.n
    values = np.empty(B)
    kept = [] if keep_fields else None
    for start in range(0, B, chunk):
        ks = range(start, min(start + chunk, B))
        if zero_multipliers:
            xi = np.zeros((len(ks), n))
        else:
            xi = np.stack([_draw_values(law, n, replicate_rng(master_seed, k)) for k in ks])
        fields = engine.copula_fields(xi).reshape(len(ks), -1)
        values[start : start + len(ks)] = functional_value(fields, functional)
        if keep_fields:
            kept.append(fields)
    return ReplicateSet(
        values,
        master_seed,
        functional,
        "custom" if zero_multipliers else law,
        np.concatenate(kept) if keep_fields else None,
    )
