"""Numerical checks of the smoothness conditions and the oscillation bounds.

None of these checks proves anything. They evaluate derivatives on
refining grids and report what the numbers do, including an explicit
``inconclusive`` verdict when the evidence is mixed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import special

from .copulas.base import UnsupportedOperation
from .empirical import alpha_process, ecdf_joint_grid, model_grid_values
from .grid import Grid

VERDICTS = ("pass", "fail", "inconclusive")
CONDITIONS = ("C2.1", "C4.1", "P5.2")

PROBE_EPS = (0.1, 0.05, 0.01)
PROBE_RESOLUTIONS_2D = (41, 81, 161, 321)
PROBE_RESOLUTIONS_HIGH_D = (9, 17, 33)
PROBE_SHRINK = 0.7
PROBE_STALL = 0.9
PROBE_MIN_JUMP = 0.05

K_EPS = (1e-1, 1e-2, 1e-3)
K_POINTS_2D = 80
K_POINTS_HIGH_D = 12


@dataclass
class ConditionReport:
    """Verdict and evidence for one smoothness condition on one model.

    ``evidence`` holds one row per probe scale. ``agrees`` compares the
    verdict with the model's declaration and is None when the verdict is
    inconclusive or nothing was declared.
    """

    condition: str
    verdict: str
    evidence: list
    model: str = ""
    declared: bool | None = None
    witness: dict | None = None
    notes: str = ""
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown condition {self.condition!r}")
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if not self.evidence:
            raise ValueError("a report needs at least one evidence row")
        if self.verdict == "fail" and self.witness is None:
            raise ValueError("a failing verdict needs a witness point")

    @property
    def agrees(self) -> bool | None:
        if self.declared is None or self.verdict == "inconclusive":
            return None
        return (self.verdict == "pass") == self.declared

    def to_dict(self) -> dict:
        out = asdict(self)
        out["agrees"] = self.agrees
        return out

    def to_json(self, path=None) -> str:
        text = json.dumps(_plain(self.to_dict()), indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


# -- first-order condition: continuity of the first partials ---------------
def _max_adjacent_jump(values: np.ndarray, axes):
    """Largest difference between neighbouring nodes and the midpoint where it occurs."""
    best, where = -1.0, None
    for ax in range(values.ndim):
        diff = np.abs(np.diff(values, axis=ax))
        k = int(np.argmax(diff))
        if diff.flat[k] > best:
            best = float(diff.flat[k])
            idx = np.unravel_index(k, diff.shape)
            lo = np.array([axes[i][idx[i]] for i in range(values.ndim)])
            hi = lo.copy()
            hi[ax] = axes[ax][idx[ax] + 1]
            where = (lo, hi)
    return best, where


def probe_condition_first_order(model, axes=None, eps_schedule=PROBE_EPS, resolutions=None) -> ConditionReport:
    """Refinement probe for continuity of each partial on ``{eps <= u_j <= 1 - eps}``.

    For every axis ``j`` and scale ``eps``, the partial ``C_j`` is evaluated
    on nested grids (``u_j`` on ``[eps, 1 - eps]``, the other coordinates on
    ``[0, 1]``) and the largest jump between adjacent nodes is recorded.
    A continuous derivative has jumps that shrink with the spacing.

    Verdicts: ``pass`` if at every scale the last refinement shrank the
    jump by a factor at most 0.7; ``fail`` if somewhere the jump stayed
    above 0.05 while shrinking by less than a factor 0.9, with the
    midpoint of the offending pair as witness; ``inconclusive`` otherwise.
    """
    d = model.dim
    axes = range(d) if axes is None else axes
    if resolutions is None:
        resolutions = PROBE_RESOLUTIONS_2D if d == 2 else PROBE_RESOLUTIONS_HIGH_D
    evidence = []
    witness = None
    all_shrink = True
    for j in axes:
        for eps in eps_schedule:
            jumps, locs = [], []
            for m in resolutions:
                grid_axes = [np.linspace(0.0, 1.0, m)] * d
                grid_axes[j] = np.linspace(eps, 1.0 - eps, m)
                mesh = np.meshgrid(*grid_axes, indexing="ij")
                pts = np.stack([g.ravel() for g in mesh], axis=1)
                vals = np.asarray(model.partial_derivative(j, pts)).reshape(mesh[0].shape)
                jump, where = _max_adjacent_jump(vals, grid_axes)
                jumps.append(jump)
                locs.append(where)
            ratio = jumps[-1] / jumps[-2] if jumps[-2] > 0 else 0.0
            evidence.append(
                {"axis": j, "eps": eps, "resolutions": list(resolutions), "max_jump": jumps, "final_ratio": ratio}
            )
            if ratio > PROBE_SHRINK:
                all_shrink = False
            if ratio >= PROBE_STALL and jumps[-1] >= PROBE_MIN_JUMP and witness is None:
                lo, hi = locs[-1]
                witness = {
                    "axis": j,
                    "eps": eps,
                    "point": ((lo + hi) / 2).tolist(),
                    "pair": [lo.tolist(), hi.tolist()],
                    "jump": jumps[-1],
                }
    if witness is not None:
        verdict = "fail"
    elif all_shrink:
        verdict = "pass"
    else:
        verdict = "inconclusive"
    return ConditionReport(
        "C2.1",
        verdict,
        evidence,
        model=repr(model),
        declared=model.capabilities.satisfies_condition_2_1,
        witness=witness,
        summary={"shrink_ratio": PROBE_SHRINK, "stall_ratio": PROBE_STALL, "min_jump": PROBE_MIN_JUMP},
    )


# -- second-order condition: weighted second partials ----------------------
def _k_axis(eps: float, points: int) -> np.ndarray:
    half = np.geomspace(eps, 0.5, points)
    return np.unique(np.concatenate([half, 1.0 - half]))


def estimate_K_condition_second_order(model, eps_schedule=K_EPS, points=None) -> ConditionReport:
    """Estimate ``K`` in ``|C_ij(u)| <= K min(1/(u_i(1-u_i)), 1/(u_j(1-u_j)))``.

    ``K(eps)`` is the largest weighted second partial over a grid with all
    coordinates in ``[eps, 1 - eps]``, geometrically refined toward the
    faces. Verdict ``pass`` if ``K(1e-3) <= 2 K(1e-2)``, ``fail`` if
    ``K`` grows tenfold or more per decade, ``inconclusive`` between.
    """
    if not model.capabilities.analytic_second_derivs:
        raise UnsupportedOperation(f"{model!r} has no analytic second derivatives")
    d = model.dim
    points = points or (K_POINTS_2D if d == 2 else K_POINTS_HIGH_D)
    evidence = []
    argmax = []
    for eps in eps_schedule:
        ax = _k_axis(eps, points)
        mesh = np.meshgrid(*([ax] * d), indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        w = pts * (1.0 - pts)
        best, where = 0.0, None
        for i in range(d):
            for j in range(i, d):
                c2 = np.abs(np.asarray(model.second_partial(i, j, pts)))
                weighted = c2 * np.maximum(w[:, i], w[:, j])
                weighted = np.where(np.isfinite(weighted), weighted, np.inf)
                k = int(np.argmax(weighted))
                if weighted[k] > best:
                    best, where = float(weighted[k]), {"i": i, "j": j, "point": pts[k].tolist()}
        evidence.append({"eps": eps, "K_hat": best, "argmax": where})
        argmax.append(where)
    ks = [row["K_hat"] for row in evidence]
    growth = [ks[t + 1] / ks[t] if ks[t] > 0 else (np.inf if ks[t + 1] > 0 else 1.0) for t in range(len(ks) - 1)]
    witness = None
    if len(ks) >= 2 and ks[-1] <= 2.0 * ks[-2]:
        verdict = "pass"
    elif any(g >= 10.0 for g in growth):
        verdict = "fail"
        witness = argmax[-1]
    else:
        verdict = "inconclusive"
    return ConditionReport(
        "C4.1",
        verdict,
        evidence,
        model=repr(model),
        declared=model.capabilities.satisfies_condition_4_1,
        witness=witness,
        summary={"K_hat": max(ks), "growth_per_decade": growth},
    )


# -- Pickands curvature bound -----------------------------------------------
def _weighted_curvature(pickands, t):
    fn = getattr(pickands, "weighted_curvature", None)
    if fn is not None:
        return np.asarray(fn(t), dtype=float)
    return t * (1.0 - t) * np.asarray(pickands.d2A(t), dtype=float)


def pickands_M_details(pickands, points: int = 10_001) -> dict:
    """Sup of ``t (1 - t) A''(t)`` on a uniform grid and on its refinements.

    The refinements are a fine grid around the coarse argmax and
    geometric grids running into both endpoints. The sup is flagged
    non-finite when a refinement raises it tenfold or more.
    """
    t = np.linspace(0.0, 1.0, points)[1:-1]
    w = _weighted_curvature(pickands, t)
    k = int(np.argmax(w))
    coarse = float(w[k])
    step = t[1] - t[0]
    local = np.linspace(max(t[k] - 2 * step, 1e-15), min(t[k] + 2 * step, 1 - 1e-15), 1001)
    tail = np.geomspace(1e-12, t[0], 200)
    fine = np.concatenate([local, tail, 1.0 - tail])
    wf = _weighted_curvature(pickands, fine)
    refined = float(max(coarse, np.max(wf)))
    finite = bool(np.all(np.isfinite(wf))) and np.isfinite(coarse)
    grew = refined >= 10.0 * coarse if coarse > 0 else refined > 0
    return {
        "M_coarse": coarse,
        "M_refined": refined,
        "argmax": float(fine[np.argmax(wf)] if np.max(wf) > coarse else t[k]),
        "stable": finite and not grew,
        "M": refined if finite and not grew else float("inf"),
    }


def pickands_M(pickands) -> float:
    """``M = sup_{0<t<1} t (1 - t) A''(t)``; ``inf`` when refinement suggests divergence."""
    return pickands_M_details(pickands)["M"]


def check_pickands(model) -> ConditionReport:
    """Report on the curvature bound ``M < inf`` for an extreme-value copula."""
    det = pickands_M_details(model.pickands)
    verdict = "pass" if det["stable"] else "fail"
    witness = None if det["stable"] else {"point": [det["argmax"]]}
    return ConditionReport(
        "P5.2",
        verdict,
        [det],
        model=repr(model),
        declared=model.pickands.has_second,
        witness=witness,
        summary={"M": det["M"]},
    )


# -- increment bound ----------------------------------------------------------
def increment_bound_check(model, K: float, n_pairs: int = 10_000, rng=None, pairs=None) -> dict:
    """Check ``|C_j(v) - C_j(u)| <= K max(1/(u_j(1-u_j)), 1/(v_j(1-v_j))) ||v - u||_1``.

    Pairs are drawn uniformly from ``(0, 1)^d`` unless given as a tuple
    ``(u, v)`` of ``(N, d)`` arrays. Returns the number of violations and
    the worst pair by ratio of left to right side.
    """
    d = model.dim
    if pairs is None:
        rng = np.random.default_rng(rng)
        u = rng.uniform(0.0, 1.0, (n_pairs, d))
        v = rng.uniform(0.0, 1.0, (n_pairs, d))
    else:
        u, v = (np.atleast_2d(np.asarray(p, dtype=float)) for p in pairs)
    l1 = np.sum(np.abs(v - u), axis=1)
    worst = {"ratio": 0.0}
    violations = 0
    for j in range(d):
        lhs = np.abs(np.asarray(model.partial_derivative(j, v)) - np.asarray(model.partial_derivative(j, u)))
        weight = np.maximum(1.0 / (u[:, j] * (1.0 - u[:, j])), 1.0 / (v[:, j] * (1.0 - v[:, j])))
        rhs = K * weight * l1
        bad = lhs > rhs + 1e-12
        violations += int(bad.sum())
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
        k = int(np.argmax(ratio))
        if ratio[k] > worst["ratio"]:
            worst = {"ratio": float(ratio[k]), "axis": j, "u": u[k].tolist(), "v": v[k].tolist()}
    return {"passed": violations == 0, "violations": violations, "pairs": len(u), "K": float(K), "worst": worst}


# -- oscillation modulus ----------------------------------------------------
@dataclass(frozen=True)
class OscillationEstimate:
    a: float
    value: float
    grid_shape: tuple


@lru_cache(maxsize=32)
def _window_pairs(grid: Grid, a: float):
    nodes = grid.nodes()
    i, j = np.triu_indices(len(nodes), k=1)
    inside = np.all(np.abs(nodes[i] - nodes[j]) <= a + 1e-12, axis=1)
    return i[inside], j[inside]


def oscillation_from_fields(fields: np.ndarray, grid: Grid, a: float, chunk: int = 200_000) -> np.ndarray:
    """Grid-restricted oscillation modulus of each field in a ``(B,) + shape`` batch."""
    if not 0 <= a <= 1:
        raise ValueError("window a must lie in [0, 1]")
    flat = np.asarray(fields, dtype=float).reshape(-1, grid.size)
    i, j = _window_pairs(grid, float(a))
    out = np.zeros(flat.shape[0])
    for s in range(0, len(i), chunk):
        ii, jj = i[s : s + chunk], j[s : s + chunk]
        out = np.maximum(out, np.max(np.abs(flat[:, ii] - flat[:, jj]), axis=1))
    return out


def oscillation_modulus(sample, model, a: float, grid: Grid) -> OscillationEstimate:
    """``sup |alpha_n(u) - alpha_n(v)|`` over node pairs with ``|u_j - v_j| <= a``.

    Brute force over all node pairs; grids are limited to 41 nodes per
    axis in two dimensions.
    """
    if grid.size > 41 * 41:
        raise ValueError("oscillation modulus is brute force; use at most 41^2 nodes")
    alpha = alpha_process(sample, model, grid).values
    val = float(oscillation_from_fields(alpha[None], grid, a)[0])
    return OscillationEstimate(float(a), val, grid.shape)


def psi(x):
    """``psi(x) = 2 x^-2 ((1 + x) log(1 + x) - x)`` with ``psi(0) = 1`` and ``psi(-1) = 2``."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < -1) or np.any(np.isnan(x_arr)):
        raise ValueError("psi is defined for x >= -1")
    small = np.abs(x_arr) < 1e-3
    xs = np.where(small, 1.0, x_arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = 2.0 * (special.xlogy(1.0 + xs, 1.0 + xs) - xs) / (xs * xs)
    xm = np.where(small, x_arr, 0.0)
    series = 1.0 - xm / 3.0 + xm**2 / 6.0 - xm**3 / 10.0 + xm**4 / 15.0
    out = np.where(small, series, direct)
    out = np.where(x_arr == -1.0, 2.0, out)
    return float(out) if out.ndim == 0 else out


def einmahl_bound(a, lam, n, K1, K2):
    """``(K1 / a) exp(-K2 lam^2 psi(lam / (sqrt(n) a)) / a)``."""
    a = np.asarray(a, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(a <= 0) or np.any(a > 0.5):
        raise ValueError("a must lie in (0, 1/2]")
    if np.any(lam < 0):
        raise ValueError("lambda must be nonnegative")
    val = (K1 / a) * np.exp(-K2 * lam**2 * psi(lam / (np.sqrt(n) * a)) / a)
    return float(val) if val.ndim == 0 else val


# -- exceedance study ---------------------------------------------------------
EXCEEDANCE_LADDER = tuple(np.round(np.linspace(0.6, 1.5, 10), 2))


def oscillation_replicates(model, n: int, a: float, grid: Grid, reps: int, seed) -> np.ndarray:
    """``M_n(a)`` for ``reps`` independent samples; replicate ``r`` uses stream ``(seed, r)``."""
    base = list(seed) if isinstance(seed, (list, tuple)) else [int(seed)]
    cgrid = model_grid_values(model, grid)["cdf"]
    fields = np.empty((reps,) + grid.shape)
    for r in range(reps):
        U = model.sample(n, np.random.default_rng(base + [r]))
        fields[r] = np.sqrt(n) * (ecdf_joint_grid(U, grid) - cgrid)
    return oscillation_from_fields(fields, grid, a)


def calibrate_einmahl(moduli: np.ndarray, a: float, n: int, ladder=EXCEEDANCE_LADDER, safety: float = 2.0) -> dict:
    """Fit ``K1, K2`` so the bound sits above the observed exceedance curve.

    ``log P(M_n(a) >= lam)`` is regressed on ``x = lam^2 psi(lam/(sqrt(n) a)) / a``.
    ``K2`` is half the fitted decay rate and ``K1`` is the smallest value
    putting the bound above ``safety`` times every observed frequency. The
    constants are empirical, not the existence constants of any theorem.
    """
    lam = np.asarray(ladder, dtype=float)
    freq = np.array([np.mean(moduli >= x) for x in lam])
    x = lam**2 * psi(lam / (np.sqrt(n) * a)) / a
    ok = freq > 0
    if ok.sum() < 2:
        raise ValueError("need at least two ladder points with positive frequency")
    slope = -np.polyfit(x[ok], np.log(freq[ok]), 1)[0]
    K2 = max(slope, 0.0) / 2.0
    K1 = float(np.max(safety * a * freq[ok] * np.exp(K2 * x[ok])))
    return {"K1": K1, "K2": float(K2), "fitted_rate": float(slope), "ladder": lam.tolist(), "frequency": freq.tolist()}


def exceedance_check(moduli: np.ndarray, a: float, n: int, K1: float, K2: float, ladder=EXCEEDANCE_LADDER) -> dict:
    """Compare exceedance frequencies with the bound wherever the bound is below 1."""
    lam = np.asarray(ladder, dtype=float)
    freq = np.array([np.mean(moduli >= x) for x in lam])
    bound = einmahl_bound(a, lam, n, K1, K2)
    informative = bound < 1
    violated = informative & (freq > bound)
    return {
        "ladder": lam.tolist(),
        "frequency": freq.tolist(),
        "bound": np.atleast_1d(bound).tolist(),
        "informative": informative.tolist(),
        "passed": not bool(violated.any()),
    }


def check_conditions(model) -> list:
    """All applicable condition reports for ``model``."""
    reports = [probe_condition_first_order(model)]
    if model.capabilities.analytic_second_derivs:
        reports.append(estimate_K_condition_second_order(model))
    if hasattr(model, "pickands") and model.pickands.has_second:
        reports.append(check_pickands(model))
    return reports
