import numpy as np


def solve_increasing(func, target, lo=0.0, hi=1.0, tol=1e-10, n_bisect=20, max_secant=40):
    """Vectorized solve of ``func(x) = target`` for ``func`` nondecreasing on [lo, hi].

    Bisection first narrows every bracket to width ``(hi - lo) / 2**n_bisect``,
    then safeguarded secant steps refine until the bracket or the step is
    below ``tol``. A secant proposal that leaves the bracket is replaced by
    the midpoint, so the result is always the generalized inverse when
    ``func`` has flat pieces or jumps.
    """
    target = np.asarray(target, dtype=float)
    a = np.full(target.shape, float(lo))
    b = np.full(target.shape, float(hi))
    for _ in range(n_bisect):
        mid = 0.5 * (a + b)
        below = func(mid) < target
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)

    fa = func(a) - target
    fb = func(b) - target
    x = 0.5 * (a + b)
    active = (b - a) > tol
    for _ in range(max_secant):
        if not active.any():
            break
        denom = fb - fa
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = b - fb * (b - a) / denom
        bad = ~np.isfinite(cand) | (cand <= a) | (cand >= b)
        cand = np.where(bad, 0.5 * (a + b), cand)
        fc = func(cand) - target
        below = fc < 0
        step = np.abs(cand - x)
        x = np.where(active, cand, x)
        a = np.where(active & below, cand, a)
        fa = np.where(active & below, fc, fa)
        b = np.where(active & ~below, cand, b)
        fb = np.where(active & ~below, fc, fb)
        active &= ((b - a) > tol) & (step > 0.1 * tol) & (fc != 0)
    return np.clip(x, lo, hi)
