"""Acceptance criteria 1-8, one printed pass/fail line each.

Runs at the stated sizes with master seed 2026. Marked ``acceptance`` so
they can be selected with ``-m acceptance``.
"""

import time

import numpy as np
import pytest
from scipy.stats import qmc

from conftest import ALL_MODELS, SMOOTH, brute_force_empirical_copula
from empcop.copulas import (
    CheckerboardCopula,
    FrechetLowerCopula,
    FrechetUpperCopula,
    GaussianCopula,
    LogisticPickands,
    clayton,
    frank,
    logistic,
)
from empcop.diagnostics import check_conditions, pickands_M_details, psi
from empcop.empirical import empirical_copula, pseudo_observations
from empcop.harness import build_config, emit_report, run_experiment

pytestmark = pytest.mark.acceptance

SEED = 2026


@pytest.fixture
def announce(capsys):
    def _announce(k, ok, detail, seconds):
        with capsys.disabled():
            print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} ({seconds:.1f}s) {detail}")

    return _announce


def _run(experiment, tmp_path, **kw):
    cfg = build_config(experiment, overrides={"seed": SEED, "out": str(tmp_path / experiment), **kw})
    return run_experiment(cfg)


def test_criterion_1_property_suite(announce):
    t0 = time.perf_counter()
    failures = []
    rng = np.random.default_rng(SEED)
    pts = qmc.Sobol(2, seed=SEED).random(1024)[:1000]
    other = np.roll(pts, 1, axis=0)
    for m in ALL_MODELS:
        tol = 1e-8 if isinstance(m, GaussianCopula) else 1e-12
        c = m.cdf(pts)
        if np.any(c < np.maximum(pts.sum(1) - 1, 0) - tol) or np.any(c > pts.min(1) + tol):
            failures.append(f"frechet {m!r}")
        if np.any(np.abs(c - m.cdf(other)) > np.abs(pts - other).sum(1) + tol):
            failures.append(f"lipschitz {m!r}")
        for j in range(2):
            d = m.partial_derivative(j, pts)
            if np.any((d < 0) | (d > 1)):
                failures.append(f"range {m!r}")
            grounded = pts.copy()
            grounded[:, 1 - j] = 0
            if np.any(m.partial_derivative(j, grounded) != 0):
                failures.append(f"grounding {m!r}")
    n = 37
    U = rng.uniform(size=(n, 2))
    t = np.linspace(0, 1, 101)
    for j in range(2):
        p = np.ones((101, 2))
        p[:, j] = t
        counts = np.array([int(np.ceil(n * x * (1 - 1e-12))) for x in t])
        if not np.array_equal(empirical_copula(U, p), counts / n):
            failures.append("margin identity")
    probe = rng.uniform(size=(200, 2))
    ref = empirical_copula(U, probe)
    for _ in range(50):
        a, b = rng.uniform(0.5, 3, 2)
        raw = np.column_stack([np.exp(a * U[:, 0]), np.tan(b * (U[:, 1] - 0.5) / 3)])
        if not np.array_equal(empirical_copula(pseudo_observations(raw), probe), ref):
            failures.append("rank invariance")
    for _ in range(200):
        nn, d = int(rng.integers(1, 7)), int(rng.integers(2, 4))
        V, u = rng.uniform(size=(nn, d)), rng.uniform(size=d)
        u[0] = rng.integers(0, nn + 1) / nn
        if empirical_copula(V, u) != brute_force_empirical_copula(V, u):
            failures.append("brute force")
    if psi(0.0) != 1.0 or psi(-1.0) != 2.0:
        failures.append("psi values")
    x = np.sort(rng.uniform(-1, 20, (1000, 2)), axis=1)
    if np.any(psi(x[:, 0]) < psi(x[:, 1])):
        failures.append("psi monotone")
    ok = not failures
    announce(1, ok, "all properties hold" if ok else "; ".join(sorted(set(failures))), time.perf_counter() - t0)
    assert ok


def test_criterion_2_derivative_agreement(announce):
    t0 = time.perf_counter()
    pts = qmc.Sobol(2, seed=SEED).random(1024)[:1000] * 0.9 + 0.05
    worst1 = worst2 = 0.0
    for m in SMOOTH:
        for j in range(2):
            e = np.zeros(2)
            e[j] = 1e-6
            fd = (m.cdf(pts + e) - m.cdf(pts - e)) / 2e-6
            worst1 = max(worst1, np.max(np.abs(fd - m.partial_derivative(j, pts))))
            e2 = np.zeros(2)
            e2[j] = 1e-5
            for i in range(2):
                fd2 = (m.partial_derivative(i, pts + e2) - m.partial_derivative(i, pts - e2)) / 2e-5
                worst2 = max(worst2, np.max(np.abs(fd2 - m.second_partial(j, i, pts))))
    ok = worst1 <= 1e-4 and worst2 <= 1e-3
    announce(2, ok, f"max first-partial error {worst1:.2e} (tol 1e-4), second {worst2:.2e} (tol 1e-3)", time.perf_counter() - t0)
    assert ok


def test_criterion_3_rate(announce, tmp_path):
    t0 = time.perf_counter()
    parts, ok = [], True
    for spec in ("family=independence", "family=gaussian,rho=0.5"):
        rep = _run("rate", tmp_path / spec.split(",")[0], model=spec)
        slope, ratio = rep.fits["slope"], rep.fits["q_ratio"]
        ok &= rep.verdicts["slope"]["status"] == "pass" and rep.verdicts["ratio"]["status"] == "pass"
        parts.append(f"{spec}: slope {slope:.3f} in [-0.40,-0.15], q ratio {ratio:.3f} <= 1.5")
    announce(3, ok, "; ".join(parts), time.perf_counter() - t0)
    assert ok


def test_criterion_4_multiplier(announce, tmp_path):
    t0 = time.perf_counter()
    parts, ok = [], True
    for spec in ("family=independence", "family=clayton,theta=1"):
        rep = _run("multiplier", tmp_path / spec.split(",")[0], model=spec, functional="sup_abs,cvm")
        for f in ("sup_abs", "cvm"):
            v = rep.verdicts[f"ks_{f}_n1000"]
            ok &= v["status"] == "pass"
            parts.append(f"{spec} {f}: median KS {v['value']:.4f}")
    announce(4, ok, "; ".join(parts) + " (tol 0.10)", time.perf_counter() - t0)
    assert ok


def test_criterion_5_limit(announce, tmp_path):
    t0 = time.perf_counter()
    parts, ok = [], True
    for spec in ("family=independence", "family=gaussian,rho=0.5"):
        rep = _run("limit-compare", tmp_path / spec.split(",")[0], model=spec)
        ks = rep.verdicts["ks_n2000"]
        var = rep.verdicts["bridge_variance_n2000"]
        ok &= ks["status"] == "pass" and var["status"] == "pass"
        row = rep.summary[0]
        parts.append(
            f"{spec}: KS {ks['value']:.4f}, bridge var {row['bridge_variance']:.4f} vs {row['bridge_variance_target']:.4f} "
            f"(3 SE = {3 * row['bridge_variance_se']:.4f})"
        )
    announce(5, ok, "; ".join(parts) + " (KS tol 0.10)", time.perf_counter() - t0)
    assert ok


def test_criterion_6_conditions(announce):
    t0 = time.perf_counter()
    bad = []
    for m in (GaussianCopula(rho=0.5), clayton(1.0), frank(5.0), logistic(0.5)):
        verdicts = {r.condition: r.verdict for r in check_conditions(m)}
        if any(v != "pass" for v in verdicts.values()):
            bad.append(f"{m!r} {verdicts}")
    for m in (FrechetLowerCopula(), FrechetUpperCopula(), CheckerboardCopula()):
        rep = check_conditions(m)[0]
        if rep.verdict != "fail" or rep.witness is None:
            bad.append(f"{m!r} {rep.verdict}")
    ms = {}
    for theta in (0.3, 0.6, 1.0):
        det = pickands_M_details(LogisticPickands(theta))
        ms[theta] = det["M"]
        if not (det["stable"] and np.isfinite(det["M"])):
            bad.append(f"M unstable at {theta}")
    if ms[1.0] != 0.0:
        bad.append("M(1) not exactly 0")
    ok = not bad
    detail = "; ".join(bad) if bad else "smooth models pass, counterexamples fail with witnesses, M = " + ", ".join(
        f"{v:.4f}@{k}" for k, v in ms.items()
    )
    announce(6, ok, detail, time.perf_counter() - t0)
    assert ok


def test_criterion_7_tail_dependence(announce):
    t0 = time.perf_counter()
    lo = clayton(1.0).tail_dependence_coefficients().lower
    up = logistic(0.5).tail_dependence_coefficients().upper
    g = GaussianCopula(rho=0.5).tail_dependence_coefficients()
    ok = abs(lo - 0.5) <= 1e-4 and abs(up - (2 - np.sqrt(2))) <= 1e-4 and g.lower <= 1e-3 and g.upper <= 1e-3
    announce(
        7,
        ok,
        f"Clayton lower {lo:.6f}, logistic upper {up:.6f} (target {2 - np.sqrt(2):.6f}), Gaussian {g.lower:.1e}/{g.upper:.1e}",
        time.perf_counter() - t0,
    )
    assert ok


def test_criterion_8_determinism(announce, tmp_path):
    t0 = time.perf_counter()
    configs = [
        ("rate", {"model": "family=gaussian,rho=0.5"}),
        ("multiplier", {"model": "family=clayton,theta=1", "functional": "sup_abs,cvm"}),
        ("limit-compare", {"model": "family=gaussian,rho=0.5"}),
        ("check-conditions", {"model": "family=checkerboard"}),
        ("sample", {"model": "family=gumbel,theta=2"}),
    ]
    mismatched, files = [], 0
    for experiment, kw in configs:
        outs = []
        for run in ("a", "b"):
            rep = _run(experiment, tmp_path / run, **kw)
            outs.append(sorted(p for p in emit_report(rep) if p.suffix == ".csv"))
        for pa, pb in zip(*outs):
            files += 1
            if pa.read_bytes() != pb.read_bytes():
                mismatched.append(f"{experiment}/{pa.name}")
        if len(outs[0]) != len(outs[1]) or not outs[0]:
            mismatched.append(f"{experiment}: file sets differ")
    ok = not mismatched
    announce(8, ok, f"{files} CSV files byte-identical across reruns" if ok else ", ".join(mismatched), time.perf_counter() - t0)
    assert ok
