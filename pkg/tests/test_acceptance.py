"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see the lines
inline; they are also collected in the terminal summary).
"""

import math
import subprocess
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from kdesampling import kde
from kdesampling.bench import emit_report, load_config, run_experiment
from kdesampling.classifiers import mlp_init, mlp_loss_and_grad
from kdesampling.metrics import ConfusionMatrix, auc, auc_trapezoid, f1, g_mean
from kdesampling.samplers import adasyn_allocation, adasyn_difficulty, nearmiss, smote

from test_kde import naive_density
from test_samplers import oracle_allocation, oracle_difficulty, oracle_nearmiss

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
RESULTS = []


def report(number, title, ok, detail):
    line = f"[criterion {number:>2}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def per_seed_means(cfg_path, dataset, classifier, samplers, metric, seeds=range(10),
                   workers=4):
    """``{sampler: [value per seed]}`` with one replication per master seed."""
    out = {s: [] for s in ("raw",) + tuple(samplers)}
    for seed in seeds:
        cfg = load_config(cfg_path, [("datasets", dataset), ("samplers", ",".join(samplers)),
                                     ("seed", str(seed)), ("workers", str(workers))])
        rep = run_experiment(cfg)
        for s in out:
            cell = rep.cell(dataset, s, classifier)
            assert not cell.failed, cell.errors
            out[s].append(cell.means[metric])
    return {s: np.array(v) for s, v in out.items()}


def test_criterion_01_density_oracle():
    t0 = time.perf_counter()
    worst = worst_cond = 0.0
    for seed in range(50):
        r = np.random.default_rng(seed)
        d = int(r.integers(1, 6))
        n = int(r.integers(d + 2, 201))
        # random rotation and per-axis scales in [0.2, 5]: anisotropic but with a
        # bounded condition number, so double precision can resolve 1e-12
        rot, _ = np.linalg.qr(r.normal(size=(d, d)))
        X = (r.normal(size=(n, d)) * r.uniform(0.2, 5.0, d)) @ rot + r.normal(size=d)
        model = kde.fit(X)
        worst_cond = max(worst_cond, np.linalg.cond(model.bandwidth_cov))
        # queries within a few bandwidths of the data so the reference is not 0
        Q = X[r.integers(0, n, 3)] + 2 * r.normal(size=(3, d)) @ model.chol_factor.T
        for x in Q:
            ref = naive_density(X, model.bandwidth_cov, x)
            worst = max(worst, abs(kde.density(model, x) - ref) / ref)
    elapsed = time.perf_counter() - t0
    report(1, "KDE density vs naive double loop", worst <= 1e-12 and elapsed < 10,
           f"max rel err {worst:.2e} (tol 1e-12), max cond(H) {worst_cond:.1e}, "
           f"{elapsed:.1f}s (< 10s)")


def test_criterion_02_normalization():
    t0 = time.perf_counter()
    x = np.sort(np.random.default_rng(2).normal(size=100))
    model = kde.fit(x[:, None])
    h = math.sqrt(model.bandwidth_cov[0, 0])
    edges = np.r_[x[0] - 12 * h, x, x[-1] + 12 * h]
    total = math.fsum(integrate.quad(lambda t: kde.density(model, [t]), a, b,
                                     epsabs=1e-13, epsrel=1e-12, limit=200)[0]
                      for a, b in zip(edges[:-1], edges[1:]))
    elapsed = time.perf_counter() - t0
    report(2, "1-D KDE integrates to one", abs(total - 1) <= 1e-6 and elapsed < 5,
           f"integral {total:.12f} (|err| {abs(total - 1):.1e} <= 1e-6), {elapsed:.1f}s (< 5s)")


def test_criterion_03_sampling_moments():
    t0 = time.perf_counter()
    r = np.random.default_rng(3)
    X = r.normal(size=(500, 3)) @ np.array([[1.0, 0.0, 0.0], [0.5, 2.0, 0.0], [0.2, -0.3, 0.7]])
    model = kde.fit(X)
    out, _ = kde.sample(model, 200_000, np.random.default_rng(4))
    S = np.cov(X, rowvar=False)
    target = S + model.bandwidth_cov
    assert np.allclose(model.bandwidth_cov, 500 ** (-2 / 7) * S, rtol=1e-12)
    rel = np.linalg.norm(np.cov(out, rowvar=False) - target) / np.linalg.norm(target)
    elapsed = time.perf_counter() - t0
    report(3, "KDE sample covariance ~ S + H", rel < 0.02 and elapsed < 30,
           f"Frobenius rel err {rel:.4f} (< 0.02), {elapsed:.1f}s (< 30s)")


def test_criterion_04_smote_segments():
    r = np.random.default_rng(4)
    checked = violations = 0
    while checked < 10_000:
        m, d = int(r.integers(2, 40)), int(r.integers(1, 8))
        P = r.normal(size=(m, d)) * r.uniform(0.1, 10)
        new, prov = smote(P, 500, int(r.integers(1, m)), r)
        p, q = P[prov["source"]], P[prov["neighbor"]]
        gap = (np.linalg.norm(p - new, axis=1) + np.linalg.norm(new - q, axis=1)
               - np.linalg.norm(p - q, axis=1))
        violations += int(np.count_nonzero(np.abs(gap) > 1e-9))
        checked += len(new)
    report(4, "SMOTE points lie on segments", violations == 0,
           f"{violations} violations among {checked} points (tol 1e-9)")


def test_criterion_05_sampler_oracles():
    nm_ok = ad_ok = 0
    for seed in range(20):
        r = np.random.default_rng(500 + seed)
        M, m = int(r.integers(1, 80)), int(r.integers(2, 20))
        N, P = np.round(r.normal(size=(M, 2)), 1), np.round(r.normal(0.5, size=(m, 2)), 1)
        k = int(r.integers(1, m + 1))
        n_keep = int(r.integers(0, M + 1))
        nm_ok += nearmiss(N, P, n_keep, k).tolist() == oracle_nearmiss(N, P, n_keep, k)
        k = int(r.integers(1, min(8, m + M - 1) + 1))
        n_new = int(r.integers(0, 100))
        want = oracle_difficulty(P, N, k)
        got = adasyn_difficulty(P, N, k)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)   # uniform fallback
            alloc = adasyn_allocation(got, n_new).tolist()
        ad_ok += (np.allclose(got, [float(w) for w in want], rtol=0, atol=0)
                  and alloc == oracle_allocation(want, n_new))
    report(5, "NearMiss and ADASYN vs brute force", nm_ok == 20 and ad_ok == 20,
           f"NearMiss {nm_ok}/20 exact, ADASYN allocation {ad_ok}/20 exact")


def test_criterion_06_metric_exactness():
    g = g_mean(ConfusionMatrix(tp=50, fn=50, tn=90, fp=10))
    g_err = abs(g - 0.670820393249936908923)
    f1_cases = [ConfusionMatrix(tp=t, fp=f, fn=f, tn=3) for t, f in
                [(1, 0), (5, 5), (9, 1), (1, 3), (2, 7)]]
    f1_ok = all(f1(cm) == cm.precision == cm.recall for cm in f1_cases)
    f1_ok &= f1(ConfusionMatrix(tp=0, fp=2, fn=3), return_flag=True) == (0.0, True)
    worst = 0.0
    for seed in range(100):
        r = np.random.default_rng(600 + seed)
        n = int(r.integers(2, 300))
        y = r.integers(0, 2, n)
        y[:2] = (0, 1)
        s = r.integers(0, max(2, n // 5), n).astype(float)
        worst = max(worst, abs(auc(y, s) - auc_trapezoid(y, s)))
    report(6, "metric exactness", g_err <= 1e-12 and f1_ok and worst <= 1e-12,
           f"g_mean err {g_err:.1e}; F1 identity cases {'exact' if f1_ok else 'WRONG'}; "
           f"max |rank AUC - trapezoid AUC| {worst:.1e} over 100 tied vectors")


def test_criterion_07_ecoli_knn():
    t0 = time.perf_counter()
    res = per_seed_means(CONFIGS / "ecoli_knn.cfg", "ecoli", "knn", ("nearmiss", "kde"), "gmean")
    elapsed = time.perf_counter() - t0
    kde_g, nm_g = res["kde"].mean(), res["nearmiss"].mean()
    in_band = 0.68 <= kde_g <= 0.80
    report(7, "ecoli kNN G-mean band and ordering",
           in_band and kde_g > nm_g and elapsed < 60,
           f"mean KDE G {kde_g:.3f} (band [0.68, 0.80]: {'in' if in_band else 'OUT'}), "
           f"NearMiss {nm_g:.3f} (KDE > NearMiss: {kde_g > nm_g}), {elapsed:.1f}s (< 60s)")


@pytest.mark.slow
def test_criterion_08_cube_mlp():
    t0 = time.perf_counter()
    res = per_seed_means(CONFIGS / "simulations.cfg", "cube", "mlp", ("kde",), "auc")
    elapsed = time.perf_counter() - t0
    k, raw = res["kde"], res["raw"]
    wins = int(np.count_nonzero(k > raw))
    ok = k.mean() > raw.mean() and k.mean() >= 0.85 and wins >= 8 and elapsed < 300
    report(8, "cube MLP AUC: KDE over raw", ok,
           f"mean AUC KDE {k.mean():.3f} vs raw {raw.mean():.3f} (KDE >= 0.85), "
           f"KDE ahead in {wins}/10 seeds (>= 8), {elapsed:.1f}s (< 300s)")


@pytest.mark.slow
def test_criterion_09_separable_mlp():
    others = ("ros", "smote", "adasyn")
    res = per_seed_means(CONFIGS / "simulations.cfg", "separable", "mlp",
                         others + ("kde",), "auc")
    wins = {s: int(np.count_nonzero(res["kde"] > res[s])) for s in others}
    means = ", ".join(f"{s} {res[s].mean():.3f}" for s in ("raw",) + others)
    report(9, "near-separable MLP AUC: KDE over ROS/SMOTE/ADASYN",
           all(w >= 7 for w in wins.values()),
           f"mean AUC KDE {res['kde'].mean():.3f} vs {means}; KDE ahead in "
           + ", ".join(f"{s} {w}/10" for s, w in wins.items()) + " (each >= 7)")


def test_criterion_10_mlp_gradient():
    worst = 0.0
    eps = 1e-6
    for seed in range(10):
        r = np.random.default_rng(1000 + seed)
        n, d, h = int(r.integers(5, 50)), int(r.integers(1, 6)), int(r.integers(2, 33))
        X, y = r.normal(size=(n, d)), r.integers(0, 2, n).astype(float)
        model = mlp_init(d, h, r)
        model.b1 = 0.1 * r.normal(size=h)
        model.b2 = float(r.normal())
        _, grads = mlp_loss_and_grad(model, X, y)
        for _ in range(5):
            name = ("W1", "b1", "W2", "b2")[int(r.integers(4))]
            if name == "b2":
                base = model.b2
                f = lambda v: (setattr(model, "b2", v), mlp_loss_and_grad(model, X, y)[0])[1]
                numeric = (f(base + eps) - f(base - eps)) / (2 * eps)
                model.b2 = base
                analytic = grads["b2"][0]
            else:
                arr = getattr(model, name).reshape(-1)
                j = int(r.integers(arr.size))
                base = arr[j]
                arr[j] = base + eps
                up = mlp_loss_and_grad(model, X, y)[0]
                arr[j] = base - eps
                down = mlp_loss_and_grad(model, X, y)[0]
                arr[j] = base
                numeric = (up - down) / (2 * eps)
                analytic = grads[name].reshape(-1)[j]
            worst = max(worst, abs(analytic - numeric) / max(abs(numeric), 1e-6))
    report(10, "MLP gradient vs central differences", worst < 1e-4,
           f"max rel err {worst:.2e} over 10 configurations x 5 parameters (< 1e-4)")


def test_criterion_11_determinism(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("datasets = ecoli, separable\nsamplers = nearmiss, smote, adasyn, kde\n"
                   "classifiers = knn, mlp\nreplications = 2\nmlp.epochs = 20\n"
                   "dataset.separable.n_majority = 150\ndataset.separable.n_minority = 30\n")
    outputs = []
    for i, workers in enumerate(("1", "1", "3")):
        for fmt in ("json", "csv", "markdown"):
            target = tmp_path / f"{i}.{fmt}"
            subprocess.run([sys.executable, "-m", "kdesampling", "bench", "--config", str(cfg),
                            "--seed", "17", "--workers", workers, "--format", fmt,
                            "-o", str(target)], check=True, capture_output=True)
        outputs.append(tuple((tmp_path / f"{i}.{fmt}").read_bytes()
                             for fmt in ("json", "csv", "markdown")))
    same = outputs[0] == outputs[1] == outputs[2]
    report(11, "bench reports byte-identical", same,
           "json/csv/markdown identical across two serial runs and one 3-worker run"
           if same else "reports differ between runs")
