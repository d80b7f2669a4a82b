"""Acceptance gate: twelve numbered criteria, each with a pinned tolerance
and a wall-clock budget. Every criterion prints one line

    [criterion NN] PASS|FAIL <name> (<elapsed>s / limit <budget>s)

so a full run reads as a checklist (pytest -s tests/test_acceptance.py).
"""

import json
import math
import os
import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy import integrate

from molligrad import oracle
from molligrad.estimator import SmoothingConfig, smooth_gradient
from molligrad.kernels import (KERNEL_KINDS, Kernel, closed_form_epsilon,
                               epsilon_residual, quoted_closed_form_epsilon,
                               solve_epsilon)
from molligrad.metrics import BoundingBox, gini, point_game, spearman
from molligrad.models import MlpModel, ToyFunction
from molligrad.sampling import (RngState, STREAM_INPUT, draw_batch,
                                ks_critical, ks_statistic)

CLI = [sys.executable, "-m", "molligrad.cli"]


@contextmanager
def criterion(num: int, name: str, limit_s: float):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        status = "PASS" if ok and dt <= limit_s else "FAIL"
        print(f"[criterion {num:02d}] {status} {name} "
              f"({dt:.2f}s / limit {limit_s:g}s)")
    assert dt <= limit_s, f"criterion {num} over budget: {dt:.2f}s > {limit_s}s"


def _cli(*args, env_extra=None, text=True):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([*CLI, *[str(a) for a in args]],
                          capture_output=True, text=text, env=env,
                          timeout=590)


def test_criterion_01_kernel_axioms():
    with criterion(1, "kernel-axioms", 5.0):
        xs = np.linspace(0.0, 6.0, 301)
        for kind in KERNEL_KINDS:
            for eps in (0.5, 1.0, 3.0):
                k = Kernel(kind, eps)
                if kind == "rect":
                    total, _ = integrate.quad(k.pdf, -eps - 1.0, eps + 1.0,
                                              points=[-eps, eps])
                else:
                    # split at the peak; handles the heavy-tailed kernels
                    lo, _ = integrate.quad(k.pdf, -np.inf, 0.0)
                    hi, _ = integrate.quad(k.pdf, 0.0, np.inf)
                    total = lo + hi
                assert abs(total - 1.0) <= 1e-9, (kind, eps, total)
                assert np.array_equal(k.pdf_array(xs), k.pdf_array(-xs)), \
                    (kind, eps)
                inside = xs[xs < eps] if kind == "rect" else xs
                assert np.all(k.pdf_array(inside) > 0.0), (kind, eps)
                if kind == "rect":
                    assert np.all(k.pdf_array(xs[xs > eps]) == 0.0), (kind, eps)


def test_criterion_02_inverse_cdf_roundtrip():
    with criterion(2, "inverse-cdf-roundtrip", 1.0):
        u = np.linspace(0.001, 0.999, 999)
        for kind in KERNEL_KINDS:
            for eps in (0.5, 1.0, 3.0):
                k = Kernel(kind, eps)
                back = k.cdf_array(k.inv_cdf_array(u))
                assert np.max(np.abs(back - u)) <= 1e-10, (kind, eps)


def test_criterion_03_epsilon_solver():
    with criterion(3, "epsilon-solver", 1.0):
        grid = [(r, a) for r in (0.5, 1.0, 2.0) for a in (0.5, 0.9, 0.95)]
        for kind in KERNEL_KINDS:
            for r, a in grid:
                eps = solve_epsilon(kind, r, a)
                assert abs(epsilon_residual(kind, r, a, eps)) <= 1e-9, \
                    (kind, r, a)
                closed = closed_form_epsilon(kind, r, a)
                assert abs(closed - eps) <= 1e-9 * max(1.0, eps), (kind, r, a)
                quoted = quoted_closed_form_epsilon(kind, r, a)
                if kind in ("gaussian", "poisson", "sigmoid"):
                    assert abs(quoted - eps) <= 1e-9 * max(1.0, eps), \
                        (kind, r, a)
                else:
                    # printed hyperbolic/rect forms do not solve the
                    # confidence equation; the discrepancy must be caught
                    assert abs(quoted - eps) > 1e-3, (kind, r, a)
                    assert abs(epsilon_residual(kind, r, a, quoted)) > 1e-3, \
                        (kind, r, a)


def test_criterion_04_sampler_fidelity():
    with criterion(4, "sampler-fidelity", 30.0):
        n = 10_000
        crit = ks_critical(n, level=0.99)
        for kind in KERNEL_KINDS:
            k = Kernel(kind, 1.0)
            passes = 0
            for seed in range(100):
                batch = draw_batch(k, 1, n, RngState(seed, STREAM_INPUT))
                if ks_statistic(batch, k) < crit:
                    passes += 1
            assert passes >= 95, (kind, passes)


def test_criterion_05_toy_oracle_agreement():
    with criterion(5, "toy-oracle-agreement", 10.0):
        xs = np.arange(-1.0, 5.0 + 1e-9, 0.05)
        for eps in (0.1, 0.3, 1.0):
            k = Kernel("gaussian", eps)
            closed = ToyFunction.mollified(xs, eps)
            worst = 0.0
            for i, x in enumerate(xs):
                q = oracle.mollify_quadrature(ToyFunction.f, k, float(x),
                                              kinks=ToyFunction.KINKS)
                worst = max(worst, abs(q.value - closed[i]))
            assert worst <= 1e-6, (eps, worst)


def test_criterion_06_estimator_unbiasedness():
    with criterion(6, "estimator-unbiasedness", 60.0):
        toy = ToyFunction()
        k = Kernel("gaussian", 0.3)
        n_seeds = 200
        for x0 in (0.5, 2.0, 3.5):
            ref = oracle.gradient_reference(toy, k, np.array([x0]))[0]
            by_n = {}
            for n in (50, 200, 800):
                ests = np.array([
                    smooth_gradient(toy, [x0],
                                    SmoothingConfig("sg", kernel_input=k,
                                                    n_input=n, seed=s)
                                    ).estimate[0]
                    for s in range(n_seeds)])
                by_n[n] = ests
            pooled = by_n[200]
            se = pooled.std(ddof=1) / math.sqrt(n_seeds)
            assert abs(pooled.mean() - ref) <= 4 * se, (x0, pooled.mean(), ref)
            s50, s200, s800 = (by_n[n].std(ddof=1) for n in (50, 200, 800))
            for ratio in (s50 / s200, s200 / s800):
                assert 1.7 <= ratio <= 2.3, (x0, ratio)


def test_criterion_07_reduction_identity():
    with criterion(7, "reduction-identity", 5.0):
        m = MlpModel.initialized((2, 8, 1), "tanh", 5)
        x0 = np.array([0.3, -0.4])
        k = Kernel("gaussian", 0.5)
        n = 256
        cfg = SmoothingConfig("sg", kernel_input=k, n_input=n, seed=2)
        est = smooth_gradient(m, x0, cfg)

        # direct estimator on the same draws: plain mean of sample gradients
        T = draw_batch(k, 2, n, RngState(2, STREAM_INPUT))
        assert np.all(T.weights() == 1.0)
        assert np.all(T.log_weights == 0.0)
        rows = m.grad_input_batch(x0[None, :] - T.points)
        direct = np.add.reduce(rows, axis=0) / n
        assert np.array_equal(est.estimate, direct)

        # cross-mode with a single zero parameter draw collapses to sg
        from molligrad import estimator
        cross = estimator._rows_cross(m, x0, T, np.zeros((1, m.param_dim)))
        assert np.array_equal(np.add.reduce(cross, axis=0) / n, direct)


def test_criterion_08_gradient_correctness():
    with criterion(8, "gradient-correctness", 10.0):
        shapes = ((3, 6, 1), (2, 8, 4, 1), (5, 4, 1), (4, 5, 3, 1))
        h = 1e-6
        for seed in range(50):
            dims = shapes[seed % len(shapes)]
            act = "tanh" if seed % 2 else "relu"
            m = MlpModel.initialized(dims, act, seed)
            rng = np.random.default_rng(seed)
            x = rng.standard_normal(dims[0])

            gi = m.grad_input(x)
            for i in range(dims[0]):
                e = np.zeros(dims[0])
                e[i] = h
                fd = (m.eval(x + e) - m.eval(x - e)) / (2 * h)
                assert abs(gi[i] - fd) <= 1e-5 * max(1.0, abs(gi[i])), \
                    (seed, "input", i)

            gp = m.grad_params(x)
            for j in rng.choice(m.param_dim, size=8, replace=False):
                d = np.zeros(m.param_dim)
                d[j] = h
                fd = (m.perturb_params(d).eval(x)
                      - m.perturb_params(-d).eval(x)) / (2 * h)
                assert abs(gp[j] - fd) <= 1e-5 * max(1.0, abs(gp[j])), \
                    (seed, "param", j)


def test_criterion_09_lemma_suite():
    with criterion(9, "lemma-suite", 30.0):
        report = oracle.lemma_checks()
        assert set(report) == {"commutativity", "derivative_interchange",
                               "jump_identity", "dirac_limit"}
        for name, entry in report.items():
            assert entry["ok"], (name, entry)


def test_criterion_10_metric_fixtures():
    with criterion(10, "metric-fixtures", 1.0):
        assert spearman([1, 2, 3, 4], [10, 20, 30, 40]) == 1.0
        assert spearman([1, 2, 3, 4], [40, 30, 20, 10]) == -1.0
        assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8,
                                                                     abs=1e-15)
        assert gini(np.ones(6)) == 0.0
        assert gini([0.0, 0.0, 0.0, 1.0]) == pytest.approx(0.75, abs=1e-15)
        s = np.zeros((4, 4))
        s[0, 0], s[0, 1], s[1, 0] = 10.0, 9.0, 8.0
        s[3, 3], s[2, 3] = 7.0, 6.0
        assert point_game(s, BoundingBox(0, 1, 0, 1), k=5) == pytest.approx(0.6)
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(2, 40))
            a, b = rng.standard_normal((2, n))
            assert -1.0 <= spearman(a, b) <= 1.0
            assert 0.0 <= gini(a) <= (n - 1) / n
            grid = rng.standard_normal((5, 5))
            assert 0.0 <= point_game(grid, BoundingBox(1, 3, 1, 3), k=6) <= 1.0


RANGES = {"consistency": (0.0, 1.0), "invariance": (-1.0, 1.0),
          "localization": (0.0, 1.0), "sparseness": (0.0, 1.0)}


def test_criterion_11_end_to_end_grid(tmp_path):
    with criterion(11, "end-to-end-grid", 600.0):
        out_dir = tmp_path / "grid"
        proc = _cli("metrics", "--suite", "all", "--grid",
                    "--out-dir", out_dir)
        assert proc.returncode == 0, proc.stderr
        summary = json.loads(proc.stdout)
        assert summary["reports"] == 60 and summary["cases_failed"] == 0

        lines = (out_dir / "matrix.csv").read_text().splitlines()
        header = lines[0].split(",")
        assert header == ["mode", "kernel", "consistency", "invariance",
                          "localization", "sparseness"]
        assert len(lines) == 16  # 3 modes x 5 kernels
        for line in lines[1:]:
            cells = line.split(",")
            assert cells[0] in ("sg", "ng", "fg")
            assert cells[1] in KERNEL_KINDS
            for suite, cell in zip(header[2:], cells[2:]):
                lo, hi = RANGES[suite]
                assert cell != "", (line, suite)
                assert lo <= float(cell) <= hi, (line, suite)

        man = json.loads((out_dir / "manifest.json").read_text())
        assert man["artifact"] == "molligrad"
        assert man["command"] == "metrics"
        assert len(man["outputs"]) == 61  # 60 reports + matrix.csv

        # the manifest is complete: replaying it regenerates the matrix
        matrix_bytes = (out_dir / "matrix.csv").read_bytes()
        report_bytes = (out_dir / "consistency_fg_rect.json").read_bytes()
        (out_dir / "matrix.csv").unlink()
        proc = _cli("replay", out_dir / "manifest.json")
        assert proc.returncode == 0, proc.stderr
        assert (out_dir / "matrix.csv").read_bytes() == matrix_bytes
        assert (out_dir / "consistency_fg_rect.json").read_bytes() == \
            report_bytes


def test_criterion_12_determinism(tmp_path):
    with criterion(12, "determinism", 120.0):
        seeded = [
            ("smooth", "--model", "mlp", "--input", "[0.4, -0.2]",
             "--kernel", "poisson", "--epsilon", 0.3, "--seed", 3),
            ("smooth", "--mode", "fg", "--model", "mlp", "--input",
             "[0.4, -0.2]", "--epsilon", 0.3, "--n", 20, "--m", 5,
             "--seed", 3),
            ("converge", "--model", "toy", "--input", "[2.0]",
             "--epsilon", 0.3, "--schedule", 50, 200, "--seed", 1),
            ("toy", "--from", 0.0, "--to", 2.0, "--step", 0.25,
             "--mc-n", 2000, "--seed", 4),
            ("model-init", "--dims", 2, 6, 1, "--seed", 9),
            ("model-train", "--epochs", 20, "--seed", 2),
            ("epsilon", "--kind", "hyperbolic", "--r", 2.0, "--alpha", 0.9),
            ("kernel-table", "--kind", "sigmoid", "--epsilon", 0.7,
             "--from", -2.0, "--to", 2.0, "--step", 0.5),
        ]
        for backend in ("numpy", "numba"):
            env = {"MOLLIGRAD_BACKEND": backend}
            for args in seeded:
                a = _cli(*args, env_extra=env, text=False)
                b = _cli(*args, env_extra=env, text=False)
                assert a.returncode == 0, (backend, args, a.stderr)
                assert a.stdout == b.stdout, (backend, args)

        # worker-thread count must not change a single byte
        for args in (seeded[1], seeded[2]):
            runs = []
            for threads in (1, 4):
                proc = _cli(*args, "--backend", "numba",
                            "--threads", threads, text=False)
                assert proc.returncode == 0, (threads, proc.stderr)
                runs.append(proc.stdout)
            assert runs[0] == runs[1], args
