import json
import os
import subprocess
import sys

import numpy as np
import pytest

CLI = [sys.executable, "-m", "molligrad.cli"]


def run_cli(*args, text=True, backend="numpy"):
    env = dict(os.environ)
    if backend is not None:
        env["MOLLIGRAD_BACKEND"] = backend
    return subprocess.run([*CLI, *[str(a) for a in args]],
                          capture_output=True, text=text, env=env,
                          timeout=300)


def out_json(proc):
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


# ------------------------------------------------------------ kernel-table

def test_kernel_table_gaussian_default_grid():
    proc = run_cli("kernel-table", "--kind", "gaussian", "--epsilon", 1.0)
    assert proc.returncode == 0, proc.stderr
    lines = proc.stdout.splitlines()
    assert lines[0] == "x,pdf,cdf"
    assert len(lines) == 802  # 801 grid points on [-4, 4] at step 0.01
    mid = lines[401].split(",")
    assert float(mid[0]) == pytest.approx(0.0, abs=1e-12)
    assert float(mid[1]) == pytest.approx(0.3989422804014327, abs=1e-15)
    assert float(mid[2]) == pytest.approx(0.5, abs=1e-15)


def test_kernel_table_rect_support():
    proc = run_cli("kernel-table", "--kind", "rect", "--epsilon", 1.0,
                   "--from", -2.0, "--to", 2.0, "--step", 0.5)
    rows = [line.split(",") for line in proc.stdout.splitlines()[1:]]
    pdf = {float(r[0]): float(r[1]) for r in rows}
    assert pdf[-2.0] == 0.0 and pdf[2.0] == 0.0 and pdf[-1.5] == 0.0
    for x in (-1.0, -0.5, 0.0, 0.5, 1.0):
        assert pdf[x] == 0.5
    cdf = {float(r[0]): float(r[2]) for r in rows}
    assert cdf[-2.0] == 0.0 and cdf[2.0] == 1.0 and cdf[0.0] == 0.5


def test_kernel_table_validates_grid():
    assert run_cli("kernel-table", "--kind", "gaussian", "--epsilon", 1.0,
                   "--step", -0.1).returncode == 2
    assert run_cli("kernel-table", "--kind", "gaussian", "--epsilon", 1.0,
                   "--from", 2.0, "--to", 1.0).returncode == 2


# ----------------------------------------------------------------- epsilon

def test_epsilon_poisson_median_case():
    doc = out_json(run_cli("epsilon", "--kind", "poisson", "--r", 1.0,
                           "--alpha", 0.5))
    assert doc["epsilon"] == pytest.approx(1.0, abs=1e-12)
    assert doc["residual"] < 1e-12
    assert doc["closed_form_agrees"] is True


def test_epsilon_gaussian_value():
    doc = out_json(run_cli("epsilon", "--kind", "gaussian", "--r", 1.0,
                           "--alpha", 0.9))
    assert doc["epsilon"] == pytest.approx(0.6079568319117689, abs=1e-12)
    assert doc["closed_form_agrees"] is True


@pytest.mark.parametrize("kind", ("hyperbolic", "rect"))
def test_epsilon_flags_disagreeing_closed_forms(kind):
    doc = out_json(run_cli("epsilon", "--kind", kind, "--r", 1.0,
                           "--alpha", 0.9))
    assert doc["closed_form_agrees"] is False
    assert doc["residual"] < 1e-9
    assert abs(doc["closed_form"] - doc["epsilon"]) > 1e-3


def test_epsilon_validation():
    assert run_cli("epsilon", "--kind", "gaussian", "--r", -1.0,
                   "--alpha", 0.5).returncode == 2
    assert run_cli("epsilon", "--kind", "gaussian", "--r", 1.0,
                   "--alpha", 1.5).returncode == 2


# ------------------------------------------------------------------ smooth

def test_smooth_linear_model_exact():
    doc = out_json(run_cli("smooth", "--model", "linear", "--input",
                           "[0.3, 0.7]", "--epsilon", 0.5))
    assert doc["estimate"] == [2.0, -1.0]
    assert doc["std_error"] == [0.0, 0.0]
    assert doc["n_used"] == 50 and doc["n_dropped"] == 0
    assert doc["config_echo"]["mode"] == "sg"
    assert doc["config_echo"]["kernel_input"]["epsilon"] == 0.5


def test_smooth_same_seed_is_byte_identical():
    args = ("smooth", "--model", "mlp", "--input", "[0.5, -0.25]",
            "--kernel", "poisson", "--epsilon", 0.3, "--seed", 7)
    a = run_cli(*args, text=False)
    b = run_cli(*args, text=False)
    assert a.returncode == 0
    assert a.stdout == b.stdout


def test_smooth_alpha_r_pair_resolves_bandwidth():
    doc = out_json(run_cli("smooth", "--model", "linear", "--input",
                           "[1.0, 3.0]", "--alpha", 0.9, "--r", 1.0))
    assert doc["config_echo"]["kernel_input"]["epsilon"] == \
        pytest.approx(0.6079568319117689, abs=1e-12)


def test_smooth_input_spread_supplies_default_r():
    # r defaults to max(x) - mean(x) = 1.0 for this input
    doc = out_json(run_cli("smooth", "--model", "linear", "--input",
                           "[1.0, 3.0]", "--alpha", 0.9))
    assert doc["config_echo"]["kernel_input"]["epsilon"] == \
        pytest.approx(0.6079568319117689, abs=1e-12)


def test_smooth_flag_contract():
    base = ("smooth", "--model", "linear", "--input", "[0.3, 0.7]")
    assert run_cli(*base, "--epsilon", 0.5, "--alpha", 0.9).returncode == 2
    assert run_cli(*base).returncode == 2  # neither epsilon nor the pair
    proc = run_cli(*base, "--kernel", "triangular", "--epsilon", 0.5)
    assert proc.returncode == 2
    for kind in ("gaussian", "poisson", "hyperbolic", "sigmoid", "rect"):
        assert kind in proc.stderr


def test_smooth_flat_input_needs_explicit_bandwidth():
    proc = run_cli("smooth", "--model", "linear", "--input", "[1.0, 1.0]",
                   "--alpha", 0.9)
    assert proc.returncode == 2
    doc = out_json(run_cli("smooth", "--model", "linear", "--input",
                           "[1.0, 1.0]", "--epsilon", 0.5))
    assert doc["estimate"] == [2.0, -1.0]


def test_smooth_ng_defaults_and_capability():
    doc = out_json(run_cli("smooth", "--mode", "ng", "--model", "mlp",
                           "--input", "[0.5, 0.5]", "--alpha", 0.9))
    assert doc["config_echo"]["mode"] == "ng"
    assert doc["n_used"] == 50
    assert run_cli("smooth", "--mode", "ng", "--model", "toy", "--input",
                   "[1.0]", "--epsilon", 0.1).returncode == 2


def test_smooth_fg_param_leg_may_be_fully_absent():
    doc = out_json(run_cli("smooth", "--mode", "fg", "--model", "mlp",
                           "--input", "[0.3, 0.7]", "--epsilon", 0.4,
                           "--n", 10, "--m", 5))
    assert doc["n_used"] == 50
    assert doc["config_echo"]["kernel_params"] is not None


def test_smooth_model_file_errors_are_data_errors(tmp_path):
    missing = tmp_path / "nope.json"
    assert run_cli("smooth", "--model", missing, "--input", "[0.1]",
                   "--epsilon", 0.5).returncode == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert run_cli("smooth", "--model", bad, "--input", "[0.1]",
                   "--epsilon", 0.5).returncode == 1
    assert run_cli("smooth", "--model", "linear", "--input", "[]",
                   "--epsilon", 0.5).returncode == 1
    assert run_cli("smooth", "--model", "linear", "--input",
                   '["a", "b"]', "--epsilon", 0.5).returncode == 1


def test_threads_flag_validation():
    assert run_cli("smooth", "--model", "linear", "--input", "[0.1, 0.2]",
                   "--epsilon", 0.5, "--threads", 0).returncode == 2


# ------------------------------------------------------------ smooth-value

def test_smooth_value_toy():
    doc = out_json(run_cli("smooth-value", "--model", "toy", "--input",
                           "[2.0]", "--epsilon", 0.2, "--n", 2000))
    assert doc["estimate"] == pytest.approx(2.995393569571209, abs=0.05)
    assert doc["n_used"] == 2000


# ---------------------------------------------------------------- converge

def test_converge_toy_csv():
    proc = run_cli("converge", "--model", "toy", "--input", "[2.0]",
                   "--epsilon", 0.3, "--schedule", 50, 200, 800)
    assert proc.returncode == 0, proc.stderr
    lines = proc.stdout.splitlines()
    assert lines[0] == "n,est_0,se_0,max_abs_error"
    assert len(lines) == 4
    ns = [int(line.split(",")[0]) for line in lines[1:]]
    assert ns == [50, 200, 800]
    errs = [float(line.split(",")[-1]) for line in lines[1:]]
    assert all(np.isfinite(errs))
    assert errs[-1] < 0.5


def test_converge_schedule_validation():
    assert run_cli("converge", "--model", "toy", "--input", "[2.0]",
                   "--epsilon", 0.3, "--schedule", 50, 20).returncode == 2
    assert run_cli("converge", "--model", "toy", "--input", "[2.0]",
                   "--epsilon", 0.3, "--schedule", 0).returncode == 2


# --------------------------------------------------------------------- toy

def test_toy_table_columns():
    proc = run_cli("toy", "--from", 0.0, "--to", 1.0, "--step", 0.5,
                   "--mc-n", 100)
    lines = proc.stdout.splitlines()
    header = lines[0].split(",")
    assert header[:2] == ["x", "f"]
    assert "f_eps_0.1" in header and "mc_f_eps_0.1" in header
    assert len(lines) == 4
    f_vals = [float(line.split(",")[1]) for line in lines[1:]]
    assert f_vals == [0.0, 1.0, 2.0]


# ----------------------------------------------------------------- metrics

def test_metrics_single_combo_writes_reports(tmp_path):
    out_dir = tmp_path / "m"
    proc = run_cli("metrics", "--suite", "sparseness", "--mode", "sg",
                   "--kernel", "gaussian", "--n-images", 2,
                   "--out-dir", out_dir)
    assert proc.returncode == 0, proc.stderr
    summary = json.loads(proc.stdout)
    assert summary["reports"] == 1 and summary["cases_failed"] == 0
    rep = json.loads((out_dir / "sparseness_sg_gaussian.json").read_text())
    assert rep["metric"] == "sparseness" and 0.0 < rep["value"] < 1.0
    matrix = (out_dir / "matrix.csv").read_text().splitlines()
    assert matrix[0] == "mode,kernel,sparseness"
    assert matrix[1].startswith("sg,gaussian,")
    man = json.loads((out_dir / "manifest.json").read_text())
    assert man["artifact"] == "molligrad" and man["command"] == "metrics"
    assert "matrix.csv" in man["outputs"]


def test_metrics_requires_combo_or_grid(tmp_path):
    assert run_cli("metrics", "--suite", "sparseness",
                   "--out-dir", tmp_path / "x").returncode == 2


def test_metrics_per_case_failures_exit_3(tmp_path):
    # k larger than the pixel count makes every localization case fail
    out_dir = tmp_path / "m"
    proc = run_cli("metrics", "--suite", "localization", "--mode", "sg",
                   "--kernel", "gaussian", "--n-images", 2, "--k", 145,
                   "--out-dir", out_dir)
    assert proc.returncode == 3
    summary = json.loads(proc.stdout)
    assert summary["cases_failed"] == 2
    rep = json.loads((out_dir / "localization_sg_gaussian.json").read_text())
    assert rep["value"] is None and rep["n_failed"] == 2


# ------------------------------------------------------- model-init / train

def test_model_init_json_is_usable(tmp_path):
    path = tmp_path / "model.json"
    proc = run_cli("model-init", "--dims", 2, 4, 1, "--seed", 3,
                   "--out", path)
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(path.read_text())
    assert doc["layer_dims"] == [2, 4, 1] and doc["activation"] == "tanh"
    grad = out_json(run_cli("smooth", "--model", path, "--input",
                            "[0.2, -0.1]", "--epsilon", 0.3))
    assert len(grad["estimate"]) == 2
    assert all(np.isfinite(grad["estimate"]))


def test_model_train_writes_model_and_summary(tmp_path):
    path = tmp_path / "trained.json"
    proc = run_cli("model-train", "--epochs", 20, "--out", path)
    assert proc.returncode == 0, proc.stderr
    summary = json.loads(proc.stdout)
    assert summary["epochs"] == 20
    assert np.isfinite(summary["final_loss"])
    doc = json.loads(path.read_text())
    assert doc["layer_dims"] == [2, 16, 1]
    assert (tmp_path / "trained.json.manifest.json").exists()
    assert run_cli("model-train", "--epochs", 0).returncode == 2


# ------------------------------------------------------------------ replay

def test_replay_reproduces_output_bytes(tmp_path):
    out = tmp_path / "grad.json"
    proc = run_cli("smooth", "--model", "mlp", "--input", "[0.4, -0.2]",
                   "--kernel", "rect", "--epsilon", 0.25, "--seed", 11,
                   "--out", out)
    assert proc.returncode == 0, proc.stderr
    original = out.read_bytes()
    manifest = out.with_name("grad.json.manifest.json")
    assert manifest.exists()
    out.write_bytes(b"clobbered")
    proc = run_cli("replay", manifest)
    assert proc.returncode == 0, proc.stderr
    assert out.read_bytes() == original


def test_replay_rejects_foreign_manifest(tmp_path):
    alien = tmp_path / "alien.json"
    alien.write_text(json.dumps({"artifact": "other", "command": "smooth",
                                 "config": {}}), encoding="utf-8")
    assert run_cli("replay", alien).returncode == 1
    missing = tmp_path / "gone.json"
    assert run_cli("replay", missing).returncode == 1


def test_unknown_subcommand_is_usage_error():
    assert run_cli("frobnicate").returncode == 2
