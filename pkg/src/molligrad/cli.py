"""Command-line front-end.

Subcommands: kernel-table, epsilon, smooth, smooth-value, converge, toy,
metrics, model-init, model-train, replay. All outputs are UTF-8 text;
numbers are written with 17 significant digits so runs can be compared
byte-for-byte.

Every file-writing command also writes a manifest next to its output: the
command name plus the fully resolved configuration (defaults and derived
bandwidths materialized, input vectors and model weights inlined). The
replay subcommand re-executes a manifest and reproduces the outputs
bit-identically.

Exit codes: 0 success, 1 data error, 2 usage error, 3 one or more metric
cases failed.

Only the standard library is imported at module level: --backend and
--threads must land in the environment (MOLLIGRAD_BACKEND,
NUMBA_NUM_THREADS) before the numeric stack is imported.
"""

import argparse
import json
import os
import sys

KERNEL_CHOICES = ("gaussian", "poisson", "hyperbolic", "sigmoid", "rect")
MODE_CHOICES = ("sg", "ng", "fg")
SUITE_CHOICES = ("consistency", "invariance", "localization", "sparseness", "all")
BUILTIN_MODELS = ("toy", "linear", "mlp")

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2
EXIT_METRIC_CASES = 3


def _fmt(v) -> str:
    return "%.17g" % float(v)


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out, manifest=None) -> list:
    """Write text to out (or stdout when out is None); manifest, when
    given, lands next to the output file. Returns written paths."""
    if out is None:
        sys.stdout.write(text)
        return []
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)
    written = [out]
    if manifest is not None:
        mpath = out + ".manifest.json"
        with open(mpath, "w", encoding="utf-8") as fh:
            fh.write(_json_text(manifest))
        written.append(mpath)
    return written


def _manifest(command: str, config: dict, outputs) -> dict:
    from . import __version__
    return {"artifact": "molligrad", "version": __version__,
            "command": command, "config": config, "outputs": list(outputs)}


def _load_vector(spec: str):
    """Input vector: inline JSON array or path to a JSON array file."""
    import numpy as np
    from .errors import DataError
    text = spec
    if not spec.lstrip().startswith("["):
        try:
            with open(spec, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise DataError(f"cannot read input file {spec!r}: {exc}") from exc
    try:
        arr = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"input is not valid JSON: {exc}") from exc
    if not isinstance(arr, list) or not arr:
        raise DataError("input must be a non-empty JSON array of numbers")
    try:
        return np.asarray([float(v) for v in arr], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DataError(f"input array holds a non-number: {exc}") from exc


def _model_config(spec: str) -> dict:
    """Resolve --model into a manifest-safe dict: builtin name or the full
    model JSON (inlined so replay cannot drift with the file)."""
    from .errors import DataError
    if spec in BUILTIN_MODELS:
        return {"builtin": spec}
    try:
        with open(spec, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read model file {spec!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"model file is not valid JSON: {exc}") from exc
    return {"json": obj}


def _model_from_config(mc: dict):
    from .models import MlpModel, ToyFunction, make_linear
    if "builtin" in mc:
        name = mc["builtin"]
        if name == "toy":
            return ToyFunction()
        if name == "linear":
            return make_linear([2.0, -1.0], 0.5)
        from . import harness
        return harness.trained_blobs_model(0)
    return MlpModel.from_json_dict(mc["json"])


def _eps_from_flags(kind, epsilon, alpha, r, default_r, allow_absent, what):
    """One bandwidth from the flag triple: --epsilon alone, or the
    (--alpha, --r) pair with per-mode defaults for a missing member.
    default_r is a callable so input-derived defaults stay lazy."""
    from .errors import ConfigInvalid
    from .kernels import solve_epsilon
    pair_given = alpha is not None or r is not None
    if epsilon is not None:
        if pair_given:
            raise ConfigInvalid(
                f"{what}: give --epsilon or the (--alpha, --r) pair, not both")
        if epsilon <= 0:
            raise ConfigInvalid(f"{what}: epsilon must be > 0")
        return float(epsilon)
    if not pair_given and not allow_absent:
        raise ConfigInvalid(
            f"{what}: exactly one of --epsilon or (--alpha, --r) is required")
    a = 0.9 if alpha is None else float(alpha)
    if not 0.0 < a < 1.0:
        raise ConfigInvalid(f"{what}: alpha must be in (0, 1)")
    rr = float(default_r()) if r is None else float(r)
    if rr <= 0:
        raise ConfigInvalid(f"{what}: r must be > 0")
    return float(solve_epsilon(kind, rr, a))


def _input_spread_default(x0):
    import numpy as np
    from .errors import ConfigInvalid

    def default_r():
        r = float(np.max(x0) - np.mean(x0))
        if r <= 0.0:
            raise ConfigInvalid(
                "input has no spread to derive r from; give --r or --epsilon")
        return r

    return default_r


# ---------------------------------------------------------------- kernel-table

def resolve_kernel_table(args) -> dict:
    from .errors import ConfigInvalid
    if args.step <= 0:
        raise ConfigInvalid("--step must be > 0")
    if args.to < args.x_from:
        raise ConfigInvalid("--to must be >= --from")
    return {"kind": args.kind, "epsilon": args.epsilon, "from": args.x_from,
            "to": args.to, "step": args.step, "out": args.out}


def run_kernel_table(p: dict) -> int:
    import numpy as np
    from .kernels import Kernel
    kernel = Kernel(p["kind"], p["epsilon"])
    count = int(np.floor((p["to"] - p["from"]) / p["step"] + 1e-9)) + 1
    x = p["from"] + p["step"] * np.arange(count)
    pdf = kernel.pdf_array(x)
    cdf = kernel.cdf_array(x)
    lines = ["x,pdf,cdf"]
    for i in range(count):
        lines.append(f"{_fmt(x[i])},{_fmt(pdf[i])},{_fmt(cdf[i])}")
    text = "\n".join(lines) + "\n"
    _emit(text, p["out"], _manifest("kernel-table", p, [p["out"]]) if p["out"] else None)
    return EXIT_OK


# ---------------------------------------------------------------------- epsilon

def resolve_epsilon(args) -> dict:
    from .errors import ConfigInvalid
    if args.r <= 0:
        raise ConfigInvalid("--r must be > 0")
    if not 0.0 < args.alpha < 1.0:
        raise ConfigInvalid("--alpha must be in (0, 1)")
    return {"kind": args.kind, "r": args.r, "alpha": args.alpha, "out": args.out}


def run_epsilon(p: dict) -> int:
    from .kernels import (epsilon_residual, quoted_closed_form_epsilon,
                          solve_epsilon)
    eps = solve_epsilon(p["kind"], p["r"], p["alpha"])
    quoted = quoted_closed_form_epsilon(p["kind"], p["r"], p["alpha"])
    obj = {
        "kind": p["kind"],
        "r": p["r"],
        "alpha": p["alpha"],
        "epsilon": eps,
        "residual": abs(epsilon_residual(p["kind"], p["r"], p["alpha"], eps)),
        "closed_form": quoted,
        "closed_form_agrees": abs(quoted - eps) <= 1e-9 * max(1.0, abs(eps)),
    }
    text = _json_text(obj)
    _emit(text, p["out"], _manifest("epsilon", p, [p["out"]]) if p["out"] else None)
    return EXIT_OK


# ------------------------------------------------------------ smooth / converge

def _add_smooth_flags(sp, with_params: bool):
    sp.add_argument("--model", required=True,
                    help="model JSON file, or builtin: toy, linear, mlp")
    sp.add_argument("--input", required=True,
                    help="input vector: JSON array file or inline JSON")
    sp.add_argument("--kernel", choices=KERNEL_CHOICES, default="gaussian")
    sp.add_argument("--epsilon", type=float, default=None)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--r", type=float, default=None)
    sp.add_argument("--n", type=int, default=50, help="input-noise samples")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--nan-policy", choices=("error", "drop_and_report"),
                    default=None)
    sp.add_argument("--out", default=None)
    if with_params:
        sp.add_argument("--m", type=int, default=50, help="parameter samples")
        sp.add_argument("--kernel-params", choices=KERNEL_CHOICES, default=None)
        sp.add_argument("--epsilon-params", type=float, default=None)
        sp.add_argument("--alpha-params", type=float, default=None)
        sp.add_argument("--r-params", type=float, default=None)
        sp.add_argument("--param-scaling", choices=("relative", "absolute"),
                        default="relative")


def _resolve_smoothing(args, mode: str) -> dict:
    x0 = _load_vector(args.input)
    model_cfg = _model_config(args.model)
    kernel_input = None
    kernel_params = None
    if mode in ("sg", "fg"):
        eps = _eps_from_flags(args.kernel, args.epsilon, args.alpha, args.r,
                              _input_spread_default(x0), allow_absent=False,
                              what="input kernel")
        kernel_input = {"kind": args.kernel, "epsilon": eps}
    if mode == "ng":
        # for ng the main flag triple configures the parameter kernel
        eps = _eps_from_flags(args.kernel, args.epsilon, args.alpha, args.r,
                              lambda: 0.01, allow_absent=False,
                              what="parameter kernel")
        kernel_params = {"kind": args.kernel, "epsilon": eps}
    if mode == "fg":
        pkind = args.kernel_params or args.kernel
        eps = _eps_from_flags(pkind, args.epsilon_params, args.alpha_params,
                              args.r_params, lambda: 0.01, allow_absent=True,
                              what="parameter kernel")
        kernel_params = {"kind": pkind, "epsilon": eps}
    return {
        "mode": mode,
        "model": model_cfg,
        "input": [float(v) for v in x0],
        "kernel_input": kernel_input,
        "kernel_params": kernel_params,
        "n": args.n,
        "m": getattr(args, "m", 50),
        "seed": args.seed,
        "nan_policy": args.nan_policy,
        "param_scaling": getattr(args, "param_scaling", "relative"),
        "out": args.out,
    }


def resolve_smooth(args) -> dict:
    return _resolve_smoothing(args, args.mode)


def _config_from_params(p):
    import numpy as np
    from .estimator import SmoothingConfig
    from .kernels import Kernel

    def k(d):
        return None if d is None else Kernel(d["kind"], d["epsilon"])

    cfg = SmoothingConfig(mode=p["mode"], kernel_input=k(p["kernel_input"]),
                          kernel_params=k(p["kernel_params"]),
                          n_input=p["n"], n_params=p["m"], seed=p["seed"],
                          nan_policy=p["nan_policy"],
                          param_scaling=p["param_scaling"])
    return _model_from_config(p["model"]), np.asarray(p["input"]), cfg


def run_smooth(p: dict) -> int:
    from .estimator import smooth_gradient
    model, x0, cfg = _config_from_params(p)
    res = smooth_gradient(model, x0, cfg)
    text = _json_text(res.to_json_dict())
    _emit(text, p["out"], _manifest("smooth", p, [p["out"]]) if p["out"] else None)
    return EXIT_OK


def resolve_smooth_value(args) -> dict:
    return _resolve_smoothing(args, "sg")


def run_smooth_value(p: dict) -> int:
    from .estimator import smooth_value
    model, x0, cfg = _config_from_params(p)
    res = smooth_value(model, x0, cfg)
    text = _json_text(res.to_json_dict())
    _emit(text, p["out"],
          _manifest("smooth-value", p, [p["out"]]) if p["out"] else None)
    return EXIT_OK


def resolve_converge(args) -> dict:
    from .errors import ConfigInvalid
    p = _resolve_smoothing(args, args.mode)
    schedule = [int(n) for n in args.schedule]
    if any(n < 1 for n in schedule) or not schedule:
        raise ConfigInvalid("--schedule entries must be >= 1")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigInvalid("--schedule must be strictly increasing")
    p["schedule"] = schedule
    return p


def run_converge(p: dict) -> int:
    from .estimator import convergence_study
    model, x0, cfg = _config_from_params(p)
    rows = convergence_study(model, x0, cfg, p["schedule"])
    d = x0.shape[0]
    header = (["n"] + [f"est_{i}" for i in range(d)]
              + [f"se_{i}" for i in range(d)] + ["max_abs_error"])
    lines = [",".join(header)]
    for row in rows:
        cells = ([str(row.n)] + [_fmt(v) for v in row.estimate]
                 + [_fmt(v) for v in row.std_error]
                 + [_fmt(row.error_vs_reference)])
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    _emit(text, p["out"], _manifest("converge", p, [p["out"]]) if p["out"] else None)
    return EXIT_OK


# -------------------------------------------------------------------------- toy

def resolve_toy(args) -> dict:
    from .errors import ConfigInvalid
    if any(e <= 0 for e in args.epsilons):
        raise ConfigInvalid("--epsilons must all be > 0")
    if args.step <= 0:
        raise ConfigInvalid("--step must be > 0")
    if args.to < args.x_from:
        raise ConfigInvalid("--to must be >= --from")
    if args.mc_n < 1:
        raise ConfigInvalid("--mc-n must be >= 1")
    return {"epsilons": [float(e) for e in args.epsilons],
            "from": args.x_from, "to": args.to, "step": args.step,
            "mc_n": args.mc_n, "seed": args.seed, "out": args.out}


def run_toy(p: dict) -> int:
    import numpy as np
    from .kernels import Kernel
    from .models import ToyFunction
    from .sampling import STREAM_INPUT, RngState, derive_seed, draw_batch
    count = int(np.floor((p["to"] - p["from"]) / p["step"] + 1e-9)) + 1
    x = p["from"] + p["step"] * np.arange(count)
    cols = [("x", x), ("f", ToyFunction.f(x))]
    for eps in p["epsilons"]:
        cols.append((f"f_eps_{eps:g}", ToyFunction.mollified(x, eps)))
    for j, eps in enumerate(p["epsilons"]):
        batch = draw_batch(Kernel("gaussian", eps), 1, p["mc_n"],
                           RngState(derive_seed(p["seed"], j), STREAM_INPUT))
        t = batch.points[:, 0]
        # one shared noise draw per epsilon keeps the MC column smooth in x
        mc = np.add.reduce(ToyFunction.f(x[:, None] - t[None, :]), axis=1) / p["mc_n"]
        cols.append((f"mc_f_eps_{eps:g}", mc))
    lines = [",".join(name for name, _ in cols)]
    for i in range(count):
        lines.append(",".join(_fmt(vals[i]) for _, vals in cols))
    text = "\n".join(lines) + "\n"
    _emit(text, p["out"], _manifest("toy", p, [p["out"]]) if p["out"] else None)
    return EXIT_OK


# ---------------------------------------------------------------------- metrics

def resolve_metrics(args) -> dict:
    from .errors import ConfigInvalid
    suites = list(SUITE_CHOICES[:-1]) if args.suite == "all" else [args.suite]
    if args.grid:
        modes = list(MODE_CHOICES)
        kinds = list(KERNEL_CHOICES)
    else:
        if args.mode is None or args.kernel is None:
            raise ConfigInvalid("give --mode and --kernel, or use --grid")
        modes = [args.mode]
        kinds = [args.kernel]
    if args.k < 1:
        raise ConfigInvalid("--k must be >= 1")
    return {"suites": suites, "modes": modes, "kinds": kinds,
            "seed": args.seed, "out_dir": args.out_dir,
            "n_inputs": args.n_inputs, "n_images": args.n_images,
            "k": args.k, "box": args.box}


def run_metrics(p: dict) -> int:
    from . import harness
    os.makedirs(p["out_dir"], exist_ok=True)
    suite_kwargs = {
        "consistency": {"n_inputs": p["n_inputs"]},
        "invariance": {"n_inputs": p["n_inputs"]},
        "localization": {"n_images": p["n_images"], "k": p["k"], "box": p["box"]},
        "sparseness": {"n_images": p["n_images"]},
    }
    outputs = []
    reports = {}
    total_failed = 0
    for suite in p["suites"]:
        for mode in p["modes"]:
            for kind in p["kinds"]:
                rep = harness.run_suite(suite, mode, kind, seed=p["seed"],
                                        **suite_kwargs[suite])
                reports[(suite, mode, kind)] = rep
                total_failed += rep.n_failed
                fname = f"{suite}_{mode}_{kind}.json"
                path = os.path.join(p["out_dir"], fname)
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(_json_text(rep.to_json_dict()))
                outputs.append(fname)
    # matrix CSV: one row per mode x kernel, one column per suite
    lines = [",".join(["mode", "kernel"] + p["suites"])]
    for mode in p["modes"]:
        for kind in p["kinds"]:
            cells = [mode, kind]
            for suite in p["suites"]:
                v = reports[(suite, mode, kind)].value
                cells.append("" if v is None else _fmt(v))
            lines.append(",".join(cells))
    matrix_path = os.path.join(p["out_dir"], "matrix.csv")
    with open(matrix_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    outputs.append("matrix.csv")
    man = _manifest("metrics", p, outputs)
    with open(os.path.join(p["out_dir"], "manifest.json"), "w",
              encoding="utf-8") as fh:
        fh.write(_json_text(man))
    sys.stdout.write(_json_text({"out_dir": p["out_dir"],
                                 "reports": len(reports),
                                 "cases_failed": total_failed}))
    return EXIT_METRIC_CASES if total_failed else EXIT_OK


# ----------------------------------------------------------- model-init / train

def resolve_model_init(args) -> dict:
    from .errors import ConfigInvalid
    if len(args.dims) < 2 or any(d < 1 for d in args.dims):
        raise ConfigInvalid("--dims needs >= 2 positive integers")
    return {"dims": list(args.dims), "activation": args.activation,
            "seed": args.seed, "out": args.out}


def run_model_init(p: dict) -> int:
    from .models import MlpModel
    model = MlpModel.initialized(tuple(p["dims"]), p["activation"], p["seed"])
    text = _json_text(model.to_json_dict())
    _emit(text, p["out"],
          _manifest("model-init", p, [p["out"]]) if p["out"] else None)
    return EXIT_OK


def resolve_model_train(args) -> dict:
    from .errors import ConfigInvalid
    if len(args.dims) < 2 or any(d < 1 for d in args.dims):
        raise ConfigInvalid("--dims needs >= 2 positive integers")
    if args.dims[0] != 2 or args.dims[-1] != 1:
        raise ConfigInvalid("the bundled dataset is 2-d binary: dims must be 2 ... 1")
    if args.epochs < 1 or args.lr <= 0:
        raise ConfigInvalid("--epochs must be >= 1 and --lr > 0")
    return {"dims": list(args.dims), "activation": args.activation,
            "seed": args.seed, "epochs": args.epochs, "lr": args.lr,
            "shift": [float(s) for s in args.shift], "out": args.out}


def run_model_train(p: dict) -> int:
    from .models import MlpModel, blobs_dataset, train_logistic
    X, y = blobs_dataset(p["seed"], n_per_class=200, shift=tuple(p["shift"]))
    init = MlpModel.initialized(tuple(p["dims"]), p["activation"], p["seed"])
    model, losses = train_logistic(init, X, y, epochs=p["epochs"], lr=p["lr"])
    text = _json_text(model.to_json_dict())
    _emit(text, p["out"],
          _manifest("model-train", p, [p["out"]]) if p["out"] else None)
    sys.stdout.write(_json_text({"epochs": p["epochs"],
                                 "final_loss": losses[-1],
                                 "out": p["out"]}))
    return EXIT_OK


# ----------------------------------------------------------------------- replay

def run_replay(manifest_path: str) -> int:
    from .errors import DataError
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            man = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read manifest {manifest_path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest is not valid JSON: {exc}") from exc
    cmd = man.get("command")
    if man.get("artifact") != "molligrad" or cmd not in RUNNERS:
        raise DataError("not a molligrad manifest")
    return RUNNERS[cmd](man["config"])


RUNNERS = {
    "kernel-table": run_kernel_table,
    "epsilon": run_epsilon,
    "smooth": run_smooth,
    "smooth-value": run_smooth_value,
    "converge": run_converge,
    "toy": run_toy,
    "metrics": run_metrics,
    "model-init": run_model_init,
    "model-train": run_model_train,
}

RESOLVERS = {
    "kernel-table": resolve_kernel_table,
    "epsilon": resolve_epsilon,
    "smooth": resolve_smooth,
    "smooth-value": resolve_smooth_value,
    "converge": resolve_converge,
    "toy": resolve_toy,
    "metrics": resolve_metrics,
    "model-init": resolve_model_init,
    "model-train": resolve_model_train,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=("auto", "numba", "numpy"),
                        default=None, help="numeric backend (env MOLLIGRAD_BACKEND)")
    common.add_argument("--threads", type=int, default=None,
                        help="compiled-backend worker threads (env NUMBA_NUM_THREADS)")

    p = argparse.ArgumentParser(
        prog="molligrad",
        description="Kernel-smoothed gradients: smoothing runs, bandwidth "
                    "selection, convergence studies, and explanation metrics.")
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("kernel-table", parents=[common],
                        help="tabulate pdf and cdf of one kernel")
    sp.add_argument("--kind", choices=KERNEL_CHOICES, required=True)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--from", dest="x_from", type=float, default=-4.0)
    sp.add_argument("--to", type=float, default=4.0)
    sp.add_argument("--step", type=float, default=0.01)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("epsilon", parents=[common],
                        help="solve the bandwidth from (r, alpha)")
    sp.add_argument("--kind", choices=KERNEL_CHOICES, required=True)
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("smooth", parents=[common],
                        help="smoothed gradient at one input")
    sp.add_argument("--mode", type=str.lower, choices=MODE_CHOICES, default="sg")
    _add_smooth_flags(sp, with_params=True)

    sp = sub.add_parser("smooth-value", parents=[common],
                        help="smoothed function value (input mode)")
    _add_smooth_flags(sp, with_params=False)

    sp = sub.add_parser("converge", parents=[common],
                        help="estimate across a nested sample schedule")
    sp.add_argument("--mode", type=str.lower, choices=MODE_CHOICES, default="sg")
    _add_smooth_flags(sp, with_params=True)
    sp.add_argument("--schedule", type=int, nargs="+", required=True)

    sp = sub.add_parser("toy", parents=[common],
                        help="piecewise toy function: exact vs smoothed columns")
    sp.add_argument("--epsilons", type=float, nargs="+",
                    default=[0.1, 0.3, 1.0])
    sp.add_argument("--from", dest="x_from", type=float, default=-1.0)
    sp.add_argument("--to", type=float, default=5.0)
    sp.add_argument("--step", type=float, default=0.05)
    sp.add_argument("--mc-n", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("metrics", parents=[common],
                        help="explanation-quality suites on the built-in harness")
    sp.add_argument("--suite", choices=SUITE_CHOICES, required=True)
    sp.add_argument("--mode", type=str.lower, choices=MODE_CHOICES, default=None)
    sp.add_argument("--kernel", choices=KERNEL_CHOICES, default=None)
    sp.add_argument("--grid", action="store_true",
                    help="run every mode x kernel combination")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out-dir", default="metrics_out")
    sp.add_argument("--n-inputs", type=int, default=8)
    sp.add_argument("--n-images", type=int, default=8)
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--box", choices=("bump", "whole"), default="bump")

    sp = sub.add_parser("model-init", parents=[common],
                        help="emit a seeded MLP as JSON")
    sp.add_argument("--dims", type=int, nargs="+", required=True)
    sp.add_argument("--activation", choices=("relu", "tanh"), default="tanh")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("model-train", parents=[common],
                        help="train an MLP on the bundled blob dataset")
    sp.add_argument("--dims", type=int, nargs="+", default=[2, 16, 1])
    sp.add_argument("--activation", choices=("relu", "tanh"), default="tanh")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--epochs", type=int, default=300)
    sp.add_argument("--lr", type=float, default=1.0)
    sp.add_argument("--shift", type=float, nargs=2, default=[0.0, 0.0],
                    help="translate the training data by this vector")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("replay", parents=[common],
                        help="re-run a previous command from its manifest")
    sp.add_argument("manifest")

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None) is not None:
        if args.threads < 1:
            print("molligrad: --threads must be >= 1", file=sys.stderr)
            return EXIT_USAGE
        os.environ["NUMBA_NUM_THREADS"] = str(args.threads)
    if getattr(args, "backend", None):
        os.environ["MOLLIGRAD_BACKEND"] = args.backend

    from .errors import (CapabilityMissing, ConfigInvalid, ConvergenceFailure,
                         DataError, DomainError, NonFiniteGradient)
    try:
        if args.cmd == "replay":
            return run_replay(args.manifest)
        params = RESOLVERS[args.cmd](args)
        return RUNNERS[args.cmd](params)
    except (ConfigInvalid, DomainError, CapabilityMissing) as exc:
        print(f"molligrad: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, NonFiniteGradient, ConvergenceFailure, OSError) as exc:
        print(f"molligrad: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
