"""Monte Carlo smoothed gradients.

The quantity estimated is the kernel-smoothed gradient: the gradient
convolved with a symmetric, normalized kernel pdf_eps. Sampling t_i from
the kernel itself makes every importance weight pdf_eps(t_i)/p(t_i)
exactly 1, so the estimator is the plain average of per-sample gradients.
That average is unbiased for the smoothed gradient and its per-component
standard error shrinks as sigma/sqrt(N).

Three modes:

  sg  perturb the input:       mean_i g(x0 - t_i)
  ng  perturb the parameters:  mean_j g(x0; theta + s_j)
  fg  perturb both, full cross product over (j, i):
                               mean_{j,i} g(x0 - t_i; theta + s_j)

ng draws s_j per parameter; with relative scaling (default) the kernel
bandwidth for parameter k is eps * |theta_k| (zero parameters are never
perturbed), with absolute scaling it is eps for every coordinate. Either
way the sampling density equals the target kernel, so weights stay 1.

Determinism: the input batch always comes from stream 0 of the seed and
the parameter batch from stream 1; per-sample gradient rows are
materialized and reduced with np.add.reduce in sample-index order (fg rows
are parameter-draw major: row j*N + i). Same seed, same bytes, any thread
count.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (CapabilityMissing, ConfigInvalid, NonFiniteGradient)
from .kernels import Kernel
from .sampling import STREAM_INPUT, STREAM_PARAMS, RngState, draw_batch

__all__ = ["SmoothingConfig", "MollifiedGradient", "MollifiedValue",
           "smooth_gradient", "smooth_value", "convergence_study", "StudyRow"]

MODES = ("sg", "ng", "fg")
NAN_POLICIES = ("error", "drop_and_report")
PARAM_SCALINGS = ("relative", "absolute")


@dataclass(frozen=True)
class SmoothingConfig:
    mode: str
    kernel_input: Optional[Kernel] = None
    kernel_params: Optional[Kernel] = None
    n_input: int = 50
    n_params: int = 50
    seed: int = 0
    nan_policy: Optional[str] = None  # None picks the mode default
    param_scaling: str = "relative"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigInvalid(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.param_scaling not in PARAM_SCALINGS:
            raise ConfigInvalid(
                f"param_scaling must be one of {PARAM_SCALINGS}, got {self.param_scaling!r}")
        if self.nan_policy is not None and self.nan_policy not in NAN_POLICIES:
            raise ConfigInvalid(
                f"nan_policy must be one of {NAN_POLICIES}, got {self.nan_policy!r}")
        if self.mode in ("sg", "fg"):
            if self.kernel_input is None:
                raise ConfigInvalid(f"mode {self.mode} needs kernel_input")
            if self.n_input < 1:
                raise ConfigInvalid("n_input must be >= 1")
        if self.mode in ("ng", "fg"):
            if self.kernel_params is None:
                raise ConfigInvalid(f"mode {self.mode} needs kernel_params")
            if self.n_params < 1:
                raise ConfigInvalid("n_params must be >= 1")

    @property
    def resolved_nan_policy(self) -> str:
        if self.nan_policy is not None:
            return self.nan_policy
        # deep parameter perturbations are the usual source of non-finite
        # gradients, so those modes default to dropping with a report
        return "error" if self.mode == "sg" else "drop_and_report"

    def config_echo(self) -> dict:
        def k(kern):
            return None if kern is None else {"kind": kern.kind, "epsilon": kern.epsilon}
        return {
            "mode": self.mode,
            "kernel_input": k(self.kernel_input),
            "kernel_params": k(self.kernel_params),
            "n_input": self.n_input,
            "n_params": self.n_params,
            "seed": self.seed,
            "nan_policy": self.resolved_nan_policy,
            "param_scaling": self.param_scaling,
        }


def _se_json(v):
    return "unknown" if not math.isfinite(v) else v


@dataclass(frozen=True)
class MollifiedGradient:
    """Estimate plus per-component standard error sigma/sqrt(n_used)
    (unbiased sample variance; a single retained sample has no variance
    estimate and reports an infinite sentinel, serialized as "unknown")."""

    estimate: np.ndarray
    std_error: np.ndarray
    n_used: int
    n_dropped: int
    config_echo: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "estimate": [float(v) for v in self.estimate],
            "std_error": [_se_json(float(v)) for v in self.std_error],
            "n_used": self.n_used,
            "n_dropped": self.n_dropped,
            "config_echo": self.config_echo,
        }


@dataclass(frozen=True)
class MollifiedValue:
    estimate: float
    std_error: float
    n_used: int
    n_dropped: int
    config_echo: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "estimate": float(self.estimate),
            "std_error": _se_json(float(self.std_error)),
            "n_used": self.n_used,
            "n_dropped": self.n_dropped,
            "config_echo": self.config_echo,
        }


def _check_x0(f, x0):
    x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(x0)):
        raise ConfigInvalid("x0 must be finite")
    return x0


def _needs_params(f):
    dim = int(getattr(f, "param_dim", 0) or 0)
    if dim < 1 or not (hasattr(f, "grad_input_perturbed") or hasattr(f, "perturb_params")):
        raise CapabilityMissing(
            "parameter smoothing needs a function exposing parameters "
            "(param_dim > 0 and perturb_params or grad_input_perturbed)")
    return dim


def _grad_rows_at(f, X):
    if hasattr(f, "grad_input_batch"):
        return np.asarray(f.grad_input_batch(X), dtype=np.float64)
    return np.stack([np.asarray(f.grad_input(X[i]), dtype=np.float64)
                     for i in range(X.shape[0])])


def _eval_rows_at(f, X):
    if hasattr(f, "eval_batch"):
        return np.asarray(f.eval_batch(X), dtype=np.float64)
    return np.array([float(f.eval(X[i])) for i in range(X.shape[0])])


def _param_deltas(f, cfg, pdim):
    raw = draw_batch(cfg.kernel_params, pdim, cfg.n_params,
                     RngState(cfg.seed, STREAM_PARAMS))
    if cfg.param_scaling == "relative":
        # per-coordinate bandwidth eps*|theta_k|; needs the parameter vector
        theta = np.asarray(getattr(f, "param_vector"), dtype=np.float64)
        return raw.points * np.abs(theta)[None, :]
    return raw.points


def _rows_perturbed(f, x0, deltas):
    if hasattr(f, "grad_input_perturbed"):
        return np.asarray(f.grad_input_perturbed(deltas, x0), dtype=np.float64)
    return np.stack([np.asarray(f.perturb_params(deltas[j]).grad_input(x0),
                                dtype=np.float64)
                     for j in range(deltas.shape[0])])


def _rows_cross(f, x0, T, deltas):
    # parameter draw major: row j*N + i is (theta + s_j, x0 - t_i)
    X = x0[None, :] - T.points
    if hasattr(f, "grad_input_cross"):
        return np.asarray(f.grad_input_cross(deltas, X), dtype=np.float64)
    blocks = [
        _grad_rows_at(f.perturb_params(deltas[j]), X)
        for j in range(deltas.shape[0])
    ]
    return np.concatenate(blocks, axis=0)


def _apply_weights(rows, log_weights):
    # with p = pdf_eps the log weights are exactly 0 and this is a no-op;
    # kept so the general importance-weighted form stays visible
    w = np.exp(log_weights)
    return rows * w[:, None]


def _reduce_rows(rows, policy):
    mask = np.isfinite(rows).all(axis=1)
    n_total = rows.shape[0]
    n_bad = int(n_total - mask.sum())
    if n_bad:
        if policy == "error":
            raise NonFiniteGradient(
                f"{n_bad} of {n_total} sample gradients non-finite "
                f"(nan_policy=error)")
        rows = rows[mask]
    if rows.shape[0] == 0:
        raise NonFiniteGradient("all sample gradients non-finite")
    n_used = rows.shape[0]
    estimate = np.add.reduce(rows, axis=0) / n_used
    if n_used > 1:
        std_error = rows.std(axis=0, ddof=1) / math.sqrt(n_used)
    else:
        std_error = np.full(rows.shape[1], np.inf)
    return estimate, std_error, n_used, n_bad


def smooth_gradient(f, x0, cfg: SmoothingConfig) -> MollifiedGradient:
    """Monte Carlo estimate of the kernel-smoothed gradient at x0."""
    x0 = _check_x0(f, x0)
    policy = cfg.resolved_nan_policy
    if cfg.mode == "sg":
        T = draw_batch(cfg.kernel_input, x0.shape[0], cfg.n_input,
                       RngState(cfg.seed, STREAM_INPUT))
        rows = _grad_rows_at(f, x0[None, :] - T.points)
        rows = _apply_weights(rows, T.log_weights)
    elif cfg.mode == "ng":
        pdim = _needs_params(f)
        deltas = _param_deltas(f, cfg, pdim)
        rows = _rows_perturbed(f, x0, deltas)
    else:
        pdim = _needs_params(f)
        T = draw_batch(cfg.kernel_input, x0.shape[0], cfg.n_input,
                       RngState(cfg.seed, STREAM_INPUT))
        deltas = _param_deltas(f, cfg, pdim)
        rows = _rows_cross(f, x0, T, deltas)
        rows = _apply_weights(rows, np.zeros(rows.shape[0]))
    estimate, std_error, n_used, n_dropped = _reduce_rows(rows, policy)
    return MollifiedGradient(estimate, std_error, n_used, n_dropped,
                             cfg.config_echo())


def smooth_value(f, x0, cfg: SmoothingConfig) -> MollifiedValue:
    """Monte Carlo estimate of the kernel-smoothed value (input mode only)."""
    if cfg.mode != "sg":
        raise ConfigInvalid("smooth_value supports mode sg only")
    x0 = _check_x0(f, x0)
    T = draw_batch(cfg.kernel_input, x0.shape[0], cfg.n_input,
                   RngState(cfg.seed, STREAM_INPUT))
    vals = _eval_rows_at(f, x0[None, :] - T.points)
    vals = vals * T.weights()
    estimate, std_error, n_used, n_dropped = _reduce_rows(vals[:, None],
                                                          cfg.resolved_nan_policy)
    return MollifiedValue(float(estimate[0]), float(std_error[0]),
                          n_used, n_dropped, cfg.config_echo())


@dataclass(frozen=True)
class StudyRow:
    n: int
    estimate: np.ndarray
    std_error: np.ndarray
    error_vs_reference: float


def convergence_study(f, x0, cfg: SmoothingConfig, schedule, reference=None):
    """One chain's convergence across a nested sample schedule.

    The sample set at each schedule entry is a prefix of the next (single
    stream, row-major), so rows show one chain converging rather than
    independent runs. The schedule scales the mode's own axis: n_input for
    sg and fg (fg keeps cfg.n_params fixed), n_params for ng.

    reference: vector to compare against; default is the quadrature oracle
    for sg in <= 2 dimensions, else the largest-N estimate.
    """
    schedule = [int(n) for n in schedule]
    if not schedule or any(n < 1 for n in schedule):
        raise ConfigInvalid("schedule must be non-empty positive sample counts")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigInvalid("schedule must be strictly increasing")
    x0 = _check_x0(f, x0)
    n_max = schedule[-1]
    policy = cfg.resolved_nan_policy

    if cfg.mode == "sg":
        big = SmoothingConfig(**{**cfg.__dict__, "n_input": n_max})
        T = draw_batch(big.kernel_input, x0.shape[0], n_max,
                       RngState(big.seed, STREAM_INPUT))
        rows = _apply_weights(_grad_rows_at(f, x0[None, :] - T.points),
                              T.log_weights)
        prefix = lambda k: rows[:k]
    elif cfg.mode == "ng":
        pdim = _needs_params(f)
        big = SmoothingConfig(**{**cfg.__dict__, "n_params": n_max})
        deltas = _param_deltas(f, big, pdim)
        rows = _rows_perturbed(f, x0, deltas)
        prefix = lambda k: rows[:k]
    else:
        pdim = _needs_params(f)
        big = SmoothingConfig(**{**cfg.__dict__, "n_input": n_max})
        T = draw_batch(big.kernel_input, x0.shape[0], n_max,
                       RngState(big.seed, STREAM_INPUT))
        deltas = _param_deltas(f, big, pdim)
        rows3 = _rows_cross(f, x0, T, deltas).reshape(
            cfg.n_params, n_max, x0.shape[0])
        prefix = lambda k: rows3[:, :k].reshape(cfg.n_params * k, x0.shape[0])

    results = []
    for n in schedule:
        est, se, n_used, n_dropped = _reduce_rows(prefix(n), policy)
        results.append((n, est, se))

    if reference is None:
        if cfg.mode == "sg" and x0.shape[0] <= 2:
            from . import oracle
            reference = oracle.gradient_reference(f, cfg.kernel_input, x0)
        else:
            reference = results[-1][1]
    reference = np.asarray(reference, dtype=np.float64).reshape(-1)

    return [StudyRow(n, est, se, float(np.max(np.abs(est - reference))))
            for n, est, se in results]
