"""Differentiable functions the estimator smooths.

Two concrete substrates ship:

* MlpModel: a small dense network with exact backprop gradients for both
  the input and the flattened parameter vector. Single-sample methods are
  the pure-numpy reference; batch methods dispatch to the selected backend.
* ToyFunction: a fixed 1-d piecewise-linear function with kinks and one
  jump, plus the closed form of its Gaussian-smoothed version. Rough enough
  to exercise smoothing, simple enough to integrate exactly.

A "differentiable function" is duck-typed: eval(x) and grad_input(x) are
required; eval_batch/grad_input_batch are optional fast paths; parameter
smoothing additionally needs param_vector, perturb_params and (optionally)
grad_input_perturbed / grad_input_cross.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, DataError, DimensionMismatch
from .sampling import STREAM_DATA, STREAM_INIT, RngState

__all__ = [
    "MlpModel", "ToyFunction", "make_linear",
    "blobs_dataset", "train_logistic",
]

ACTIVATIONS = ("relu", "tanh")
_ACT_CODE = {"relu": 0, "tanh": 1}


def _act(z, name):
    if name == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _actp(z, name):
    # relu subgradient at 0 is 0 by convention
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    t = np.tanh(z)
    return 1.0 - t * t


class MlpModel:
    """Dense MLP, scalar-valued through output_index. Immutable after
    construction; all evaluation is pure."""

    def __init__(self, layer_dims, activation, weights, biases, output_index=0):
        dims = tuple(int(d) for d in layer_dims)
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ConfigInvalid(f"layer_dims needs >= 2 positive sizes, got {layer_dims!r}")
        if activation not in ACTIVATIONS:
            raise ConfigInvalid(f"activation must be one of {ACTIVATIONS}, got {activation!r}")
        if not 0 <= int(output_index) < dims[-1]:
            raise ConfigInvalid(f"output_index {output_index} outside 0..{dims[-1] - 1}")
        if len(weights) != len(dims) - 1 or len(biases) != len(dims) - 1:
            raise DimensionMismatch("need one weight matrix and bias per layer")
        ws, bs = [], []
        for l in range(len(dims) - 1):
            w = np.array(weights[l], dtype=np.float64)
            b = np.array(biases[l], dtype=np.float64)
            if w.shape != (dims[l + 1], dims[l]) or b.shape != (dims[l + 1],):
                raise DimensionMismatch(
                    f"layer {l}: expected W{(dims[l + 1], dims[l])} b{(dims[l + 1],)}, "
                    f"got W{w.shape} b{b.shape}")
            ws.append(w)
            bs.append(b)
        self.layer_dims = dims
        self.activation = activation
        self.weights = tuple(ws)
        self.biases = tuple(bs)
        self.output_index = int(output_index)
        self._dims_arr = np.array(dims, dtype=np.int64)
        self._act_code = _ACT_CODE[activation]
        self._flat = np.concatenate(
            [np.concatenate([w.ravel(), b]) for w, b in zip(ws, bs)])
        self._flat.setflags(write=False)

    # construction helpers

    @classmethod
    def initialized(cls, layer_dims, activation, seed, output_index=0):
        """Seeded init, each entry uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
        Draw order: layer by layer, weights then bias."""
        gen = RngState(int(seed), STREAM_INIT).generator()
        dims = tuple(int(d) for d in layer_dims)
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ConfigInvalid(f"layer_dims needs >= 2 positive sizes, got {layer_dims!r}")
        ws, bs = [], []
        for l in range(len(dims) - 1):
            bound = 1.0 / math.sqrt(dims[l])
            ws.append(gen.uniform(-bound, bound, size=(dims[l + 1], dims[l])))
            bs.append(gen.uniform(-bound, bound, size=dims[l + 1]))
        return cls(dims, activation, ws, bs, output_index)

    def randomize_params(self, seed) -> "MlpModel":
        """Structurally identical model, weights redrawn from the init scheme."""
        return MlpModel.initialized(self.layer_dims, self.activation, seed,
                                    self.output_index)

    def with_params(self, flat) -> "MlpModel":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.param_dim,):
            raise DimensionMismatch(
                f"expected {self.param_dim} parameters, got shape {flat.shape}")
        ws, bs = [], []
        off = 0
        for l in range(len(self.layer_dims) - 1):
            din, dout = self.layer_dims[l], self.layer_dims[l + 1]
            ws.append(flat[off:off + dout * din].reshape(dout, din))
            off += dout * din
            bs.append(flat[off:off + dout])
            off += dout
        return MlpModel(self.layer_dims, self.activation, ws, bs, self.output_index)

    def perturb_params(self, delta) -> "MlpModel":
        """Independent view at parameters theta + delta; perturb_params(0)
        evaluates identically to the base model."""
        delta = np.asarray(delta, dtype=np.float64)
        if delta.shape != (self.param_dim,):
            raise DimensionMismatch(
                f"expected {self.param_dim} parameter deltas, got shape {delta.shape}")
        return self.with_params(self._flat + delta)

    # parameter access

    @property
    def param_dim(self) -> int:
        return int(self._flat.shape[0])

    @property
    def param_vector(self) -> np.ndarray:
        return self._flat

    # single-sample reference implementations

    def _check_x(self, x):
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.layer_dims[0]:
            raise DimensionMismatch(
                f"model expects {self.layer_dims[0]} inputs, got {x.shape[0]}")
        return x

    def _forward(self, x):
        acts, zs = [x], []
        h = x
        last = len(self.weights) - 1
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = w @ h + b
            zs.append(z)
            h = _act(z, self.activation) if l < last else z
            acts.append(h)
        return acts, zs

    def eval(self, x) -> float:
        acts, _ = self._forward(self._check_x(x))
        return float(acts[-1][self.output_index])

    def grad_input(self, x) -> np.ndarray:
        x = self._check_x(x)
        _, zs = self._forward(x)
        d = np.zeros(self.layer_dims[-1])
        d[self.output_index] = 1.0
        for l in range(len(self.weights) - 1, -1, -1):
            da = d @ self.weights[l]
            if l == 0:
                return da
            d = da * _actp(zs[l - 1], self.activation)
        return da

    def grad_params(self, x) -> np.ndarray:
        x = self._check_x(x)
        acts, zs = self._forward(x)
        out = np.empty(self.param_dim)
        offs = []
        off = 0
        for w in self.weights:
            offs.append(off)
            off += w.size + w.shape[0]
        d = np.zeros(self.layer_dims[-1])
        d[self.output_index] = 1.0
        for l in range(len(self.weights) - 1, -1, -1):
            dout, din = self.weights[l].shape
            o = offs[l]
            out[o:o + dout * din] = np.outer(d, acts[l]).ravel()
            out[o + dout * din:o + dout * din + dout] = d
            if l > 0:
                d = (d @ self.weights[l]) * _actp(zs[l - 1], self.activation)
        return out

    # batch fast paths (selected backend)

    def _check_X(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.layer_dims[0]:
            raise DimensionMismatch(
                f"batch must be (B, {self.layer_dims[0]}), got {X.shape}")
        return X

    def eval_batch(self, X) -> np.ndarray:
        from . import backend
        return backend.impl().forward_batch(
            self._dims_arr, self._act_code, self._flat, self._check_X(X),
            self.output_index)

    def grad_input_batch(self, X) -> np.ndarray:
        from . import backend
        return backend.impl().grad_input_batch(
            self._dims_arr, self._act_code, self._flat, self._check_X(X),
            self.output_index)

    def grad_params_batch(self, X) -> np.ndarray:
        from . import backend
        return backend.impl().grad_params_batch(
            self._dims_arr, self._act_code, self._flat, self._check_X(X),
            self.output_index)

    def grad_input_perturbed(self, deltas, x0) -> np.ndarray:
        """(M, d0) input gradients at parameters theta + deltas[j], fixed x0."""
        from . import backend
        deltas = np.asarray(deltas, dtype=np.float64)
        if deltas.ndim != 2 or deltas.shape[1] != self.param_dim:
            raise DimensionMismatch(
                f"deltas must be (M, {self.param_dim}), got {deltas.shape}")
        return backend.impl().grad_input_perturbed(
            self._dims_arr, self._act_code, self._flat, deltas,
            self._check_x(x0), self.output_index)

    def grad_input_cross(self, deltas, X) -> np.ndarray:
        """(M*N, d0) input gradients, parameter draw major: row j*N + i."""
        from . import backend
        deltas = np.asarray(deltas, dtype=np.float64)
        if deltas.ndim != 2 or deltas.shape[1] != self.param_dim:
            raise DimensionMismatch(
                f"deltas must be (M, {self.param_dim}), got {deltas.shape}")
        return backend.impl().grad_input_cross(
            self._dims_arr, self._act_code, self._flat, deltas,
            self._check_X(X), self.output_index)

    # JSON model format

    def to_json_dict(self) -> dict:
        return {
            "layer_dims": list(self.layer_dims),
            "activation": self.activation,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_json_dict(cls, obj, output_index=0) -> "MlpModel":
        if not isinstance(obj, dict):
            raise DataError("model JSON must be an object")
        missing = {"layer_dims", "activation", "weights", "biases"} - set(obj)
        if missing:
            raise DataError(f"model JSON missing keys: {sorted(missing)}")
        try:
            return cls(obj["layer_dims"], obj["activation"], obj["weights"],
                       obj["biases"], output_index)
        except (ConfigInvalid, DimensionMismatch):
            raise
        except (TypeError, ValueError) as e:
            raise DataError(f"malformed model JSON: {e}") from e

    @classmethod
    def load(cls, path, output_index=0) -> "MlpModel":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as e:
            raise DataError(f"cannot read model file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise DataError(f"model file {path} is not valid JSON: {e}") from e
        return cls.from_json_dict(obj, output_index)


def make_linear(w, b=0.0) -> MlpModel:
    """f(x) = w . x + b as a single-layer MlpModel (output layer is linear)."""
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    return MlpModel((w.shape[0], 1), "tanh", [w[None, :]], [np.array([float(b)])])


class ToyFunction:
    """Fixed piecewise function on R: 0 for x <= 0, then slopes
    2, -2, 2, -1 over (0,1], (1,1.5), [1.5,3), [3,4), constant 4 after.
    Continuous except one +1 jump at x = 1.5; kinks at the breakpoints.

    As a differentiable function it acts on 1-vectors; the derivative uses
    the left-branch value at breakpoints (measure zero, excluded from
    finite-difference tests).
    """

    KINKS = (0.0, 1.0, 1.5, 3.0, 4.0)
    JUMP_AT = 1.5
    JUMP = 1.0  # right limit minus left limit at JUMP_AT
    param_dim = 0

    @staticmethod
    def f(x):
        x = np.asarray(x, dtype=np.float64)
        out = np.select(
            [x <= 0.0, x <= 1.0, x < 1.5, x < 3.0, x < 4.0],
            [0.0, 2.0 * x, 4.0 - 2.0 * x, -1.0 + 2.0 * x, 8.0 - x],
            default=4.0)
        return float(out) if np.isscalar(x) or x.ndim == 0 else out

    @staticmethod
    def fprime(x):
        x = np.asarray(x, dtype=np.float64)
        out = np.select(
            [x <= 0.0, x <= 1.0, x < 1.5, x < 3.0, x < 4.0],
            [0.0, 2.0, -2.0, 2.0, -1.0],
            default=0.0)
        return float(out) if np.isscalar(x) or x.ndim == 0 else out

    @staticmethod
    def mollified(x, eps):
        """Gaussian-smoothed value (f convolved with the gaussian kernel at
        bandwidth eps), as an explicit closed form. Cross-validated against
        kink-seeded adaptive quadrature to ~1e-15."""
        from scipy.special import erf
        x = np.asarray(x, dtype=np.float64)
        s2e = math.sqrt(2.0) * eps
        out = (
            0.5 * (x - 4.0) * erf((x - 4.0) / s2e)
            - 1.5 * (x - 3.0) * erf((x - 3.0) / s2e)
            + 2.0 * erf((x - 1.0) / s2e)
            + x * (-2.0 * erf((x - 1.0) / s2e) + erf(x / s2e)
                   + 2.0 * erf((2.0 * x - 3.0) / (2.0 * s2e)))
            + 2.5 * erf((3.0 - 2.0 * x) / (2.0 * s2e))
            + eps * (
                2.0 * np.exp(-x**2 / (2.0 * eps**2))
                + 4.0 * np.exp(-(3.0 - 2.0 * x)**2 / (8.0 * eps**2))
                + np.exp(-(x - 4.0)**2 / (2.0 * eps**2))
                - 3.0 * np.exp(-(x - 3.0)**2 / (2.0 * eps**2))
                - 4.0 * np.exp(-(x - 1.0)**2 / (2.0 * eps**2))
            ) / math.sqrt(2.0 * math.pi)
            + 2.0 * math.sqrt(1.0 / eps**2) * eps
        )
        return float(out) if np.isscalar(x) or x.ndim == 0 else out

    # differentiable-function protocol (vectors of length 1)

    def _scalar(self, x):
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != 1:
            raise DimensionMismatch(f"toy function is 1-d, got {x.shape[0]} inputs")
        return float(x[0])

    def eval(self, x) -> float:
        return self.f(self._scalar(x))

    def grad_input(self, x) -> np.ndarray:
        return np.array([self.fprime(self._scalar(x))])

    def eval_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != 1:
            raise DimensionMismatch(f"batch must be (B, 1), got {X.shape}")
        return self.f(X[:, 0])

    def grad_input_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != 1:
            raise DimensionMismatch(f"batch must be (B, 1), got {X.shape}")
        return self.fprime(X[:, 0])[:, None]


def blobs_dataset(seed, n_per_class=200, shift=(0.0, 0.0)):
    """Seeded 2-d two-class Gaussian blobs: class 0 around (-1,-1), class 1
    around (+1,+1), std 0.8, optionally shifted by a constant offset.
    Returns (X, y) with X (2*n_per_class, 2) and y in {0.0, 1.0}."""
    if n_per_class < 1:
        raise ConfigInvalid("n_per_class must be >= 1")
    gen = RngState(int(seed), STREAM_DATA).generator()
    z = gen.standard_normal((2 * n_per_class, 2))
    X = 0.8 * z
    X[:n_per_class] += np.array([-1.0, -1.0])
    X[n_per_class:] += np.array([1.0, 1.0])
    X += np.asarray(shift, dtype=np.float64)
    y = np.concatenate([np.zeros(n_per_class), np.ones(n_per_class)])
    return X, y


def _sigmoid(s):
    out = np.empty_like(s)
    pos = s >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    e = np.exp(s[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def logistic_loss(scores, y) -> float:
    """Mean logistic loss: softplus(s) - y*s, numerically stable."""
    sp = np.maximum(scores, 0.0) + np.log1p(np.exp(-np.abs(scores)))
    return float(np.mean(sp - y * scores))


def train_logistic(model: MlpModel, X, y, epochs: int = 300, lr: float = 1.0):
    """Full-batch gradient descent on the logistic loss. Deterministic:
    fixed-order mean over the batch, no shuffling. Returns (model, losses)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if epochs < 1 or lr <= 0:
        raise ConfigInvalid("need epochs >= 1 and lr > 0")
    theta = model.param_vector.copy()
    losses = []
    B = X.shape[0]
    for _ in range(epochs):
        m = model.with_params(theta)
        s = m.eval_batch(X)
        losses.append(logistic_loss(s, y))
        resid = _sigmoid(s) - y
        gp = m.grad_params_batch(X)
        grad = np.add.reduce(resid[:, None] * gp, axis=0) / B
        theta = theta - lr * grad
    return model.with_params(theta), losses
