"""Numba batch kernels: the accelerated backend.

Same flat parameter layout and call signatures as numpy_impl. Every
parallel loop writes disjoint output rows and does its inner sums in fixed
index order, so results are bit-identical across thread counts. cache=True
persists compiled artifacts so CLI subprocesses skip recompilation.
"""

import math

import numpy as np
from numba import njit, prange

name = "numba"

_A0, _A1, _A2, _A3, _A4, _A5 = (
    -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
    1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B0, _B1, _B2, _B3, _B4 = (
    -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
    6.680131188771972e+01, -1.328068155288572e+01)
_C0, _C1, _C2, _C3, _C4, _C5 = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
    -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D0, _D1, _D2, _D3 = (
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
    3.754408661907416e+00)


@njit(cache=True)
def _erfinv_scalar(y):
    if y == 0.0:
        return 0.0
    ay = abs(y)
    if ay <= 0.9515:
        q = 0.5 * y
        r = q * q
        num = (((((_A0 * r + _A1) * r + _A2) * r + _A3) * r + _A4) * r + _A5) * q
        den = ((((_B0 * r + _B1) * r + _B2) * r + _B3) * r + _B4) * r + 1.0
        x = num / den / math.sqrt(2.0)
    else:
        q = math.sqrt(-2.0 * math.log(0.5 * (1.0 - ay)))
        num = ((((_C0 * q + _C1) * q + _C2) * q + _C3) * q + _C4) * q + _C5
        den = (((_D0 * q + _D1) * q + _D2) * q + _D3) * q + 1.0
        x = math.copysign(-num / den, y) / math.sqrt(2.0)
    c = 2.0 / math.sqrt(math.pi)
    for _ in range(2):
        d = c * math.exp(-x * x)
        if d == 0.0:
            break
        x -= (math.erf(x) - y) / d
    return x


@njit(cache=True, parallel=True)
def _erfinv_flat(y, out):
    for i in prange(y.shape[0]):
        out[i] = _erfinv_scalar(y[i])


def erfinv_array(y):
    """Elementwise inverse error function; caller guarantees |y| < 1."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    out = np.empty(y.size)
    _erfinv_flat(y.ravel(), out)
    return out.reshape(y.shape)


@njit(cache=True)
def _layer_offsets(dims):
    L = dims.shape[0] - 1
    offs = np.empty(L, dtype=np.int64)
    off = 0
    for l in range(L):
        offs[l] = off
        off += dims[l + 1] * dims[l] + dims[l + 1]
    return offs


@njit(cache=True)
def _forward_one(dims, act, params, offs, x, a, z):
    # a: (L+1, maxd) post-activations, z: (L, maxd) pre-activations
    L = dims.shape[0] - 1
    for j in range(dims[0]):
        a[0, j] = x[j]
    for l in range(L):
        din = dims[l]
        dout = dims[l + 1]
        off = offs[l]
        boff = off + dout * din
        for i in range(dout):
            s = params[boff + i]
            row = off + i * din
            for j in range(din):
                s += params[row + j] * a[l, j]
            z[l, i] = s
            if l < L - 1:
                if act == 0:
                    a[l + 1, i] = s if s > 0.0 else 0.0
                else:
                    a[l + 1, i] = math.tanh(s)
            else:
                a[l + 1, i] = s


@njit(cache=True)
def _grad_input_one(dims, act, params, offs, oi, a, z, dz, db, out_row):
    # backward pass; assumes _forward_one already filled a and z
    L = dims.shape[0] - 1
    for i in range(dims[L]):
        dz[i] = 1.0 if i == oi else 0.0
    for l in range(L - 1, -1, -1):
        din = dims[l]
        dout = dims[l + 1]
        off = offs[l]
        for j in range(din):
            s = 0.0
            for i in range(dout):
                s += dz[i] * params[off + i * din + j]
            db[j] = s
        if l > 0:
            for j in range(din):
                zz = z[l - 1, j]
                if act == 0:
                    if zz <= 0.0:
                        db[j] = 0.0
                else:
                    t = math.tanh(zz)
                    db[j] *= 1.0 - t * t
        for j in range(din):
            dz[j] = db[j]
    for j in range(dims[0]):
        out_row[j] = dz[j]


@njit(cache=True)
def _grad_params_one(dims, act, params, offs, oi, a, z, dz, db, out_row):
    L = dims.shape[0] - 1
    for i in range(dims[L]):
        dz[i] = 1.0 if i == oi else 0.0
    for l in range(L - 1, -1, -1):
        din = dims[l]
        dout = dims[l + 1]
        off = offs[l]
        boff = off + dout * din
        for i in range(dout):
            row = off + i * din
            for j in range(din):
                out_row[row + j] = dz[i] * a[l, j]
            out_row[boff + i] = dz[i]
        for j in range(din):
            s = 0.0
            for i in range(dout):
                s += dz[i] * params[off + i * din + j]
            db[j] = s
        if l > 0:
            for j in range(din):
                zz = z[l - 1, j]
                if act == 0:
                    if zz <= 0.0:
                        db[j] = 0.0
                else:
                    t = math.tanh(zz)
                    db[j] *= 1.0 - t * t
        for j in range(din):
            dz[j] = db[j]


@njit(cache=True, parallel=True)
def _forward_batch(dims, act, params, X, oi, out):
    L = dims.shape[0] - 1
    maxd = np.max(dims)
    for b in prange(X.shape[0]):
        a = np.empty((L + 1, maxd))
        z = np.empty((L, maxd))
        _forward_one(dims, act, params, _layer_offsets(dims), X[b], a, z)
        out[b] = a[L, oi]


@njit(cache=True, parallel=True)
def _grad_input_batch(dims, act, params, X, oi, out):
    L = dims.shape[0] - 1
    maxd = np.max(dims)
    offs = _layer_offsets(dims)
    for b in prange(X.shape[0]):
        a = np.empty((L + 1, maxd))
        z = np.empty((L, maxd))
        dz = np.empty(maxd)
        db = np.empty(maxd)
        _forward_one(dims, act, params, offs, X[b], a, z)
        _grad_input_one(dims, act, params, offs, oi, a, z, dz, db, out[b])


@njit(cache=True, parallel=True)
def _grad_params_batch(dims, act, params, X, oi, out):
    L = dims.shape[0] - 1
    maxd = np.max(dims)
    offs = _layer_offsets(dims)
    for b in prange(X.shape[0]):
        a = np.empty((L + 1, maxd))
        z = np.empty((L, maxd))
        dz = np.empty(maxd)
        db = np.empty(maxd)
        _forward_one(dims, act, params, offs, X[b], a, z)
        _grad_params_one(dims, act, params, offs, oi, a, z, dz, db, out[b])


@njit(cache=True, parallel=True)
def _grad_input_cross(dims, act, base, deltas, X, oi, out):
    # parameter draw outer (parallel), input rows inner; row j*N+i
    L = dims.shape[0] - 1
    maxd = np.max(dims)
    offs = _layer_offsets(dims)
    N = X.shape[0]
    P = base.shape[0]
    for j in prange(deltas.shape[0]):
        theta = np.empty(P)
        for p in range(P):
            theta[p] = base[p] + deltas[j, p]
        a = np.empty((L + 1, maxd))
        z = np.empty((L, maxd))
        dz = np.empty(maxd)
        db = np.empty(maxd)
        for i in range(N):
            _forward_one(dims, act, theta, offs, X[i], a, z)
            _grad_input_one(dims, act, theta, offs, oi, a, z, dz, db, out[j * N + i])


def _prep(dims, params, X):
    return (np.ascontiguousarray(dims, dtype=np.int64),
            np.ascontiguousarray(params, dtype=np.float64),
            np.ascontiguousarray(X, dtype=np.float64))


def forward_batch(dims, act, params, X, output_index):
    dims, params, X = _prep(dims, params, X)
    out = np.empty(X.shape[0])
    _forward_batch(dims, act, params, X, output_index, out)
    return out


def grad_input_batch(dims, act, params, X, output_index):
    dims, params, X = _prep(dims, params, X)
    out = np.empty((X.shape[0], int(dims[0])))
    _grad_input_batch(dims, act, params, X, output_index, out)
    return out


def grad_params_batch(dims, act, params, X, output_index):
    dims, params, X = _prep(dims, params, X)
    out = np.empty((X.shape[0], params.shape[0]))
    _grad_params_batch(dims, act, params, X, output_index, out)
    return out


def grad_input_cross(dims, act, base_params, deltas, X, output_index):
    """Input gradients for every (parameter draw j, input row i) pair; (M*N, d0)."""
    dims, base_params, X = _prep(dims, base_params, X)
    deltas = np.ascontiguousarray(deltas, dtype=np.float64)
    out = np.empty((deltas.shape[0] * X.shape[0], int(dims[0])))
    _grad_input_cross(dims, act, base_params, deltas, X, output_index, out)
    return out


def grad_input_perturbed(dims, act, base_params, deltas, x0, output_index):
    """Input gradients at a fixed input for every parameter draw. (M, d0)."""
    x0 = np.asarray(x0, dtype=np.float64)
    return grad_input_cross(dims, act, base_params, deltas, x0[None, :], output_index)


def warmup():
    """Trigger compilation of every jitted kernel (cached afterwards)."""
    u = np.array([0.25, 0.75, 0.999])
    erfinv_array(2.0 * u - 1.0)
    dims = np.array([2, 3, 1], dtype=np.int64)
    rng = np.random.default_rng(0)
    params = rng.standard_normal(2 * 3 + 3 + 3 * 1 + 1)
    X = rng.standard_normal((4, 2))
    for act in (0, 1):
        forward_batch(dims, act, params, X, 0)
        grad_input_batch(dims, act, params, X, 0)
        grad_params_batch(dims, act, params, X, 0)
        grad_input_cross(dims, act, params, rng.standard_normal((2, params.size)), X, 0)
