"""Pure-numpy batch kernels: the fallback backend.

Shares the flat parameter layout with the numba backend: for layer l with
fan-in d_l and fan-out d_{l+1}, the slice holds the row-major weight matrix
(d_{l+1}, d_l) followed by the bias (d_{l+1},). Hidden layers use the
activation (0 = relu, 1 = tanh); the output layer is linear and a single
output coordinate is selected by output_index.

Batch results here come from BLAS matmuls, so they can differ from the
numba backend's sequential loops in the last ulp; within one backend they
are deterministic run to run.
"""

import numpy as np
from scipy.special import erf as _erf_arr

_SQRT2 = np.sqrt(2.0)
_TWO_OVER_SQRTPI = 2.0 / np.sqrt(np.pi)

_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)

_CENTRAL_BOUND = 0.9515

name = "numpy"


def erfinv_array(y):
    """Elementwise inverse error function; caller guarantees |y| < 1."""
    y = np.asarray(y, dtype=np.float64)
    ay = np.abs(y)

    q = 0.5 * y
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    x_central = num / den / _SQRT2

    qt = np.sqrt(-2.0 * np.log(0.5 * (1.0 - ay)))
    numt = ((((_C[0] * qt + _C[1]) * qt + _C[2]) * qt + _C[3]) * qt + _C[4]) * qt + _C[5]
    dent = (((_D[0] * qt + _D[1]) * qt + _D[2]) * qt + _D[3]) * qt + 1.0
    x_tail = np.copysign(-numt / dent, y) / _SQRT2

    x = np.where(ay <= _CENTRAL_BOUND, x_central, x_tail)
    for _ in range(2):
        x = x - (_erf_arr(x) - y) / (_TWO_OVER_SQRTPI * np.exp(-x * x))
    return x


def _unpack(dims, params):
    """Views (no copies) of per-layer weight matrices and biases."""
    ws, bs = [], []
    off = 0
    for l in range(len(dims) - 1):
        din, dout = int(dims[l]), int(dims[l + 1])
        ws.append(params[off:off + dout * din].reshape(dout, din))
        off += dout * din
        bs.append(params[off:off + dout])
        off += dout
    return ws, bs


def _act(z, act):
    if act == 0:
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _actp(z, act):
    if act == 0:
        return (z > 0.0).astype(np.float64)
    t = np.tanh(z)
    return 1.0 - t * t


def _forward_pass(dims, act, params, X):
    ws, bs = _unpack(dims, params)
    L = len(ws)
    acts = [X]
    zs = []
    h = X
    for l in range(L):
        z = h @ ws[l].T + bs[l]
        zs.append(z)
        h = _act(z, act) if l < L - 1 else z
        acts.append(h)
    return ws, acts, zs


def forward_batch(dims, act, params, X, output_index):
    X = np.ascontiguousarray(X, dtype=np.float64)
    _, acts, _ = _forward_pass(dims, act, params, X)
    return acts[-1][:, output_index].copy()


def grad_input_batch(dims, act, params, X, output_index):
    X = np.ascontiguousarray(X, dtype=np.float64)
    ws, _, zs = _forward_pass(dims, act, params, X)
    L = len(ws)
    d = np.zeros((X.shape[0], int(dims[-1])))
    d[:, output_index] = 1.0
    for l in range(L - 1, -1, -1):
        da = d @ ws[l]
        if l > 0:
            d = da * _actp(zs[l - 1], act)
        else:
            return da
    return da


def grad_params_batch(dims, act, params, X, output_index):
    X = np.ascontiguousarray(X, dtype=np.float64)
    ws, acts, zs = _forward_pass(dims, act, params, X)
    L = len(ws)
    B = X.shape[0]
    out = np.empty((B, params.shape[0]))
    offs = []
    off = 0
    for l in range(L):
        offs.append(off)
        off += ws[l].size + ws[l].shape[0]
    d = np.zeros((B, int(dims[-1])))
    d[:, output_index] = 1.0
    for l in range(L - 1, -1, -1):
        dout, din = ws[l].shape
        o = offs[l]
        out[:, o:o + dout * din] = np.einsum("bi,bj->bij", d, acts[l]).reshape(B, dout * din)
        out[:, o + dout * din:o + dout * din + dout] = d
        if l > 0:
            d = (d @ ws[l]) * _actp(zs[l - 1], act)
    return out


def grad_input_cross(dims, act, base_params, deltas, X, output_index):
    """Input gradients for every (parameter draw j, input row i) pair.

    Returns (M*N, d0) with parameter index major: row j*N + i holds the
    gradient at parameters base+deltas[j], input X[i].
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    deltas = np.ascontiguousarray(deltas, dtype=np.float64)
    M = deltas.shape[0]
    N = X.shape[0]
    out = np.empty((M * N, int(dims[0])))
    for j in range(M):
        out[j * N:(j + 1) * N] = grad_input_batch(
            dims, act, base_params + deltas[j], X, output_index)
    return out


def grad_input_perturbed(dims, act, base_params, deltas, x0, output_index):
    """Input gradients at a fixed input for every parameter draw. (M, d0)."""
    x0 = np.asarray(x0, dtype=np.float64)
    return grad_input_cross(dims, act, base_params, deltas, x0[None, :], output_index)


def warmup():
    u = np.array([0.25, 0.75, 0.999])
    erfinv_array(2.0 * u - 1.0)
    dims = np.array([2, 3, 1], dtype=np.int64)
    rng = np.random.default_rng(0)
    params = rng.standard_normal(2 * 3 + 3 + 3 * 1 + 1)
    X = rng.standard_normal((4, 2))
    forward_batch(dims, 1, params, X, 0)
    grad_input_batch(dims, 1, params, X, 0)
    grad_params_batch(dims, 0, params, X, 0)
    grad_input_cross(dims, 1, params, rng.standard_normal((2, params.size)), X, 0)
