"""Compare the pure-numpy and the compiled backend on the hot kernels.

Times batched input/parameter gradients on a small and a medium MLP, the
full cross-product gradient, and the vectorized inverse error function.
Both backends are loaded explicitly, so the MOLLIGRAD_BACKEND env flag and
the import-time cache are bypassed.

Run:  python benchmarks/bench_backends.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from molligrad.backend import get_impl
from molligrad.models import MlpModel


def _setup(dims, seed):
    model = MlpModel.initialized(dims, "tanh", seed)
    return model._dims_arr, model._act_code, model._flat


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    np_impl = get_impl("numpy")
    try:
        nb_impl = get_impl("numba")
    except Exception as exc:  # noqa: BLE001
        print(f"compiled backend unavailable ({exc}); nothing to compare")
        return
    nb_impl.warmup()

    rng = np.random.default_rng(7)
    cases = []

    for dims, batch in ((( 2, 16, 1), 4096), ((144, 16, 1), 1024)):
        dims_arr, act, flat = _setup(dims, seed=1)
        X = rng.standard_normal((batch, dims[0]))
        label = "x".join(str(d) for d in dims)
        cases.append((f"grad_input  {label} b={batch}",
                      lambda i=np_impl, d=dims_arr, a=act, f=flat, x=X:
                          i.grad_input_batch(d, a, f, x, 0),
                      lambda i=nb_impl, d=dims_arr, a=act, f=flat, x=X:
                          i.grad_input_batch(d, a, f, x, 0)))
        cases.append((f"grad_params {label} b={batch}",
                      lambda i=np_impl, d=dims_arr, a=act, f=flat, x=X:
                          i.grad_params_batch(d, a, f, x, 0),
                      lambda i=nb_impl, d=dims_arr, a=act, f=flat, x=X:
                          i.grad_params_batch(d, a, f, x, 0)))

    dims_arr, act, flat = _setup((2, 16, 1), seed=1)
    X = rng.standard_normal((200, 2))
    deltas = 0.01 * rng.standard_normal((200, flat.shape[0]))
    cases.append(("grad cross 2x16x1 200x200",
                  lambda: np_impl.grad_input_cross(dims_arr, act, flat, deltas, X, 0),
                  lambda: nb_impl.grad_input_cross(dims_arr, act, flat, deltas, X, 0)))

    u = rng.random(1_000_000) * 1.9998 - 0.9999
    cases.append(("erfinv 1e6",
                  lambda: np_impl.erfinv_array(u),
                  lambda: nb_impl.erfinv_array(u)))

    print(f"{'case':34s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, np_fn, nb_fn in cases:
        a = np.asarray(np_fn())
        b = np.asarray(nb_fn())
        worst = float(np.max(np.abs(a - b)))
        t_np = _time(np_fn, args.repeats)
        t_nb = _time(nb_fn, args.repeats)
        print(f"{name:34s} {t_np*1e3:9.2f}ms {t_nb*1e3:9.2f}ms "
              f"{t_np/t_nb:7.1f}x   (max|diff| {worst:.2e})")


if __name__ == "__main__":
    main()
