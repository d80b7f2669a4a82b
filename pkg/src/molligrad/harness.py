"""Built-in desk-scale models, datasets, and metric suites.

Everything here is small enough to run in seconds yet non-trivial enough
for the metrics to discriminate:

  - a 2-16-1 tanh classifier trained on the synthetic two-blob dataset
    (the bundled demo model for the CLI),
  - a 144-16-1 tanh classifier trained to separate 12x12 noise images
    from images containing a Gaussian bump at a known location (all four
    metric suites).

The metric suites all run on the image classifier because rank
correlations need many features per case to say anything: a 2-feature
saliency has rank correlation exactly +-1, which would make consistency
and invariance vacuously 1. The invariance pair is the image model and a
second model trained on brightness-shifted copies of the same images with
the same init, the desk analog of a constant data offset.

Trained models are cached per (role, seed, shift) inside the process;
training itself is deterministic full-batch gradient descent, so any two
processes reproduce the same weights bit-for-bit.
"""

import numpy as np

from .errors import ConfigInvalid, DegenerateInput
from .estimator import SmoothingConfig, smooth_gradient
from .kernels import KERNEL_KINDS, Kernel, solve_epsilon
from .metrics import (BoundingBox, MetricReport, consistency_metric, gini,
                      invariance_metric, point_game)
from .models import MlpModel, blobs_dataset, train_logistic
from .sampling import STREAM_DATA, RngState, derive_seed

__all__ = ["trained_blobs_model", "eval_points", "bump_images",
           "trained_image_model", "make_explainer", "consistency_suite",
           "invariance_suite", "localization_suite", "sparseness_suite",
           "run_suite", "run_grid", "SUITES", "MODES", "IMAGE_SIDE",
           "BLOB_SHIFT", "IMAGE_SHIFT"]

SUITES = ("consistency", "invariance", "localization", "sparseness")
MODES = ("sg", "ng", "fg")
IMAGE_SIDE = 12
BLOB_SHIFT = (1.5, -0.5)
IMAGE_SHIFT = 0.35  # constant brightness offset for the invariance pair

_cache: dict = {}


def trained_blobs_model(seed: int = 0, shift=(0.0, 0.0)) -> MlpModel:
    """2-16-1 tanh blob classifier; shift translates the training data
    (same init seed), giving the invariance suite its model pair."""
    key = ("blobs", int(seed), tuple(float(s) for s in shift))
    if key not in _cache:
        X, y = blobs_dataset(seed, n_per_class=200, shift=shift)
        init = MlpModel.initialized((2, 16, 1), "tanh", seed)
        model, _ = train_logistic(init, X, y, epochs=300, lr=1.0)
        _cache[key] = model
    return _cache[key]


def eval_points(seed: int = 0, count: int = 20):
    """Fresh blob draws (both classes) to explain; disjoint from the
    training data by seed derivation."""
    if count < 2 or count % 2:
        raise ConfigInvalid("count must be even and >= 2")
    X, _ = blobs_dataset(derive_seed(seed, 1), n_per_class=count // 2)
    return [X[i] for i in range(count)]


def _bump(center_r, center_c, sigma=1.5, amplitude=1.0):
    rr, cc = np.meshgrid(np.arange(IMAGE_SIDE), np.arange(IMAGE_SIDE),
                         indexing="ij")
    d2 = (rr - center_r) ** 2 + (cc - center_c) ** 2
    return amplitude * np.exp(-0.5 * d2 / sigma**2)


def bump_images(seed: int, count: int, box_halfwidth: int = 3):
    """12x12 uniform-noise images with one Gaussian bump each.

    Returns (images (count, 144), boxes, centers); the box is the bump
    center +- box_halfwidth cells, clipped to the grid.
    """
    gen = RngState(int(seed), STREAM_DATA).generator()
    images = np.empty((count, IMAGE_SIDE * IMAGE_SIDE))
    boxes = []
    centers = []
    lo, hi = 3, IMAGE_SIDE - 4  # keep the bump away from the border
    for i in range(count):
        r = int(gen.integers(lo, hi + 1))
        c = int(gen.integers(lo, hi + 1))
        noise = 0.2 * gen.random((IMAGE_SIDE, IMAGE_SIDE))
        images[i] = (noise + _bump(r, c)).reshape(-1)
        boxes.append(BoundingBox(max(r - box_halfwidth, 0),
                                 min(r + box_halfwidth, IMAGE_SIDE - 1),
                                 max(c - box_halfwidth, 0),
                                 min(c + box_halfwidth, IMAGE_SIDE - 1)))
        centers.append((r, c))
    return images, boxes, centers


def _noise_images(seed: int, count: int):
    gen = RngState(int(seed), STREAM_DATA).generator()
    return 0.2 * gen.random((count, IMAGE_SIDE * IMAGE_SIDE))


def trained_image_model(seed: int = 0, shift: float = 0.0) -> MlpModel:
    """144-16-1 tanh classifier trained to tell bump images from noise;
    shift adds a constant brightness offset to the training images (same
    init seed), giving the invariance suite its model pair."""
    key = ("image", int(seed), float(shift))
    if key not in _cache:
        pos, _, _ = bump_images(derive_seed(seed, 3), 20)
        neg = _noise_images(derive_seed(seed, 4), 20)
        X = np.concatenate([pos, neg], axis=0) + float(shift)
        y = np.concatenate([np.ones(20), np.zeros(20)])
        init = MlpModel.initialized((IMAGE_SIDE * IMAGE_SIDE, 16, 1), "tanh", seed)
        model, _ = train_logistic(init, X, y, epochs=300, lr=0.5)
        _cache[key] = model
    return _cache[key]


def make_explainer(mode: str, kernel_kind: str, n_input: int = 50,
                   n_params: int = 50, alpha: float = 0.9,
                   r_params: float = 0.01):
    """Build explain(model, x, seed) -> saliency vector for one mode+kernel.

    Input-side bandwidth is chosen per input from its spread,
    r = max(x) - mean(x), at confidence alpha; the parameter-side
    bandwidth comes from r_params at the same alpha with relative
    per-parameter scaling.
    """
    if mode not in MODES:
        raise ConfigInvalid(f"mode must be one of {MODES}, got {mode!r}")
    if kernel_kind not in KERNEL_KINDS:
        raise ConfigInvalid(f"unknown kernel {kernel_kind!r}")
    kernel_params = None
    if mode in ("ng", "fg"):
        kernel_params = Kernel(kernel_kind,
                               solve_epsilon(kernel_kind, r_params, alpha))

    def explain(model, x, seed):
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        kernel_input = None
        if mode in ("sg", "fg"):
            r = float(np.max(x) - np.mean(x))
            if r <= 0.0:
                raise DegenerateInput("input has no spread; cannot pick a bandwidth")
            kernel_input = Kernel(kernel_kind, solve_epsilon(kernel_kind, r, alpha))
        cfg = SmoothingConfig(mode=mode, kernel_input=kernel_input,
                              kernel_params=kernel_params,
                              n_input=n_input, n_params=n_params,
                              seed=int(seed))
        return smooth_gradient(model, x, cfg).estimate

    return explain


def _suite_images(seed: int, count: int):
    images, boxes, _ = bump_images(derive_seed(seed, 5), count)
    return images, boxes


def consistency_suite(mode: str, kernel_kind: str, seed: int = 0,
                      n_inputs: int = 8) -> MetricReport:
    model = trained_image_model(seed)
    images, _ = _suite_images(seed, n_inputs)
    explain = make_explainer(mode, kernel_kind)
    return consistency_metric(explain, model, list(images),
                              seed=derive_seed(seed, 100))


def invariance_suite(mode: str, kernel_kind: str, seed: int = 0,
                     n_inputs: int = 8) -> MetricReport:
    m1 = trained_image_model(seed)
    m2 = trained_image_model(seed, shift=IMAGE_SHIFT)
    images, _ = _suite_images(seed, n_inputs)
    shift = np.full(IMAGE_SIDE * IMAGE_SIDE, IMAGE_SHIFT)
    explain = make_explainer(mode, kernel_kind)
    return invariance_metric(explain, m1, m2, list(images), shift,
                             seed=derive_seed(seed, 101))


def _image_cases(mode, kernel_kind, seed, n_images, score):
    """Shared loop for the image suites; score(saliency_2d, i) -> float."""
    model = trained_image_model(seed)
    images, boxes = _suite_images(seed, n_images)
    explain = make_explainer(mode, kernel_kind)
    cases = []
    vals = []
    n_failed = 0
    for i in range(n_images):
        try:
            sal = explain(model, images[i], derive_seed(derive_seed(seed, 102), i))
            v = float(score(sal.reshape(IMAGE_SIDE, IMAGE_SIDE), boxes[i]))
            cases.append({"input_id": i, "value": v})
            vals.append(v)
        except DegenerateInput:
            cases.append({"input_id": i, "degenerate": True})
            n_failed += 1
        except Exception as exc:  # noqa: BLE001 - case isolation by design
            cases.append({"input_id": i, "error": f"{type(exc).__name__}: {exc}"})
            n_failed += 1
    value = float(np.mean(vals)) if vals else None
    return cases, value, n_failed


def localization_suite(mode: str, kernel_kind: str, seed: int = 0,
                       n_images: int = 8, k: int = 5,
                       box: str = "bump") -> MetricReport:
    """Point-game score against the bump bounding boxes; box="whole"
    replaces them with the full grid (score must then be 1)."""
    if box not in ("bump", "whole"):
        raise ConfigInvalid("box must be 'bump' or 'whole'")
    whole = BoundingBox(0, IMAGE_SIDE - 1, 0, IMAGE_SIDE - 1)

    def score(sal2d, case_box):
        target = whole if box == "whole" else case_box
        return point_game(sal2d, target, k=k)

    cases, value, n_failed = _image_cases(mode, kernel_kind, seed, n_images, score)
    return MetricReport("localization", value, tuple(cases), n_failed)


def sparseness_suite(mode: str, kernel_kind: str, seed: int = 0,
                     n_images: int = 8) -> MetricReport:
    cases, value, n_failed = _image_cases(
        mode, kernel_kind, seed, n_images,
        lambda sal2d, _box: gini(sal2d.reshape(-1)))
    return MetricReport("sparseness", value, tuple(cases), n_failed)


_SUITE_FNS = {
    "consistency": consistency_suite,
    "invariance": invariance_suite,
    "localization": localization_suite,
    "sparseness": sparseness_suite,
}


def run_suite(suite: str, mode: str, kernel_kind: str, seed: int = 0,
              **kwargs) -> MetricReport:
    if suite not in _SUITE_FNS:
        raise ConfigInvalid(f"suite must be one of {SUITES}, got {suite!r}")
    return _SUITE_FNS[suite](mode, kernel_kind, seed=seed, **kwargs)


def run_grid(suites, modes=MODES, kinds=KERNEL_KINDS, seed: int = 0, **kwargs):
    """Evaluate each requested suite on every mode x kernel combination.

    Returns {(suite, mode, kind): MetricReport} in deterministic order.
    """
    out = {}
    for suite in suites:
        for mode in modes:
            for kind in kinds:
                out[(suite, mode, kind)] = run_suite(suite, mode, kind,
                                                     seed=seed, **kwargs)
    return out
