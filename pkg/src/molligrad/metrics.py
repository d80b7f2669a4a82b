"""Explanation quality metrics.

Four ways to score a saliency method without ground-truth attributions:

  spearman      rank agreement between two saliency vectors
  gini          sparseness of a saliency vector in [0, 1]
  point_game    fraction of the top-k |saliency| cells inside a target box
  consistency   rank agreement between explanations of a trained model and
                of weight-randomized copies (lower is better: explanations
                should depend on what the model learned)
  invariance    rank agreement between explanations of two models that
                implement the same function on shifted inputs (higher is
                better: explanations should not depend on representation)

Saliency vectors are treated as exact; ranks use average ranking for ties.
Degenerate cases (constant saliency, all-zero saliency) raise typed errors
at the vector level and are excluded with a warning at the suite level.
"""

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import AllZeroInput, ConfigInvalid, DegenerateInput, DimensionMismatch
from .sampling import derive_seed

__all__ = ["spearman", "gini", "BoundingBox", "point_game",
           "consistency_metric", "invariance_metric", "MetricReport"]


def _ranks(v: np.ndarray) -> np.ndarray:
    """Average ranks (1-based); ties share the mean of their positions."""
    order = np.argsort(v, kind="stable")
    ranks = np.empty(v.shape[0], dtype=np.float64)
    sv = v[order]
    i = 0
    while i < v.shape[0]:
        j = i
        while j + 1 < v.shape[0] and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(a, b) -> float:
    """Spearman rank correlation in [-1, 1].

    Computed as the Pearson correlation of average ranks, which stays
    correct under ties. Constant input has no rank ordering and raises
    DegenerateInput rather than returning a coerced value.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"length mismatch {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < 2:
        raise ConfigInvalid("need at least 2 entries for rank correlation")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DegenerateInput("non-finite saliency values")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise DegenerateInput("constant input has undefined rank correlation")
    ra, rb = _ranks(a), _ranks(b)
    ra -= ra.mean()
    rb -= rb.mean()
    denom = np.sqrt(np.add.reduce(ra * ra) * np.add.reduce(rb * rb))
    return float(np.add.reduce(ra * rb) / denom)


def gini(v) -> float:
    """Sparseness of |v| in [0, 1]; 0 for uniform magnitudes, -> 1 for
    a single spike. Computed on magnitudes sorted ascending:

        G = sum_k (2k - n - 1) |v|_(k) / (n * sum |v|)

    All-zero input has undefined sparseness and raises AllZeroInput.
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] < 1:
        raise ConfigInvalid("need at least 1 entry")
    if not np.all(np.isfinite(v)):
        raise DegenerateInput("non-finite saliency values")
    mags = np.sort(np.abs(v))
    total = np.add.reduce(mags)
    if total == 0.0:
        raise AllZeroInput("all-zero saliency has undefined sparseness")
    n = mags.shape[0]
    k = np.arange(1, n + 1, dtype=np.float64)
    return float(np.add.reduce((2.0 * k - n - 1.0) * mags) / (n * total))


@dataclass(frozen=True)
class BoundingBox:
    """Inclusive axis-aligned cell box on a 2-D grid (row0..row1, col0..col1)."""

    row0: int
    row1: int
    col0: int
    col1: int

    def __post_init__(self):
        if self.row0 > self.row1 or self.col0 > self.col1:
            raise ConfigInvalid("bounding box must satisfy min <= max per axis")
        if min(self.row0, self.col0) < 0:
            raise ConfigInvalid("bounding box indices must be non-negative")

    def contains(self, row: int, col: int) -> bool:
        return (self.row0 <= row <= self.row1) and (self.col0 <= col <= self.col1)


def point_game(saliency, box: BoundingBox, k: int = 1) -> float:
    """Fraction of the k largest-|saliency| cells that land inside box.

    saliency is a 2-D array; ties in |saliency| resolve to the lowest flat
    index (stable sort on the negated magnitudes), so the score is
    deterministic on plateaus.
    """
    s = np.asarray(saliency, dtype=np.float64)
    if s.ndim != 2:
        raise DimensionMismatch(f"saliency must be 2-D, got ndim={s.ndim}")
    if not np.all(np.isfinite(s)):
        raise DegenerateInput("non-finite saliency values")
    n = s.size
    if not (1 <= k <= n):
        raise ConfigInvalid(f"k must be in [1, {n}], got {k}")
    if box.row1 >= s.shape[0] or box.col1 >= s.shape[1]:
        raise ConfigInvalid("bounding box exceeds saliency grid")
    flat = np.abs(s).reshape(-1)
    top = np.argsort(-flat, kind="stable")[:k]
    rows, cols = np.unravel_index(top, s.shape)
    hits = sum(1 for r, c in zip(rows, cols) if box.contains(int(r), int(c)))
    return hits / k


@dataclass(frozen=True)
class MetricReport:
    """Aggregate metric over a case list; value is None when every case
    was degenerate or failed."""

    metric: str
    value: Optional[float]
    cases: tuple
    n_failed: int

    def to_json_dict(self) -> dict:
        return {
            "metric": self.metric,
            "value": self.value,
            "cases": list(self.cases),
            "n_failed": self.n_failed,
        }


def _minmax_norm(v):
    lo, hi = v.min(), v.max()
    if hi == lo:
        raise DegenerateInput("constant saliency cannot be min-max normalized")
    return (v - lo) / (hi - lo)


def _absmax_norm(v):
    m = np.abs(v).max()
    if m == 0.0:
        raise AllZeroInput("all-zero saliency cannot be magnitude normalized")
    return np.abs(v) / m


def consistency_metric(explain, model, inputs, seed: int = 0,
                       randomized=None) -> MetricReport:
    """Mean |rank correlation| between explanations of the trained model and
    of a weight-randomized copy, averaged over two normalizations (min-max
    and magnitude/max). Lower is better; a method insensitive to the
    weights scores near 1.

    explain(model, x, case_seed) -> saliency vector. Each case gets its own
    derived seed so the estimator noise is paired across the two models.
    randomized overrides the comparison model (default: seed-derived
    weight randomization of model).
    """
    if randomized is None:
        randomized = model.randomize_params(derive_seed(seed, 0))
    cases = []
    vals = []
    n_failed = 0
    for i, x in enumerate(inputs):
        case_seed = derive_seed(seed, i + 1)
        try:
            a = np.asarray(explain(model, x, case_seed), dtype=np.float64).reshape(-1)
            b = np.asarray(explain(randomized, x, case_seed), dtype=np.float64).reshape(-1)
            per_norm = []
            for norm in (_minmax_norm, _absmax_norm):
                per_norm.append(abs(spearman(norm(a), norm(b))))
            v = float(np.mean(per_norm))
            cases.append({"input_id": i, "value": v})
            vals.append(v)
        except DegenerateInput as exc:
            warnings.warn(f"consistency case {i} degenerate: {exc}")
            cases.append({"input_id": i, "degenerate": True})
            n_failed += 1
        except Exception as exc:  # noqa: BLE001 - case isolation by design
            cases.append({"input_id": i, "error": f"{type(exc).__name__}: {exc}"})
            n_failed += 1
    value = float(np.mean(vals)) if vals else None
    return MetricReport("consistency", value, tuple(cases), n_failed)


def invariance_metric(explain, model_a, model_b, inputs, shift, seed: int = 0) -> MetricReport:
    """Mean rank correlation between explanations of two models that
    compute the same function up to the input shift: model_b sees x + shift
    where model_a sees x. Higher is better. Per-case seeds are shared
    across the pair so sampling noise cancels in the comparison.
    """
    shift = np.asarray(shift, dtype=np.float64).reshape(-1)
    cases = []
    vals = []
    n_failed = 0
    for i, x in enumerate(inputs):
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != shift.shape[0]:
            raise DimensionMismatch("shift dimension must match input dimension")
        case_seed = derive_seed(seed, i + 1)
        try:
            a = np.asarray(explain(model_a, x, case_seed), dtype=np.float64).reshape(-1)
            b = np.asarray(explain(model_b, x + shift, case_seed), dtype=np.float64).reshape(-1)
            v = spearman(a, b)
            cases.append({"input_id": i, "value": v})
            vals.append(v)
        except DegenerateInput as exc:
            warnings.warn(f"invariance case {i} degenerate: {exc}")
            cases.append({"input_id": i, "degenerate": True})
            n_failed += 1
        except Exception as exc:  # noqa: BLE001 - case isolation by design
            cases.append({"input_id": i, "error": f"{type(exc).__name__}: {exc}"})
            n_failed += 1
    value = float(np.mean(vals)) if vals else None
    return MetricReport("invariance", value, tuple(cases), n_failed)
