import numpy as np
import pytest
import scipy.stats

from molligrad.errors import (AllZeroInput, ConfigInvalid, DegenerateInput,
                              DimensionMismatch)
from molligrad.estimator import SmoothingConfig, smooth_gradient
from molligrad.kernels import Kernel
from molligrad.metrics import (BoundingBox, MetricReport, consistency_metric,
                               gini, invariance_metric, point_game, spearman)
from molligrad.models import MlpModel, make_linear


# --------------------------------------------------------------- spearman

def test_spearman_perfect_and_reversed():
    assert spearman([1, 2, 3, 4], [10, 20, 30, 40]) == 1.0
    assert spearman([1, 2, 3, 4], [40, 30, 20, 10]) == -1.0


def test_spearman_single_swap_fixture():
    # d^2 sums to 2: 1 - 6*2/(4*15) = 0.8
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-15)


def test_spearman_symmetry():
    a = np.array([0.3, -1.2, 5.0, 2.2, 0.0])
    b = np.array([1.0, 0.4, -2.0, 3.3, 1.1])
    assert spearman(a, b) == spearman(b, a)


def test_spearman_invariant_under_monotone_transform():
    rng = np.random.default_rng(7)
    a = rng.standard_normal(40)
    b = rng.standard_normal(40)
    assert spearman(np.exp(a), b) == spearman(a, b)
    assert spearman(a, 3.0 * b + 10.0) == spearman(a, b)


def test_spearman_ties_match_scipy():
    a = np.array([1.0, 2.0, 2.0, 3.0, 1.0, 4.0])
    b = np.array([0.5, 0.5, 2.0, 3.0, 1.0, 1.0])
    expected = scipy.stats.spearmanr(a, b).statistic
    assert spearman(a, b) == pytest.approx(expected, abs=1e-12)


def test_spearman_random_vectors_match_scipy():
    rng = np.random.default_rng(11)
    for _ in range(5):
        a = rng.standard_normal(50)
        b = rng.standard_normal(50)
        expected = scipy.stats.spearmanr(a, b).statistic
        assert spearman(a, b) == pytest.approx(expected, abs=1e-12)


def test_spearman_validation():
    with pytest.raises(DimensionMismatch):
        spearman([1, 2, 3], [1, 2])
    with pytest.raises(ConfigInvalid):
        spearman([1], [2])
    with pytest.raises(DegenerateInput):
        spearman([1, 1, 1], [1, 2, 3])
    with pytest.raises(DegenerateInput):
        spearman([1, 2, 3], [5, 5, 5])
    with pytest.raises(DegenerateInput):
        spearman([1, np.nan, 3], [1, 2, 3])


# ------------------------------------------------------------------- gini

def test_gini_uniform_is_zero():
    assert gini(np.ones(4)) == 0.0
    assert gini(np.full(9, 0.7)) == pytest.approx(0.0, abs=1e-15)


def test_gini_one_hot():
    assert gini([0.0, 0.0, 0.0, 1.0]) == pytest.approx(0.75, abs=1e-15)


def test_gini_small_fixture():
    assert gini([1.0, 1.0, 2.0]) == pytest.approx(1.0 / 6.0, abs=1e-15)


def test_gini_scale_and_sign_invariance():
    rng = np.random.default_rng(3)
    v = rng.standard_normal(30)
    assert gini(3.7 * v) == pytest.approx(gini(v), abs=1e-12)
    assert gini(-v) == gini(v)


def test_gini_bounds_on_random_vectors():
    rng = np.random.default_rng(5)
    for n in (2, 5, 40):
        for _ in range(5):
            g = gini(rng.standard_normal(n))
            assert 0.0 <= g <= (n - 1) / n


def test_gini_matches_lorenz_curve_area():
    # independent route: one minus twice the trapezoid area under the
    # Lorenz curve of sorted magnitudes
    rng = np.random.default_rng(9)
    for _ in range(5):
        v = rng.standard_normal(25)
        mags = np.sort(np.abs(v))
        cum = np.concatenate([[0.0], np.cumsum(mags)]) / mags.sum()
        area = float(np.sum(cum[:-1] + cum[1:]) / (2 * mags.shape[0]))
        assert gini(v) == pytest.approx(1.0 - 2.0 * area, abs=1e-12)


def test_gini_validation():
    with pytest.raises(AllZeroInput):
        gini(np.zeros(5))
    with pytest.raises(DegenerateInput):
        gini([1.0, np.inf])
    with pytest.raises(ConfigInvalid):
        gini([])


# ------------------------------------------------------------- point game

def test_bounding_box_validation_and_contains():
    box = BoundingBox(1, 2, 0, 3)
    assert box.contains(1, 0) and box.contains(2, 3)
    assert not box.contains(0, 0) and not box.contains(3, 1)
    with pytest.raises(ConfigInvalid):
        BoundingBox(2, 1, 0, 3)
    with pytest.raises(ConfigInvalid):
        BoundingBox(-1, 1, 0, 3)


def test_point_game_fixture():
    s = np.zeros((4, 4))
    s[0, 0], s[0, 1], s[1, 0] = 10.0, 9.0, 8.0  # inside
    s[3, 3], s[2, 3] = 7.0, 6.0                 # outside
    assert point_game(s, BoundingBox(0, 1, 0, 1), k=5) == pytest.approx(0.6)
    assert point_game(s, BoundingBox(0, 1, 0, 1), k=3) == 1.0


def test_point_game_whole_grid_box():
    rng = np.random.default_rng(2)
    s = rng.standard_normal((4, 4))
    assert point_game(s, BoundingBox(0, 3, 0, 3), k=16) == 1.0


def test_point_game_uses_magnitudes():
    s = np.zeros((3, 3))
    s[2, 2] = -100.0
    assert point_game(s, BoundingBox(2, 2, 2, 2), k=1) == 1.0


def test_point_game_plateau_resolves_to_lowest_flat_index():
    s = np.ones((3, 3))
    assert point_game(s, BoundingBox(0, 0, 0, 2), k=3) == 1.0
    assert point_game(s, BoundingBox(2, 2, 0, 2), k=3) == 0.0


def test_point_game_grows_with_box():
    rng = np.random.default_rng(4)
    s = rng.standard_normal((6, 6))
    scores = [point_game(s, BoundingBox(0, r, 0, r), k=8) for r in range(6)]
    assert all(b >= a for a, b in zip(scores, scores[1:]))
    assert scores[-1] == 1.0


def test_point_game_validation():
    s = np.ones((3, 3))
    with pytest.raises(DimensionMismatch):
        point_game(np.ones(9), BoundingBox(0, 0, 0, 0), k=1)
    with pytest.raises(ConfigInvalid):
        point_game(s, BoundingBox(0, 0, 0, 0), k=0)
    with pytest.raises(ConfigInvalid):
        point_game(s, BoundingBox(0, 0, 0, 0), k=10)
    with pytest.raises(ConfigInvalid):
        point_game(s, BoundingBox(0, 3, 0, 0), k=1)
    with pytest.raises(DegenerateInput):
        point_game(np.full((2, 2), np.nan), BoundingBox(0, 0, 0, 0), k=1)


# ------------------------------------------------------------ suite level

def _grad_explain(model, x, case_seed):
    return model.grad_input(x)


def _inputs(n, d, seed=0):
    return list(np.random.default_rng(seed).standard_normal((n, d)))


def test_consistency_against_itself_is_one():
    m = MlpModel.initialized((5, 8, 1), "tanh", 2)
    report = consistency_metric(_grad_explain, m, _inputs(4, 5), seed=0,
                                randomized=m)
    assert report.metric == "consistency"
    assert report.value == 1.0
    assert report.n_failed == 0
    assert [c["value"] for c in report.cases] == [1.0, 1.0, 1.0, 1.0]


def test_consistency_randomized_copy_scores_below_one():
    m = MlpModel.initialized((5, 8, 1), "tanh", 2)
    report = consistency_metric(_grad_explain, m, _inputs(6, 5), seed=0)
    assert report.n_failed == 0
    assert 0.0 <= report.value < 1.0


def test_consistency_all_degenerate_reports_none():
    m = MlpModel.initialized((5, 8, 1), "tanh", 2)

    def flat(model, x, case_seed):
        return np.ones(5)

    with pytest.warns(UserWarning):
        report = consistency_metric(flat, m, _inputs(3, 5), seed=0)
    assert report.value is None
    assert report.n_failed == 3
    assert all(c.get("degenerate") for c in report.cases)


def test_consistency_isolates_per_case_errors():
    m = MlpModel.initialized((5, 8, 1), "tanh", 2)
    inputs = _inputs(4, 5)
    bad = inputs[2]

    def explain(model, x, case_seed):
        if np.array_equal(x, bad):
            raise ValueError("boom")
        return model.grad_input(x)

    report = consistency_metric(explain, m, inputs, seed=0)
    assert report.n_failed == 1
    assert "error" in report.cases[2]
    assert report.cases[2]["error"].startswith("ValueError")
    assert report.value is not None


def test_invariance_on_bias_compensated_linear_pair():
    # two affine maps implementing the same function on shifted inputs
    # explain identically, so the score is exactly one
    w = [2.0, -1.0, 0.5]
    shift = np.array([0.1, -0.2, 0.3])
    a = make_linear(w, 0.7)
    b = make_linear(w, 0.7 - float(np.dot(w, shift)))
    k = Kernel("gaussian", 0.3)

    def explain(model, x, case_seed):
        cfg = SmoothingConfig("sg", kernel_input=k, n_input=16, seed=case_seed)
        return smooth_gradient(model, x, cfg).estimate

    report = invariance_metric(explain, a, b, _inputs(4, 3), shift, seed=0)
    assert report.metric == "invariance"
    assert report.value == 1.0
    assert report.n_failed == 0
    for x in _inputs(2, 3, seed=1):
        assert b.eval(x + shift) == pytest.approx(a.eval(x), abs=1e-12)


def test_invariance_null_is_near_zero():
    # unrelated random saliencies per model: rank agreement averages out
    a = MlpModel.initialized((30, 4, 1), "tanh", 0)
    b = MlpModel.initialized((30, 4, 1), "tanh", 1)

    def explain(model, x, case_seed):
        mix = case_seed ^ int(np.abs(model.param_vector).sum() * 1e6)
        return np.random.default_rng(mix % 2**63).standard_normal(30)

    report = invariance_metric(explain, a, b, _inputs(8, 30), np.zeros(30),
                               seed=0)
    assert report.n_failed == 0
    assert abs(report.value) < 0.3


def test_invariance_shift_dimension_checked():
    a = make_linear([1.0, 2.0], 0.0)
    with pytest.raises(DimensionMismatch):
        invariance_metric(_grad_explain, a, a, _inputs(2, 2), np.zeros(3))


def test_metric_report_json():
    report = MetricReport("consistency", 0.5,
                          ({"input_id": 0, "value": 0.5},), 0)
    doc = report.to_json_dict()
    assert doc == {"metric": "consistency", "value": 0.5,
                   "cases": [{"input_id": 0, "value": 0.5}], "n_failed": 0}
