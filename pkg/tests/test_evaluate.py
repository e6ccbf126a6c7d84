"""AUC, decision grids, classical baseline, comparison statistics."""

from __future__ import annotations

import numpy as np
import pytest

from qubonet.data import Dataset, gen_circles
from qubonet.evaluate import (
    ClassicalRun,
    EvalReport,
    classical_loss_and_grad,
    classical_train,
    compare,
    decision_grid,
    grid_csv,
    median_of,
    percentile_nearest_rank,
    roc_auc,
)
from qubonet.network import NetworkShape


def pairwise_auc(scores, labels):
    """Brute-force reference: P(pos > neg) + 0.5 P(tie)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == -1]
    wins = ties = 0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1
            elif p == q:
                ties += 1
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


class TestRocAuc:
    def test_worked_example(self):
        got = roc_auc([0.1, 0.4, 0.35, 0.8], [-1, -1, 1, 1])
        assert got == pytest.approx(0.75)

    def test_perfect_separation(self):
        assert roc_auc([0, 0, 1, 1], [-1, -1, 1, 1]) == 1.0

    def test_inverted_scores(self):
        assert roc_auc([1, 1, 0, 0], [-1, -1, 1, 1]) == 0.0

    def test_all_tied_is_half(self):
        assert roc_auc([0.5, 0.5, 0.5, 0.5], [-1, 1, -1, 1]) == 0.5

    def test_matches_pairwise_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(4, 40))
            labels = np.where(rng.random(n) < 0.5, 1, -1)
            labels[0], labels[1] = 1, -1
            # quantized scores force tie groups
            scores = np.round(rng.normal(size=n), 1)
            assert roc_auc(scores, labels) == pytest.approx(
                pairwise_auc(scores, labels), abs=1e-12
            )

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            roc_auc([0.1, 0.2], [1, 1])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            roc_auc([0.1], [1, -1])


class TestDecisionGrid:
    def test_grid_values_and_orientation(self):
        grid = decision_grid(
            lambda X: X[:, 0] + 10 * X[:, 1],
            bounds=((0.0, 1.0), (0.0, 2.0)),
            resolution=3,
        )
        assert grid.shape == (3, 3)
        # [i, j] indexes (x1_i, x2_j)
        assert grid[0, 0] == pytest.approx(0.0)
        assert grid[2, 0] == pytest.approx(1.0)
        assert grid[0, 2] == pytest.approx(20.0)

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            decision_grid(lambda X: X[:, 0], ((0, 1), (0, 1)), resolution=1)

    def test_grid_csv_round_trip_values(self):
        bounds = ((-1.0, 1.0), (-1.0, 1.0))
        matrix = decision_grid(lambda X: X[:, 0] * X[:, 1], bounds, 2)
        text = grid_csv(bounds, 2, matrix)
        lines = text.strip().splitlines()
        assert lines[0] == "x1,x2,Y"
        rows = [tuple(float(v) for v in ln.split(",")) for ln in lines[1:]]
        assert len(rows) == 4
        for x1, x2, y in rows:
            assert y == pytest.approx(x1 * x2)


class TestClassicalGradients:
    def finite_difference(self, shape, X, y, theta, omega, eps=1e-6):
        grad = np.zeros_like(theta)
        for k in range(len(theta)):
            up, down = theta.copy(), theta.copy()
            up[k] += eps
            down[k] -= eps
            lu, _ = classical_loss_and_grad(shape, X, y, up, omega)
            ld, _ = classical_loss_and_grad(shape, X, y, down, omega)
            grad[k] = (lu - ld) / (2 * eps)
        return grad

    @pytest.mark.parametrize("omega", [0.0, 5.0])
    @pytest.mark.parametrize("activation", ["square", "relu2", "sigmoid-fit"])
    def test_gradients_match_finite_differences(self, omega, activation):
        from qubonet.network import activation_preset

        rng = np.random.default_rng(1)
        shape = NetworkShape(
            n_features=2, n_hidden=2, n_bits=1,
            activation=activation_preset(activation),
        )
        X = rng.uniform(-1, 1, size=(12, 2))
        y = np.where(rng.random(12) < 0.5, 1.0, -1.0)
        n_theta = shape.n_hidden * shape.n_inputs + shape.n_hidden + 1
        for _ in range(5):
            theta = rng.uniform(-1.2, 1.2, size=n_theta)
            _, grad = classical_loss_and_grad(shape, X, y, theta, omega)
            want = self.finite_difference(shape, X, y, theta, omega)
            scale = np.maximum(np.abs(want), 1.0)
            assert np.max(np.abs(grad - want) / scale) < 1e-5

    def test_penalty_pulls_weights_to_levels(self):
        # omega-only loss is minimized at w,v in {-1,1} and v0 in the levels
        shape = NetworkShape(n_features=1, n_hidden=1, n_bits=1)
        X = np.zeros((2, 1))
        y = np.array([1.0, -1.0])
        at_level = np.array([1.0, -1.0, -0.5])
        _, grad = classical_loss_and_grad(shape, X, y, at_level, omega=100.0)
        # penalty gradient vanishes at the discrete levels
        off_level = np.array([0.5, -1.0, -0.5])
        _, grad_off = classical_loss_and_grad(shape, X, y, off_level, omega=100.0)
        assert abs(grad[0]) < abs(grad_off[0])


class TestClassicalTrain:
    def test_runs_are_seeded_and_scored(self):
        ds = gen_circles(n=80, seed=2)
        shape = NetworkShape(n_features=2, n_hidden=2, n_bits=1)
        runs = classical_train(shape, ds, omega=5.0, runs=3, seed=0, steps=200)
        assert len(runs) == 3
        assert [r.run_index for r in runs] == [0, 1, 2]
        for r in runs:
            assert 0.0 <= r.auc <= 1.0
            assert np.isfinite(r.final_loss)

    def test_deterministic(self):
        ds = gen_circles(n=60, seed=3)
        shape = NetworkShape(n_features=2, n_hidden=2, n_bits=1)
        a = classical_train(shape, ds, runs=2, seed=5, steps=100)
        b = classical_train(shape, ds, runs=2, seed=5, steps=100)
        assert [r.auc for r in a] == [r.auc for r in b]
        np.testing.assert_array_equal(a[0].network.w, b[0].network.w)

    def test_learns_circles(self):
        ds = gen_circles(n=150, seed=4)
        shape = NetworkShape(n_features=2, n_hidden=2, n_bits=1)
        runs = classical_train(shape, ds, omega=5.0, runs=5, seed=1, steps=1500)
        assert max(r.auc for r in runs) > 0.9


class TestStats:
    def test_median_midpoint(self):
        assert median_of([3.0, 1.0, 2.0]) == 2.0
        assert median_of([4.0, 1.0, 2.0, 3.0]) == 2.5

    def test_percentile_nearest_rank(self):
        vals = [float(k) for k in range(1, 11)]
        assert percentile_nearest_rank(vals, 20) == 2.0
        assert percentile_nearest_rank(vals, 80) == 8.0
        assert percentile_nearest_rank(vals, 100) == 10.0

    def test_percentile_single_value(self):
        assert percentile_nearest_rank([7.0], 20) == 7.0
        assert percentile_nearest_rank([7.0], 80) == 7.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            median_of([])
        with pytest.raises(ValueError):
            percentile_nearest_rank([], 50)


class TestCompare:
    def test_report_fields(self):
        runs = [
            ClassicalRun(network=None, auc=a, final_loss=0.1, run_index=i)
            for i, a in enumerate([0.6, 0.8, 0.7, 0.9, 0.5])
        ]
        report = compare(0.95, runs)
        assert report.auc == 0.95
        assert report.median == 0.7
        assert report.p20 == 0.5
        assert report.p80 == 0.8
        assert sorted(report.classical_aucs) == [0.5, 0.6, 0.7, 0.8, 0.9]

    def test_accepts_plain_floats(self):
        report = compare(0.9, [0.5, 0.6, 0.7])
        assert report.median == 0.6

    def test_auc_bounds_validated(self):
        with pytest.raises(ValueError):
            EvalReport(auc=1.5)
