"""Scoring, decision grids, and the constrained classical baseline."""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .data import Dataset
from .network import FeatureScaler, NetworkShape, TrainedNetwork, weight_columns

ADAM_LR = 0.05
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8
ADAM_STEPS = 3000
DEFAULT_OMEGA = 5.0


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Area under the ROC curve, Mann-Whitney form; ties count one half."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be matching 1-D sequences")
    pos = y == 1
    neg = y == -1
    n_pos, n_neg = int(pos.sum()), int(neg.sum())
    if n_pos + n_neg != s.size:
        raise ValueError("labels must be -1 or +1")
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(s.size, dtype=np.float64)
    i = 0
    sorted_s = s[order]
    while i < s.size:
        j = i
        while j < s.size and sorted_s[j] == sorted_s[i]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + j + 1)  # mean of 1-based ranks i+1..j
        i = j
    u = ranks[pos].sum() - 0.5 * n_pos * (n_pos + 1)
    return float(u / (n_pos * n_neg))


def decision_grid(
    predictor: Callable[[np.ndarray], np.ndarray],
    bounds: tuple[tuple[float, float], tuple[float, float]],
    resolution: int,
) -> np.ndarray:
    """Scores on a uniform 2-D grid; entry [i, j] is at (x1_i, x2_j)."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    (x1lo, x1hi), (x2lo, x2hi) = bounds
    x1 = np.linspace(x1lo, x1hi, resolution)
    x2 = np.linspace(x2lo, x2hi, resolution)
    pts = np.column_stack([np.repeat(x1, resolution), np.tile(x2, resolution)])
    vals = np.asarray(predictor(pts), dtype=np.float64).reshape(
        resolution, resolution
    )
    return vals


def grid_csv(
    bounds: tuple[tuple[float, float], tuple[float, float]],
    resolution: int,
    matrix: np.ndarray,
) -> str:
    """The grid as plot-ready `x1,x2,Y` CSV text."""
    (x1lo, x1hi), (x2lo, x2hi) = bounds
    x1 = np.linspace(x1lo, x1hi, resolution)
    x2 = np.linspace(x2lo, x2hi, resolution)
    buf = io.StringIO()
    buf.write("x1,x2,Y\n")
    for i in range(resolution):
        for j in range(resolution):
            buf.write(
                f"{float(x1[i])!r},{float(x2[j])!r},{float(matrix[i, j])!r}\n"
            )
    return buf.getvalue()


# -- classical baseline -----------------------------------------------------


def _theta_split(shape: NetworkShape, theta: np.ndarray):
    cols = len(weight_columns(shape))
    nw = shape.n_hidden * cols
    w = theta[:nw].reshape(shape.n_hidden, cols)
    v = theta[nw : nw + shape.n_hidden]
    v0 = theta[-1]
    return w, v, v0


def _theta_size(shape: NetworkShape) -> int:
    return shape.n_hidden * len(weight_columns(shape)) + shape.n_hidden + 1


def classical_loss_and_grad(
    shape: NetworkShape,
    X: np.ndarray,
    y: np.ndarray,
    theta: np.ndarray,
    omega: float,
) -> tuple[float, np.ndarray]:
    """MSE plus the level-pinning penalty, with its analytic gradient.

    Penalty: omega * sum over w and v entries of (p^2-1)^2, plus
    omega * (v0-a)^2 (v0-b)^2 for the output bias levels (a, b).
    X must already include the bias column when the shape uses one.
    """
    w, v, v0 = _theta_split(shape, theta)
    n = X.shape[0]
    act = shape.activation
    U = X @ w.T
    G = act(U)
    Gp = act.derivative_at(U)
    Y = G @ v + v0
    r = y - Y
    mse = float(r @ r) / n

    dY = -2.0 * r / n
    dv = dY @ G
    dv0 = float(dY.sum())
    dU = dY[:, None] * (v[None, :] * Gp)
    dw = dU.T @ X

    a, b = shape.last_bias_levels
    pen_w = float(((w**2 - 1.0) ** 2).sum() + ((v**2 - 1.0) ** 2).sum())
    pen_v0 = float((v0 - a) ** 2 * (v0 - b) ** 2)
    loss = mse + omega * (pen_w + pen_v0)

    dw = dw + omega * 4.0 * w * (w**2 - 1.0)
    dv = dv + omega * 4.0 * v * (v**2 - 1.0)
    dv0 = dv0 + omega * 2.0 * (v0 - a) * (v0 - b) * (2.0 * v0 - a - b)

    grad = np.concatenate([dw.ravel(), dv.ravel(), [dv0]])
    return loss, grad


@dataclass(frozen=True)
class ClassicalRun:
    network: TrainedNetwork
    auc: float
    final_loss: float
    run_index: int


def classical_train(
    shape: NetworkShape,
    dataset: Dataset,
    omega: float = DEFAULT_OMEGA,
    runs: int = 10,
    seed: int = 0,
    lr: float = ADAM_LR,
    betas: tuple[float, float] = ADAM_BETAS,
    steps: int = ADAM_STEPS,
) -> list[ClassicalRun]:
    """Adam on the penalized continuous relaxation of the same architecture.

    Each run initializes from seed + run_index.  Runs whose loss turns
    non-finite are excluded with a warning.
    """
    if omega < 0:
        raise ValueError("omega must be non-negative")
    X_raw = dataset.features
    y = dataset.labels.astype(np.float64)
    scaler = FeatureScaler.fit(X_raw)
    X = scaler.transform(X_raw)
    if shape.first_layer_bias:
        X = np.hstack([np.ones((X.shape[0], 1)), X])
    a, b = shape.last_bias_levels
    b1, b2 = betas

    out: list[ClassicalRun] = []
    for run in range(runs):
        rng = np.random.default_rng(seed + run)
        theta = np.concatenate(
            [
                rng.uniform(-1.0, 1.0, _theta_size(shape) - 1),
                [rng.uniform(min(a, b), max(a, b))],
            ]
        )
        m = np.zeros_like(theta)
        s = np.zeros_like(theta)
        diverged = False
        loss = float("nan")
        for t in range(1, steps + 1):
            loss, grad = classical_loss_and_grad(shape, X, y, theta, omega)
            if not np.isfinite(loss):
                diverged = True
                break
            m = b1 * m + (1.0 - b1) * grad
            s = b2 * s + (1.0 - b2) * grad**2
            mhat = m / (1.0 - b1**t)
            shat = s / (1.0 - b2**t)
            theta = theta - lr * mhat / (np.sqrt(shat) + ADAM_EPS)
        if diverged or not np.all(np.isfinite(theta)):
            warnings.warn(f"classical run {run} diverged; excluded", stacklevel=2)
            continue
        w, v, v0 = _theta_split(shape, theta)
        net = TrainedNetwork(shape=shape, w=w.copy(), v=v.copy(), v0=float(v0),
                             scaler=scaler)
        scores = net.output(X_raw)
        out.append(
            ClassicalRun(
                network=net,
                auc=roc_auc(scores, dataset.labels),
                final_loss=float(loss),
                run_index=run,
            )
        )
    return out


# -- comparison statistics ---------------------------------------------------


def median_of(values: Sequence[float]) -> float:
    s = sorted(values)
    if not s:
        raise ValueError("no values")
    n = len(s)
    if n % 2:
        return float(s[n // 2])
    return 0.5 * (s[n // 2 - 1] + s[n // 2])


def percentile_nearest_rank(values: Sequence[float], pct: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th order statistic."""
    s = sorted(values)
    if not s:
        raise ValueError("no values")
    rank = int(np.ceil(pct / 100.0 * len(s)))
    rank = min(max(rank, 1), len(s))
    return float(s[rank - 1])


@dataclass(frozen=True)
class EvalReport:
    auc: float
    classical_aucs: tuple[float, ...] = ()
    median: float | None = None
    p20: float | None = None
    p80: float | None = None
    boundary_grid: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.auc <= 1.0:
            raise ValueError("auc must lie in [0, 1]")


def compare(quantum_auc: float, classical_runs: Sequence) -> EvalReport:
    """Quantum AUC next to the median and 20/80 percentiles of the
    classical runs (ClassicalRun objects or bare AUC floats)."""
    if len(classical_runs) < 1:
        raise ValueError("need at least one classical run")
    aucs = tuple(
        float(r.auc) if hasattr(r, "auc") else float(r) for r in classical_runs
    )
    return EvalReport(
        auc=float(quantum_auc),
        classical_aucs=aucs,
        median=median_of(aucs),
        p20=percentile_nearest_rank(aucs, 20.0),
        p80=percentile_nearest_rank(aucs, 80.0),
    )
