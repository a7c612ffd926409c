"""Bagged model training and per-player FPTS prediction distributions.

Every member model gets its own seed derived from (master_seed, index), so
results do not depend on execution order or on how many workers ran the
training.  Reductions are always by model index.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import WindowDataset
from .errors import EnsembleTrainingError, TrainingDivergedError
from .network import TrainedModel, TrainingConfig, predict_batch, train
from .seeds import mix64

RETRY_SALT = 0x5EED


@dataclass
class Ensemble:
    models: list[TrainedModel]
    window_index: int
    master_seed: int

    def __len__(self):
        return len(self.models)


@dataclass
class PredictionDistribution:
    """One player's per-model FPTS samples with interval summary."""

    player_id: str
    samples: np.ndarray
    mean: float
    ci_low: float
    ci_high: float


def model_seed(master_seed: int, index: int) -> int:
    return mix64(master_seed, index)


def _train_member(args):
    dataset, hyper, master_seed, index = args
    seed = model_seed(master_seed, index)
    try:
        return index, train(dataset, hyper, seed)
    except TrainingDivergedError:
        pass
    try:
        return index, train(dataset, hyper, mix64(seed, RETRY_SALT))
    except TrainingDivergedError:
        raise EnsembleTrainingError(index) from None


def train_ensemble(
    dataset: WindowDataset,
    n_models: int,
    master_seed: int,
    hyper: TrainingConfig,
    workers: int = 1,
) -> Ensemble:
    """Train n_models independently seeded/split models on one window.

    A model that diverges is retrained once with a perturbed derived seed;
    a second divergence raises EnsembleTrainingError naming the index.
    """
    if n_models < 1:
        raise ValueError(f"n_models must be >= 1, got {n_models}")
    tasks = [(dataset, hyper, master_seed, i) for i in range(n_models)]
    if workers <= 1:
        results = [_train_member(t) for t in tasks]
    else:
        chunk = max(1, n_models // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_train_member, tasks, chunksize=chunk))
    models = [m for _, m in sorted(results, key=lambda r: r[0])]
    return Ensemble(models=models, window_index=dataset.window_index, master_seed=master_seed)


def sample_matrix(ensemble: Ensemble, window: WindowDataset) -> np.ndarray:
    """Per-model forward outputs, shape (n_models, n_players)."""
    return np.vstack(
        [predict_batch(m.network, m.norm, window.features) for m in ensemble.models]
    )


def _central_interval(samples: np.ndarray, level: float):
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(samples, [alpha, 1.0 - alpha], method="linear")
    return float(lo), float(hi)


def predict_distribution(
    ensemble: Ensemble, predict_window: WindowDataset, level: float = 0.95
) -> list[PredictionDistribution]:
    """One PredictionDistribution per player in the prediction window."""
    if predict_window.has_targets:
        raise ValueError("predict_distribution expects a prediction window")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level {level} outside (0, 1)")
    if predict_window.features.shape[1] != ensemble.models[0].network.w1.shape[1]:
        raise ValueError("feature length does not match ensemble input size")
    samples = sample_matrix(ensemble, predict_window)
    out = []
    for j, pid in enumerate(predict_window.player_ids):
        col = samples[:, j]
        lo, hi = _central_interval(col, level)
        out.append(
            PredictionDistribution(
                player_id=pid,
                samples=col,
                mean=float(col.mean()),
                ci_low=lo,
                ci_high=hi,
            )
        )
    return out


def lineup_prediction_interval(samples_by_player, lineup, level: float = 0.95):
    """Interval for the lineup total from per-model lineup sums.

    Summing within a model draw preserves cross-player correlation, so the
    interval is not the sum of per-player intervals.
    """
    player_ids = getattr(lineup, "players", lineup)
    arrays = []
    length = None
    for pid in player_ids:
        if pid not in samples_by_player:
            raise KeyError(f"no prediction samples for player {pid!r}")
        arr = np.asarray(samples_by_player[pid], dtype=np.float64)
        if length is None:
            length = arr.shape[0]
        elif arr.shape[0] != length:
            raise ValueError("player sample arrays differ in length")
        arrays.append(arr)
    totals = np.sum(arrays, axis=0)
    lo, hi = _central_interval(totals, level)
    return float(totals.mean()), lo, hi
