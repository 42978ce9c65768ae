"""Mini-batch training loop: Adam on mean categorical cross-entropy.

Everything is seeded and runs in a fixed order, so a (data, config) pair
always reproduces the same model bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import evaluator
from .classifier import (
    Hyperparams,
    ModelParams,
    backward,
    infer_batch,
    init_params,
    predict,
)
from .corpus import EncodedSequence, UrlClass, UrlRecord, Vocabulary, encode_url
from .nncore import LstmWeights

Dataset = list[tuple[EncodedSequence, UrlClass]]


class TrainingDiverged(ArithmeticError):
    """Raised when a non-finite loss or gradient shows up mid-training."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    batch_size: int = 64
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    seed: int = 0
    shuffle: bool = True
    # Reserved: per-example work is already evaluated in a fixed order, so
    # training is reproducible with or without this flag.
    deterministic: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must not be negative")


@dataclass
class OptState:
    """Adam accumulators, shaped like the parameters."""

    m: ModelParams
    v: ModelParams
    t: int = 0

    @classmethod
    def zeros(cls, hp: Hyperparams, dtype=np.float32) -> "OptState":
        return cls(m=ModelParams.zeros(hp, dtype), v=ModelParams.zeros(hp, dtype), t=0)


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float | None = None
    val_acc: float | None = None


@dataclass
class TrainHistory:
    epochs: list[EpochStats]

    def to_csv(self, path: str) -> None:
        def cell(v):
            return "" if v is None else f"{v:.6f}"

        with open(path, "w", encoding="utf-8") as fh:
            fh.write("epoch,train_loss,train_acc,val_loss,val_acc\n")
            for e in self.epochs:
                fh.write(
                    f"{e.epoch},{cell(e.train_loss)},{cell(e.train_acc)},"
                    f"{cell(e.val_loss)},{cell(e.val_acc)}\n"
                )


def adam_step(
    params: ModelParams, grads: ModelParams, state: OptState, cfg: TrainConfig
) -> tuple[ModelParams, OptState]:
    """One adaptive-moment update; pure (inputs untouched, new values returned)."""
    t = state.t + 1
    bc1 = 1.0 - cfg.beta1**t
    bc2 = 1.0 - cfg.beta2**t
    new_params, new_m, new_v = [], [], []
    for (name, p), (_, g), (_, m), (_, v) in zip(
        params.arrays(), grads.arrays(), state.m.arrays(), state.v.arrays()
    ):
        if not np.all(np.isfinite(g)):
            raise TrainingDiverged(f"non-finite gradient in {name}")
        m2 = cfg.beta1 * m + (1.0 - cfg.beta1) * g
        v2 = cfg.beta2 * v + (1.0 - cfg.beta2) * (g * g)
        update = cfg.learning_rate * (m2 / bc1) / (np.sqrt(v2 / bc2) + cfg.eps_adam)
        new_params.append(p - update)
        new_m.append(m2)
        new_v.append(v2)
    return (
        _build_params(new_params),
        OptState(m=_build_params(new_m), v=_build_params(new_v), t=t),
    )


def _build_params(arrs: list[np.ndarray]) -> ModelParams:
    return ModelParams(
        arrs[0],
        LstmWeights(arrs[1], arrs[2], arrs[3]),
        LstmWeights(arrs[4], arrs[5], arrs[6]),
        arrs[7],
        arrs[8],
    )


def encode_dataset(
    records: list[UrlRecord], vocab: Vocabulary, max_len: int
) -> Dataset:
    return [(encode_url(r.url, vocab, max_len), r.label) for r in records]


def _dataset_metrics(
    params: ModelParams, hp: Hyperparams, dataset: Dataset
) -> tuple[float, float]:
    """Inference-mode mean loss and accuracy over an encoded dataset."""
    seqs = [seq for seq, _ in dataset]
    labels = np.array([int(lbl) for _, lbl in dataset])
    probs = infer_batch(params, hp, seqs)
    p_true = np.maximum(probs[np.arange(len(labels)), labels], 1e-12)
    loss = float(np.mean(-np.log(p_true.astype(np.float64))))
    acc = float(np.mean(np.argmax(probs, axis=1) == labels))
    return loss, acc


def fit(
    train_set: Dataset,
    val_set: Dataset | None,
    hp: Hyperparams,
    cfg: TrainConfig,
    log=None,
) -> tuple[ModelParams, TrainHistory]:
    """Train from scratch. Returns the final parameters and per-epoch history.

    Each epoch shuffles with the seeded generator, walks batches of
    cfg.batch_size (the last partial batch is kept), and applies one Adam
    step per batch. Epoch accuracy is measured in inference mode.
    """
    if not train_set:
        raise ValueError("empty training set")
    params = init_params(hp)
    state = OptState.zeros(hp)
    rng = np.random.default_rng(cfg.seed)
    n = len(train_set)
    history: list[EpochStats] = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        loss_sum = 0.0
        for batch_num, start in enumerate(range(0, n, cfg.batch_size)):
            batch = [train_set[i] for i in order[start : start + cfg.batch_size]]
            dropout_seed = int(rng.integers(0, 2**31))
            grads, loss = backward(params, hp, batch, dropout_seed)
            if not math.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, batch {batch_num}"
                )
            loss_sum += loss * len(batch)
            params, state = adam_step(params, grads, state, cfg)
        train_loss = loss_sum / n
        _, train_acc = _dataset_metrics(params, hp, train_set)
        val_loss = val_acc = None
        if val_set:
            val_loss, val_acc = _dataset_metrics(params, hp, val_set)
        history.append(EpochStats(epoch, train_loss, train_acc, val_loss, val_acc))
        if log is not None:
            line = f"epoch {epoch}/{cfg.epochs}  loss {train_loss:.4f}  acc {train_acc:.4f}"
            if val_set:
                line += f"  val_loss {val_loss:.4f}  val_acc {val_acc:.4f}"
            log(line)
    return params, TrainHistory(history)


def evaluate_on(
    params: ModelParams, hp: Hyperparams, vocab: Vocabulary, records: list[UrlRecord]
) -> evaluator.EvalReport:
    """Predict every record and build the classification report."""
    if not records:
        raise ValueError("no records to evaluate")
    pairs = [
        (rec.label, predict(params, hp, vocab, rec.url).label) for rec in records
    ]
    return evaluator.metrics(evaluator.confusion(pairs))
