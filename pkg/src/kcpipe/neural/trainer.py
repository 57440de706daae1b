"""Fold training loop: AdamW with linear warmup + cosine decay, early
stopping on validation macro-F1, best-epoch checkpointing."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..corpus import Dataset, FoldPlan
from ..errors import NumericError, ValidationError
from ..evalstats import compute_metrics
from .. import paramio
from .losses import CompositeLossConfig, total_loss
from .model import CommentClassifier, EncoderConfig, forward, tokenize


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3  # peak; 1e-5 suits a large pretrained backbone, not a fresh tiny one
    warmup_ratio: float = 0.1
    weight_decay: float = 0.05
    max_epochs: int = 10
    patience: int = 2
    train_batch: int = 8
    eval_batch: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.patience < 1:
            raise ValidationError("patience must be >= 1")
        if not (0.0 <= self.warmup_ratio < 1.0):
            raise ValidationError("warmup_ratio must be in [0, 1)")
        if self.train_batch < 1 or self.eval_batch < 1 or self.max_epochs < 1:
            raise ValidationError("batch sizes and max_epochs must be >= 1")


def schedule_lr(step: int, total_steps: int, warmup_steps: float, peak: float) -> float:
    """Linear warmup to the peak rate, then cosine decay to zero.

    lr(0) = 0 when warmup is enabled, lr(warmup_steps) = peak, and the rate
    reaches 0 exactly at ``total_steps``.
    """
    if warmup_steps > 0 and step < warmup_steps:
        return peak * step / warmup_steps
    if total_steps <= warmup_steps:
        return peak
    progress = (step - warmup_steps) / (total_steps - warmup_steps)
    return peak * 0.5 * (1.0 + math.cos(math.pi * min(progress, 1.0)))


@dataclass
class TrainedModel:
    """A trained classifier plus everything needed to reproduce and reuse it."""

    model: CommentClassifier
    encoder_config: EncoderConfig
    loss_config: CompositeLossConfig
    train_config: TrainConfig
    log: list[dict] = field(default_factory=list)
    best_epoch: int = 0

    def predict_proba(self, texts: list[str]) -> np.ndarray:
        """Class probability rows for already-normalized texts (dropout off)."""
        out = np.empty((len(texts), self.model.head_bias.shape[0]))
        step = self.train_config.eval_batch
        for start in range(0, len(texts), step):
            chunk = texts[start:start + step]
            tokens = _token_matrix(chunk, self.encoder_config)
            _, probs = forward(self.model, _trim(tokens), dropout_on=False)
            out[start:start + step] = probs.detach().numpy()
        return out

    def predict(self, texts: list[str]) -> np.ndarray:
        return self.predict_proba(texts).argmax(axis=1)


def _token_matrix(texts: list[str], cfg: EncoderConfig) -> torch.Tensor:
    return torch.from_numpy(np.stack([tokenize(t, cfg) for t in texts]))


def _trim(tokens: torch.Tensor) -> torch.Tensor:
    """Drop trailing all-padding columns (masked out anyway; saves work)."""
    lengths = (tokens != 0).sum(dim=1)
    width = max(1, int(lengths.max()))
    return tokens[:, :width]


def train(data: Dataset, fold: FoldPlan, fold_idx: int, enc_cfg: EncoderConfig,
          loss_cfg: CompositeLossConfig, train_cfg: TrainConfig) -> TrainedModel:
    """Train on all folds except ``fold_idx``, early-stopping on the held-out
    fold's macro-F1; returns the best-epoch model and a per-epoch log."""
    if not (0 <= fold_idx < fold.n_folds):
        raise ValidationError(f"fold_idx {fold_idx} out of range [0, {fold.n_folds})")
    train_ex = [ex for ex in data.examples if fold.assignment[ex.id] != fold_idx]
    val_ex = [ex for ex in data.examples if fold.assignment[ex.id] == fold_idx]
    if not train_ex or not val_ex:
        raise ValidationError(f"fold {fold_idx}: empty training or validation split")

    tokens = _token_matrix([ex.normalized_text for ex in train_ex], enc_cfg)
    labels = torch.as_tensor([int(ex.label) for ex in train_ex], dtype=torch.int64)
    val_texts = [ex.normalized_text for ex in val_ex]
    val_labels = [int(ex.label) for ex in val_ex]

    model = CommentClassifier(enc_cfg, seed=train_cfg.seed)
    optimizer = torch.optim.AdamW(model.parameters(), lr=train_cfg.lr,
                                  weight_decay=train_cfg.weight_decay)
    n = len(train_ex)
    steps_per_epoch = math.ceil(n / train_cfg.train_batch)
    total_steps = steps_per_epoch * train_cfg.max_epochs
    warmup_steps = train_cfg.warmup_ratio * total_steps

    shuffle_rng = np.random.default_rng(train_cfg.seed)
    dropout_gen = torch.Generator().manual_seed(train_cfg.seed + 1)
    focal_bound = loss_cfg.max_focal_loss()

    trained = TrainedModel(model=model, encoder_config=enc_cfg,
                           loss_config=loss_cfg, train_config=train_cfg)
    best_f1 = -1.0
    best_state = copy.deepcopy(model.state_dict())
    bad_epochs = 0
    step = 0
    lr = 0.0
    for epoch in range(1, train_cfg.max_epochs + 1):
        order = shuffle_rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, train_cfg.train_batch):
            idx = torch.from_numpy(order[start:start + train_cfg.train_batch])
            lr = schedule_lr(step, total_steps, warmup_steps, train_cfg.lr)
            for group in optimizer.param_groups:
                group["lr"] = lr
            try:
                loss, _, parts = total_loss(model, _trim(tokens[idx]), labels[idx],
                                            loss_cfg, dropout_gen)
            except NumericError as e:
                err = NumericError(f"fold {fold_idx} epoch {epoch} step {step}: {e}")
                err.checkpoint = best_state
                raise err from e
            if parts["focal"] > focal_bound + 1e-9:
                raise NumericError(
                    f"focal term {parts['focal']:.6g} exceeds smoothing bound {focal_bound:.6g}")
            optimizer.step()
            step += 1
            epoch_losses.append(loss)

        probs = trained.predict_proba(val_texts)
        metrics, _ = compute_metrics(val_labels, probs.argmax(axis=1).tolist())
        trained.log.append({
            "epoch": epoch,
            "train_loss": float(np.mean(epoch_losses)),
            "lr": lr,
            "val_macro_f1": metrics.macro_f1,
        })
        if metrics.macro_f1 > best_f1:
            best_f1 = metrics.macro_f1
            trained.best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= train_cfg.patience:
                break

    model.load_state_dict(best_state)
    return trained


def write_train_log(trained: TrainedModel, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for entry in trained.log:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")


def save_checkpoint(trained: TrainedModel, path: str | Path) -> None:
    header = {
        "kind": "neural",
        "encoder": asdict(trained.encoder_config),
        "loss": asdict(trained.loss_config),
        "train": asdict(trained.train_config),
        "best_epoch": trained.best_epoch,
        "log": trained.log,
    }
    arrays = {name: p.detach().numpy() for name, p in trained.model.named_parameters()}
    paramio.save_params(path, header, arrays)


def load_checkpoint(path: str | Path) -> TrainedModel:
    header, arrays = paramio.load_params(path)
    if header.get("kind") != "neural":
        raise ValidationError(f"{path}: not a neural checkpoint")
    enc_cfg = EncoderConfig(**header["encoder"])
    loss_cfg = CompositeLossConfig(**header["loss"])
    train_cfg = TrainConfig(**header["train"])
    model = CommentClassifier(enc_cfg, seed=train_cfg.seed)
    state = {name: torch.from_numpy(arr) for name, arr in arrays.items()}
    model.load_state_dict(state)
    return TrainedModel(model=model, encoder_config=enc_cfg, loss_config=loss_cfg,
                        train_config=train_cfg, log=header["log"],
                        best_epoch=header["best_epoch"])
