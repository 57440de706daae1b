import json

import numpy as np
import pytest
import torch

import kcpipe.neural.trainer as trainer_mod
from kcpipe.corpus import stratified_kfold
from kcpipe.errors import NumericError, ValidationError
from kcpipe.evalstats import FoldMetrics
from kcpipe.neural import (CompositeLossConfig, EncoderConfig, TrainConfig,
                           load_checkpoint, save_checkpoint, schedule_lr, train,
                           write_train_log)

ENC = EncoderConfig(vocab_size=512, embed_dim=16, max_seq_len=32, dropout_rate=0.1)
LOSS = CompositeLossConfig()


def test_schedule_endpoints():
    peak = 1e-3
    assert schedule_lr(0, 100, 10.0, peak) == 0.0
    assert schedule_lr(10, 100, 10.0, peak) == pytest.approx(peak)
    assert schedule_lr(100, 100, 10.0, peak) == pytest.approx(0.0, abs=1e-18)
    assert schedule_lr(99, 100, 10.0, peak) < 0.01 * peak
    # warmup interior is linear, cosine interior is between 0 and peak
    assert schedule_lr(5, 100, 10.0, peak) == pytest.approx(0.5 * peak)
    assert 0 < schedule_lr(55, 100, 10.0, peak) < peak


def test_train_config_validation():
    with pytest.raises(ValidationError):
        TrainConfig(patience=0)
    with pytest.raises(ValidationError):
        TrainConfig(warmup_ratio=1.0)


@pytest.fixture(scope="module")
def small_plan(small_dataset):
    return stratified_kfold(small_dataset, n_folds=5, seed=3)


def test_train_reaches_high_macro_f1(small_dataset, small_plan):
    cfg = TrainConfig(max_epochs=8, seed=0)
    trained = train(small_dataset, small_plan, 0, ENC, LOSS, cfg)
    assert trained.log[-1]["val_macro_f1"] >= 0.9 or \
        max(e["val_macro_f1"] for e in trained.log) >= 0.9
    assert trained.best_epoch >= 1
    # log schema
    assert set(trained.log[0]) == {"epoch", "train_loss", "lr", "val_macro_f1"}


def test_train_is_deterministic(small_dataset, small_plan):
    cfg = TrainConfig(max_epochs=3, seed=42)
    a = train(small_dataset, small_plan, 1, ENC, LOSS, cfg)
    b = train(small_dataset, small_plan, 1, ENC, LOSS, cfg)
    assert a.log == b.log  # bit-for-bit, including float train losses
    for name, pa in a.model.named_parameters():
        pb = dict(b.model.named_parameters())[name]
        assert torch.equal(pa, pb)


def test_early_stopping_patience_contract(small_dataset, small_plan, monkeypatch):
    def constant_metrics(truth, predicted, fold_idx=0):
        fm = FoldMetrics(fold_idx=fold_idx, accuracy=0.5, macro_f1=0.5,
                         weighted_f1=0.5, per_class={})
        return fm, None

    monkeypatch.setattr(trainer_mod, "compute_metrics", constant_metrics)
    cfg = TrainConfig(max_epochs=10, patience=1, seed=0)
    trained = train(small_dataset, small_plan, 0, ENC, LOSS, cfg)
    assert len(trained.log) == 2  # best at epoch 1, stop right after epoch 2
    assert trained.best_epoch == 1


def test_early_stopping_prefers_earlier_epoch_on_ties(small_dataset, small_plan,
                                                      monkeypatch):
    values = iter([0.7, 0.9, 0.9, 0.9, 0.9])

    def scripted_metrics(truth, predicted, fold_idx=0):
        fm = FoldMetrics(fold_idx=fold_idx, accuracy=0.0, macro_f1=next(values),
                         weighted_f1=0.0, per_class={})
        return fm, None

    monkeypatch.setattr(trainer_mod, "compute_metrics", scripted_metrics)
    cfg = TrainConfig(max_epochs=5, patience=2, seed=0)
    trained = train(small_dataset, small_plan, 0, ENC, LOSS, cfg)
    assert trained.best_epoch == 2
    assert len(trained.log) == 4  # epochs 3 and 4 fail to improve, then stop


def test_train_numeric_error_carries_checkpoint(small_dataset, small_plan,
                                                monkeypatch):
    calls = {"n": 0}
    real_total_loss = trainer_mod.total_loss

    def exploding_total_loss(model, tokens, labels, cfg, generator):
        calls["n"] += 1
        if calls["n"] > 3:
            raise NumericError("non-finite logits in classification head")
        return real_total_loss(model, tokens, labels, cfg, generator)

    monkeypatch.setattr(trainer_mod, "total_loss", exploding_total_loss)
    cfg = TrainConfig(max_epochs=2, seed=0)
    with pytest.raises(NumericError, match="fold 0 epoch 1"):
        train(small_dataset, small_plan, 0, ENC, LOSS, cfg)
    try:
        train(small_dataset, small_plan, 0, ENC, LOSS, cfg)
    except NumericError as e:
        assert hasattr(e, "checkpoint")


def test_train_invalid_fold_rejected(small_dataset, small_plan):
    with pytest.raises(ValidationError):
        train(small_dataset, small_plan, 99, ENC, LOSS, TrainConfig())


def test_checkpoint_roundtrip(tmp_path, small_dataset, small_plan):
    cfg = TrainConfig(max_epochs=2, seed=1)
    trained = train(small_dataset, small_plan, 2, ENC, LOSS, cfg)
    path = tmp_path / "fold.ckpt"
    save_checkpoint(trained, path)
    again = load_checkpoint(path)
    assert again.log == trained.log
    assert again.best_epoch == trained.best_epoch
    for name, p in trained.model.named_parameters():
        assert torch.equal(p, dict(again.model.named_parameters())[name])
    texts = [ex.normalized_text for ex in small_dataset.examples[:5]]
    assert np.array_equal(trained.predict_proba(texts), again.predict_proba(texts))


def test_write_train_log(tmp_path, small_dataset, small_plan):
    cfg = TrainConfig(max_epochs=2, seed=2)
    trained = train(small_dataset, small_plan, 3, ENC, LOSS, cfg)
    path = tmp_path / "log.jsonl"
    write_train_log(trained, path)
    lines = path.read_text().strip().split("\n")
    assert [json.loads(line) for line in lines] == trained.log


def test_focal_component_stays_under_smoothing_bound(small_dataset, small_plan):
    # the trainer asserts this internally every step; a full run passing means
    # the bound held throughout
    cfg = TrainConfig(max_epochs=2, seed=3)
    trained = train(small_dataset, small_plan, 4, ENC, LOSS, cfg)
    assert trained.log
