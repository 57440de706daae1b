"""Neural classifier: tiny attention encoder, composite loss, fold trainer."""

from .losses import CompositeLossConfig, focal_ls_loss, rdrop_loss, total_loss
from .model import (CLS_ID, DTYPE, PAD_ID, CommentClassifier, EncoderConfig,
                    fnv1a64, forward, seeded_dropout, tokenize)
from .trainer import (TrainConfig, TrainedModel, load_checkpoint,
                      save_checkpoint, schedule_lr, train, write_train_log)

__all__ = [
    "CLS_ID", "DTYPE", "PAD_ID", "CommentClassifier", "CompositeLossConfig",
    "EncoderConfig", "TrainConfig", "TrainedModel", "fnv1a64", "focal_ls_loss",
    "forward", "load_checkpoint", "rdrop_loss", "save_checkpoint", "schedule_lr",
    "seeded_dropout", "tokenize", "total_loss", "train", "write_train_log",
]
