"""Desk-scale differentiable text classifier.

The encoder is a hashed-embedding bag followed by one single-head
self-attention layer with a residual connection, then mean or CLS pooling,
dropout, and an affine softmax head. It is deliberately tiny: every loss
and training mechanism can be exercised on a CPU with finite-difference
checkable gradients, and the encoder sits behind a small interface so a
bigger pretrained backbone could be slotted in later.

All computation is float64. Dropout masks are drawn from an explicit
torch.Generator so that stochastic forward passes are fully reproducible.
Tokens are whitespace-split and FNV-1a hashed (Python's builtin ``hash`` is
salted per process and must not be used here).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from ..corpus import NUM_CLASSES
from ..errors import NumericError, ValidationError

DTYPE = torch.float64
PAD_ID = 0
CLS_ID = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(token: str) -> int:
    """64-bit FNV-1a hash of the token's UTF-8 bytes."""
    h = _FNV_OFFSET
    for byte in token.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class EncoderConfig:
    vocab_size: int = 4096
    embed_dim: int = 64
    max_seq_len: int = 256
    dropout_rate: float = 0.1
    pooling: str = "mean"  # "mean" | "cls_token"

    def __post_init__(self):
        if self.vocab_size < 3:
            raise ValidationError("vocab_size must be >= 3 (ids 0 and 1 are reserved)")
        if self.embed_dim < 1 or self.max_seq_len < 1:
            raise ValidationError("embed_dim and max_seq_len must be >= 1")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ValidationError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.pooling not in ("mean", "cls_token"):
            raise ValidationError(f"unknown pooling {self.pooling!r}")


def tokenize(text: str, config: EncoderConfig) -> np.ndarray:
    """Hash whitespace tokens into [2, vocab_size), truncate, and pad.

    Returns an int64 array of length exactly ``max_seq_len``; id 0 is
    padding and id 1 is the CLS marker prepended under cls_token pooling.
    """
    ids: list[int] = []
    if config.pooling == "cls_token":
        ids.append(CLS_ID)
    span = config.vocab_size - 2
    for tok in text.split():
        ids.append(2 + fnv1a64(tok) % span)
    ids = ids[:config.max_seq_len]
    ids.extend([PAD_ID] * (config.max_seq_len - len(ids)))
    return np.asarray(ids, dtype=np.int64)


def seeded_dropout(x: torch.Tensor, rate: float, generator: torch.Generator | None,
                   active: bool) -> torch.Tensor:
    """Inverted dropout whose mask comes from the supplied generator."""
    if not active or rate == 0.0:
        return x
    if generator is None:
        raise ValidationError("dropout_on=True requires a torch.Generator")
    keep = (torch.rand(x.shape, generator=generator, dtype=x.dtype) >= rate)
    return x * keep.to(x.dtype) / (1.0 - rate)


class CommentClassifier(nn.Module):
    """Hashed-embedding encoder + single-head self-attention + softmax head."""

    def __init__(self, config: EncoderConfig, seed: int = 0):
        super().__init__()
        self.config = config
        g = torch.Generator().manual_seed(seed)
        d = config.embed_dim
        bound = math.sqrt(3.0 / d)
        self.embedding = nn.Parameter(
            torch.randn(config.vocab_size, d, generator=g, dtype=DTYPE) * 0.1)
        self.w_query = nn.Parameter(
            (torch.rand(d, d, generator=g, dtype=DTYPE) * 2 - 1) * bound)
        self.w_key = nn.Parameter(
            (torch.rand(d, d, generator=g, dtype=DTYPE) * 2 - 1) * bound)
        self.w_value = nn.Parameter(
            (torch.rand(d, d, generator=g, dtype=DTYPE) * 2 - 1) * bound)
        self.head_weight = nn.Parameter(torch.zeros(NUM_CLASSES, d, dtype=DTYPE))
        self.head_bias = nn.Parameter(torch.zeros(NUM_CLASSES, dtype=DTYPE))


def forward(model: CommentClassifier, tokens: torch.Tensor, dropout_on: bool = False,
            generator: torch.Generator | None = None) -> tuple[torch.Tensor, torch.Tensor]:
    """Run the classifier; returns (logits, probabilities).

    ``tokens`` is an int64 tensor of shape (L,) or (B, L). With dropout off
    the map is deterministic; with dropout on, stochasticity is fully
    determined by ``generator``.
    """
    single = tokens.dim() == 1
    t = tokens.unsqueeze(0) if single else tokens
    cfg = model.config
    real = t != PAD_ID
    d = cfg.embed_dim

    x = model.embedding[t]
    x = seeded_dropout(x, cfg.dropout_rate, generator, dropout_on)
    q = x @ model.w_query
    k = x @ model.w_key
    v = x @ model.w_value
    scores = (q @ k.transpose(1, 2)) / math.sqrt(d)
    # finite large negative (not -inf) so fully-padded rows stay NaN-free
    scores = scores + torch.where(real, 0.0, -1e9).to(DTYPE).unsqueeze(1)
    attn = torch.softmax(scores, dim=-1)
    h = x + attn @ v
    if not torch.isfinite(h).all():
        raise NumericError("non-finite activation after self-attention layer")

    if cfg.pooling == "cls_token":
        pooled = h[:, 0, :]
    else:
        mask = real.to(DTYPE).unsqueeze(-1)
        pooled = (h * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
    pooled = seeded_dropout(pooled, cfg.dropout_rate, generator, dropout_on)

    logits = pooled @ model.head_weight.T + model.head_bias
    if not torch.isfinite(logits).all():
        raise NumericError("non-finite logits in classification head")
    probs = torch.softmax(logits, dim=-1)
    if single:
        return logits[0], probs[0]
    return logits, probs
