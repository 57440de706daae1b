"""Composite training objective: focal loss with label smoothing plus a
symmetric-KL consistency penalty between two dropout-perturbed passes.

Per example with true class y and predicted distribution p:

    focal term       -(1 - p_y)^gamma * log(p'_y),  p'_y = (1-eps)*p_y + eps/K
    consistency term 0.5 * [KL(p1 || p2) + KL(p2 || p1)]
    total            focal + lambda_rd * consistency

The smoothing enters only the log term; the focusing factor uses the raw
p_y. With gamma=0 and eps=0 the focal term reduces to plain cross-entropy.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite

import torch

from ..corpus import NUM_CLASSES
from ..errors import NumericError, ValidationError
from .model import DTYPE, CommentClassifier, forward


@dataclass(frozen=True)
class CompositeLossConfig:
    gamma: float = 2.0
    epsilon: float = 0.05
    lambda_rd: float = 1.0
    n_classes: int = NUM_CLASSES

    def __post_init__(self):
        if not (isfinite(self.gamma) and isfinite(self.epsilon) and isfinite(self.lambda_rd)):
            raise ValidationError("loss config fields must be finite")
        if self.gamma < 0 or self.lambda_rd < 0:
            raise ValidationError("gamma and lambda_rd must be nonnegative")
        if not (0.0 <= self.epsilon < 1.0):
            raise ValidationError(f"epsilon must be in [0, 1), got {self.epsilon}")

    def max_focal_loss(self) -> float:
        """Upper bound on the focal term; finite whenever epsilon > 0."""
        if self.epsilon == 0.0:
            return float("inf")
        return -float(torch.log(torch.tensor(self.epsilon / self.n_classes, dtype=DTYPE)))


def _as_tensor(x) -> torch.Tensor:
    t = torch.as_tensor(x, dtype=DTYPE) if not torch.is_tensor(x) else x
    return t


def focal_ls_loss(prob, y, cfg: CompositeLossConfig) -> torch.Tensor:
    """Label-smoothed focal loss; scalar for a single distribution, vector
    for a batch of rows."""
    p = _as_tensor(prob)
    single = p.dim() == 1
    pm = p.unsqueeze(0) if single else p
    yt = torch.as_tensor(y, dtype=torch.int64).reshape(-1)
    p_y = pm.gather(1, yt.unsqueeze(1)).squeeze(1)
    p_smooth = (1.0 - cfg.epsilon) * p_y + cfg.epsilon / cfg.n_classes
    if (p_smooth <= 0).any():
        raise NumericError("smoothed target probability is not positive")
    loss = (1.0 - p_y) ** cfg.gamma * (-torch.log(p_smooth))
    return loss[0] if single else loss


def rdrop_loss(p1, p2) -> torch.Tensor:
    """Symmetric KL divergence between two distributions (or batches)."""
    a = _as_tensor(p1)
    b = _as_tensor(p2)
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch {tuple(a.shape)} vs {tuple(b.shape)}")
    if (a <= 0).any() or (b <= 0).any():
        raise NumericError("distributions must have strictly positive components")
    log_a = torch.log(a)
    log_b = torch.log(b)
    kl_ab = (a * (log_a - log_b)).sum(dim=-1)
    kl_ba = (b * (log_b - log_a)).sum(dim=-1)
    return 0.5 * (kl_ab + kl_ba)


def total_loss(model: CommentClassifier, tokens: torch.Tensor, labels: torch.Tensor,
               cfg: CompositeLossConfig, generator: torch.Generator):
    """Two stochastic passes over the batch; composite loss and its gradients.

    The focal term is averaged over both passes and the batch, the
    consistency term over the batch. Returns
    ``(loss, grads_by_name, {"focal": ..., "rdrop": ...})``; gradients are
    also left in ``param.grad`` for an optimizer step.
    """
    if tokens.dim() != 2 or tokens.shape[0] == 0:
        raise ValidationError("tokens must be a non-empty (batch, seq_len) tensor")
    _, prob1 = forward(model, tokens, dropout_on=True, generator=generator)
    _, prob2 = forward(model, tokens, dropout_on=True, generator=generator)
    focal = 0.5 * (focal_ls_loss(prob1, labels, cfg) + focal_ls_loss(prob2, labels, cfg))
    focal = focal.mean()
    if cfg.lambda_rd > 0:
        rdrop = rdrop_loss(prob1, prob2).mean()
        loss = focal + cfg.lambda_rd * rdrop
    else:
        rdrop = torch.zeros((), dtype=DTYPE)
        loss = focal
    model.zero_grad(set_to_none=False)
    loss.backward()
    grads = {name: p.grad.detach().clone() for name, p in model.named_parameters()}
    return (loss.detach().item(), grads,
            {"focal": focal.detach().item(), "rdrop": rdrop.detach().item()})
