"""Differentiable transformer primitives built on :mod:`nncore.tensor`."""
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from exceptions import ConfigError, InvalidArgument, ShapeMismatch
from spectral import downsample_with_indices, spectral_downsample_adjoint, TruncationStrategy
from .tensor import Function, Tensor


class MaskKind(str, Enum):
    NONE = 'none'
    CAUSAL = 'causal'
    PADDING = 'padding'


@dataclass
class AttentionMask:
    """Which keys a query may attend to.

    ``lengths`` holds the number of real (unpadded) key positions per batch
    row and is required for the padding kind.
    """
    kind: MaskKind = MaskKind.NONE
    lengths: Optional[np.ndarray] = None

    def __post_init__(self):
        self.kind = MaskKind(self.kind)
        if self.kind is MaskKind.PADDING:
            if self.lengths is None:
                raise InvalidArgument('Padding mask requires per-row lengths.')
            self.lengths = np.asarray(self.lengths, dtype=np.int64)
            if np.any(self.lengths < 1):
                raise InvalidArgument('Every row needs at least one unpadded position.')

    @classmethod
    def none(cls):
        return cls(MaskKind.NONE)

    @classmethod
    def causal(cls):
        return cls(MaskKind.CAUSAL)

    @classmethod
    def padding(cls, lengths):
        return cls(MaskKind.PADDING, lengths)

    def allowed(self, batch, query_len, key_len):
        """Boolean ``[batch, 1, query_len, key_len]`` array, or ``None`` when nothing is masked."""
        if self.kind is MaskKind.CAUSAL:
            return np.tril(np.ones((query_len, key_len), dtype=bool))[None, None]
        if self.kind is MaskKind.PADDING:
            if len(self.lengths) != batch:
                raise ShapeMismatch(f'Mask has {len(self.lengths)} rows but the batch has {batch}.')
            keys = np.arange(key_len)[None, :] < self.lengths[:, None]
            return np.broadcast_to(keys[:, None, None, :], (batch, 1, query_len, key_len))
        return None


class Relu(Function):
    def forward(self, x):
        self.mask = x > 0
        return x * self.mask

    def backward(self, grad):
        return (grad * self.mask,)

class Softmax(Function):
    def forward(self, x, allowed=None):
        if allowed is not None:
            x = np.where(allowed, x, -np.inf)
        shifted = np.exp(x - x.max(axis=-1, keepdims=True))
        self.y = shifted / shifted.sum(axis=-1, keepdims=True)
        return self.y

    def backward(self, grad):
        return (self.y * (grad - (grad * self.y).sum(axis=-1, keepdims=True)),)

class LayerNorm(Function):
    """Normalise over the last axis with the biased variance (divide by D)."""

    def forward(self, x, gain, bias, eps=1e-12):
        mean = x.mean(axis=-1, keepdims=True)
        centered = x - mean
        var = (centered ** 2).mean(axis=-1, keepdims=True)
        self.inv_std = 1.0 / np.sqrt(var + eps)
        self.xhat = centered * self.inv_std
        self.gain = gain
        return self.xhat * gain + bias

    def backward(self, grad):
        reduce_axes = tuple(range(grad.ndim - 1))
        dgain = (grad * self.xhat).sum(axis=reduce_axes)
        dbias = grad.sum(axis=reduce_axes)
        dxhat = grad * self.gain
        dx = self.inv_std * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                             - self.xhat * (dxhat * self.xhat).mean(axis=-1, keepdims=True))
        return dx, dgain, dbias

class Take(Function):
    """Gather along ``axis``; the backward pass scatter-adds into the source."""

    def forward(self, x, indices, axis=0):
        self.shape, self.indices, self.axis = x.shape, np.asarray(indices), axis
        return np.take(x, self.indices, axis=axis)

    def backward(self, grad):
        out = np.zeros(self.shape, dtype=grad.dtype)
        moved = np.moveaxis(out, self.axis, 0)
        grad = np.moveaxis(grad, list(range(self.axis, self.axis + self.indices.ndim)),
                           list(range(self.indices.ndim)))
        np.add.at(moved, self.indices, grad)
        return (out,)

class CrossEntropy(Function):
    def forward(self, logits, targets, ignore_index=None):
        shifted = logits - logits.max(axis=-1, keepdims=True)
        log_probs = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
        valid = np.ones(targets.shape, dtype=bool) if ignore_index is None else targets != ignore_index
        self.count = max(int(valid.sum()), 1)
        safe = np.where(valid, targets, 0)
        picked = np.take_along_axis(log_probs, safe[..., None], axis=-1)[..., 0]
        self.probs, self.safe, self.valid = np.exp(log_probs), safe, valid
        return np.asarray(-(picked * valid).sum() / self.count, dtype=logits.dtype)

    def backward(self, grad):
        dlogits = self.probs.copy()
        np.put_along_axis(dlogits, self.safe[..., None],
                          np.take_along_axis(dlogits, self.safe[..., None], axis=-1) - 1, axis=-1)
        dlogits *= (self.valid / self.count)[..., None]
        return (dlogits * grad,)

class SpectralFilter(Function):
    """Spectral downsampling along time; linear, so backward is the transposed map."""

    def forward(self, h, ratio, strategy=TruncationStrategy.HIGH_FREQUENCY_CUT):
        self.source_length = h.shape[1]
        out, self.kept = downsample_with_indices(h, ratio, strategy)
        return out

    def backward(self, grad):
        return (spectral_downsample_adjoint(grad, self.source_length, self.kept),)


def relu(x):
    return Relu.apply(x)

def softmax(x, allowed=None):
    return Softmax.apply(x, allowed=allowed)

def take(x, indices, axis=0):
    return Take.apply(x, indices=indices, axis=axis)

def linear(x, weight, bias=None):
    out = x @ weight
    return out if bias is None else out + bias

def layer_norm(h, gain, bias, eps=1e-12):
    if h.shape[-1] < 2:
        raise InvalidArgument('Layer normalisation needs at least two features.')
    return LayerNorm.apply(h, gain, bias, eps=eps)

def spectral_filter(h, ratio, strategy=TruncationStrategy.HIGH_FREQUENCY_CUT):
    return SpectralFilter.apply(h, ratio=ratio, strategy=strategy)

def cross_entropy(logits, targets, ignore_index=None):
    """Mean negative log-likelihood over positions whose target is not ``ignore_index``."""
    targets = np.asarray(targets, dtype=np.int64)
    classes = logits.shape[-1]
    if targets.shape != logits.shape[:-1]:
        raise ShapeMismatch(f'Targets of shape {targets.shape} do not match logits {logits.shape}.')
    valid = targets if ignore_index is None else targets[targets != ignore_index]
    if np.any((valid < 0) | (valid >= classes)):
        raise InvalidArgument(f'Target ids must lie in [0, {classes}).')
    return CrossEntropy.apply(logits, targets=targets, ignore_index=ignore_index)

def sinusoidal_positions(length, dim):
    position = np.arange(length)[:, None]
    rate = np.exp(-np.log(10000.0) * (np.arange(0, dim, 2) / dim))
    table = np.zeros((length, dim))
    table[:, 0::2] = np.sin(position * rate)
    table[:, 1::2] = np.cos(position * rate[:dim // 2])
    return table

def embed(tokens, table, positions=None):
    """Token lookup plus an additive positional table sliced to the sequence length."""
    tokens = np.asarray(tokens, dtype=np.int64)
    if tokens.ndim != 2:
        raise InvalidArgument(f'Tokens must be [batch, length], got shape {tokens.shape}.')
    if np.any((tokens < 0) | (tokens >= table.shape[0])):
        raise InvalidArgument(f'Token ids must lie in [0, {table.shape[0]}).')
    out = take(table, tokens, axis=0)
    if positions is None:
        return out
    if tokens.shape[1] > positions.shape[0]:
        raise InvalidArgument(f'Sequence length {tokens.shape[1]} exceeds {positions.shape[0]} positions.')
    if isinstance(positions, Tensor):
        return out + take(positions, np.arange(tokens.shape[1]), axis=0)
    return out + Tensor(positions[:tokens.shape[1]].astype(table.dtype))

def feed_forward(h, params):
    """Position-wise ``relu(h W1 + b1) W2 + b2``."""
    if h.shape[-1] != params['w1'].shape[0]:
        raise ConfigError(f'Input dim {h.shape[-1]} does not match feed-forward width {params["w1"].shape[0]}.')
    return linear(relu(linear(h, params['w1'], params['b1'])), params['w2'], params['b2'])

def multi_head_attention(q, k, v, mask, params, heads):
    """Scaled dot-product attention with ``heads`` heads and output projection.

    ``params`` maps ``w_q, b_q, w_k, b_k, w_v, b_v, w_o, b_o`` to tensors.
    """
    batch, query_len, dim = q.shape
    key_len = k.shape[1]
    if dim % heads:
        raise ConfigError(f'Model dim {dim} is not divisible by {heads} heads.')
    if k.shape[0] != batch or v.shape[:2] != k.shape[:2]:
        raise ShapeMismatch('Query, key and value must share batch size; key and value must share length.')
    head_dim = dim // heads

    def split(x, length):
        return x.reshape(batch, length, heads, head_dim).transpose(0, 2, 1, 3)

    qh = split(linear(q, params['w_q'], params['b_q']), query_len)
    kh = split(linear(k, params['w_k'], params['b_k']), key_len)
    vh = split(linear(v, params['w_v'], params['b_v']), key_len)
    scores = (qh @ kh.transpose(0, 1, 3, 2)) * (1.0 / np.sqrt(head_dim))
    allowed = (mask or AttentionMask.none()).allowed(batch, query_len, key_len)
    context = softmax(scores, allowed) @ vh
    merged = context.transpose(0, 2, 1, 3).reshape(batch, query_len, dim)
    return linear(merged, params['w_o'], params['b_o'])
