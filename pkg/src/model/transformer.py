"""Fourier Transformer: transformer layers split into blocks by spectral filters.

Layers use pre-norm residual blocks. A filter "after layer i" shortens the
residual stream that layer i produces, before layer i+1 sees it. Encoder-only
models mean-pool (or take the first position of) the final sequence;
encoder-decoder models upsample every block output back to the input length,
add them and layer-normalise the sum before cross-attention.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from exceptions import InvalidArgument, ShapeMismatch
from nncore import (AttentionMask, Embedding, FeedForward, Init, LayerNorm, Linear, Module,
                    MultiHeadAttention, Tensor, cross_entropy, no_grad, spectral_filter, take)
from tasks import BOS, EOS, PAD
from .schema import Mode, PoolingHead


@dataclass
class BlockOutputs:
    hidden: List[Tensor]
    lengths: List[int]

    def __post_init__(self):
        if any(b > a for a, b in zip(self.lengths, self.lengths[1:])):
            raise ShapeMismatch(f'Block lengths must not grow: {self.lengths}')


@dataclass
class EncoderOutput:
    blocks: BlockOutputs
    final: Tensor
    pooled: Optional[Tensor] = None
    hidden_states: List[np.ndarray] = field(default_factory=list)

    @property
    def lengths(self):
        return self.blocks.lengths


class EncoderLayer(Module):
    def __init__(self, init, cfg):
        self.norm1 = LayerNorm(init, cfg.dim, cfg.layer_norm_eps)
        self.attention = MultiHeadAttention(init, cfg.dim, cfg.heads)
        self.norm2 = LayerNorm(init, cfg.dim, cfg.layer_norm_eps)
        self.ffn = FeedForward(init, cfg.dim, cfg.ffn_dim)

    def __call__(self, x, mask=None):
        h = self.norm1(x)
        x = x + self.attention(h, h, h, mask)
        return x + self.ffn(self.norm2(x))


class DecoderLayer(Module):
    def __init__(self, init, cfg):
        self.norm1 = LayerNorm(init, cfg.dim, cfg.layer_norm_eps)
        self.self_attention = MultiHeadAttention(init, cfg.dim, cfg.heads)
        self.norm2 = LayerNorm(init, cfg.dim, cfg.layer_norm_eps)
        self.cross_attention = MultiHeadAttention(init, cfg.dim, cfg.heads)
        self.norm3 = LayerNorm(init, cfg.dim, cfg.layer_norm_eps)
        self.ffn = FeedForward(init, cfg.dim, cfg.ffn_dim)

    def __call__(self, x, memory, memory_mask=None):
        h = self.norm1(x)
        x = x + self.self_attention(h, h, h, AttentionMask.causal())
        x = x + self.cross_attention(self.norm2(x), memory, memory, memory_mask)
        return x + self.ffn(self.norm3(x))


def upsample_nearest(h, target_len):
    """Nearest-neighbour upsampling along time: position n copies ``floor(n * M / N)``."""
    source_len = h.shape[1]
    if target_len < source_len:
        raise InvalidArgument(f'Cannot upsample length {source_len} down to {target_len}.')
    if target_len == source_len:
        return h
    return take(h, (np.arange(target_len) * source_len) // target_len, axis=1)

def bridge_to_decoder(blocks, original_len, norm):
    """Upsample every block output to ``original_len``, sum them and normalise with ``norm``."""
    if not blocks.hidden:
        raise InvalidArgument('Bridge needs at least one block output.')
    if len({h.shape[0] for h in blocks.hidden}) > 1 or len({h.shape[2] for h in blocks.hidden}) > 1:
        raise ShapeMismatch('Block outputs disagree on batch size or hidden dim.')
    total = upsample_nearest(blocks.hidden[0], original_len)
    for h in blocks.hidden[1:]:
        total = total + upsample_nearest(h, original_len)
    return norm(total)

def padding_mask(lengths, length):
    if lengths is None:
        return None
    lengths = np.asarray(lengths)
    if np.all(lengths >= length):
        return None
    return AttentionMask.padding(np.minimum(lengths, length))

def teacher_forcing(targets, target_lengths):
    """Decoder inputs ``[BOS, t...]`` and labels ``[t..., EOS]``, padded with PAD."""
    batch, length = targets.shape
    inputs = np.full((batch, length + 1), PAD, dtype=np.int64)
    inputs[:, 0] = BOS
    inputs[:, 1:] = targets
    labels = np.full((batch, length + 1), PAD, dtype=np.int64)
    labels[:, :length] = targets
    labels[np.arange(batch), target_lengths] = EOS
    return inputs, labels


class FourierTransformer(Module):
    def __init__(self, cfg, seed=0):
        self.cfg = cfg
        init = Init(seed, cfg.init_std, np.dtype(cfg.dtype))
        self.embedding = Embedding(init, cfg.vocab_size, cfg.dim, cfg.max_len, cfg.positional.value)
        self.encoder = [EncoderLayer(init, cfg) for _ in range(cfg.encoder_layers)]
        self.encoder_norm = LayerNorm(init, cfg.dim, cfg.layer_norm_eps)
        if cfg.mode is Mode.ENCODER_ONLY:
            self.classifier = Linear(init, cfg.dim, cfg.num_classes)
        else:
            self.bridge_norm = LayerNorm(init, cfg.dim, cfg.layer_norm_eps)
            self.target_embedding = Embedding(init, cfg.vocab_size, cfg.dim, cfg.max_len,
                                              cfg.positional.value)
            self.decoder = [DecoderLayer(init, cfg) for _ in range(cfg.decoder_layers)]
            self.decoder_norm = LayerNorm(init, cfg.dim, cfg.layer_norm_eps)
            self.output = Linear(init, cfg.dim, cfg.vocab_size)

    @property
    def is_seq2seq(self):
        return self.cfg.mode is Mode.ENCODER_DECODER

    def encoder_forward(self, tokens, lengths=None, keep_hidden=False):
        """Run the encoder block by block.

        The padding mask only applies before the first filter; afterwards
        positions no longer correspond to tokens.
        """
        tokens = np.asarray(tokens, dtype=np.int64)
        if tokens.ndim != 2:
            raise InvalidArgument(f'Tokens must be [batch, length], got shape {tokens.shape}.')
        if tokens.shape[1] > self.cfg.max_len:
            raise InvalidArgument(f'Input length {tokens.shape[1]} exceeds max_len {self.cfg.max_len}.')
        mask = padding_mask(lengths, tokens.shape[1])
        filters = self.cfg.active_filters()
        x = self.embedding(tokens)
        hidden_states = [x.data] if keep_hidden else []
        outputs, block_lengths = [], []
        filtered = False
        for i, layer in enumerate(self.encoder):
            x = layer(x, None if filtered else mask)
            if keep_hidden:
                hidden_states.append(x.data)
            if i in filters:
                outputs.append(x)
                block_lengths.append(x.shape[1])
                x = spectral_filter(x, filters[i].retain_ratio, filters[i].strategy)
                filtered = True
        outputs.append(x)
        block_lengths.append(x.shape[1])
        final = self.encoder_norm(x)
        pooled = self._pool(final, None if filtered else mask) if not self.is_seq2seq else None
        return EncoderOutput(BlockOutputs(outputs, block_lengths), final, pooled, hidden_states)

    def _pool(self, final, mask):
        if self.cfg.head is PoolingHead.FIRST_TOKEN:
            return take(final, 0, axis=1)
        if mask is None:
            return final.mean(axis=1)
        keep = (np.arange(final.shape[1])[None, :] < mask.lengths[:, None]).astype(final.dtype)
        return (final * Tensor(keep[:, :, None])).sum(axis=1) * Tensor((1.0 / mask.lengths[:, None]).astype(final.dtype))

    def classify(self, tokens, lengths=None):
        return self.classifier(self.encoder_forward(tokens, lengths).pooled)

    def encode_memory(self, tokens, lengths=None):
        tokens = np.asarray(tokens, dtype=np.int64)
        encoded = self.encoder_forward(tokens, lengths)
        return bridge_to_decoder(encoded.blocks, tokens.shape[1], self.bridge_norm)

    def decoder_forward(self, memory, target_tokens, memory_lengths=None):
        """Causally masked decoder with cross-attention over ``memory``; returns ``[B, T, vocab]`` logits."""
        target_tokens = np.asarray(target_tokens, dtype=np.int64)
        if target_tokens.ndim != 2 or target_tokens.shape[1] == 0:
            raise InvalidArgument('Decoder needs a non-empty [batch, length] target.')
        memory_mask = padding_mask(memory_lengths, memory.shape[1])
        x = self.target_embedding(target_tokens)
        for layer in self.decoder:
            x = layer(x, memory, memory_mask)
        return self.output(self.decoder_norm(x))

    def greedy_decode(self, memory, max_steps, memory_lengths=None):
        """Argmax decoding until EOS or ``max_steps``; ties go to the lowest token id."""
        batch = memory.shape[0]
        outputs = [[] for _ in range(batch)]
        finished = np.zeros(batch, dtype=bool)
        tokens = np.full((batch, 1), BOS, dtype=np.int64)
        with no_grad():
            for _ in range(min(max_steps, self.cfg.max_len)):
                logits = self.decoder_forward(memory, tokens, memory_lengths).data[:, -1, :]
                chosen = logits.argmax(axis=-1)
                for b in np.flatnonzero(~finished):
                    if chosen[b] == EOS:
                        finished[b] = True
                    else:
                        outputs[b].append(int(chosen[b]))
                if finished.all():
                    break
                tokens = np.concatenate([tokens, chosen[:, None]], axis=1)
        return outputs

    def generate(self, tokens, lengths=None, max_steps=None):
        with no_grad():
            memory = self.encode_memory(tokens, lengths)
        return self.greedy_decode(memory, max_steps or self.cfg.max_len, lengths)

    def loss(self, batch):
        if not self.is_seq2seq:
            return cross_entropy(self.classify(batch.tokens, batch.lengths), batch.targets)
        memory = self.encode_memory(batch.tokens, batch.lengths)
        inputs, labels = teacher_forcing(batch.targets, batch.target_lengths)
        logits = self.decoder_forward(memory, inputs, batch.lengths)
        return cross_entropy(logits, labels, ignore_index=PAD)
