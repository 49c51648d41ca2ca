"""Analytic FLOPs for vanilla and spectrally filtered transformers."""
import math
from dataclasses import dataclass, field
from typing import List, Tuple

from model import Mode
from spectral import retained_length


@dataclass(frozen=True)
class FlopsModel:
    """Per-term multipliers. Every matmul term counts 2 FLOPs per multiply-add."""
    projection: int = 8     # Q, K, V, O: 4 matmuls of n x D x D
    attention: int = 4      # scores and weighted sum: 2 matmuls of n x n x D
    feed_forward: int = 4   # 2 matmuls of n x D x F
    fft: float = 5.0        # complex FFT of length n: 5 n log2 n

    def assumptions(self):
        return [
            'FLOPs count 2 per multiply-add; only matrix multiplications and FFTs are counted.',
            f'Encoder layer at length n: projections {self.projection}nD^2, attention {self.attention}n^2D, '
            f'feed-forward {self.feed_forward}nDF.',
            'Decoder layer at target length t over memory length s: self-attention 8tD^2 + 4t^2D, '
            'cross-attention 4tD^2 + 4sD^2 + 4tsD, feed-forward 4tDF.',
            'Output layer: 2tDV for the decoder vocabulary projection, 2DC for an encoder-only classifier.',
            f'Spectral filter n -> m: {self.fft:g}D(n log2 n + m log2 m) for forward and inverse FFTs; '
            'filters with ratio 1 are identities and cost nothing.',
            'Not counted: embeddings, normalisation, softmax, activations, residual and bridge additions.',
            'Decoder cost is the teacher-forced pass over the whole target; memory is the full source '
            'length because the bridge restores it.',
        ]

    def encoder_layer(self, n, dim, ffn_dim):
        return self.projection * n * dim * dim + self.attention * n * n * dim + self.feed_forward * n * dim * ffn_dim

    def decoder_layer(self, t, s, dim, ffn_dim):
        self_attention = 8 * t * dim * dim + 4 * t * t * dim
        cross_attention = 4 * t * dim * dim + 4 * s * dim * dim + 4 * t * s * dim
        return self_attention + cross_attention + 4 * t * dim * ffn_dim

    def transform(self, n, m, dim):
        return self.fft * dim * (n * math.log2(n) + m * math.log2(m))


@dataclass
class FlopsReport:
    source_length: int
    target_length: int
    vanilla: float
    filtered: float
    breakdown: List[Tuple[str, int, int, float]] = field(default_factory=list)
    assumptions: List[str] = field(default_factory=list)

    @property
    def ratio(self):
        return self.vanilla / self.filtered

    def header(self):
        return self.assumptions + [f'vanilla={self.vanilla:.6g} filtered={self.filtered:.6g} ratio={self.ratio:.4f}']


def _count(cfg, src_len, tgt_len, costs, breakdown=None):
    filters = cfg.active_filters()
    total, n = 0.0, src_len
    for i in range(cfg.encoder_layers):
        layer = costs.encoder_layer(n, cfg.dim, cfg.ffn_dim)
        total += layer
        if breakdown is not None:
            breakdown.append(('encoder', i, n, layer))
        if i in filters:
            m = retained_length(n, filters[i].retain_ratio)
            transform = costs.transform(n, m, cfg.dim)
            total += transform
            if breakdown is not None:
                breakdown.append(('filter', i, m, transform))
            n = m
    if cfg.mode is Mode.ENCODER_ONLY:
        return total + 2 * cfg.dim * (cfg.num_classes or 0)
    for i in range(cfg.decoder_layers):
        layer = costs.decoder_layer(tgt_len, src_len, cfg.dim, cfg.ffn_dim)
        total += layer
        if breakdown is not None:
            breakdown.append(('decoder', i, tgt_len, layer))
    return total + 2 * tgt_len * cfg.dim * cfg.vocab_size

def flops_estimate(cfg, src_len, tgt_len=0, costs=FlopsModel()):
    """FLOPs of ``cfg`` and of its vanilla twin at the given source/target lengths."""
    breakdown = []
    filtered = _count(cfg, src_len, tgt_len, costs, breakdown)
    vanilla = _count(cfg.vanilla(), src_len, tgt_len, costs)
    return FlopsReport(src_len, tgt_len, vanilla, filtered, breakdown, costs.assumptions())
