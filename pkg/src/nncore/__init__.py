from .checkpoint import load_checkpoint, save_checkpoint
from .functional import (AttentionMask, MaskKind, cross_entropy, embed, feed_forward, layer_norm,
                         linear, multi_head_attention, relu, sinusoidal_positions, softmax,
                         spectral_filter, take)
from .gradcheck import grad_check
from .layers import Embedding, FeedForward, Init, LayerNorm, Linear, Module, MultiHeadAttention
from .optim import Adam
from .tensor import MEMORY, MemoryTracker, Parameter, Tensor, is_grad_enabled, no_grad
