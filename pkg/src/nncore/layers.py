import numpy as np

from exceptions import ConfigError, ShapeMismatch

from . import functional as F
from .tensor import Parameter


class Module:
    """Holds parameters and submodules as attributes; names are dotted attribute paths."""

    def named_parameters(self, prefix=''):
        for name, value in vars(self).items():
            path = f'{prefix}{name}'
            if isinstance(value, Parameter):
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(path + '.')
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f'{path}.{i}.')

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self):
        return {name: p.data for name, p in self.named_parameters()}

    def load_state_dict(self, state):
        params = dict(self.named_parameters())
        missing = set(params) - set(state)
        if missing:
            raise ConfigError(f'Checkpoint is missing parameters: {sorted(missing)}')
        for name, p in params.items():
            if state[name].shape != p.data.shape:
                raise ShapeMismatch(f'Shape mismatch for {name}: {state[name].shape} vs {p.data.shape}')
            p.data[...] = state[name]


class Init:
    """Seeded initialiser: normal(0, std) for projections, zeros for biases, ones for gains."""

    def __init__(self, seed, std=0.02, dtype=np.float64):
        self.rng = np.random.default_rng(seed)
        self.std = std
        self.dtype = dtype

    def normal(self, *shape):
        return Parameter(self.rng.normal(0.0, self.std, size=shape).astype(self.dtype))

    def zeros(self, *shape):
        return Parameter(np.zeros(shape, dtype=self.dtype))

    def ones(self, *shape):
        return Parameter(np.ones(shape, dtype=self.dtype))


class Linear(Module):
    def __init__(self, init, fan_in, fan_out):
        self.weight = init.normal(fan_in, fan_out)
        self.bias = init.zeros(fan_out)

    def __call__(self, x):
        return F.linear(x, self.weight, self.bias)


class LayerNorm(Module):
    def __init__(self, init, dim, eps=1e-12):
        self.gain = init.ones(dim)
        self.bias = init.zeros(dim)
        self.eps = eps

    def __call__(self, h):
        return F.layer_norm(h, self.gain, self.bias, self.eps)


class Embedding(Module):
    def __init__(self, init, vocab_size, dim, max_len, positional='sinusoidal'):
        self.table = init.normal(vocab_size, dim)
        self.positional = positional
        if positional == 'learned':
            self.positions = init.normal(max_len, dim)
        elif positional == 'sinusoidal':
            self._positions = F.sinusoidal_positions(max_len, dim)
        self.max_len = max_len

    def __call__(self, tokens):
        if self.positional == 'learned':
            return F.embed(tokens, self.table, self.positions)
        if self.positional == 'sinusoidal':
            return F.embed(tokens, self.table, self._positions)
        return F.embed(tokens, self.table)


class MultiHeadAttention(Module):
    def __init__(self, init, dim, heads):
        self.heads = heads
        for name in ('q', 'k', 'v', 'o'):
            setattr(self, f'w_{name}', init.normal(dim, dim))
            setattr(self, f'b_{name}', init.zeros(dim))

    def params(self):
        return {name: p for name, p in vars(self).items() if isinstance(p, Parameter)}

    def __call__(self, q, k=None, v=None, mask=None):
        k = q if k is None else k
        v = k if v is None else v
        return F.multi_head_attention(q, k, v, mask, self.params(), self.heads)


class FeedForward(Module):
    def __init__(self, init, dim, hidden):
        self.w1 = init.normal(dim, hidden)
        self.b1 = init.zeros(hidden)
        self.w2 = init.normal(hidden, dim)
        self.b2 = init.zeros(dim)

    def __call__(self, h):
        return F.feed_forward(h, {'w1': self.w1, 'b1': self.b1, 'w2': self.w2, 'b2': self.b2})
