"""Synthetic byte-level classification decided by two distant sentinel bytes.

Filler is random lowercase text; one uppercase sentinel sits in the first
quarter of the sequence and another in the last quarter. The label is 1 when
the two sentinels are the same letter and 0 otherwise. Labels alternate before
shuffling, so the classes are balanced exactly.
"""
import numpy as np

from exceptions import ConfigError
from .schema import Example, TaskKind, parse_spec

FILLER = np.frombuffer(b'abcdefghijklmnopqrstuvwxyz', dtype=np.uint8)
SYMBOLS = np.frombuffer(b'ABCDEFGHIJKLMNOPQRSTUVWXYZ', dtype=np.uint8)


def sentinel_positions(length, rng):
    quarter = max(length // 4, 1)
    return int(rng.integers(0, quarter)), int(rng.integers(length - quarter, length))

def gen_byte_classify(spec):
    spec = parse_spec(spec)
    if spec.kind is not TaskKind.BYTE_CLASSIFY:
        raise ConfigError(f'Expected a byte-classify spec, got {spec.kind.value}.')
    if spec.num_symbols > len(SYMBOLS):
        raise ConfigError(f'At most {len(SYMBOLS)} sentinel symbols are available.')
    rng = np.random.default_rng(spec.seed)
    length = spec.max_length
    labels = rng.permutation(np.arange(spec.size) % 2)
    examples = []
    for label in labels:
        data = rng.choice(FILLER, size=length)
        first = rng.integers(spec.num_symbols)
        second = first if label else (first + rng.integers(1, spec.num_symbols)) % spec.num_symbols
        left, right = sentinel_positions(length, rng)
        data[left], data[right] = SYMBOLS[first], SYMBOLS[second]
        examples.append(Example(tokens=data.tolist(), target=int(label), length=length,
                                text=data.tobytes().decode('ascii')))
    return examples
