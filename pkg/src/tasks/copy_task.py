import numpy as np

from exceptions import ConfigError
from .schema import Example, TaskKind, parse_spec

ALPHABET_START = ord('a')


def gen_copy_task(spec):
    """Sources of random bytes; the target is the source, or its reverse when ``spec.reverse``."""
    spec = parse_spec(spec)
    if spec.kind is not TaskKind.COPY:
        raise ConfigError(f'Expected a copy-task spec, got {spec.kind.value}.')
    rng = np.random.default_rng(spec.seed)
    start = ALPHABET_START if spec.alphabet <= 256 - ALPHABET_START else 0
    examples = []
    for _ in range(spec.size):
        length = int(rng.integers(spec.min_length, spec.max_length + 1))
        source = (start + rng.integers(0, spec.alphabet, size=length)).tolist()
        target = source[::-1] if spec.reverse else list(source)
        examples.append(Example(tokens=source, target=target, length=length))
    return examples
