from dataclasses import dataclass
from typing import Optional

import numpy as np

from exceptions import InvalidArgument
from .vocab import PAD, pad_rows


@dataclass
class Batch:
    """Right-padded model inputs.

    ``targets`` is ``[B]`` class ids for classification, or ``[B, T]`` padded
    token targets for sequence tasks with ``target_lengths`` set.
    """
    tokens: np.ndarray
    lengths: np.ndarray
    targets: np.ndarray
    target_lengths: Optional[np.ndarray] = None

    @property
    def size(self):
        return self.tokens.shape[0]

    @property
    def padding_mask(self):
        return np.arange(self.tokens.shape[1])[None, :] < self.lengths[:, None]


def make_batch(examples, length=None, pad_token=PAD):
    lengths = np.array([len(e.tokens) for e in examples], dtype=np.int64)
    length = int(lengths.max()) if length is None else length
    if lengths.max() > length:
        raise InvalidArgument(f'Example of length {lengths.max()} does not fit padded length {length}.')
    tokens = pad_rows([e.tokens for e in examples], length, pad_token)
    if isinstance(examples[0].target, list):
        target_lengths = np.array([len(e.target) for e in examples], dtype=np.int64)
        targets = pad_rows([e.target for e in examples], int(target_lengths.max()), pad_token)
        return Batch(tokens, lengths, targets, target_lengths)
    return Batch(tokens, lengths, np.array([e.target for e in examples], dtype=np.int64))

def batch_iter(dataset, batch_size, pad_token=PAD, seed=None, epoch=0, length=None):
    """Yield fixed-length right-padded batches.

    With a ``seed`` the order is shuffled deterministically per ``(seed, epoch)``;
    without one the dataset order is kept. ``length`` defaults to the longest
    input in the dataset, so equal-length inputs receive no padding.
    """
    if batch_size < 1:
        raise InvalidArgument(f'Batch size must be positive, got {batch_size}.')
    if not dataset:
        raise InvalidArgument('Cannot batch an empty dataset.')
    length = max(len(e.tokens) for e in dataset) if length is None else length
    order = np.arange(len(dataset))
    if seed is not None:
        order = np.random.default_rng([seed, epoch]).permutation(len(dataset))
    for start in range(0, len(dataset), batch_size):
        yield make_batch([dataset[i] for i in order[start:start + batch_size]], length, pad_token)
