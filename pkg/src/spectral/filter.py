"""Spectral downsampling of hidden sequences: transform, truncate, reverse."""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from exceptions import InvalidArgument
from .dct import dct_fft, get_plan, idct_fft


class TruncationStrategy(str, Enum):
    HIGH_FREQUENCY_CUT = 'high-frequency-cut'
    LOW_FREQUENCY_CUT = 'low-frequency-cut'
    TOP_AMPLITUDE = 'top-amplitude'


@dataclass
class SpectrumTensor:
    """DCT coefficients laid out ``[batch, frequency, dim]``.

    ``kept`` lists which source bins survive truncation, in ascending order;
    it is ``None`` while the spectrum is untruncated.
    """
    coeffs: np.ndarray
    source_length: int
    kept: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        if self.coeffs.ndim != 3:
            raise InvalidArgument(f'Spectrum must be rank 3 [batch, frequency, dim], got shape {self.coeffs.shape}.')
        if not 1 <= self.coeffs.shape[1] <= self.source_length:
            raise InvalidArgument(f'{self.coeffs.shape[1]} bins cannot come from a length-{self.source_length} source.')

    @property
    def length(self):
        return self.coeffs.shape[1]


def parse_strategy(strategy):
    if isinstance(strategy, TruncationStrategy):
        return strategy
    try:
        return TruncationStrategy(strategy)
    except ValueError:
        choices = ', '.join(s.value for s in TruncationStrategy)
        raise InvalidArgument(f'Unknown truncation strategy {strategy!r}; expected one of {choices}.')

def check_ratio(ratio):
    if not 0 < ratio <= 1:
        raise InvalidArgument(f'Retain ratio must lie in (0, 1], got {ratio}.')
    return float(ratio)

def retained_length(n, ratio):
    """``ceil(ratio * n)``, robust to decimal ratios that are inexact in binary."""
    check_ratio(ratio)
    return max(1, min(n, math.ceil(ratio * n - 1e-9)))

def spectrum_of(h):
    """DCT along the time axis of a ``[batch, time, dim]`` array."""
    h = np.asarray(h)
    if h.ndim != 3:
        raise InvalidArgument(f'Hidden states must be rank 3 [batch, time, dim], got shape {h.shape}.')
    if h.shape[1] == 0:
        raise InvalidArgument('Hidden states have an empty time axis.')
    return SpectrumTensor(dct_fft(h, get_plan(h.shape[1]), axis=1), h.shape[1])

def select_bins(coeffs, keep, strategy):
    n = coeffs.shape[1]
    if strategy is TruncationStrategy.HIGH_FREQUENCY_CUT:
        return np.arange(keep)
    if strategy is TruncationStrategy.LOW_FREQUENCY_CUT:
        return np.arange(n - keep, n)
    # stable sort: equal amplitudes keep the lower bin
    amplitude = np.abs(coeffs).mean(axis=(0, 2))
    return np.sort(np.argsort(-amplitude, kind='stable')[:keep])

def truncate_spectrum(spectrum, ratio, strategy=TruncationStrategy.HIGH_FREQUENCY_CUT):
    """Keep ``ceil(ratio * N)`` frequency bins chosen by ``strategy``."""
    strategy = parse_strategy(strategy)
    ratio = check_ratio(ratio)
    if spectrum.kept is not None:
        raise InvalidArgument('Spectrum is already truncated.')
    n = spectrum.source_length
    keep = retained_length(n, ratio)
    if keep == n:
        return SpectrumTensor(spectrum.coeffs, n, np.arange(n))
    kept = select_bins(spectrum.coeffs, keep, strategy)
    return SpectrumTensor(spectrum.coeffs[:, kept, :], n, kept)

def shortened_inverse(truncated):
    """Inverse DCT of a truncated spectrum at its own length, rescaled by ``sqrt(M/N)``."""
    n, m = truncated.source_length, truncated.length
    return idct_fft(truncated.coeffs * np.sqrt(m / n), get_plan(m), axis=1)

def downsample_with_indices(h, ratio, strategy=TruncationStrategy.HIGH_FREQUENCY_CUT):
    """Run the filter and also return the kept bin indices (needed by the adjoint)."""
    truncated = truncate_spectrum(spectrum_of(h), ratio, strategy)
    out = shortened_inverse(truncated)
    return out.astype(np.asarray(h).dtype, copy=False), truncated.kept

def spectral_downsample(h, ratio, strategy=TruncationStrategy.HIGH_FREQUENCY_CUT):
    """Shorten ``h`` from N to ``ceil(ratio * N)`` time steps.

    Coefficients are rescaled by ``sqrt(M/N)`` before the shorter inverse
    transform, so constants and pure DCT tones keep their amplitude.
    """
    out, _ = downsample_with_indices(h, ratio, strategy)
    return out

def spectral_downsample_adjoint(grad, source_length, kept):
    """Transpose of the filter's linear map, applied to an output gradient.

    Forward is ``IDCT_M . s . Select . DCT_N``; both transforms are orthonormal,
    so the transpose is ``IDCT_N . Scatter . s . DCT_M``.
    """
    grad = np.asarray(grad)
    m = grad.shape[1]
    coeffs = dct_fft(grad, get_plan(m), axis=1) * np.sqrt(m / source_length)
    full = np.zeros((grad.shape[0], source_length, grad.shape[2]), dtype=coeffs.dtype)
    full[:, kept, :] = coeffs
    return idct_fft(full, get_plan(source_length), axis=1).astype(grad.dtype, copy=False)
