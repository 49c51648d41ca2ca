import numpy as np

from exceptions import InvalidArgument, UndefinedCentroid


class PowerSpectrum:
    """Accumulates the mean time-axis amplitude spectrum of hidden states.

    Each added tensor ``[batch, time, dim]`` is transformed along time,
    amplitudes are averaged over dims, and the running mean is kept over every
    sequence seen so far. Only the non-negative half of the frequencies is
    stored since the inputs are real.
    """

    def __init__(self):
        self.shape = None
        self.total = None
        self.sequences = 0

    def add(self, h):
        h = np.asarray(h, dtype=np.float64)
        if h.ndim != 3 or 0 in h.shape:
            raise InvalidArgument(f'Expected a non-empty [batch, time, dim] tensor, got shape {h.shape}.')
        if self.shape is None:
            self.shape = h.shape[1:]
            self.total = np.zeros(h.shape[1] // 2 + 1)
        elif h.shape[1:] != self.shape:
            raise InvalidArgument(f'Tensor of shape {h.shape} does not match stream shape [*, {self.shape[0]}, {self.shape[1]}].')
        amplitude = np.abs(np.fft.rfft(h, axis=1, norm='ortho'))
        self.total += amplitude.mean(axis=2).sum(axis=0)
        self.sequences += h.shape[0]

    def curve(self):
        if not self.sequences:
            raise InvalidArgument('No hidden states were added to the spectrum.')
        return self.total / self.sequences


def power_spectrum(stream):
    spectrum = PowerSpectrum()
    for h in stream:
        spectrum.add(h)
    return spectrum.curve()

def spectral_centroid(curve):
    """Amplitude-weighted mean bin index; lower means energy sits at low frequencies."""
    curve = np.asarray(curve, dtype=np.float64)
    if curve.ndim != 1 or curve.size == 0:
        raise InvalidArgument('Amplitude curve must be a non-empty 1-D sequence.')
    if np.any(curve < 0):
        raise InvalidArgument('Amplitude curve must be non-negative.')
    weight = curve.sum()
    if weight == 0:
        raise UndefinedCentroid('Centroid of an all-zero amplitude curve is undefined.')
    return float(np.arange(curve.size) @ curve / weight)
