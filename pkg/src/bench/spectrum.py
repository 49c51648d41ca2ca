from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
from loguru import logger

from exceptions import InvalidArgument, UndefinedCentroid
from nncore import no_grad
from spectral import PowerSpectrum, spectral_centroid
from tasks import batch_iter

SPECTRUM_COLUMNS = ['layer', 'bin', 'amplitude']
CENTROID_COLUMNS = ['layer', 'length', 'bins', 'centroid', 'relative_centroid']


@dataclass
class SpectrumReport:
    """Per-layer mean amplitude curves; layer 0 is the embedding output."""
    curves: Dict[int, np.ndarray]
    lengths: Dict[int, int]
    samples: int
    centroids: Dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        for layer, curve in self.curves.items():
            try:
                self.centroids[layer] = spectral_centroid(curve)
            except UndefinedCentroid:
                logger.warning(f'Layer {layer} has an all-zero spectrum; centroid left undefined')
                self.centroids[layer] = float('nan')

    def relative_centroid(self, layer):
        """Centroid divided by the number of bins, comparable across layers of different length."""
        return self.centroids[layer] / len(self.curves[layer])

    def spectrum_rows(self):
        return [{'layer': layer, 'bin': k, 'amplitude': float(a)}
                for layer, curve in sorted(self.curves.items()) for k, a in enumerate(curve)]

    def centroid_rows(self):
        return [{'layer': layer, 'length': self.lengths[layer], 'bins': len(self.curves[layer]),
                 'centroid': self.centroids[layer], 'relative_centroid': self.relative_centroid(layer)}
                for layer in sorted(self.curves)]


def spectrum_report(model, examples, layers=None, batch_size=50, samples=None):
    """Power spectra of the encoder's hidden states over ``examples``.

    ``layers`` selects indices in ``0..encoder_layers`` (default: all of them).
    Every batch is padded to one common length so the curves stay comparable.
    """
    depth = model.cfg.encoder_layers
    layers = list(range(depth + 1)) if layers is None else list(layers)
    bad = [i for i in layers if not 0 <= i <= depth]
    if bad:
        raise InvalidArgument(f'Layer indices {bad} out of range 0..{depth}.')
    if samples is not None:
        examples = examples[:samples]
    if not examples:
        raise InvalidArgument('Spectrum report needs at least one example.')
    length = max(e.length for e in examples)
    spectra = {i: PowerSpectrum() for i in layers}
    with no_grad():
        for batch in batch_iter(examples, batch_size, length=length):
            hidden = model.encoder_forward(batch.tokens, batch.lengths, keep_hidden=True).hidden_states
            for i in layers:
                spectra[i].add(hidden[i])
    curves = {i: s.curve() for i, s in spectra.items()}
    logger.info(f'Spectrum over {len(examples)} sequences for layers {layers}')
    return SpectrumReport(curves, {i: spectra[i].shape[0] for i in layers}, len(examples))
