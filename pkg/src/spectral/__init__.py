from .analysis import PowerSpectrum, power_spectrum, spectral_centroid
from .dct import (DctPlan, build_plan, dct_fft, dct_matrix, dct_naive, get_plan, idct_fft,
                  idct_naive)
from .filter import (SpectrumTensor, TruncationStrategy, downsample_with_indices, parse_strategy,
                     retained_length, shortened_inverse, spectral_downsample, spectral_downsample_adjoint,
                     spectrum_of, truncate_spectrum)
