"""Orthonormal DCT-II and its inverse (DCT-III).

Two paths are provided: an O(N^2) basis-matrix evaluation used as the
correctness oracle, and an O(N log N) path that reorders the input by the
even/odd interleave, runs one complex FFT and rotates the result.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from exceptions import InvalidArgument


@dataclass(frozen=True)
class DctPlan:
    """Permutation and coefficient tables for one sequence length.

    Arrays are read-only so a plan can be shared between workers.
    """
    length: int
    permutation: np.ndarray
    cos_table: np.ndarray
    sin_table: np.ndarray
    alpha: np.ndarray


def _frozen(array):
    array.setflags(write=False)
    return array

def _as_signal(x, axis=-1):
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[axis] == 0:
        raise InvalidArgument('Cannot transform an empty sequence.')
    if not np.issubdtype(x.dtype, np.floating):
        x = x.astype(np.float64)
    if not np.all(np.isfinite(x)):
        raise InvalidArgument('Sequence contains NaN or Inf values.')
    return x

def alpha_coefficients(n):
    alpha = np.full(n, np.sqrt(2.0 / n))
    alpha[0] = np.sqrt(1.0 / n)
    return alpha

def dct_matrix(n):
    """Orthonormal DCT-II basis as an explicit ``n x n`` matrix (row k is basis k)."""
    if n < 1:
        raise InvalidArgument(f'DCT length must be positive, got {n}.')
    k = np.arange(n)[:, None]
    t = np.arange(n)[None, :]
    return alpha_coefficients(n)[:, None] * np.cos(np.pi * k * (2 * t + 1) / (2 * n))

def dct_naive(x, axis=-1):
    """DCT-II by direct summation, ``y_k = a_k sum_n x_n cos(pi k (2n+1) / 2N)``."""
    x = _as_signal(x, axis)
    basis = dct_matrix(x.shape[axis])
    return np.moveaxis(np.tensordot(np.moveaxis(x, axis, -1), basis, axes=([-1], [1])), -1, axis)

def idct_naive(y, axis=-1):
    """Inverse of :func:`dct_naive`; the basis is orthonormal so this is its transpose."""
    y = _as_signal(y, axis)
    basis = dct_matrix(y.shape[axis])
    return np.moveaxis(np.tensordot(np.moveaxis(y, axis, -1), basis, axes=([-1], [0])), -1, axis)

def build_plan(n):
    """Precompute the interleave permutation and rotation tables for length ``n``.

    Even positions come first in ascending order, odd positions follow in
    descending order, e.g. ``n=5 -> [0, 2, 4, 3, 1]`` and ``n=4 -> [0, 2, 3, 1]``.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgument(f'DCT length must be a positive integer, got {n!r}.')
    n = int(n)
    permutation = np.concatenate((np.arange(0, n, 2), np.arange(1, n, 2)[::-1]))
    theta = np.pi * np.arange(n) / (2 * n)
    return DctPlan(length=n,
                   permutation=_frozen(permutation),
                   cos_table=_frozen(np.cos(theta)),
                   sin_table=_frozen(np.sin(theta)),
                   alpha=_frozen(alpha_coefficients(n)))

@lru_cache(maxsize=256)
def get_plan(n):
    return build_plan(n)

def _check_plan(x, plan, axis):
    if plan is None:
        return get_plan(x.shape[axis])
    if x.shape[axis] != plan.length:
        raise InvalidArgument(f'Sequence length {x.shape[axis]} does not match plan length {plan.length}.')
    return plan

def dct_fft(x, plan=None, axis=-1):
    """DCT-II through one FFT of the interleaved sequence.

    numpy's forward FFT uses ``exp(-i ...)``, so the rotation reads
    ``y_k = a_k (cos(pi k/2N) Re v_k + sin(pi k/2N) Im v_k)``.
    """
    x = _as_signal(x, axis)
    plan = _check_plan(x, plan, axis)
    u = np.moveaxis(x, axis, -1)[..., plan.permutation]
    v = np.fft.fft(u, axis=-1)
    y = plan.alpha * (plan.cos_table * v.real + plan.sin_table * v.imag)
    return np.moveaxis(y.astype(x.dtype, copy=False), -1, axis)

def idct_fft(y, plan=None, axis=-1):
    """Exact inverse of :func:`dct_fft`.

    Undoes the rotation using ``V_k = exp(i pi k/2N) (X_k - i X_{N-k})`` with
    ``X_N = 0``, applies the inverse FFT and scatters back through the permutation.
    """
    y = _as_signal(y, axis)
    plan = _check_plan(y, plan, axis)
    unscaled = np.moveaxis(y, axis, -1) / plan.alpha
    mirrored = np.zeros_like(unscaled)
    mirrored[..., 1:] = unscaled[..., :0:-1]
    v = (plan.cos_table + 1j * plan.sin_table) * (unscaled - 1j * mirrored)
    u = np.fft.ifft(v, axis=-1).real
    x = np.empty_like(u)
    x[..., plan.permutation] = u
    return np.moveaxis(x.astype(y.dtype, copy=False), -1, axis)
