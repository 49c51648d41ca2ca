import numpy as np
from loguru import logger

from exceptions import NumericalError


def _evaluate(f):
    value = float(f().item())
    if not np.isfinite(value):
        raise NumericalError(f'Loss is not finite ({value}) during gradient check.')
    return value

def grad_check(f, params, eps=1e-5, max_coords=None, seed=0, floor=1e-6):
    """Compare reverse-mode gradients of ``f`` against central finite differences.

    Parameters
    ----------
    f : callable
        Returns a scalar Tensor computed from ``params``; must be deterministic.
    params : list of Parameter
    eps : float
        Finite-difference step.
    max_coords : int or None
        Check at most this many randomly chosen coordinates per parameter
        (all coordinates when None).
    floor : float
        Lower bound on the denominator of the relative error, so coordinates
        whose true gradient is zero are judged on absolute error.

    Returns
    -------
    float
        The maximum relative error over every checked coordinate.
    """
    for p in params:
        p.zero_grad()
    loss = f()
    if not np.isfinite(loss.item()):
        raise NumericalError('Loss is not finite; cannot check gradients.')
    loss.backward()
    analytic = [p.grad.copy() for p in params]

    rng = np.random.default_rng(seed)
    worst = 0.0
    for p, grad in zip(params, analytic):
        flat = p.data.reshape(-1)
        coords = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            coords = rng.choice(flat.size, size=max_coords, replace=False)
        for i in coords:
            original = flat[i]
            flat[i] = original + eps
            upper = _evaluate(f)
            flat[i] = original - eps
            lower = _evaluate(f)
            flat[i] = original
            numeric = (upper - lower) / (2 * eps)
            exact = grad.reshape(-1)[i]
            error = abs(exact - numeric) / max(abs(exact), abs(numeric), floor)
            worst = max(worst, error)
    logger.debug(f'Gradient check over {len(params)} parameter(s): max relative error {worst:.3e}.')
    return worst
