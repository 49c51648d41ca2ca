"""Forward-pass wall time and tensor-memory benchmarks.

Timings are encoder forward passes under ``no_grad``. Each configuration is
built from the same seed, so a filtered model and its vanilla twin share
weights. Memory is the high-water mark of the in-process buffer tracker, not
OS resident memory.
"""
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from loguru import logger

from exceptions import InvalidArgument
from model import FourierTransformer
from nncore import MEMORY, no_grad

MIN_REPEATS = 5


@dataclass
class BenchResult:
    config_id: str
    seq_len: int
    batch: int
    repeats: int
    median: float
    p10: float
    p90: float
    peak_bytes: int
    speedup: float
    baseline: str
    capped: bool = False

    def row(self):
        return asdict(self)


BENCH_COLUMNS = list(BenchResult.__dataclass_fields__)


def _encode(model, chunk):
    # grad mode is per thread, so every worker disables it itself
    with no_grad():
        model.encoder_forward(chunk)

def _forward(model, tokens, micro_batch, pool):
    chunks = [tokens[i:i + micro_batch] for i in range(0, len(tokens), micro_batch)]
    if pool is None:
        for chunk in chunks:
            _encode(model, chunk)
    else:
        list(pool.map(lambda chunk: _encode(model, chunk), chunks))

def time_forward(model, tokens, repeats=MIN_REPEATS, warmup=1, micro_batch=None, threads=1):
    """Wall times of ``repeats`` forward passes after ``warmup`` untimed ones, plus peak tensor bytes."""
    micro_batch = micro_batch or len(tokens)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for _ in range(warmup):
            _forward(model, tokens, micro_batch, pool)
        baseline = MEMORY.current
        MEMORY.reset_peak()
        times = []
        for _ in range(repeats):
            start = time.perf_counter()
            _forward(model, tokens, micro_batch, pool)
            times.append(time.perf_counter() - start)
        return times, MEMORY.peak - baseline
    finally:
        if pool is not None:
            pool.shutdown()

def _capped(config_id, n, batch, repeats, baseline):
    nan = float('nan')
    return BenchResult(config_id, n, batch, repeats, nan, nan, nan, 0, nan, baseline, capped=True)

def bench_forward(cfg, lengths, batch=16, repeats=MIN_REPEATS, warmup=1, micro_batch=None, threads=1,
                  seed=0, configs=None):
    """Benchmark ``configs`` (default: the vanilla twin and ``cfg``) at every length.

    The first configuration is the baseline; ``speedup`` is its median divided
    by each configuration's median. A ``MemoryError`` is recorded as a capped
    point and the remaining points still run.
    """
    if repeats < MIN_REPEATS:
        raise InvalidArgument(f'Need at least {MIN_REPEATS} repeats, got {repeats}.')
    if batch < 1 or not lengths or min(lengths) < 1:
        raise InvalidArgument(f'Invalid benchmark grid: batch={batch}, lengths={lengths}.')
    if configs is None:
        configs = [('vanilla', cfg.vanilla()), ('filtered', cfg)]
    max_len = max(lengths)
    models = [(name, FourierTransformer(c.copy(update={'max_len': max(c.max_len, max_len)}), seed))
              for name, c in configs]
    baseline = models[0][0]
    rng = np.random.default_rng(seed)
    results = []
    for n in lengths:
        tokens = rng.integers(0, 256, size=(batch, n))
        base_median = None
        for name, model in models:
            try:
                times, peak = time_forward(model, tokens, repeats, warmup, micro_batch, threads)
            except MemoryError:
                logger.warning(f'{name} at N={n}: out of memory, recording a capped point')
                results.append(_capped(name, n, batch, repeats, baseline))
                continue
            p10, median, p90 = np.percentile(times, [10, 50, 90])
            if name == baseline:
                base_median = median
            speedup = base_median / median if base_median is not None else math.nan
            results.append(BenchResult(name, n, batch, repeats, float(median), float(p10), float(p90), int(peak),
                                       float(speedup), baseline))
            logger.info(f'{name} N={n}: median {median * 1e3:.1f} ms, peak {peak / 2 ** 20:.1f} MiB, '
                        f'speedup {speedup:.2f}x')
    return results
