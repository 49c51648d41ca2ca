"""Accuracy as a function of the retain ratio."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

from loguru import logger

from exceptions import NumericalError
from model import FourierTransformer, evaluate, fit, input_length
from tasks import generate, split

DEFAULT_RATIOS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]


@dataclass
class SweepRow:
    label: str
    ratio: float
    accuracy: float
    loss: float
    diverged: bool = False

    def row(self):
        return asdict(self)


SWEEP_COLUMNS = list(SweepRow.__dataclass_fields__)


def _train_one(label, ratio, model_cfg, experiment, train_set, valid_set):
    length = input_length(experiment)
    model = FourierTransformer(model_cfg, seed=experiment.train.seed)
    try:
        fit(model, train_set, valid_set, experiment.train, length)
        metrics = evaluate(model, valid_set, experiment.train.eval_batch_size, length)
    except NumericalError as e:
        logger.warning(f'{label}: run diverged ({e})')
        return SweepRow(label, ratio, math.nan, math.nan, diverged=True)
    diverged = not (math.isfinite(metrics['loss']) and math.isfinite(metrics['accuracy']))
    logger.info(f'{label}: accuracy {metrics["accuracy"]:.4f}, loss {metrics["loss"]:.4f}')
    return SweepRow(label, ratio, metrics['accuracy'], metrics['loss'], diverged)

def retention_sweep(experiment, ratios=None, threads=1, examples=None):
    """Train one model per ratio, plus the vanilla twin, with identical data, seed and budget.

    The vanilla row comes first. Runs are independent and may execute on
    ``threads`` workers; rows come back in input order either way.
    """
    ratios = DEFAULT_RATIOS if ratios is None else list(ratios)
    examples = examples if examples is not None else generate(experiment.dataset)
    train_set, valid_set = split(examples, experiment.dataset.valid_fraction)
    jobs = [('vanilla', 1.0, experiment.model.vanilla())]
    jobs += [(f'r={r:g}', r, experiment.model.with_ratio(r)) for r in ratios]
    run = lambda job: _train_one(*job, experiment, train_set, valid_set)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, jobs))
    return [run(job) for job in jobs]

def markdown_table(rows):
    """Plot-ready table: one line per run, accuracy in percent."""
    lines = ['| run | retain ratio | accuracy (%) | loss | diverged |', '|---|---|---|---|---|']
    for r in rows:
        accuracy = 'nan' if math.isnan(r.accuracy) else f'{100 * r.accuracy:.2f}'
        lines.append(f'| {r.label} | {r.ratio:g} | {accuracy} | {r.loss:.4f} | {"yes" if r.diverged else "no"} |')
    return '\n'.join(lines) + '\n'
