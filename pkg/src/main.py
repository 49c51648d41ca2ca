"""Command-line entry point.

Settings come from ``config.yaml``, then ``SPECTRAL_<SECTION>__<KEY>``
environment variables, then command-line flags, later ones winning.
Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""
import json
import logging.handlers
import sys
from pathlib import Path

import click
import numpy as np
from loguru import logger

from bench import (BENCH_COLUMNS, CENTROID_COLUMNS, SPECTRUM_COLUMNS, SWEEP_COLUMNS, FlopsModel,
                   bench_forward, flops_estimate, markdown_table, report_header, retention_sweep,
                   spectrum_report, write_csv)
from config import load_config
from exceptions import ConfigError, InvalidArgument, NumericalError
from model import (FourierTransformer, evaluate, fit, input_length, load_experiment,
                   parse_experiment, write_metrics)
from nncore import load_checkpoint, save_checkpoint
from run import RunConfig, locked_output, write_manifest
from spectral import (SpectrumTensor, TruncationStrategy, dct_fft, idct_fft, parse_strategy, shortened_inverse,
                      spectrum_of, truncate_spectrum)
from tasks import generate, load_dataset, save_dataset, split


def setup_logging(conf):
    logger.remove()
    if 'console' in conf['logger']:
        console_level = conf['logger']['console'].get('log_level', 'INFO').upper()
        logger.add(sys.stderr, level=console_level)

    if 'file' in conf['logger']:
        file_name = conf['logger']['file']['name']
        file_level = conf['logger']['file'].get('log_level', 'INFO').upper()
        logger.add(file_name, level=file_level)

    if 'syslog' in conf['logger']:
        syslog_host = conf['logger']['syslog']['host']
        syslog_port = conf['logger']['syslog'].get('port', 514)
        syslog_level = conf['logger']['syslog'].get('log_level', 'INFO').upper()
        handler = logging.handlers.SysLogHandler(address=(syslog_host, syslog_port))
        logger.add(handler, level=syslog_level)

def _int_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter(f'expected comma-separated integers, got {value!r}')

def _float_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter(f'expected comma-separated numbers, got {value!r}')

def _resolve(ctx, subcommand, default_config, **flags):
    """Build the RunConfig for ``subcommand`` from config.yaml/env defaults and the given flags."""
    conf = ctx.obj
    run = {k: v for k, v in flags.items() if k in RunConfig.__fields__ and v is not None}
    run.setdefault('config', default_config)
    run.setdefault('seed', conf['run']['seed'])
    run.setdefault('threads', conf['run']['threads'])
    run.setdefault('out', Path(conf['run']['out']) / subcommand)
    options = {k: v for k, v in flags.items() if k not in RunConfig.__fields__ and v is not None}
    return RunConfig(subcommand=subcommand, options=options, **run)

def _experiment(run):
    experiment = load_experiment(run.config)
    ratio, strategy = run.options.get('ratio'), run.options.get('strategy')
    if ratio is not None or strategy is not None:
        if not experiment.model.filters:
            logger.warning(f'{run.config} has no spectral filters; --ratio/--strategy ignored')
        else:
            strategy = parse_strategy(strategy) if strategy else None
            experiment = experiment.copy(update={'model': experiment.model.with_ratio(ratio, strategy)})
    train = experiment.train.copy(update={'seed': run.seed})
    return parse_experiment({'model': json.loads(experiment.model.json()),
                             'dataset': json.loads(experiment.dataset.json()),
                             'train': json.loads(train.json())})

def _examples(run, experiment):
    if run.data:
        spec, examples = load_dataset(run.data)
        return split(examples, spec.valid_fraction)
    return split(generate(experiment.dataset), experiment.dataset.valid_fraction)

def _restore(run, experiment):
    model = FourierTransformer(experiment.model, seed=run.seed)
    if run.checkpoint:
        state, _ = load_checkpoint(run.checkpoint)
        model.load_state_dict(state)
        logger.info(f'Loaded weights from {run.checkpoint}')
    return model


@click.group()
@click.pass_context
def cli(ctx):
    """Spectral-filter transformer experiments."""
    ctx.obj = ctx.obj or load_config()


@cli.command()
@click.option('--config', help='Preset name or experiment JSON file.')
@click.option('--seed', type=int, help='Model initialisation and shuffling seed.')
@click.option('--out', type=click.Path(path_type=Path), help='Output directory.')
@click.option('--data', type=click.Path(exists=True),
              help='Dataset directory, such as the dataset/ a previous train run wrote.')
@click.option('--ratio', type=float, help='Override every filter retain ratio.')
@click.option('--strategy', help='Override every filter truncation strategy.')
@click.pass_context
def train(ctx, **flags):
    """Fit a model; writes metrics.jsonl, final.json, checkpoint/ and the generated dataset/."""
    run = _resolve(ctx, 'train', 'lra-text', **flags)
    experiment = _experiment(run)
    with locked_output(run.out) as out:
        write_manifest(run, experiment)
        if run.data:
            spec, examples = load_dataset(run.data)
        else:
            spec, examples = experiment.dataset, generate(experiment.dataset)
            save_dataset(out / 'dataset', spec, examples)
        train_set, valid_set = split(examples, spec.valid_fraction)
        model = FourierTransformer(experiment.model, seed=run.seed)
        length = input_length(experiment)
        fit(model, train_set, valid_set, experiment.train, length, out / 'metrics.jsonl')
        final = evaluate(model, valid_set, experiment.train.eval_batch_size, length) if valid_set else {}
        write_metrics(out / 'final.json', final)
        save_checkpoint(out / 'checkpoint', model.state_dict(),
                        {'config_hash': experiment.config_hash(), 'seed': run.seed,
                         'experiment': json.loads(experiment.json())})
        logger.success(f'Training finished: {final}')


@cli.command(name='eval')
@click.option('--checkpoint', type=click.Path(exists=True), required=True, help='Directory written by train.')
@click.option('--config', help='Experiment to evaluate on; defaults to the checkpoint\'s own.')
@click.option('--seed', type=int)
@click.option('--out', type=click.Path(path_type=Path))
@click.option('--data', type=click.Path(exists=True), help='Evaluate on this whole dataset instead.')
@click.pass_context
def evaluate_command(ctx, **flags):
    """Accuracy and loss of a trained checkpoint; writes eval.json."""
    run = _resolve(ctx, 'eval', None, **flags)
    _, metadata = load_checkpoint(run.checkpoint)
    if run.config:
        experiment = _experiment(run)
    elif 'experiment' in metadata:
        experiment = parse_experiment(metadata['experiment'])
    else:
        raise ConfigError(f'{run.checkpoint} records no experiment; pass --config.')
    with locked_output(run.out) as out:
        write_manifest(run, experiment)
        model = _restore(run, experiment)
        if run.data:
            _, examples = load_dataset(run.data)
        else:
            _, examples = _examples(run, experiment)
        metrics = evaluate(model, examples, experiment.train.eval_batch_size, input_length(experiment))
        write_metrics(out / 'eval.json', metrics)
        logger.success(f'Evaluation: {metrics}')


@cli.command()
@click.option('--config', help='Preset name or experiment JSON file.')
@click.option('--seed', type=int)
@click.option('--out', type=click.Path(path_type=Path))
@click.option('--lengths', callback=_int_list, help='Comma-separated sequence lengths.')
@click.option('--ratio', type=float)
@click.option('--strategy')
@click.option('--threads', type=int, help='Worker threads for parallel micro-batches.')
@click.pass_context
def bench(ctx, **flags):
    """Forward-pass timing of the filtered model against its vanilla twin; writes bench.csv."""
    run = _resolve(ctx, 'bench', 'lra-bench', **flags)
    experiment = _experiment(run)
    settings = ctx.obj['bench']
    lengths = run.options.get('lengths') or settings['lengths']
    with locked_output(run.out) as out:
        write_manifest(run, experiment)
        results = bench_forward(experiment.model, lengths, batch=settings['batch'], repeats=settings['repeats'],
                                warmup=settings['warmup'], micro_batch=settings['micro_batch'],
                                threads=run.threads, seed=run.seed)
        notes = ['times in seconds for one encoder forward pass over the batch, gradients disabled',
                 'peak_bytes is the high-water mark of tracked tensor buffers, not OS memory',
                 'speedup = baseline median / row median']
        write_csv(out / 'bench.csv', BENCH_COLUMNS, [r.row() for r in results],
                  report_header(experiment.config_hash(), run.seed, notes + FlopsModel().assumptions()))


@cli.command()
@click.option('--config', help='Preset name or experiment JSON file.')
@click.option('--checkpoint', type=click.Path(exists=True), help='Trained weights; untrained control otherwise.')
@click.option('--seed', type=int)
@click.option('--out', type=click.Path(path_type=Path))
@click.option('--data', type=click.Path(exists=True))
@click.option('--layers', callback=_int_list, help='Comma-separated layer indices; 0 is the embedding.')
@click.pass_context
def spectrum(ctx, **flags):
    """Per-layer amplitude spectra and centroids; writes spectrum.csv and centroids.csv."""
    run = _resolve(ctx, 'spectrum', 'lra-text', **flags)
    experiment = _experiment(run)
    settings = ctx.obj['spectrum']
    with locked_output(run.out) as out:
        write_manifest(run, experiment)
        model = _restore(run, experiment)
        _, valid_set = _examples(run, experiment)
        report = spectrum_report(model, valid_set, run.options.get('layers'), batch_size=settings['batch'],
                                 samples=settings['samples'])
        header = report_header(experiment.config_hash(), run.seed,
                               [f'samples={report.samples}', 'amplitude: mean |rfft| over dims and sequences'])
        write_csv(out / 'spectrum.csv', SPECTRUM_COLUMNS, report.spectrum_rows(), header)
        write_csv(out / 'centroids.csv', CENTROID_COLUMNS, report.centroid_rows(), header)


@cli.command()
@click.option('--config', help='Preset name or experiment JSON file.')
@click.option('--seed', type=int)
@click.option('--out', type=click.Path(path_type=Path))
@click.option('--data', type=click.Path(exists=True))
@click.option('--ratio', 'ratios', callback=_float_list, help='Comma-separated retain ratios.')
@click.option('--strategy')
@click.option('--threads', type=int, help='Trainings to run concurrently.')
@click.pass_context
def sweep(ctx, **flags):
    """Train one model per retain ratio; writes sweep.csv and sweep.md."""
    run = _resolve(ctx, 'sweep', 'lra-text', **flags)
    experiment = _experiment(run)
    ratios = run.options.get('ratios') or ctx.obj['sweep']['ratios']
    with locked_output(run.out) as out:
        write_manifest(run, experiment)
        examples = None
        if run.data:
            _, examples = load_dataset(run.data)
        rows = retention_sweep(experiment, ratios, threads=run.threads, examples=examples)
        write_csv(out / 'sweep.csv', SWEEP_COLUMNS, [r.row() for r in rows],
                  report_header(experiment.config_hash(), run.seed, ['accuracy on the validation split']))
        (out / 'sweep.md').write_text(markdown_table(rows))


def _line_transform(inverse, ratio, strategy):
    if ratio is None:
        return idct_fft if inverse else dct_fft

    def shorten(values):
        column = values[None, :, None]
        spectrum = SpectrumTensor(column, values.size) if inverse else spectrum_of(column)
        truncated = truncate_spectrum(spectrum, ratio, strategy)
        return (shortened_inverse(truncated) if inverse else truncated.coeffs)[0, :, 0]
    return shorten


@cli.command()
@click.argument('source', type=click.File('r'), default='-')
@click.option('--inverse', is_flag=True, help='Apply the inverse transform.')
@click.option('--ratio', type=float,
              help='Keep ceil(ratio * N) bins; with --inverse, reconstruct at that shorter length.')
@click.option('--strategy', help='Truncation strategy used with --ratio.')
@click.option('--out', type=click.Path(path_type=Path),
              help='Output directory; without it output.txt is also echoed to stdout.')
@click.pass_context
def dct(ctx, source, inverse, ratio, strategy, out):
    """Orthonormal DCT-II (or its inverse) of each comma-separated line of SOURCE."""
    if strategy is not None and ratio is None:
        raise InvalidArgument('--strategy only applies together with --ratio.')
    strategy = parse_strategy(strategy or TruncationStrategy.HIGH_FREQUENCY_CUT)
    transform = _line_transform(inverse, ratio, strategy)
    lines = []
    for number, line in enumerate(source, 1):
        if not line.strip():
            continue
        try:
            values = np.array([float(v) for v in line.split(',')], dtype=np.float64)
        except ValueError:
            raise InvalidArgument(f'Line {number}: expected comma-separated numbers.')
        lines.append(','.join(f'{v:.17g}' for v in transform(values)))
    text = ''.join(f'{line}\n' for line in lines)
    run = _resolve(ctx, 'dct', None, out=out, inverse=inverse, ratio=ratio,
                   strategy=strategy.value if ratio is not None else None, source=source.name)
    with locked_output(run.out) as directory:
        write_manifest(run)
        (directory / 'output.txt').write_text(text)
    if out is None:
        click.echo(text, nl=False)


@cli.command()
@click.option('--config', help='Preset name or experiment JSON file.')
@click.option('--src-len', type=int, default=766, show_default=True)
@click.option('--tgt-len', type=int, default=53, show_default=True)
@click.option('--ratio', type=float)
@click.option('--strategy')
@click.option('--out', type=click.Path(path_type=Path), help='Output directory for manifest.json and flops.csv.')
@click.pass_context
def flops(ctx, src_len, tgt_len, **flags):
    """Analytic FLOPs of a model and its vanilla twin; the report header is also printed."""
    if src_len < 1 or tgt_len < 0:
        raise InvalidArgument(f'Lengths must be positive, got source {src_len}, target {tgt_len}.')
    run = _resolve(ctx, 'flops', 'bart-like-flops', src_len=src_len, tgt_len=tgt_len, **flags)
    experiment = _experiment(run)
    report = flops_estimate(experiment.model, src_len, tgt_len)
    with locked_output(run.out) as out:
        write_manifest(run, experiment)
        rows = [{'stage': s, 'layer': i, 'length': n, 'flops': f} for s, i, n, f in report.breakdown]
        write_csv(out / 'flops.csv', ['stage', 'layer', 'length', 'flops'], rows,
                  report_header(experiment.config_hash(), run.seed, report.header()))
    for line in report.header():
        click.echo(f'# {line}')


def dispatch(argv=None):
    """Run the CLI on ``argv`` and return the process exit code."""
    conf = load_config()
    setup_logging(conf)
    try:
        cli.main(args=argv, prog_name='spectral', obj=conf, standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except (ConfigError, InvalidArgument) as e:
        logger.error(str(e))
        return 1
    except NumericalError as e:
        logger.error(str(e))
        return 2
    return 0


if __name__ == '__main__':
    sys.exit(dispatch(sys.argv[1:]))
