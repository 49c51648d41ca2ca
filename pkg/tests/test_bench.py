import math

import numpy as np
import pytest

import bench.sweep
import bench.timing
from bench import (BENCH_COLUMNS, SWEEP_COLUMNS, bench_forward, markdown_table, read_csv, report_header,
                   retention_sweep, spectrum_report, write_csv)
from exceptions import InvalidArgument, NumericalError
from model import FourierTransformer, parse_model_config
from tasks import Example


def test_bench_grid(tiny_experiment):
    results = bench_forward(tiny_experiment.model, [16, 48], batch=2, repeats=5, warmup=1)
    assert [(r.config_id, r.seq_len) for r in results] == [
        ('vanilla', 16), ('filtered', 16), ('vanilla', 48), ('filtered', 48)]
    for r in results:
        assert r.p10 <= r.median <= r.p90
        assert r.peak_bytes > 0
        assert r.baseline == 'vanilla' and not r.capped
    assert results[0].speedup == 1.0
    assert set(results[0].row()) == set(BENCH_COLUMNS)

def test_bench_micro_batches_in_threads(tiny_experiment):
    results = bench_forward(tiny_experiment.model, [16], batch=4, repeats=5, warmup=0, micro_batch=1, threads=2)
    assert len(results) == 2

def test_bench_needs_enough_repeats(tiny_experiment):
    with pytest.raises(InvalidArgument):
        bench_forward(tiny_experiment.model, [16], repeats=3)
    with pytest.raises(InvalidArgument):
        bench_forward(tiny_experiment.model, [], repeats=5)

def test_out_of_memory_is_a_capped_point(tiny_experiment, monkeypatch):
    real = bench.timing.time_forward

    def flaky(model, tokens, *args, **kwargs):
        if model.cfg.filters:
            raise MemoryError
        return real(model, tokens, *args, **kwargs)

    monkeypatch.setattr(bench.timing, 'time_forward', flaky)
    results = bench_forward(tiny_experiment.model, [16], batch=2)
    assert results[0].capped is False
    assert results[1].capped is True and math.isnan(results[1].median)

def test_spectrum_report_layers(tiny_experiment):
    model = FourierTransformer(tiny_experiment.model, seed=0)
    examples = [Example(tokens=list(np.arange(16) + i), target=0, length=16) for i in range(6)]
    report = spectrum_report(model, examples, batch_size=4)
    assert sorted(report.curves) == [0, 1, 2]
    assert report.lengths == {0: 16, 1: 16, 2: 8}
    assert len(report.curves[2]) == 5
    assert report.samples == 6
    rows = report.centroid_rows()
    assert rows[2]['relative_centroid'] == pytest.approx(report.centroids[2] / 5)
    with pytest.raises(InvalidArgument):
        spectrum_report(model, examples, layers=[3])

def test_constant_input_concentrates_at_zero_frequency():
    cfg = parse_model_config({'encoder_layers': 2, 'dim': 8, 'heads': 2, 'ffn_dim': 16, 'max_len': 16,
                              'num_classes': 2, 'positional': 'none'})
    model = FourierTransformer(cfg, seed=0)
    examples = [Example(tokens=[65] * 16, target=0, length=16) for _ in range(3)]
    report = spectrum_report(model, examples)
    for layer in report.curves:
        np.testing.assert_allclose(report.curves[layer][1:], 0.0, atol=1e-5)
        assert report.centroids[layer] == pytest.approx(0.0, abs=1e-4)

def test_sweep_rows(tiny_experiment):
    rows = retention_sweep(tiny_experiment, [0.5, 1.0])
    assert [r.label for r in rows] == ['vanilla', 'r=0.5', 'r=1']
    assert all(0.0 <= r.accuracy <= 1.0 and not r.diverged for r in rows)
    assert rows[2].accuracy == rows[0].accuracy
    table = markdown_table(rows)
    assert len(table.strip().splitlines()) == 2 + len(rows)
    assert set(rows[0].row()) == set(SWEEP_COLUMNS)

def test_sweep_runs_concurrently(tiny_experiment):
    serial = retention_sweep(tiny_experiment, [0.5])
    parallel = retention_sweep(tiny_experiment, [0.5], threads=2)
    assert [r.accuracy for r in parallel] == [r.accuracy for r in serial]

def test_diverged_runs_are_flagged(tiny_experiment, monkeypatch):
    def explode(*args, **kwargs):
        raise NumericalError('loss became nan')

    monkeypatch.setattr(bench.sweep, 'fit', explode)
    rows = retention_sweep(tiny_experiment, [0.5])
    assert all(r.diverged and math.isnan(r.accuracy) for r in rows)
    assert '| nan |' in markdown_table(rows)

def test_csv_reports_carry_their_header(tmp_path):
    path = write_csv(tmp_path / 'r.csv', ['a', 'b'], [{'a': 1, 'b': 2.5}],
                     report_header('abc123', 7, ['note one']))
    header, rows = read_csv(path)
    assert header == ['config_hash=abc123', 'seed=7', 'note one']
    assert rows == [{'a': '1', 'b': '2.5'}]
    with pytest.raises(InvalidArgument):
        write_csv(tmp_path / 'bad.csv', ['a', 'b'], [{'a': 1}])
