import pytest

from bench import FlopsModel, flops_estimate
from model import load_experiment, parse_model_config


def _matmul(a_shape, b_shape):
    """2 FLOPs per multiply-add of ``a @ b``."""
    rows = 1
    for size in a_shape[:-1]:
        rows *= size
    return 2 * rows * a_shape[-1] * b_shape[-1]


def test_single_layer_matches_a_brute_force_count():
    n, d, f, classes = 4, 2, 8, 2
    cfg = parse_model_config({'encoder_layers': 1, 'dim': d, 'heads': 1, 'ffn_dim': f, 'num_classes': classes})
    matmuls = [((n, d), (d, d))] * 4          # query, key, value, output projections
    matmuls += [((n, d), (d, n)), ((n, n), (n, d))]   # scores, weighted values
    matmuls += [((n, d), (d, f)), ((n, f), (f, d))]   # feed-forward
    matmuls += [((1, d), (d, classes))]               # classifier on the pooled vector
    expected = sum(_matmul(a, b) for a, b in matmuls)
    report = flops_estimate(cfg, n)
    assert report.vanilla == expected == 520
    assert report.ratio == 1.0

def test_identity_filters_cost_nothing():
    cfg = load_experiment('bart-like-flops').model.with_ratio(1.0)
    report = flops_estimate(cfg, 766, 53)
    assert report.filtered == report.vanilla
    assert report.ratio == 1.0

def test_encoder_decoder_terms():
    cfg = parse_model_config({'mode': 'encoder-decoder', 'encoder_layers': 1, 'decoder_layers': 1, 'dim': 2,
                              'heads': 1, 'ffn_dim': 8, 'vocab_size': 5})
    costs = FlopsModel()
    expected = costs.encoder_layer(6, 2, 8) + costs.decoder_layer(3, 6, 2, 8) + 2 * 3 * 2 * 5
    assert flops_estimate(cfg, 6, 3).vanilla == expected

def test_bart_like_summarisation_ratio():
    report = flops_estimate(load_experiment('bart-like-flops').model, 766, 53)
    assert 1.3 <= report.ratio <= 2.0

def test_bart_like_long_form_ratio():
    cfg = load_experiment('bart-like-flops').model.with_ratio(0.3)
    report = flops_estimate(cfg, 5140, 693)
    assert 1.5 <= report.ratio <= 3.0

def test_breakdown_uses_post_filter_lengths():
    cfg = parse_model_config({'encoder_layers': 3, 'dim': 4, 'heads': 1, 'ffn_dim': 8, 'num_classes': 2,
                              'filters': [{'after_layer': 0, 'retain_ratio': 0.5},
                                          {'after_layer': 1, 'retain_ratio': 0.3}]})
    report = flops_estimate(cfg, 10)
    assert [(stage, length) for stage, _, length, _ in report.breakdown] == [
        ('encoder', 10), ('filter', 5), ('encoder', 5), ('filter', 2), ('encoder', 2)]
    assert report.ratio > 1.0

def test_smaller_ratios_save_more():
    cfg = load_experiment('bart-like-flops').model
    ratios = [flops_estimate(cfg.with_ratio(r), 2048, 128).ratio for r in (0.9, 0.5, 0.2)]
    assert ratios == sorted(ratios)

def test_report_states_its_conventions():
    header = flops_estimate(load_experiment('lra-bench').model, 1024).header()
    assert any('2 per multiply-add' in line for line in header)
    assert any(line.startswith('vanilla=') for line in header)
