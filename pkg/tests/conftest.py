import json

import numpy as np
import pytest

from model import parse_experiment


TINY_EXPERIMENT = {
    'model': {'mode': 'encoder-only', 'encoder_layers': 2, 'dim': 8, 'heads': 2, 'ffn_dim': 16, 'max_len': 32,
              'num_classes': 2, 'filters': [{'after_layer': 0, 'retain_ratio': 0.5}]},
    'dataset': {'kind': 'byte-classify', 'size': 40, 'seed': 1, 'max_length': 16},
    'train': {'steps': 4, 'batch_size': 8, 'lr': 1e-3, 'warmup_steps': 2, 'eval_every': 2, 'eval_batch_size': 8},
}

TINY_SEQ2SEQ = {
    'model': {'mode': 'encoder-decoder', 'encoder_layers': 2, 'decoder_layers': 1, 'dim': 8, 'heads': 2,
              'ffn_dim': 16, 'max_len': 24, 'filters': [{'after_layer': 0, 'retain_ratio': 0.5}]},
    'dataset': {'kind': 'seq2seq-copy', 'size': 20, 'seed': 3, 'min_length': 3, 'max_length': 8, 'alphabet': 6},
    'train': {'steps': 3, 'batch_size': 4, 'lr': 1e-3, 'warmup_steps': 1, 'eval_every': 3, 'eval_batch_size': 4},
}


@pytest.fixture
def tiny_experiment():
    return parse_experiment(TINY_EXPERIMENT)

@pytest.fixture
def tiny_seq2seq():
    return parse_experiment(TINY_SEQ2SEQ)

@pytest.fixture
def tiny_config_file(tmp_path):
    path = tmp_path / 'tiny.json'
    path.write_text(json.dumps(TINY_EXPERIMENT))
    return path

@pytest.fixture
def rng():
    return np.random.default_rng(1234)
