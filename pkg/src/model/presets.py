"""Named experiment presets.

``bart-like-flops`` mirrors a 12+12 layer, width-1024 encoder-decoder with a
two-block encoder (filter after the second layer) and exists only for the
FLOPs estimator.
"""
import json
from pathlib import Path

from exceptions import ConfigError
from tasks import VOCAB_SIZE
from .schema import parse_experiment, parse_model_config

PRESETS = {
    'lra-text': {
        'model': {'mode': 'encoder-only', 'encoder_layers': 4, 'dim': 64, 'heads': 2, 'ffn_dim': 128,
                  'vocab_size': VOCAB_SIZE, 'max_len': 512, 'num_classes': 2,
                  'filters': [{'after_layer': 0, 'retain_ratio': 0.2}]},
        'dataset': {'kind': 'byte-classify', 'size': 10000, 'seed': 1, 'max_length': 512},
        'train': {'steps': 3000, 'batch_size': 32, 'lr': 1e-3, 'warmup_steps': 200, 'eval_every': 500},
    },
    'listops-mini': {
        'model': {'mode': 'encoder-only', 'encoder_layers': 4, 'dim': 64, 'heads': 2, 'ffn_dim': 128,
                  'vocab_size': VOCAB_SIZE, 'max_len': 256, 'num_classes': 10,
                  'filters': [{'after_layer': 0, 'retain_ratio': 0.2}]},
        'dataset': {'kind': 'listops-mini', 'size': 10000, 'seed': 2, 'max_depth': 3, 'max_args': 4,
                    'min_length': 5, 'max_length': 256},
        'train': {'steps': 3000, 'batch_size': 32, 'lr': 1e-3, 'warmup_steps': 200, 'eval_every': 500},
    },
    'seq2seq-copy': {
        'model': {'mode': 'encoder-decoder', 'encoder_layers': 2, 'decoder_layers': 2, 'dim': 64,
                  'heads': 2, 'ffn_dim': 128, 'vocab_size': VOCAB_SIZE, 'max_len': 72,
                  'filters': [{'after_layer': 0, 'retain_ratio': 0.5}]},
        'dataset': {'kind': 'seq2seq-copy', 'size': 5000, 'seed': 3, 'min_length': 4, 'max_length': 64,
                    'alphabet': 16},
        'train': {'steps': 4000, 'batch_size': 32, 'lr': 1e-3, 'warmup_steps': 200, 'eval_every': 500},
    },
    'lra-bench': {
        'model': {'mode': 'encoder-only', 'encoder_layers': 4, 'dim': 256, 'heads': 4, 'ffn_dim': 1024,
                  'vocab_size': VOCAB_SIZE, 'max_len': 4096, 'num_classes': 2,
                  'filters': [{'after_layer': 0, 'retain_ratio': 0.2}]},
        'dataset': {'kind': 'byte-classify', 'size': 16, 'seed': 4, 'max_length': 4096},
    },
    'bart-like-flops': {
        'model': {'mode': 'encoder-decoder', 'encoder_layers': 12, 'decoder_layers': 12, 'dim': 1024,
                  'heads': 16, 'ffn_dim': 4096, 'vocab_size': 50265, 'max_len': 8192,
                  'filters': [{'after_layer': 1, 'retain_ratio': 0.5}]},
        'dataset': {'kind': 'seq2seq-copy', 'size': 1, 'max_length': 256},
    },
}


def load_experiment(name_or_path):
    """Resolve a preset name or a JSON file into an ExperimentConfig.

    A file holding a bare model config is accepted; its dataset defaults to
    the byte-classify task at the model's maximum length.
    """
    if name_or_path in PRESETS:
        return parse_experiment(PRESETS[name_or_path])
    path = Path(name_or_path)
    if not path.exists():
        raise ConfigError(f'No preset or config file named {name_or_path!r}; presets: {", ".join(PRESETS)}.')
    try:
        with open(path) as fp:
            data = json.load(fp)
    except json.JSONDecodeError as e:
        raise ConfigError(f'Config file {path} is not valid JSON: {e}')
    if 'model' in data:
        return parse_experiment(data)
    model = parse_model_config(data)
    kind = 'seq2seq-copy' if model.mode.value == 'encoder-decoder' else 'byte-classify'
    return parse_experiment({'model': data,
                             'dataset': {'kind': kind, 'max_length': min(model.max_len, 256)}})
