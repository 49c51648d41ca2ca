import hashlib
import json
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ValidationError, confloat, conint, root_validator

from exceptions import ConfigError
from spectral import TruncationStrategy
from tasks import DatasetSpec


class Mode(str, Enum):
    ENCODER_ONLY = 'encoder-only'
    ENCODER_DECODER = 'encoder-decoder'


class PoolingHead(str, Enum):
    MEAN_POOL = 'mean-pool'
    FIRST_TOKEN = 'first-token'


class Positional(str, Enum):
    SINUSOIDAL = 'sinusoidal'
    LEARNED = 'learned'
    NONE = 'none'


class FilterSpec(BaseModel):
    after_layer: conint(ge=0)
    retain_ratio: confloat(gt=0, le=1)
    strategy: TruncationStrategy = TruncationStrategy.HIGH_FREQUENCY_CUT

    @property
    def is_identity(self):
        return self.retain_ratio == 1


class ModelConfig(BaseModel):
    mode: Mode = Mode.ENCODER_ONLY
    encoder_layers: conint(ge=1) = 2
    decoder_layers: conint(ge=0) = 0
    dim: conint(ge=2) = 64
    heads: conint(ge=1) = 2
    ffn_dim: conint(ge=1) = 128
    vocab_size: conint(ge=1) = 259
    max_len: conint(ge=1) = 512
    num_classes: Optional[conint(ge=2)] = None
    filters: List[FilterSpec] = []
    head: PoolingHead = PoolingHead.MEAN_POOL
    positional: Positional = Positional.SINUSOIDAL
    dtype: str = 'float32'
    init_std: float = 0.02
    layer_norm_eps: float = 1e-12

    @root_validator(skip_on_failure=True)
    def check_architecture(cls, values):
        if values['dim'] % values['heads']:
            raise ValueError(f'dim {values["dim"]} is not divisible by {values["heads"]} heads')
        if values['mode'] is Mode.ENCODER_ONLY:
            if values['decoder_layers']:
                raise ValueError('encoder-only mode has no decoder layers')
            if values['num_classes'] is None:
                raise ValueError('encoder-only mode needs num_classes')
        elif values['decoder_layers'] < 1:
            raise ValueError('encoder-decoder mode needs at least one decoder layer')
        positions = [f.after_layer for f in values['filters']]
        if any(p >= values['encoder_layers'] for p in positions):
            raise ValueError(f'filters must follow one of the {values["encoder_layers"]} encoder layers')
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValueError('filter positions must be strictly increasing')
        if values['dtype'] not in ('float32', 'float64'):
            raise ValueError('dtype must be float32 or float64')
        return values

    def active_filters(self):
        """Filters that actually shorten the sequence; ratio-1 filters are no-ops."""
        return {f.after_layer: f for f in self.filters if not f.is_identity}

    def with_ratio(self, ratio=None, strategy=None):
        """Copy with every filter's ratio and/or strategy replaced."""
        try:
            filters = [FilterSpec(after_layer=f.after_layer,
                                  retain_ratio=f.retain_ratio if ratio is None else ratio,
                                  strategy=strategy or f.strategy) for f in self.filters]
        except ValidationError as e:
            raise ConfigError(f'Invalid filter override: {e}')
        return self.copy(update={'filters': filters})

    def vanilla(self):
        return self.copy(update={'filters': []})


class TrainConfig(BaseModel):
    steps: conint(ge=0) = 1000
    batch_size: conint(ge=1) = 32
    lr: confloat(ge=0) = 1e-3
    warmup_steps: conint(ge=0) = 100
    beta1: float = 0.9
    beta2: float = 0.98
    eps: float = 1e-9
    clip_norm: Optional[float] = 1.0
    eval_every: conint(ge=1) = 200
    eval_batch_size: conint(ge=1) = 64
    seed: int = 0


class ExperimentConfig(BaseModel):
    model: ModelConfig
    dataset: DatasetSpec
    train: TrainConfig = TrainConfig()

    def config_hash(self):
        payload = json.dumps(json.loads(self.json()), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def parse_model_config(data):
    try:
        return ModelConfig.parse_obj(data)
    except ValidationError as e:
        raise ConfigError(f'Invalid model config: {e}')

def parse_experiment(data):
    try:
        if 'model' not in data:
            raise ConfigError('Experiment file needs "model" and "dataset" sections.')
        return ExperimentConfig.parse_obj(data)
    except ValidationError as e:
        raise ConfigError(f'Invalid experiment config: {e}')
