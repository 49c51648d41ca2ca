from .presets import PRESETS, load_experiment
from .schema import (ExperimentConfig, FilterSpec, Mode, ModelConfig, PoolingHead, Positional,
                     TrainConfig, parse_experiment, parse_model_config)
from .train import build_optimizer, evaluate, fit, input_length, overfit_batch, train_step, write_metrics
from .transformer import (BlockOutputs, EncoderOutput, FourierTransformer, bridge_to_decoder,
                          teacher_forcing, upsample_nearest)
