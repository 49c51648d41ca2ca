from enum import Enum
from typing import List, Optional, Union

from pydantic import BaseModel, ValidationError, conint, root_validator

from exceptions import ConfigError

MAX_LISTOPS_DEPTH = 4
MAX_LISTOPS_LENGTH = 512
MAX_COPY_LENGTH = 256


class TaskKind(str, Enum):
    LISTOPS = 'listops-mini'
    BYTE_CLASSIFY = 'byte-classify'
    COPY = 'seq2seq-copy'


class DatasetSpec(BaseModel):
    kind: TaskKind
    size: conint(ge=1) = 1000
    seed: int = 0
    min_length: conint(ge=1) = 1
    max_length: conint(ge=1) = 128
    # listops
    max_depth: conint(ge=1) = 3
    max_args: conint(ge=1) = 5
    # byte-classify
    num_symbols: conint(ge=2) = 4
    # seq2seq-copy
    alphabet: conint(ge=1, le=256) = 26
    reverse: bool = False
    valid_fraction: float = 0.1

    @root_validator(skip_on_failure=True)
    def check_bounds(cls, values):
        if values['min_length'] > values['max_length']:
            raise ValueError('min_length exceeds max_length')
        kind = values['kind']
        if kind is TaskKind.LISTOPS:
            if values['max_depth'] > MAX_LISTOPS_DEPTH:
                raise ValueError(f'listops depth is limited to {MAX_LISTOPS_DEPTH}')
            if values['max_length'] > MAX_LISTOPS_LENGTH:
                raise ValueError(f'listops length is limited to {MAX_LISTOPS_LENGTH}')
        if kind is TaskKind.COPY and values['max_length'] > MAX_COPY_LENGTH:
            raise ValueError(f'copy source length is limited to {MAX_COPY_LENGTH}')
        if kind is TaskKind.BYTE_CLASSIFY and values['max_length'] < 4:
            raise ValueError('byte-classify sequences need at least 4 bytes')
        if not 0 <= values['valid_fraction'] < 1:
            raise ValueError('valid_fraction must lie in [0, 1)')
        return values


class Example(BaseModel):
    tokens: List[int]
    target: Union[int, List[int]]
    length: int
    text: Optional[str] = None


def parse_spec(data):
    """Validate a dataset spec from a dict (or pass a spec through), raising ConfigError."""
    if isinstance(data, DatasetSpec):
        return data
    try:
        return DatasetSpec.parse_obj(data)
    except ValidationError as e:
        raise ConfigError(f'Invalid dataset spec: {e}')
