"""Checkpoints: a JSON manifest of (name, shape, offset) plus one little-endian float64 blob."""
import json
from pathlib import Path

import numpy as np

from exceptions import ConfigError

MANIFEST_NAME = 'checkpoint.json'
BLOB_NAME = 'checkpoint.bin'
BLOB_DTYPE = '<f8'


def save_checkpoint(directory, state, metadata=None):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries, chunks, offset = [], [], 0
    for name, array in state.items():
        flat = np.ascontiguousarray(array, dtype=BLOB_DTYPE).reshape(-1)
        entries.append({'name': name, 'shape': list(np.shape(array)), 'offset': offset})
        chunks.append(flat.tobytes())
        offset += flat.size
    with open(directory / BLOB_NAME, 'wb') as fp:
        for chunk in chunks:
            fp.write(chunk)
    manifest = {'dtype': BLOB_DTYPE, 'count': offset, 'tensors': entries, 'metadata': metadata or {}}
    with open(directory / MANIFEST_NAME, 'w') as fp:
        json.dump(manifest, fp, indent=2, sort_keys=True)
    return directory

def load_checkpoint(directory):
    """Return ``(state, metadata)``; arrays are float64 copies of the blob."""
    directory = Path(directory)
    if not (directory / MANIFEST_NAME).exists():
        raise ConfigError(f'No checkpoint found in {directory}.')
    with open(directory / MANIFEST_NAME) as fp:
        manifest = json.load(fp)
    blob = np.fromfile(directory / BLOB_NAME, dtype=manifest['dtype'])
    if blob.size != manifest['count']:
        raise ConfigError(f'Checkpoint blob holds {blob.size} values, manifest expects {manifest["count"]}.')
    state = {}
    for entry in manifest['tensors']:
        size = int(np.prod(entry['shape'], dtype=np.int64))
        start = entry['offset']
        state[entry['name']] = blob[start:start + size].reshape(entry['shape']).astype(np.float64)
    return state, manifest['metadata']
