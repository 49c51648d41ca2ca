"""Run bookkeeping: the manifest every subcommand writes first, and the output-directory lock."""
import hashlib
import json
import os
import platform
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Optional

import click
import numpy as np
import pydantic
import yaml
from loguru import logger
from pydantic import BaseModel, conint

from exceptions import ConfigError

MANIFEST_NAME = 'manifest.json'
LOCK_NAME = '.lock'


class RunConfig(BaseModel):
    subcommand: str
    config: Optional[str] = None
    data: Optional[str] = None
    checkpoint: Optional[str] = None
    seed: int = 0
    out: Optional[Path] = None
    threads: conint(ge=1) = 1
    options: Dict[str, Any] = {}

    def run_hash(self):
        payload = json.dumps(json.loads(self.json(exclude={'out'})), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def versions():
    return {
        'python': platform.python_version(),
        'numpy': np.__version__,
        'pydantic': pydantic.VERSION,
        'click': click.__version__,
        'pyyaml': yaml.__version__,
    }

def write_manifest(run, experiment=None):
    """Everything needed to repeat ``run``: its flags, the resolved experiment, hashes and library versions."""
    manifest = {
        'run': json.loads(run.json()),
        'run_hash': run.run_hash(),
        'seed': run.seed,
        'versions': versions(),
    }
    if experiment is not None:
        manifest['config_hash'] = experiment.config_hash()
        manifest['experiment'] = json.loads(experiment.json())
    path = Path(run.out) / MANIFEST_NAME
    with open(path, 'w') as fp:
        json.dump(manifest, fp, indent=2, sort_keys=True)
    logger.debug(f'Wrote manifest {path}')
    return path

@contextmanager
def locked_output(directory):
    """Create ``directory`` and hold ``.lock`` in it for the duration of a run."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lock = directory / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(f'Output directory {directory} is in use by another run (remove {lock} if stale).')
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield directory
    finally:
        lock.unlink(missing_ok=True)
