import os
from copy import deepcopy
from pathlib import Path, PurePath

import yaml
from dotenv import load_dotenv

ENV_PREFIX = 'SPECTRAL_'

DEFAULTS = {
    'logger': {'console': {'log_level': 'INFO'}},
    'run': {'seed': 0, 'out': 'runs', 'threads': 1},
    'bench': {'lengths': [1024, 2048, 3072, 4096], 'batch': 16, 'micro_batch': 1, 'repeats': 5, 'warmup': 1},
    'sweep': {'ratios': [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]},
    'spectrum': {'samples': 1000, 'batch': 50},
}

def _merge(base, override):
    merged = deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged

def apply_env_overrides(conf, environ=None):
    """Overlay ``SPECTRAL_<SECTION>__<KEY>`` environment variables on a config dict.

    Values are parsed as YAML scalars, so ``SPECTRAL_RUN__SEED=7`` yields the int 7.
    """
    environ = os.environ if environ is None else environ
    conf = deepcopy(conf)
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        path = name[len(ENV_PREFIX):].lower().split('__')
        if len(path) < 2:
            continue
        node = conf
        for part in path[:-1]:
            node = node.setdefault(part, {})
        node[path[-1]] = yaml.safe_load(raw)
    return conf

def load_config(path=None, environ=None):
    path = Path(path) if path else Path(PurePath(__file__).with_name('config.yaml'))
    file_config = {}
    if path.exists():
        with open(path) as fp:
            file_config = yaml.safe_load(fp) or {}
    return apply_env_overrides(_merge(DEFAULTS, file_config), environ)

load_dotenv()
