"""Dataset generation dispatch and JSONL persistence with a spec manifest."""
import json
from pathlib import Path

from loguru import logger

from .byte_classify import gen_byte_classify
from .copy_task import gen_copy_task
from .listops import gen_listops
from .schema import Example, TaskKind, parse_spec

GENERATORS = {
    TaskKind.LISTOPS: gen_listops,
    TaskKind.BYTE_CLASSIFY: gen_byte_classify,
    TaskKind.COPY: gen_copy_task,
}


def generate(spec):
    spec = parse_spec(spec)
    logger.info(f'Generating {spec.size} {spec.kind.value} examples (seed {spec.seed})...')
    return GENERATORS[spec.kind](spec)

def split(examples, valid_fraction):
    cut = len(examples) - int(round(len(examples) * valid_fraction))
    return examples[:cut], examples[cut:]

def save_dataset(directory, spec, examples):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / 'examples.jsonl', 'w', newline='\n') as fp:
        for example in examples:
            fp.write(json.dumps(example.dict(), sort_keys=True) + '\n')
    with open(directory / 'manifest.json', 'w') as fp:
        json.dump({'spec': json.loads(spec.json()), 'seed': spec.seed, 'count': len(examples)},
                  fp, indent=2, sort_keys=True)
    return directory

def load_dataset(directory):
    directory = Path(directory)
    with open(directory / 'manifest.json') as fp:
        manifest = json.load(fp)
    with open(directory / 'examples.jsonl') as fp:
        examples = [Example.parse_obj(json.loads(line)) for line in fp if line.strip()]
    return parse_spec(manifest['spec']), examples
