from .batching import Batch, batch_iter, make_batch
from .byte_classify import gen_byte_classify
from .copy_task import gen_copy_task
from .listops import evaluate as evaluate_listops
from .listops import gen_listops
from .schema import DatasetSpec, Example, TaskKind, parse_spec
from .store import generate, load_dataset, save_dataset, split
from .vocab import BOS, EOS, PAD, VOCAB_SIZE
