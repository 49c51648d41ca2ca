import numpy as np
import pytest

from exceptions import ConfigError, InvalidArgument
from tasks import (PAD, Example, batch_iter, evaluate_listops, gen_byte_classify, gen_copy_task, gen_listops,
                   generate, load_dataset, parse_spec, save_dataset, split)
from tasks.listops import random_expression


def _interpret(expression):
    """Stack-based evaluation, independent of the recursive evaluator."""
    reducers = {'MAX': max, 'MIN': min, 'MED': lambda a: int(np.median(a)), 'SM': lambda a: sum(a) % 10}
    stack = []
    for token in expression.replace('[', ' [ ').replace(']', ' ] ').split():
        if token == ']':
            args = []
            while not isinstance(stack[-1], str):
                args.append(stack.pop())
            op = stack.pop()
            stack.append(reducers[op](args[::-1]))
        elif token != '[':
            stack.append(int(token) if token.isdigit() else token)
    return stack.pop()


@pytest.mark.parametrize('expression, value', [('[MAX 2 4 1]', 4), ('[SM [MAX 1 9] 3]', 2), ('[MIN 5]', 5),
                                               ('[MED 1 2 3 9]', 2)])
def test_listops_evaluator(expression, value):
    assert evaluate_listops(expression) == value

@pytest.mark.parametrize('expression', ['[MAX 1', '[FOO 1 2]', '[MAX]', '[MIN 1] 2'])
def test_malformed_expressions(expression):
    with pytest.raises(InvalidArgument):
        evaluate_listops(expression)

def test_evaluator_agrees_with_stack_interpreter():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        expression = random_expression(rng, max_depth=4, max_args=5)
        assert evaluate_listops(expression) == _interpret(expression)

def test_listops_generation_respects_bounds():
    examples = gen_listops({'kind': 'listops-mini', 'size': 50, 'seed': 2, 'max_depth': 3, 'max_args': 4,
                            'min_length': 5, 'max_length': 120})
    assert len(examples) == 50
    for e in examples:
        assert 5 <= e.length <= 120
        assert e.tokens == list(e.text.encode())
        assert e.target == evaluate_listops(e.text)

@pytest.mark.parametrize('spec', [
    {'kind': 'listops-mini', 'max_depth': 5},
    {'kind': 'listops-mini', 'max_length': 600},
    {'kind': 'seq2seq-copy', 'max_length': 300},
    {'kind': 'byte-classify', 'min_length': 10, 'max_length': 8},
])
def test_bounds_are_config_errors(spec):
    with pytest.raises(ConfigError):
        parse_spec(spec)

def test_byte_classify_labels_match_sentinels():
    examples = gen_byte_classify({'kind': 'byte-classify', 'size': 1000, 'seed': 4, 'max_length': 64})
    labels = [e.target for e in examples]
    assert sum(labels) == 500
    for e in examples:
        assert e.length == 64
        sentinels = [c for c in e.text if c.isupper()]
        assert len(sentinels) == 2
        assert e.target == int(sentinels[0] == sentinels[1])

def test_copy_task_targets():
    forward = gen_copy_task({'kind': 'seq2seq-copy', 'size': 20, 'seed': 1, 'min_length': 2, 'max_length': 9})
    backward = gen_copy_task({'kind': 'seq2seq-copy', 'size': 20, 'seed': 1, 'min_length': 2, 'max_length': 9,
                              'reverse': True})
    for f, b in zip(forward, backward):
        assert f.target == f.tokens
        assert b.target == b.tokens[::-1]
        assert 2 <= f.length <= 9

def test_generation_is_reproducible_on_disk(tmp_path):
    spec = parse_spec({'kind': 'seq2seq-copy', 'size': 30, 'seed': 5, 'max_length': 12})
    save_dataset(tmp_path / 'a', spec, generate(spec))
    save_dataset(tmp_path / 'b', spec, generate(spec))
    for name in ('examples.jsonl', 'manifest.json'):
        assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()
    loaded_spec, examples = load_dataset(tmp_path / 'a')
    assert loaded_spec == spec
    assert examples == generate(spec)

def _examples(lengths):
    return [Example(tokens=[1] * n, target=0, length=n) for n in lengths]

def test_batch_sizes():
    assert [b.size for b in batch_iter(_examples([3] * 10), 4)] == [4, 4, 2]

def test_shuffle_is_seeded():
    data = [Example(tokens=[i], target=i, length=1) for i in range(10)]
    order = lambda seed, epoch: [t for b in batch_iter(data, 3, seed=seed, epoch=epoch) for t in b.targets.tolist()]
    assert order(1, 0) == order(1, 0)
    assert order(1, 0) != order(1, 1)
    assert sorted(order(1, 0)) == list(range(10))

def test_padding():
    equal = next(batch_iter(_examples([5, 5]), 2))
    assert equal.tokens.shape == (2, 5) and equal.padding_mask.all()
    ragged = next(batch_iter(_examples([2, 4]), 2))
    assert ragged.tokens[0].tolist() == [1, 1, PAD, PAD]
    assert ragged.padding_mask.tolist() == [[True, True, False, False], [True] * 4]

def test_batch_errors():
    with pytest.raises(InvalidArgument):
        next(batch_iter([], 4))
    with pytest.raises(InvalidArgument):
        next(batch_iter(_examples([2]), 0))

def test_byte_classify_is_balanced_at_scale():
    spec = parse_spec({'kind': 'byte-classify', 'size': 10000, 'seed': 9, 'max_length': 16})
    train_set, valid_set = split(gen_byte_classify(spec), spec.valid_fraction)
    labels = np.array([e.target for e in train_set + valid_set])
    assert abs(labels.mean() - 0.5) <= 0.02
    assert abs(np.mean([e.target for e in train_set]) - 0.5) <= 0.02
