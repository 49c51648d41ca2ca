"""ListOps-mini: nested prefix expressions over digits, e.g. ``[SM [MAX 1 9] 3]``."""
import re

import numpy as np

from exceptions import ConfigError, InvalidArgument
from .schema import Example, TaskKind, parse_spec
from .vocab import encode

OPERATORS = {
    'MAX': max,
    'MIN': min,
    # even-length median averages the middle pair and truncates, as in LRA
    'MED': lambda args: int(np.median(args)),
    'SM': lambda args: sum(args) % 10,
}

TOKEN_RE = re.compile(r'\[|\]|[A-Z]+|\d')
MAX_ATTEMPTS = 1000


def tokenize(expression):
    return TOKEN_RE.findall(expression)

def evaluate(expression):
    """Exact recursive evaluation of a ListOps expression string."""
    tokens = tokenize(expression)
    value, position = _evaluate(tokens, 0)
    if position != len(tokens):
        raise InvalidArgument(f'Trailing tokens in expression: {expression!r}')
    return value

def _evaluate(tokens, position):
    if position >= len(tokens):
        raise InvalidArgument('Unexpected end of expression.')
    token = tokens[position]
    if token.isdigit():
        return int(token), position + 1
    if token != '[':
        raise InvalidArgument(f'Unexpected token {token!r}.')
    op = tokens[position + 1] if position + 1 < len(tokens) else None
    if op not in OPERATORS:
        raise InvalidArgument(f'Unknown operator {op!r}.')
    position += 2
    args = []
    while position < len(tokens) and tokens[position] != ']':
        value, position = _evaluate(tokens, position)
        args.append(value)
    if position >= len(tokens):
        raise InvalidArgument('Unbalanced brackets.')
    if not args:
        raise InvalidArgument(f'Operator {op} has no operands.')
    return OPERATORS[op](args), position + 1

def random_expression(rng, max_depth, max_args, depth=0):
    if depth > 0 and (depth >= max_depth or rng.random() < 0.3):
        return str(rng.integers(10))
    op = list(OPERATORS)[rng.integers(len(OPERATORS))]
    count = int(rng.integers(2, max(max_args, 2) + 1))
    args = [random_expression(rng, max_depth, max_args, depth + 1) for _ in range(count)]
    return f'[{op} {" ".join(args)}]'

def gen_listops(spec):
    spec = parse_spec(spec)
    if spec.kind is not TaskKind.LISTOPS:
        raise ConfigError(f'Expected a listops spec, got {spec.kind.value}.')
    rng = np.random.default_rng(spec.seed)
    examples = []
    for _ in range(spec.size):
        for _ in range(MAX_ATTEMPTS):
            expression = random_expression(rng, spec.max_depth, spec.max_args)
            if spec.min_length <= len(expression) <= spec.max_length:
                break
        else:
            raise ConfigError(f'Could not generate an expression between {spec.min_length} and '
                              f'{spec.max_length} bytes at depth {spec.max_depth}.')
        tokens = encode(expression)
        examples.append(Example(tokens=tokens, target=evaluate(expression), length=len(tokens),
                                text=expression))
    return examples
