import json
from pathlib import Path

import numpy as np
from loguru import logger

from exceptions import NumericalError
from nncore import Adam, no_grad
from tasks import batch_iter, make_batch


def build_optimizer(model, train_cfg):
    return Adam(model.parameters(), lr=train_cfg.lr, betas=(train_cfg.beta1, train_cfg.beta2),
                eps=train_cfg.eps, warmup_steps=train_cfg.warmup_steps, clip_norm=train_cfg.clip_norm)

def train_step(model, batch, optimizer):
    """One forward/backward/update; returns the scalar loss before the update."""
    optimizer.zero_grad()
    loss = model.loss(batch)
    value = float(loss.item())
    if not np.isfinite(value):
        raise NumericalError(f'Loss became {value} at step {optimizer.step_count}; aborting.')
    loss.backward()
    optimizer.step()
    return value

def token_accuracy(predictions, targets):
    correct = total = 0
    exact = 0
    for predicted, target in zip(predictions, targets):
        correct += sum(p == t for p, t in zip(predicted, target))
        total += len(target)
        exact += predicted == list(target)
    return correct / max(total, 1), exact / max(len(targets), 1)

def evaluate(model, examples, batch_size=64, length=None):
    """Accuracy and mean loss on ``examples``.

    Classification reports the fraction of correct labels; sequence tasks report
    token accuracy (and exact-match rate) under greedy decoding.
    """
    losses, weights = [], []
    correct = 0
    predictions, targets = [], []
    with no_grad():
        for batch in batch_iter(examples, batch_size, length=length):
            losses.append(float(model.loss(batch).item()))
            weights.append(batch.size)
            if model.is_seq2seq:
                max_steps = int(batch.target_lengths.max()) + 1
                predictions += model.generate(batch.tokens, batch.lengths, max_steps)
                targets += [row[:n].tolist() for row, n in zip(batch.targets, batch.target_lengths)]
            else:
                logits = model.classify(batch.tokens, batch.lengths).data
                correct += int((logits.argmax(axis=-1) == batch.targets).sum())
    metrics = {'loss': float(np.average(losses, weights=weights))}
    if model.is_seq2seq:
        metrics['accuracy'], metrics['exact_match'] = token_accuracy(predictions, targets)
    else:
        metrics['accuracy'] = correct / len(examples)
    return metrics

def fit(model, train_set, valid_set, train_cfg, length=None, metrics_path=None):
    """Train for ``train_cfg.steps`` steps, evaluating every ``eval_every`` steps.

    Each evaluation appends one JSON line to ``metrics_path``. Nothing
    time-dependent is written, so identical seeds give identical files.
    """
    optimizer = build_optimizer(model, train_cfg)
    history, window = [], []
    metrics_file = open(metrics_path, 'w') if metrics_path else None
    step, epoch = 0, 0
    try:
        while step < train_cfg.steps:
            for batch in batch_iter(train_set, train_cfg.batch_size, seed=train_cfg.seed, epoch=epoch,
                                    length=length):
                lr = optimizer.current_lr()
                window.append(train_step(model, batch, optimizer))
                step += 1
                if step % train_cfg.eval_every == 0 or step == train_cfg.steps:
                    record = {'step': step, 'epoch': epoch, 'lr': lr, 'train_loss': float(np.mean(window))}
                    if valid_set:
                        valid = evaluate(model, valid_set, train_cfg.eval_batch_size, length)
                        record.update({f'valid_{k}': v for k, v in valid.items()})
                    logger.info(f'step {step}: ' + ', '.join(f'{k}={v:.4g}' for k, v in record.items()
                                                            if isinstance(v, float)))
                    history.append(record)
                    if metrics_file:
                        metrics_file.write(json.dumps(record, sort_keys=True) + '\n')
                        metrics_file.flush()
                    window = []
                if step >= train_cfg.steps:
                    break
            epoch += 1
    finally:
        if metrics_file:
            metrics_file.close()
    return history

def overfit_batch(model, examples, train_cfg, steps, length=None):
    """Train repeatedly on one fixed batch; returns the loss after every step."""
    optimizer = build_optimizer(model, train_cfg)
    batch = make_batch(examples, length)
    return [train_step(model, batch, optimizer) for _ in range(steps)]

def write_metrics(path, metrics):
    path = Path(path)
    with open(path, 'w') as fp:
        json.dump(metrics, fp, indent=2, sort_keys=True)
    return path

def input_length(experiment):
    """Fixed input length for classification tasks; sequence tasks pad per batch."""
    if experiment.model.mode.value == 'encoder-only':
        return min(experiment.dataset.max_length, experiment.model.max_len)
    return None
