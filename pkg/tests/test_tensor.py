import gc
import threading

import numpy as np
import pytest

from exceptions import ConfigError, InvalidArgument, ShapeMismatch
from nncore import (MEMORY, AttentionMask, Parameter, Tensor, cross_entropy, embed, feed_forward,
                    is_grad_enabled, layer_norm, multi_head_attention, no_grad, softmax, take)


def test_broadcast_gradients_are_summed():
    a = Parameter(np.ones((2, 3)))
    b = Parameter(np.array([1.0, 2.0, 3.0]))
    (a * b + b).sum().backward()
    np.testing.assert_allclose(b.grad, [4.0, 4.0, 4.0])
    np.testing.assert_allclose(a.grad, [[1.0, 2.0, 3.0]] * 2)

def test_matmul_gradients(rng):
    x = Parameter(rng.normal(size=(4, 3)))
    w = Parameter(rng.normal(size=(3, 2)))
    (x @ w).sum().backward()
    np.testing.assert_allclose(x.grad, np.ones((4, 2)) @ w.data.T)
    np.testing.assert_allclose(w.grad, x.data.T @ np.ones((4, 2)))

def test_shared_subexpression_accumulates():
    x = Parameter(np.array(3.0))
    y = x * x
    (y + y).backward()
    assert x.grad == pytest.approx(12.0)

def test_mean_reshape_transpose(rng):
    x = Parameter(rng.normal(size=(2, 3, 4)))
    x.transpose(0, 2, 1).reshape(2, 12).mean(axis=1).sum().backward()
    np.testing.assert_allclose(x.grad, np.full((2, 3, 4), 1 / 12))

def test_no_grad_records_nothing():
    x = Parameter(np.ones(3))
    with no_grad():
        y = x * 2
        assert not is_grad_enabled()
    assert is_grad_enabled()
    assert y.ctx is None and not y.requires_grad

def test_grad_mode_is_per_thread():
    seen = []
    with no_grad():
        worker = threading.Thread(target=lambda: seen.append(is_grad_enabled()))
        worker.start()
        worker.join()
    assert seen == [True]

def test_memory_tracker_counts_live_buffers():
    gc.collect()
    before = MEMORY.current
    t = Tensor(np.zeros(1000))
    assert MEMORY.current - before == 8000
    assert MEMORY.peak >= MEMORY.current
    del t
    gc.collect()
    assert MEMORY.current == before

def test_softmax_respects_mask():
    scores = Tensor(np.zeros((1, 1, 2, 3)))
    allowed = AttentionMask.padding([2]).allowed(1, 2, 3)
    probs = softmax(scores, allowed).data
    np.testing.assert_allclose(probs[0, 0, :, 2], 0.0)
    np.testing.assert_allclose(probs.sum(axis=-1), 1.0)
    causal = AttentionMask.causal().allowed(1, 3, 3)[0, 0]
    assert causal.tolist() == [[True, False, False], [True, True, False], [True, True, True]]

def test_padding_mask_validation():
    with pytest.raises(InvalidArgument):
        AttentionMask.padding([0, 2])
    with pytest.raises(ShapeMismatch):
        AttentionMask.padding([2]).allowed(2, 1, 3)

def test_layer_norm_uses_biased_variance():
    h = Tensor(np.array([[1.0, 3.0]]))
    out = layer_norm(h, Tensor(np.ones(2)), Tensor(np.zeros(2))).data
    np.testing.assert_allclose(out, [[-1.0, 1.0]], atol=1e-9)
    with pytest.raises(InvalidArgument):
        layer_norm(Tensor(np.ones((2, 1))), Tensor(np.ones(1)), Tensor(np.zeros(1)))

def test_cross_entropy_ignores_padding():
    logits = Tensor(np.log(np.array([[[0.5, 0.5], [0.9, 0.1]]])))
    loss = cross_entropy(logits, [[0, 9]], ignore_index=9)
    assert loss.item() == pytest.approx(np.log(2))
    with pytest.raises(InvalidArgument):
        cross_entropy(logits, [[0, 5]])
    with pytest.raises(ShapeMismatch):
        cross_entropy(logits, [0, 1])

def test_take_scatters_gradient():
    table = Parameter(np.zeros((4, 2)))
    take(table, np.array([[1, 1, 3]]), axis=0).sum().backward()
    np.testing.assert_allclose(table.grad[:, 0], [0.0, 2.0, 0.0, 1.0])

def test_embed_validates_tokens():
    table = Parameter(np.zeros((5, 2)))
    with pytest.raises(InvalidArgument):
        embed([[0, 5]], table)
    with pytest.raises(InvalidArgument):
        embed([[0, 1, 2]], table, positions=np.zeros((2, 2)))

def test_attention_needs_divisible_heads(rng):
    params = {f'{w}_{n}': Tensor(rng.normal(size=(6, 6) if w == 'w' else 6)) for w in 'wb' for n in 'qkvo'}
    x = Tensor(rng.normal(size=(1, 3, 6)))
    assert multi_head_attention(x, x, x, None, params, heads=3).shape == (1, 3, 6)
    with pytest.raises(ConfigError):
        multi_head_attention(x, x, x, None, params, heads=4)

def _identity_attention(dim):
    params = {f'w_{n}': Tensor(np.eye(dim)) for n in 'qkvo'}
    params.update({f'b_{n}': Tensor(np.zeros(dim)) for n in 'qkvo'})
    return params

def test_equal_keys_return_the_shared_value(rng):
    u = rng.normal(size=4)
    q = Tensor(rng.normal(size=(1, 3, 4)))
    kv = Tensor(np.tile(u, (1, 5, 1)))
    out = multi_head_attention(q, kv, kv, None, _identity_attention(4), heads=1).data
    np.testing.assert_allclose(out, np.tile(u, (1, 3, 1)), atol=1e-12)

def test_two_position_attention_by_hand():
    q = Tensor(np.array([[[1.0], [2.0]]]))
    k = Tensor(np.array([[[1.0], [0.0]]]))
    v = Tensor(np.array([[[3.0], [5.0]]]))
    out = multi_head_attention(q, k, v, None, _identity_attention(1), heads=1).data[0, :, 0]
    e, e2 = np.e, np.e ** 2
    np.testing.assert_allclose(out, [(3 * e + 5) / (e + 1), (3 * e2 + 5) / (e2 + 1)], atol=1e-12)

def test_causal_first_position_sees_only_itself(rng):
    x = rng.normal(size=(1, 4, 2))
    params = _identity_attention(2)
    changed = x.copy()
    changed[0, 1:] += 10.0
    first = multi_head_attention(Tensor(x), Tensor(x), Tensor(x), AttentionMask.causal(), params, heads=1).data
    second = multi_head_attention(Tensor(changed), Tensor(changed), Tensor(changed), AttentionMask.causal(),
                                  params, heads=1).data
    np.testing.assert_allclose(first[0, 0], x[0, 0], atol=1e-12)
    np.testing.assert_allclose(second[0, 0], first[0, 0], atol=1e-12)

def test_feed_forward_matches_matrix_arithmetic(rng):
    h = rng.normal(size=(2, 3, 4))
    raw = {'w1': rng.normal(size=(4, 6)), 'b1': rng.normal(size=6),
           'w2': rng.normal(size=(6, 4)), 'b2': rng.normal(size=4)}
    out = feed_forward(Tensor(h), {k: Tensor(v) for k, v in raw.items()}).data
    expected = np.maximum(h @ raw['w1'] + raw['b1'], 0) @ raw['w2'] + raw['b2']
    np.testing.assert_allclose(out, expected, atol=1e-10)
    zeros = {k: Tensor(np.zeros_like(v)) for k, v in raw.items()}
    np.testing.assert_allclose(feed_forward(Tensor(h), zeros).data, 0.0)
    with pytest.raises(ConfigError):
        feed_forward(Tensor(rng.normal(size=(1, 2, 5))), {k: Tensor(v) for k, v in raw.items()})

def test_cross_entropy_of_uniform_logits_is_log_classes():
    assert cross_entropy(Tensor(np.zeros((5, 7))), np.arange(5)).item() == pytest.approx(np.log(7))

def test_cross_entropy_matches_softmax_by_hand(rng):
    logits = rng.normal(size=(4, 3))
    targets = np.array([0, 2, 1, 2])
    probs = np.exp(logits) / np.exp(logits).sum(axis=1, keepdims=True)
    expected = -np.log(probs[np.arange(4), targets]).mean()
    assert cross_entropy(Tensor(logits), targets).item() == pytest.approx(expected, abs=1e-10)

def test_layer_norm_constant_rows_and_scale(rng):
    gain, bias = Tensor(np.ones(5)), Tensor(np.zeros(5))
    np.testing.assert_allclose(layer_norm(Tensor(np.full((2, 5), 3.0)), gain, bias).data, 0.0, atol=1e-12)
    h = rng.normal(size=(3, 5))
    np.testing.assert_allclose(layer_norm(Tensor(4.0 * h), gain, bias).data, layer_norm(Tensor(h), gain, bias).data,
                               atol=1e-8)
