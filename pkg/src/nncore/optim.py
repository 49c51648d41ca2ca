import numpy as np


class Adam:
    """Adam with linear learning-rate warmup and optional global-norm clipping."""

    def __init__(self, params, lr=1e-3, betas=(0.9, 0.98), eps=1e-9, warmup_steps=0, clip_norm=None):
        self.params = list(params)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.warmup_steps = warmup_steps
        self.clip_norm = clip_norm
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def current_lr(self):
        if self.warmup_steps and self.step_count < self.warmup_steps:
            return self.lr * (self.step_count + 1) / self.warmup_steps
        return self.lr

    def grad_norm(self):
        return float(np.sqrt(sum(float((p.grad ** 2).sum()) for p in self.params if p.grad is not None)))

    def step(self):
        lr = self.current_lr()
        self.step_count += 1
        if lr == 0:
            return lr
        scale = 1.0
        if self.clip_norm:
            norm = self.grad_norm()
            if norm > self.clip_norm:
                scale = self.clip_norm / norm
        beta1, beta2 = self.betas
        correction1 = 1 - beta1 ** self.step_count
        correction2 = 1 - beta2 ** self.step_count
        for p, m, v in zip(self.params, self.m, self.v):
            if p.grad is None:
                continue
            g = p.grad * scale
            m *= beta1
            m += (1 - beta1) * g
            v *= beta2
            v += (1 - beta2) * g * g
            p.data -= (lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)).astype(p.data.dtype)
        return lr
