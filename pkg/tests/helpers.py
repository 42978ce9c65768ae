"""Shared builders for model-level tests: tiny models, random sequences, and
the full-model finite-difference check used by both unit and acceptance tests.
"""

import numpy as np

from urldetect.classifier import (
    Hyperparams,
    backward,
    forward,
    init_params,
    params_from_vector,
    params_to_vector,
)
from urldetect.corpus import EncodedSequence, UrlClass
from urldetect.nncore import cross_entropy, gradient_check


def tiny_hp(vocab=10, embed=3, hidden=2, max_len=8, dropout=0.0, seed=0):
    return Hyperparams(
        vocab_size=vocab,
        embed_dim=embed,
        hidden_dim=hidden,
        max_len=max_len,
        dropout_rate=dropout,
        seed=seed,
    )


def random_sequence(rng, hp, length):
    """A sequence of `length` valid steps over non-reserved indices."""
    indices = np.zeros(hp.max_len, dtype=np.int32)
    indices[:length] = rng.integers(1, hp.vocab_size, size=length)
    return EncodedSequence(indices=indices, valid_len=int(length))


def random_batch(rng, hp, size, max_steps=None):
    max_steps = max_steps or hp.max_len
    batch = []
    for _ in range(size):
        length = int(rng.integers(1, max_steps + 1))
        label = UrlClass(int(rng.integers(0, 4)))
        batch.append((random_sequence(rng, hp, length), label))
    return batch


def reference_batch_loss(params, hp, batch, dropout_seed):
    """Mean cross-entropy via the single-sequence forward path."""
    total = 0.0
    for seq, label in batch:
        probs, _ = forward(params, hp, seq, mode="train", dropout_seed=dropout_seed)
        total += cross_entropy(probs, int(label))
    return total / len(batch)


def full_model_gradient_error(hp, batch, dropout_seed=0, max_coords=None, seed=0):
    """Finite-difference error of the batched backward pass, measured against
    a loss built from the independent reference forward path, in float64."""
    params = init_params(hp, dtype=np.float64)
    grads, _ = backward(params, hp, batch, dropout_seed)
    analytic = params_to_vector(grads)

    def loss_fn(theta):
        candidate = params_from_vector(params, theta)
        return reference_batch_loss(candidate, hp, batch, dropout_seed)

    return gradient_check(
        loss_fn, params_to_vector(params), analytic,
        eps=1e-5, max_coords=max_coords, seed=seed,
    )
