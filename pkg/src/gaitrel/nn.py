"""Dense ReLU/softmax classifier with hand-written backprop and Adam.

All array-valued functions accept either a single input vector of shape
``(in_dim,)`` or a batch of shape ``(n, in_dim)``.
"""
from __future__ import annotations

import copy
import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import metrics
from .errors import InvalidInput
from .signals import CHANNELS, DatasetSplit, FeatureWindow, Gender, NormStats, windows_to_arrays

logger = logging.getLogger(__name__)

DEFAULT_DIMS = (600, 500, 250, 50, 20, 4, 2)
PROB_FLOOR = 1e-12


class Activation(str, enum.Enum):
    RELU = "relu"
    SOFTMAX = "softmax"
    IDENTITY = "identity"


@dataclass
class LayerParams:
    weights: np.ndarray  # (out_dim, in_dim)
    biases: np.ndarray  # (out_dim,)
    activation: Activation

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class DenseNetwork:
    layers: list[LayerParams]
    norm_stats: NormStats | None = None
    channel_order: tuple[str, ...] = CHANNELS
    seed: int | None = None

    def __post_init__(self):
        if not self.layers:
            raise InvalidInput("network needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise InvalidInput(f"layer dims do not chain: {prev.out_dim} -> {nxt.in_dim}")
        for layer in self.layers[:-1]:
            if layer.activation is Activation.SOFTMAX:
                raise InvalidInput("only the final layer may use softmax")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.layers[0].in_dim,) + tuple(l.out_dim for l in self.layers)

    def n_parameters(self) -> int:
        return sum(l.weights.size + l.biases.size for l in self.layers)


@dataclass
class ForwardTrace:
    """Pre-activations ``z[l]`` and activations ``a[l]``; ``a[0]`` is the input."""

    z: list[np.ndarray]
    a: list[np.ndarray]

    @property
    def logits(self) -> np.ndarray:
        return self.z[-1]

    @property
    def probs(self) -> np.ndarray:
        return self.a[-1]


Gradients = list  # [(dW, db), ...] in layer order


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_network(cls, net: DenseNetwork, **hyper) -> "AdamState":
        shapes = [p.shape for l in net.layers for p in (l.weights, l.biases)]
        return cls(m=[np.zeros(s) for s in shapes], v=[np.zeros(s) for s in shapes], **hyper)


@dataclass
class TrainConfig:
    batch_size: int = 16
    max_epochs: int = 200
    patience: int = 10
    lr: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise InvalidInput("batch_size, max_epochs and patience must be >= 1")


@dataclass
class TrainingHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_macro_f1: list[float] = field(default_factory=list)
    best_epoch: int = 0  # 1-based

    @property
    def epochs_run(self) -> int:
        return len(self.train_loss)


def init_network(seed: int, dims: Sequence[int] = DEFAULT_DIMS, norm_stats: NormStats | None = None) -> DenseNetwork:
    """He-uniform weights in +-sqrt(6/in_dim), zero biases."""
    rng = np.random.default_rng(seed)
    layers = []
    n_layers = len(dims) - 1
    for i, (d_in, d_out) in enumerate(zip(dims[:-1], dims[1:])):
        limit = np.sqrt(6.0 / d_in)
        act = Activation.SOFTMAX if i == n_layers - 1 else Activation.RELU
        layers.append(LayerParams(rng.uniform(-limit, limit, size=(d_out, d_in)), np.zeros(d_out), act))
    return DenseNetwork(layers, norm_stats=norm_stats, seed=seed)


def softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _activate(z, act):
    if act is Activation.RELU:
        return np.maximum(z, 0.0)
    if act is Activation.SOFTMAX:
        return softmax(z)
    return z


def forward(net: DenseNetwork, x: np.ndarray) -> ForwardTrace:
    a = np.asarray(x, dtype=np.float64)
    if a.shape[-1] != net.dims[0] or a.ndim not in (1, 2):
        raise InvalidInput(f"input shape {a.shape} does not match network input dim {net.dims[0]}")
    zs, acts = [], [a]
    for layer in net.layers:
        z = a @ layer.weights.T + layer.biases
        a = _activate(z, layer.activation)
        zs.append(z)
        acts.append(a)
    return ForwardTrace(zs, acts)


def logits(net: DenseNetwork, x: np.ndarray) -> np.ndarray:
    return forward(net, x).logits


def cross_entropy(probs, label) -> float | np.ndarray:
    """Negative log-likelihood of the true class, probabilities clamped at 1e-12.

    For a batch, ``probs`` is (n, 2) and ``label`` a length-n array; the
    per-sample losses are returned.
    """
    p = np.asarray(probs, dtype=np.float64)
    if np.any(p < 0) or np.any(p > 1) or np.any(np.abs(p.sum(axis=-1) - 1.0) > 1e-9):
        raise InvalidInput("probs must be a probability vector")
    if p.ndim == 1:
        return float(-np.log(np.clip(p[int(label)], PROB_FLOOR, 1.0)))
    lab = np.asarray(label, dtype=np.int64)
    return -np.log(np.clip(p[np.arange(len(lab)), lab], PROB_FLOOR, 1.0))


def _backprop(net: DenseNetwork, trace: ForwardTrace, delta: np.ndarray):
    """Push an output-layer delta back through the net.

    Returns per-layer ``(delta_l, a_{l-1})`` pairs and the input gradient.
    """
    out = []
    for l in range(len(net.layers) - 1, -1, -1):
        out.append((delta, trace.a[l]))
        delta = delta @ net.layers[l].weights
        if l > 0 and net.layers[l - 1].activation is Activation.RELU:
            delta = delta * (trace.z[l - 1] > 0)
    out.reverse()
    return out, delta


def backward(net: DenseNetwork, trace: ForwardTrace, label) -> Gradients:
    """Gradients of the cross-entropy loss; batch gradients are averaged."""
    if len(trace.z) != len(net.layers) or trace.a[0].shape[-1] != net.dims[0]:
        raise InvalidInput("trace does not belong to this network")
    if net.layers[-1].activation is not Activation.SOFTMAX:
        raise InvalidInput("backward requires a softmax output layer")
    probs = trace.probs
    onehot = np.zeros_like(probs)
    if probs.ndim == 1:
        onehot[int(label)] = 1.0
        n = 1
    else:
        lab = np.asarray(label, dtype=np.int64)
        onehot[np.arange(len(lab)), lab] = 1.0
        n = len(lab)
    per_layer, _ = _backprop(net, trace, probs - onehot)
    grads = []
    for delta, a_prev in per_layer:
        if delta.ndim == 1:
            grads.append((np.outer(delta, a_prev), delta.copy()))
        else:
            grads.append((delta.T @ a_prev / n, delta.sum(axis=0) / n))
    return grads


def adam_step(net: DenseNetwork, grads: Gradients, state: AdamState) -> tuple[DenseNetwork, AdamState]:
    """One Adam update, applied in place to ``net`` and ``state``."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    params = [p for l in net.layers for p in (l.weights, l.biases)]
    flat = [g for pair in grads for g in pair]
    if len(flat) != len(params):
        raise InvalidInput("gradient list does not match network parameters")
    for p, g, m, v in zip(params, flat, state.m, state.v):
        if g.shape != p.shape:
            raise InvalidInput(f"gradient shape {g.shape} != parameter shape {p.shape}")
        buf = np.empty_like(p)
        m *= b1
        np.multiply(g, 1.0 - b1, out=buf)
        m += buf
        v *= b2
        np.multiply(g, g, out=buf)
        buf *= 1.0 - b2
        v += buf
        # buf <- lr * (m / c1) / (sqrt(v / c2) + eps)
        np.divide(v, c2, out=buf)
        np.sqrt(buf, out=buf)
        buf += state.epsilon
        np.divide(m, buf, out=buf)
        buf *= state.lr / c1
        p -= buf
    return net, state


def predict(net: DenseNetwork, window: FeatureWindow | np.ndarray, pre_normalized: bool = False):
    """Return ``(Gender, probs)``; an exact tie goes to Female (index 0)."""
    x = window.features if isinstance(window, FeatureWindow) else np.asarray(window, dtype=np.float64)
    if not pre_normalized and net.norm_stats is not None:
        x = (x - net.norm_stats.mean) / net.norm_stats.std
    probs = forward(net, x).probs
    return Gender(int(np.argmax(probs))), probs


def predict_batch(net: DenseNetwork, X: np.ndarray) -> np.ndarray:
    """Argmax classes for already-normalized rows (np.argmax keeps the first max)."""
    return np.argmax(forward(net, X).probs, axis=1)


def _mean_loss(net, X, y) -> float:
    return float(np.mean(cross_entropy(forward(net, X).probs, y)))


def train(net: DenseNetwork, split: DatasetSplit, cfg: TrainConfig) -> tuple[DenseNetwork, TrainingHistory]:
    """Minibatch Adam with validation-loss early stopping.

    Works on a deep copy of ``net``; the returned network holds the
    parameters of the epoch with the lowest validation loss. Without a
    validation part the training loss drives model selection.
    """
    if not split.train:
        raise InvalidInput("training set is empty")
    X, y = windows_to_arrays(split.train)
    if split.validation:
        Xv, yv = windows_to_arrays(split.validation)
    else:
        Xv, yv = X, y

    net = copy.deepcopy(net)
    state = AdamState.for_network(net, lr=cfg.lr)
    rng = np.random.default_rng(cfg.seed)
    history = TrainingHistory()
    best_loss, best_layers, stale = np.inf, copy.deepcopy(net.layers), 0

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(X))
        batch_losses = []
        for start in range(0, len(X), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            trace = forward(net, X[idx])
            batch_losses.append(float(np.sum(cross_entropy(trace.probs, y[idx]))))
            adam_step(net, backward(net, trace, y[idx]), state)

        train_loss = sum(batch_losses) / len(X)
        val_probs = forward(net, Xv).probs
        val_loss = float(np.mean(cross_entropy(val_probs, yv)))
        val_pred = np.argmax(val_probs, axis=1)
        val_f1 = metrics.macro_f1(metrics.confusion_matrix(list(zip(yv, val_pred))))
        history.train_loss.append(train_loss)
        history.val_loss.append(val_loss)
        history.val_macro_f1.append(val_f1)
        logger.info("epoch %3d  train_loss %.5f  val_loss %.5f  val_macro_f1 %.4f",
                    epoch, train_loss, val_loss, val_f1)

        if val_loss < best_loss:
            best_loss, best_layers, stale = val_loss, copy.deepcopy(net.layers), 0
            history.best_epoch = epoch
        else:
            stale += 1
            if stale >= cfg.patience:
                break

    net.layers = best_layers
    return net, history
