"""Attribution of a class logit to the 600 input features.

Three analyzers are provided:

* ``gradient`` -- raw partial derivatives of the target logit,
* ``lrp-eps`` -- epsilon-stabilized z-rule, biases absorb their share,
* ``lrp-a2b1`` -- alpha-beta rule with separate positive/negative pools.

All three start from the pre-softmax logit of the target class. Per-window
maps are reduced to one score per sensor axis by averaging over the
axis's time frames, and over windows.
"""
from __future__ import annotations

import csv
import enum
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput
from .nn import DenseNetwork, _backprop, forward
from .signals import CHANNELS, FeatureWindow, Gender, axis_slice, windows_to_arrays

logger = logging.getLogger(__name__)

THREADS_ENV = "GAITREL_THREADS"


class Method(str, enum.Enum):
    GRADIENT = "gradient"
    LRP_EPSILON = "lrp-eps"
    LRP_ALPHA_BETA = "lrp-a2b1"

    @property
    def label(self) -> str:
        return {"gradient": "Gradient", "lrp-eps": "LRP", "lrp-a2b1": "LRP Alpha 2 Beta 1"}[self.value]


class Group(str, enum.Enum):
    OVERALL = "overall"
    MALE = "male"
    FEMALE = "female"

    def select(self, windows: Sequence[FeatureWindow]) -> list[int]:
        if self is Group.OVERALL:
            return list(range(len(windows)))
        want = Gender.MALE if self is Group.MALE else Gender.FEMALE
        return [i for i, w in enumerate(windows) if w.label == want]


@dataclass(frozen=True, eq=False)
class RelevanceMap:
    values: np.ndarray
    method: Method
    target: int
    subject_id: str | None = None
    window_index: int | None = None


def _check_target(net: DenseNetwork, targets: np.ndarray):
    n_out = net.dims[-1]
    if np.any((targets < 0) | (targets >= n_out)):
        raise InvalidInput(f"target class must lie in [0, {n_out - 1}]")


def _as_batch(net, x, targets):
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    t = np.broadcast_to(np.asarray(targets, dtype=np.int64), (X.shape[0],))
    _check_target(net, t)
    return X, t


def gradient_relevance(net: DenseNetwork, X: np.ndarray, targets) -> np.ndarray:
    """d logit[target] / d input for each row of ``X``."""
    X, t = _as_batch(net, X, targets)
    trace = forward(net, X)
    seed = np.zeros_like(trace.logits)
    seed[np.arange(len(t)), t] = 1.0
    _, grad_in = _backprop(net, trace, seed)
    return grad_in


def _initial_relevance(trace, t):
    R = np.zeros_like(trace.logits)
    rows = np.arange(len(t))
    R[rows, t] = trace.logits[rows, t]
    return R


def lrp_epsilon_relevance(net: DenseNetwork, X: np.ndarray, targets, eps: float = 1e-9) -> np.ndarray:
    X, t = _as_batch(net, X, targets)
    trace = forward(net, X)
    R = _initial_relevance(trace, t)
    for l in range(len(net.layers) - 1, -1, -1):
        W = net.layers[l].weights
        z = trace.z[l]
        s = R / (z + eps * np.where(z >= 0, 1.0, -1.0))
        R = trace.a[l] * (s @ W)
    return R


def lrp_alphabeta_relevance(net: DenseNetwork, X: np.ndarray, targets,
                            alpha: float = 2.0, beta: float = 1.0) -> np.ndarray:
    """Positive contributions share ``alpha * R``, negative ones ``beta * R``.

    Contributions are split by the sign of ``a_j * w_jk``, so signed inputs
    at the first layer are handled by the same rule. An empty pool passes
    no relevance.
    """
    if abs((alpha - beta) - 1.0) > 1e-12:
        raise InvalidInput(f"alpha - beta must equal 1, got alpha={alpha}, beta={beta}")
    X, t = _as_batch(net, X, targets)
    trace = forward(net, X)
    R = _initial_relevance(trace, t)
    for l in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[l]
        a = trace.a[l]
        ap, an = np.maximum(a, 0.0), np.minimum(a, 0.0)
        Wp, Wn = np.maximum(layer.weights, 0.0), np.minimum(layer.weights, 0.0)
        bp, bn = np.maximum(layer.biases, 0.0), np.minimum(layer.biases, 0.0)
        zp = ap @ Wp.T + an @ Wn.T + bp
        zn = ap @ Wn.T + an @ Wp.T + bn
        with np.errstate(divide="ignore", invalid="ignore"):
            sp = np.where(zp > 0, R / zp, 0.0)
            sn = np.where(zn < 0, R / zn, 0.0)
        R = (alpha * (ap * (sp @ Wp) + an * (sp @ Wn))
             - beta * (ap * (sn @ Wn) + an * (sn @ Wp)))
    return R


def relevance(net: DenseNetwork, X: np.ndarray, targets, method: Method | str, **kw) -> np.ndarray:
    method = Method(method)
    if method is Method.GRADIENT:
        return gradient_relevance(net, X, targets)
    if method is Method.LRP_EPSILON:
        return lrp_epsilon_relevance(net, X, targets, eps=kw.get("eps", 1e-9))
    return lrp_alphabeta_relevance(net, X, targets, alpha=kw.get("alpha", 2.0), beta=kw.get("beta", 1.0))


def _single(net, x, target, method, **kw) -> RelevanceMap:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInput("expected a single input vector")
    return RelevanceMap(relevance(net, x, target, method, **kw)[0], Method(method), int(target))


def explain_gradient(net: DenseNetwork, x: np.ndarray, target: int) -> RelevanceMap:
    return _single(net, x, target, Method.GRADIENT)


def explain_lrp_epsilon(net: DenseNetwork, x: np.ndarray, target: int, eps: float = 1e-9) -> RelevanceMap:
    return _single(net, x, target, Method.LRP_EPSILON, eps=eps)


def explain_lrp_alphabeta(net: DenseNetwork, x: np.ndarray, target: int,
                          alpha: float = 2.0, beta: float = 1.0) -> RelevanceMap:
    return _single(net, x, target, Method.LRP_ALPHA_BETA, alpha=alpha, beta=beta)


def _n_threads() -> int:
    try:
        return max(int(os.environ.get(THREADS_ENV, "0")), 0)
    except ValueError:
        return 0


def explain_windows(net: DenseNetwork, windows: Sequence[FeatureWindow], method: Method | str,
                    chunk: int = 256, **kw) -> list[RelevanceMap]:
    """Explain the predicted class of each (already normalized) window.

    With ``GAITREL_THREADS`` > 0, chunks run on a thread pool; results are
    reassembled in input order.
    """
    method = Method(method)
    if not windows:
        return []
    X, _ = windows_to_arrays(windows)
    targets = np.argmax(forward(net, X).probs, axis=1)
    starts = range(0, len(X), chunk)

    def run(s):
        return relevance(net, X[s:s + chunk], targets[s:s + chunk], method, **kw)

    threads = _n_threads()
    if threads > 0 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(run, starts))
    else:
        blocks = [run(s) for s in starts]
    values = np.concatenate(blocks)
    return [RelevanceMap(v, method, int(t), w.subject_id, w.window_index)
            for v, t, w in zip(values, targets, windows)]


def aggregate_axis_relevance(maps: Sequence[RelevanceMap], absolute: bool = False) -> np.ndarray:
    """Mean relevance per axis, over the axis's frames and over all maps."""
    if not maps:
        raise InvalidInput("aggregate_axis_relevance needs at least one map")
    if len({m.method for m in maps}) != 1:
        raise InvalidInput("maps mix several attribution methods")
    V = np.stack([m.values for m in maps])
    if V.shape[1] % len(CHANNELS):
        raise InvalidInput(f"map length {V.shape[1]} is not a multiple of {len(CHANNELS)}")
    if absolute:
        V = np.abs(V)
    frame_len = V.shape[1] // len(CHANNELS)
    # fixed reduction order: frames first, then maps
    per_map = np.stack([V[:, axis_slice(c, frame_len)].mean(axis=1) for c in range(len(CHANNELS))], axis=1)
    return per_map.mean(axis=0)


@dataclass
class AxisRelevanceTable:
    """Rows keyed by ``(Group, Method)``, each holding 6 scores in CHANNELS order."""

    rows: dict = field(default_factory=dict)
    abs_rows: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    maps: dict = field(default_factory=dict)

    def row(self, group, method) -> np.ndarray:
        return self.rows[(Group(group), Method(method))]

    def ranking(self, group, method, absolute: bool = True) -> list[str]:
        """Axis names sorted by descending |score|."""
        scores = self.row(group, method)
        key = np.abs(scores) if absolute else scores
        return [CHANNELS[i] for i in np.argsort(-key, kind="stable")]

    def _write(self, path, rows):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["group", "method", *CHANNELS])
            for (g, m), scores in rows.items():
                w.writerow([g.value, m.value, *(repr(float(s)) for s in scores)])

    def to_csv(self, path):
        self._write(path, self.rows)

    def abs_to_csv(self, path):
        self._write(path, self.abs_rows)

    def format(self) -> str:
        head = f"{'Dataset':<8} {'Method':<20}" + "".join(f"{c:>11}" for c in CHANNELS)
        lines = [head]
        for (g, m), scores in self.rows.items():
            lines.append(f"{g.value.capitalize():<8} {m.label:<20}" + "".join(f"{s:>11.6f}" for s in scores))
        return "\n".join(lines)


def read_table_csv(path) -> AxisRelevanceTable:
    table = AxisRelevanceTable()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            key = (Group(rec["group"]), Method(rec["method"]))
            table.rows[key] = np.array([float(rec[c]) for c in CHANNELS])
    return table


def subgroup_relevance(
    net: DenseNetwork,
    test: Sequence[FeatureWindow],
    methods: Iterable[Method | str] = tuple(Method),
    groups: Iterable[Group | str] = tuple(Group),
    keep_maps: bool = False,
    **kw,
) -> AxisRelevanceTable:
    """Axis relevance per (group, method) over normalized test windows.

    Each window is explained for its own predicted class. Groups select
    windows by true label; an empty group is skipped and noted in
    ``warnings``.
    """
    if not test:
        raise InvalidInput("subgroup_relevance needs a non-empty test set")
    methods = [Method(m) for m in methods]
    groups = [Group(g) for g in groups]
    table = AxisRelevanceTable()
    all_maps = {m: explain_windows(net, test, m, **kw) for m in methods}
    if keep_maps:
        table.maps = all_maps
    for g in groups:
        idx = g.select(test)
        table.counts[g] = len(idx)
        if not idx:
            msg = f"group {g.value!r} has no windows; row omitted"
            logger.warning(msg)
            table.warnings.append(msg)
            continue
        for m in methods:
            sel = [all_maps[m][i] for i in idx]
            table.rows[(g, m)] = aggregate_axis_relevance(sel)
            table.abs_rows[(g, m)] = aggregate_axis_relevance(sel, absolute=True)
    return table
