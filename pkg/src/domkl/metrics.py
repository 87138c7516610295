"""Run traces and the evaluation quantities computed from them.

A trace records, per round and learner, the own-sample prediction, the
label, per-kernel losses, the combination weights, and the full cross
matrix of every learner's function evaluated on every learner's sample.
The running mean-square error and consensus violation follow the
convention that their value at t=1 is pinned to 1, regardless of what
the formulas would give there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RunTrace:
    """Everything one algorithm produced over one trial.

    ``cross_predictions[t, k, l]`` is learner l's function evaluated on
    learner k's round-t sample; the diagonal repeats ``predictions``.
    """

    algorithm: str
    trial_seed: int
    graph: object
    predictions: np.ndarray        # (T, K)
    labels: np.ndarray             # (T, K)
    per_kernel_losses: np.ndarray  # (T, K, P)
    cross_predictions: np.ndarray  # (T, K, K)
    weights: np.ndarray            # (T, K, P)

    def __post_init__(self):
        rounds, learners = self.predictions.shape
        if self.labels.shape != (rounds, learners):
            raise ValueError("labels shape mismatch")
        if self.cross_predictions.shape != (rounds, learners, learners):
            raise ValueError("cross matrix must be K x K per round")
        if self.per_kernel_losses.shape[:2] != (rounds, learners):
            raise ValueError("per-kernel losses shape mismatch")
        if self.weights.shape != self.per_kernel_losses.shape:
            raise ValueError("weights shape mismatch")

    @property
    def num_rounds(self):
        return self.predictions.shape[0]

    @property
    def num_learners(self):
        return self.predictions.shape[1]


@dataclass(frozen=True)
class MetricCurve:
    """A per-round scalar series tagged with its origin."""

    values: np.ndarray
    algorithm: str
    trial_seed: int


def truncate_trace(trace, rounds):
    """The prefix of a trace, for horizon-dependent quantities."""
    if not 1 <= rounds <= trace.num_rounds:
        raise ValueError("rounds out of range")
    return RunTrace(
        algorithm=trace.algorithm,
        trial_seed=trace.trial_seed,
        graph=trace.graph,
        predictions=trace.predictions[:rounds],
        labels=trace.labels[:rounds],
        per_kernel_losses=trace.per_kernel_losses[:rounds],
        cross_predictions=trace.cross_predictions[:rounds],
        weights=trace.weights[:rounds],
    )


def mse_curve(trace):
    """Running mean of squared own-sample errors, value 1 at t=1.

    MSE(t) = (1/(t K)) sum over rounds up to t and learners of the
    squared prediction error.
    """
    learners = trace.num_learners
    per_round = ((trace.predictions - trace.labels) ** 2).sum(axis=1)
    running = np.cumsum(per_round)
    t = np.arange(1, trace.num_rounds + 1)
    values = running / (t * learners)
    values[0] = 1.0
    return MetricCurve(values=values, algorithm=trace.algorithm,
                       trial_seed=trace.trial_seed)


def cv_curve(trace):
    """Running mean of pairwise cross-prediction gaps, value 1 at t=1.

    CV(t) = (1/(t K (K-1))) sum over rounds up to t, learners k, and
    other learners l of (f_k(x_k) - f_l(x_k))^2.  Undefined for a
    single learner.
    """
    learners = trace.num_learners
    if learners < 2:
        raise ValueError("consensus violation needs at least 2 learners")
    own = trace.cross_predictions[
        :, np.arange(learners), np.arange(learners)
    ]  # (T, K)
    gaps = (own[:, :, None] - trace.cross_predictions) ** 2
    per_round = gaps.sum(axis=(1, 2))  # diagonal contributes zero
    running = np.cumsum(per_round)
    t = np.arange(1, trace.num_rounds + 1)
    values = running / (t * learners * (learners - 1))
    values[0] = 1.0
    return MetricCurve(values=values, algorithm=trace.algorithm,
                       trial_seed=trace.trial_seed)


def regret_accuracy(trace, hindsight_losses):
    """Cumulative own losses minus the supplied comparator losses.

    ``hindsight_losses[t, k]`` is the loss of the best fixed function
    on learner k's round-t sample; the result is one regret per learner.
    """
    hindsight_losses = np.asarray(hindsight_losses, dtype=np.float64)
    if hindsight_losses.shape != trace.predictions.shape:
        raise ValueError("hindsight losses must be per-round per-learner")
    own = (trace.predictions - trace.labels) ** 2
    return (own - hindsight_losses).sum(axis=0)


def regret_discrepancy(trace):
    """Per-learner cumulative squared neighbor-sum of prediction gaps.

    Each round contributes the square of the *summed* differences to
    the neighbors, so opposite gaps cancel within a round; this is not
    the pairwise average that cv_curve computes.
    """
    graph = trace.graph
    learners = trace.num_learners
    own = trace.cross_predictions[
        :, np.arange(learners), np.arange(learners)
    ]
    out = np.zeros(learners)
    for k in range(learners):
        nbrs = list(graph.neighbors[k])
        if not nbrs:
            continue
        diffs = own[:, k, None] - trace.cross_predictions[:, k, nbrs]
        out[k] = (diffs.sum(axis=1) ** 2).sum()
    return out
