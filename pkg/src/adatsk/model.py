"""Forward inference for first-order TSK classifiers."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import core
from .errors import DegenerateFiringError, InvalidArgumentError
from .rulebase import FuzzyPartition, IndexMatrix

TNORMS = ("product", "softmin", "ada-softmin")
GATE_MODES = ("ungated", "feature-gated", "rule-gated")


@dataclass
class GateBank:
    """Consequent-side gates. Only one family is active at a time.

    ``lam`` has one entry per feature (feature-gated mode), ``theta`` one
    entry per rule (rule-gated mode).  ``kind`` picks the gate function.
    """

    mode: str = "ungated"
    lam: Optional[np.ndarray] = None
    theta: Optional[np.ndarray] = None
    kind: str = "proposed"

    def __post_init__(self):
        if self.mode not in GATE_MODES:
            raise InvalidArgumentError(f"unknown gate mode {self.mode!r}")
        if self.mode == "feature-gated" and (self.lam is None or self.theta is not None):
            raise InvalidArgumentError("feature-gated mode needs lam and no theta")
        if self.mode == "rule-gated" and (self.theta is None or self.lam is not None):
            raise InvalidArgumentError("rule-gated mode needs theta and no lam")
        if self.mode == "ungated" and (self.lam is not None or self.theta is not None):
            raise InvalidArgumentError("ungated mode takes no gate parameters")

    @classmethod
    def feature_gated(cls, lam, kind="proposed"):
        return cls("feature-gated", lam=np.asarray(lam, dtype=float), kind=kind)

    @classmethod
    def rule_gated(cls, theta, kind="proposed"):
        return cls("rule-gated", theta=np.asarray(theta, dtype=float), kind=kind)

    @property
    def params(self):
        return self.lam if self.mode == "feature-gated" else self.theta

    def values(self):
        value, _ = core.gate_functions(self.kind)
        return value(self.params)

    def derivatives(self):
        _, deriv = core.gate_functions(self.kind)
        return deriv(self.params)


UNGATED = GateBank()


@dataclass
class Antecedent:
    """Firing-side quantities; constant while centers are frozen."""

    memberships: np.ndarray  # (N, R, D)
    firing: np.ndarray  # (N, R)
    normalized: np.ndarray  # (N, R)
    qhat: Optional[np.ndarray] = None  # (N, R) exponents for softmin-type operators


@dataclass
class ForwardTrace:
    memberships: np.ndarray
    firing: np.ndarray
    normalized: np.ndarray
    rule_outputs: np.ndarray  # (N, R, C)
    output: np.ndarray  # (N, C)
    qhat: Optional[np.ndarray] = None
    inputs: np.ndarray = field(default=None, repr=False)


def normalize_firing(f):
    f = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f)) or np.any(f < 0):
        raise InvalidArgumentError("normalize_firing: firing strengths must be finite and non-negative")
    total = f.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise DegenerateFiringError("all rule firing strengths are zero for at least one instance")
    return f / total


def _check_tnorm(tnorm):
    if tnorm not in TNORMS:
        raise InvalidArgumentError(f"unknown t-norm {tnorm!r}; expected one of {TNORMS}")


def antecedent(X, partition, index, tnorm="ada-softmin", softmin_q=-12, qhat=None):
    """Memberships and (normalized) firing strengths for a batch ``X`` of shape (N, D)."""
    _check_tnorm(tnorm)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != index.n_features:
        raise InvalidArgumentError(
            f"input has {X.shape[1]} features, rule base expects {index.n_features}"
        )
    m = partition.rule_centers(index)
    mu = core.gaussian_membership(X[:, None, :], m[None, :, :])
    if tnorm == "product":
        f = core.product_firing(mu)
        q = None
    else:
        if qhat is not None:
            q = np.asarray(qhat)
        elif tnorm == "ada-softmin":
            q = core._adaptive_exponent(mu)
        else:
            q = np.full(mu.shape[:2], softmin_q, dtype=np.int64)
        if tnorm == "ada-softmin":
            f = core._ada_softmin(mu, q)
        else:
            f = core.fixed_softmin(mu, q)
    return Antecedent(mu, f, normalize_firing(f), q)


def effective_consequents(consequents, gates=UNGATED):
    """Consequent table with the active gate family multiplied in."""
    p = np.asarray(consequents, dtype=float)
    if gates.mode == "ungated":
        return p
    g = gates.values()
    if gates.mode == "feature-gated":
        if g.shape != (p.shape[1] - 1,):
            raise InvalidArgumentError("feature gates must have one entry per feature")
        p = p.copy()
        p[:, 1:, :] *= g[None, :, None]  # bias stays ungated
        return p
    if g.shape != (p.shape[0],):
        raise InvalidArgumentError("rule gates must have one entry per rule")
    return p * g[:, None, None]


def rule_outputs(X, consequents, gates=UNGATED):
    """First-order consequents ``y[n, r, c] = p0 + sum_d p_d * x_d`` (gated per ``gates``)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    p = effective_consequents(consequents, gates)
    R, K, C = p.shape
    if K != X.shape[1] + 1:
        raise InvalidArgumentError(f"consequents expect {K - 1} features, input has {X.shape[1]}")
    xt = np.hstack([np.ones((X.shape[0], 1)), X])
    flat = xt @ p.transpose(1, 0, 2).reshape(K, R * C)
    return flat.reshape(X.shape[0], R, C)


def forward(X, partition, index, consequents, gates=UNGATED, tnorm="ada-softmin",
            softmin_q=-12, qhat=None, ante=None):
    """Full forward pass over a batch.

    ``ante`` may carry a precomputed :class:`Antecedent` (valid while the
    centers are unchanged) to skip the membership computation.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if consequents.shape[0] != index.n_rules:
        raise InvalidArgumentError(
            f"consequents have {consequents.shape[0]} rules, index matrix has {index.n_rules}"
        )
    if ante is None:
        ante = antecedent(X, partition, index, tnorm, softmin_q, qhat)
    y_r = rule_outputs(X, consequents, gates)
    y = np.einsum("nr,nrc->nc", ante.normalized, y_r)
    return ForwardTrace(ante.memberships, ante.firing, ante.normalized, y_r, y, ante.qhat, X)


def mse_loss(outputs, targets):
    """``1/(2N) * sum_n sum_c (y - t)**2``."""
    Y = np.atleast_2d(np.asarray(outputs, dtype=float))
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    if Y.shape != T.shape:
        raise InvalidArgumentError(f"mse_loss: shape mismatch {Y.shape} vs {T.shape}")
    return float(np.sum((Y - T) ** 2) / (2.0 * Y.shape[0]))


def predict_from_outputs(outputs):
    # np.argmax returns the first maximum, i.e. ties go to the smallest class
    return np.argmax(np.atleast_2d(outputs), axis=1)


@dataclass
class TSKModel:
    """A trained (or in-training) TSK classifier.

    ``features`` lists the column indices of the original dataset the model
    consumes, so a model trained on a selected subset can be fed full rows.
    """

    partition: FuzzyPartition
    index: IndexMatrix
    consequents: np.ndarray
    tnorm: str = "ada-softmin"
    softmin_q: int = -12
    features: Optional[np.ndarray] = None

    @property
    def n_rules(self):
        return self.index.n_rules

    @property
    def n_classes(self):
        return self.consequents.shape[2]

    def _select(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.features is not None and X.shape[1] != self.index.n_features:
            X = X[:, self.features]
        return X

    def forward(self, X, gates=UNGATED, qhat=None):
        return forward(self._select(X), self.partition, self.index, self.consequents,
                       gates, self.tnorm, self.softmin_q, qhat)

    def decision_function(self, X):
        return self.forward(X).output

    def predict(self, X):
        return predict_from_outputs(self.decision_function(X))
