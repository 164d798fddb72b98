"""Gradients of the batch MSE loss, plain gradient descent, and LSE consequents.

All gradients are exact derivatives of ``E = 1/(2N) sum (y - t)**2`` over
the batch they are given, so the batch size ``N_b`` is simply the number of
rows passed in.
"""

from dataclasses import dataclass, field, replace
from typing import Optional
import logging

import numpy as np

from . import core
from .errors import InvalidArgumentError, InvalidStateError, TrainingDivergedError
from .model import UNGATED, antecedent, forward, mse_loss

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    """Hyperparameters for the three training phases.

    ``None`` for the iteration counts or the zetas means "pick the default
    for the dataset's dimensionality" (see :meth:`resolved`).
    """

    eta: float = 0.01
    iterations_fs: Optional[int] = None
    iterations_re: Optional[int] = None
    iterations_ft: Optional[int] = None
    iterations_plain: Optional[int] = None
    batch_size: Optional[int] = None  # None: full batch
    s_fs: int = 10
    s_re: int = 5
    s_plain: int = 3
    zeta_lambda: Optional[float] = None
    zeta_theta: Optional[float] = None
    high_dim_threshold: int = 1000
    fine_tune_mode: str = "GD"
    seed: int = 0
    tnorm: str = "ada-softmin"
    softmin_q: int = -12
    gate_kind: str = "proposed"
    gate_init: float = 0.01
    threshold_on_abs: bool = True
    train_centers_in_ft: bool = True
    normalization: str = "minmax"

    def is_high_dim(self, D):
        return D > self.high_dim_threshold

    def resolved(self, D):
        """Copy with every dimension-dependent default filled in for ``D`` features."""
        high = self.is_high_dim(D)
        iters = 200 if high else 1000
        cfg = replace(
            self,
            iterations_fs=iters if self.iterations_fs is None else self.iterations_fs,
            iterations_re=iters if self.iterations_re is None else self.iterations_re,
            iterations_ft=iters if self.iterations_ft is None else self.iterations_ft,
            iterations_plain=iters if self.iterations_plain is None else self.iterations_plain,
            zeta_lambda=(0.4 if high else 0.5) if self.zeta_lambda is None else self.zeta_lambda,
            zeta_theta=(0.5 if high else 0.3) if self.zeta_theta is None else self.zeta_theta,
        )
        cfg.validate()
        return cfg

    def validate(self):
        if not self.eta > 0:
            raise InvalidArgumentError("eta must be positive")
        for name in ("zeta_lambda", "zeta_theta"):
            z = getattr(self, name)
            if z is not None and not 0 < z < 1:
                raise InvalidArgumentError(f"{name} must lie in (0, 1)")
        for name in ("iterations_fs", "iterations_re", "iterations_ft", "iterations_plain"):
            k = getattr(self, name)
            if k is not None and k < 0:
                raise InvalidArgumentError(f"{name} must be non-negative")
        if self.fine_tune_mode not in ("GD", "LSE"):
            raise InvalidArgumentError("fine_tune_mode must be 'GD' or 'LSE'")
        if self.s_fs < 1 or self.s_re < 2:
            raise InvalidArgumentError("s_fs must be >= 1 and s_re >= 2")
        if self.batch_size is not None and self.batch_size < 1:
            raise InvalidArgumentError("batch_size must be positive")
        if self.normalization not in ("minmax", "zscore"):
            raise InvalidArgumentError("normalization must be 'minmax' or 'zscore'")


@dataclass
class GradientSet:
    d_consequents: np.ndarray
    d_centers: Optional[np.ndarray] = None
    d_lambda: Optional[np.ndarray] = None
    d_theta: Optional[np.ndarray] = None

    def all_finite(self):
        return all(np.all(np.isfinite(g)) for g in self.as_dict().values())

    def as_dict(self):
        out = {"consequents": self.d_consequents}
        if self.d_centers is not None:
            out["centers"] = self.d_centers
        if self.d_lambda is not None:
            out["lambda"] = self.d_lambda
        if self.d_theta is not None:
            out["theta"] = self.d_theta
        return out


def _residual(trace, targets):
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    if T.shape != trace.output.shape:
        raise InvalidArgumentError(f"targets {T.shape} do not match outputs {trace.output.shape}")
    return (trace.output - T) / T.shape[0]


def _with_bias(X):
    return np.hstack([np.ones((X.shape[0], 1)), X])


def grad_consequents(X, trace, targets, gates=UNGATED):
    """dE/dp for every (rule, bias+feature, class); shape (R, D+1, C)."""
    X = np.atleast_2d(X)
    e = _residual(trace, targets)
    weighted = trace.normalized[:, :, None] * e[:, None, :]  # (N, R, C)
    g = np.tensordot(_with_bias(X), weighted, axes=([0], [0])).transpose(1, 0, 2)
    if gates.mode == "feature-gated":
        if gates.lam is None or gates.lam.shape != (X.shape[1],):
            raise InvalidArgumentError("feature gates do not match the input dimension")
        g[:, 1:, :] *= gates.values()[None, :, None]
    elif gates.mode == "rule-gated":
        if gates.theta is None or gates.theta.shape != (g.shape[0],):
            raise InvalidArgumentError("rule gates do not match the rule count")
        g *= gates.values()[:, None, None]
    return g


def _dE_dfiring(trace, targets):
    e = _residual(trace, targets)
    spread = trace.rule_outputs - trace.output[:, None, :]
    return np.einsum("nc,nrc->nr", e, spread) / trace.firing.sum(axis=1, keepdims=True)


def _accumulate(dm, index, n_sets):
    """Scatter per-(rule, feature) center gradients onto shared (feature, set) slots."""
    R, D = dm.shape
    out = np.zeros((D, n_sets))
    cols = np.broadcast_to(np.arange(D), (R, D))
    np.add.at(out, (cols, index.zero_based), dm)
    return out


def _center_offsets(X, partition, index):
    m = partition.rule_centers(index)
    return X[:, None, :] - m[None, :, :]  # (N, R, D)


def grad_centers_ada(X, trace, targets, partition, index, frozen=False):
    """dE/dcenters under a softmin-type firing with the exponents held fixed.

    Per-(rule, feature) terms are ``2 f (x - m) mu**q / sum_d mu**q`` times
    dE/df; they are summed onto the (feature, set) slot each rule refers to.
    """
    if frozen:
        raise InvalidStateError("centers are frozen; no center gradient is defined")
    if trace.qhat is None:
        raise InvalidStateError("trace has no softmin exponents; use grad_centers_product")
    X = np.atleast_2d(X)
    q = np.asarray(trace.qhat, dtype=float)[:, :, None]
    mu = trace.memberships
    # normalized weights mu**q / sum mu**q, evaluated in log space
    z = q * np.log(mu)
    z -= z.max(axis=2, keepdims=True)
    w = np.exp(z)
    w /= w.sum(axis=2, keepdims=True)
    w[mu <= core.MEMBERSHIP_FLOOR] = 0.0  # clamped memberships are flat in m
    dfdm = 2.0 * trace.firing[:, :, None] * _center_offsets(X, partition, index) * w
    dm = np.einsum("nr,nrd->rd", _dE_dfiring(trace, targets), dfdm)
    return _accumulate(dm, index, partition.n_sets)


def grad_centers_product(X, trace, targets, partition, index, frozen=False):
    """dE/dcenters under the product t-norm."""
    if frozen:
        raise InvalidStateError("centers are frozen; no center gradient is defined")
    X = np.atleast_2d(X)
    offsets = _center_offsets(X, partition, index)
    offsets[trace.memberships <= core.MEMBERSHIP_FLOOR] = 0.0
    dfdm = 2.0 * trace.firing[:, :, None] * offsets
    dm = np.einsum("nr,nrd->rd", _dE_dfiring(trace, targets), dfdm)
    return _accumulate(dm, index, partition.n_sets)


def grad_lambda(X, trace, targets, consequents, gates):
    """dE/dlambda for feature gates, shape (D,)."""
    if gates.mode != "feature-gated":
        raise InvalidStateError("grad_lambda requires feature-gated mode")
    X = np.atleast_2d(X)
    e = _residual(trace, targets)
    weighted = trace.normalized[:, :, None] * e[:, None, :]  # (N, R, C)
    # s[n, d] = sum_{r,c} fbar e p[r, d+1, c]
    s = np.einsum("nrc,rdc->nd", weighted, consequents[:, 1:, :])
    return gates.derivatives() * np.sum(s * X, axis=0)


def grad_theta(X, trace, targets, consequents, gates):
    """dE/dtheta for rule gates, shape (R,).

    The inner linear form is the rule's ungated consequent evaluated at x_n
    (chain rule through ``M(theta) * (p0 + sum_d p_d x_d)``).
    """
    if gates.mode != "rule-gated":
        raise InvalidStateError("grad_theta requires rule-gated mode")
    X = np.atleast_2d(X)
    e = _residual(trace, targets)
    p = consequents
    R, K, C = p.shape
    ungated = (_with_bias(X) @ p.transpose(1, 0, 2).reshape(K, R * C)).reshape(-1, R, C)
    s = np.einsum("nc,nr,nrc->r", e, trace.normalized, ungated)
    return gates.derivatives() * s


def gd_step(params, grads, eta):
    """One plain gradient-descent update ``w - eta * g`` on a dict of parameter arrays.

    Only the keys present in ``grads`` are updated; others are passed through.
    """
    out = dict(params)
    for name, g in grads.items():
        if name not in params:
            raise InvalidArgumentError(f"gradient for unknown parameter {name!r}")
        w = np.asarray(params[name], dtype=float)
        g = np.asarray(g, dtype=float)
        if w.shape != g.shape:
            raise InvalidArgumentError(f"shape mismatch for {name!r}: {w.shape} vs {g.shape}")
        out[name] = w - eta * g
    return out


def lse_design_matrix(X, normalized):
    """Rows ``[fbar_1 * (1, x), ..., fbar_R * (1, x)]`` of shape (N, R*(D+1))."""
    xt = _with_bias(np.atleast_2d(X))
    N = xt.shape[0]
    return (normalized[:, :, None] * xt[:, None, :]).reshape(N, -1)


def lse_consequents(X, normalized, targets, ridge=1e-8):
    """Least-squares consequents for fixed normalized firing strengths.

    Solves the ridge-regularized normal equations for all classes at once.
    When there are more unknowns than rows the equivalent dual system
    ``(Phi Phi^T + ridge I) a = T`` is solved instead.

    Returns
    -------
    ndarray, shape (R, D+1, C)
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    normalized = np.asarray(normalized, dtype=float)
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    phi = lse_design_matrix(X, normalized)
    if not np.all(np.isfinite(phi)):
        raise InvalidArgumentError("lse_consequents: design matrix has non-finite entries")
    N, M = phi.shape
    R, K = normalized.shape[1], X.shape[1] + 1
    if M <= N:
        gram = phi.T @ phi + ridge * np.eye(M)
        sol = np.linalg.lstsq(gram, phi.T @ T, rcond=None)[0]
    else:
        gram = phi @ phi.T + ridge * np.eye(N)
        sol = phi.T @ np.linalg.lstsq(gram, T, rcond=None)[0]
    return sol.reshape(R, K, T.shape[1])


@dataclass
class GDResult:
    losses: list = field(default_factory=list)
    gate_history: Optional[np.ndarray] = None  # (iterations, n_gates) gate values after each update


def _batches(N, batch_size):
    if batch_size is None or batch_size >= N:
        return [slice(0, N)]
    return [slice(i, min(i + batch_size, N)) for i in range(0, N, batch_size)]


def train_gd(model, X, targets, gates=UNGATED, iterations=100, eta=0.01,
             train_centers=True, batch_size=None, phase="train", record_gates=False):
    """Run plain gradient descent on ``model`` (and ``gates``) in place.

    Consequents are always trained; centers only if ``train_centers``; the
    active gate family if ``gates`` is not ungated.  While the centers are
    frozen, memberships, exponents and normalized firing strengths are
    computed once per batch and reused.

    Returns a :class:`GDResult` with the loss before every update and, as
    the last entry, the loss after the final update.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    batches = _batches(X.shape[0], batch_size)
    cache = {}
    history = [] if record_gates else None
    result = GDResult()

    def ante_for(b):
        if train_centers:
            return None
        if b not in cache:
            sl = batches[b]
            cache[b] = antecedent(X[sl], model.partition, model.index, model.tnorm, model.softmin_q)
        return cache[b]

    def full_loss():
        if len(batches) == 1:
            tr = forward(X, model.partition, model.index, model.consequents, gates,
                         model.tnorm, model.softmin_q, ante=ante_for(0))
        else:
            tr = forward(X, model.partition, model.index, model.consequents, gates,
                         model.tnorm, model.softmin_q)
        return mse_loss(tr.output, T)

    for k in range(iterations):
        b = k % len(batches)
        sl = batches[b]
        Xb, Tb = X[sl], T[sl]
        trace = forward(Xb, model.partition, model.index, model.consequents, gates,
                        model.tnorm, model.softmin_q, ante=ante_for(b))
        loss = mse_loss(trace.output, Tb)
        if not np.isfinite(loss):
            raise TrainingDivergedError(phase, k)
        result.losses.append(loss)

        grads = compute_gradients(Xb, trace, Tb, model, gates, train_centers)
        if not grads.all_finite():
            raise TrainingDivergedError(phase, k)
        params = {"consequents": model.consequents}
        if train_centers:
            params["centers"] = model.partition.centers
        if gates.mode == "feature-gated":
            params["lambda"] = gates.lam
        elif gates.mode == "rule-gated":
            params["theta"] = gates.theta
        new = gd_step(params, grads.as_dict(), eta)
        model.consequents = new["consequents"]
        if train_centers:
            model.partition.centers = new["centers"]
        if gates.mode == "feature-gated":
            gates.lam = new["lambda"]
        elif gates.mode == "rule-gated":
            gates.theta = new["theta"]
        if record_gates and gates.mode != "ungated":
            history.append(gates.values().copy())

    final = full_loss()
    if not np.isfinite(final):
        raise TrainingDivergedError(phase, iterations)
    result.losses.append(final)
    if record_gates:
        n = 0 if gates.mode == "ungated" else gates.params.shape[0]
        result.gate_history = np.array(history).reshape(len(history), n)
    log.debug("%s: loss %.6g -> %.6g over %d iterations", phase, result.losses[0], final, iterations)
    return result


def compute_gradients(X, trace, targets, model, gates=UNGATED, train_centers=True):
    """All gradients active for the given gate mode and center policy."""
    gs = GradientSet(grad_consequents(X, trace, targets, gates))
    if train_centers:
        if model.tnorm == "product":
            gs.d_centers = grad_centers_product(X, trace, targets, model.partition, model.index)
        else:
            gs.d_centers = grad_centers_ada(X, trace, targets, model.partition, model.index)
    if gates.mode == "feature-gated":
        gs.d_lambda = grad_lambda(X, trace, targets, model.consequents, gates)
    elif gates.mode == "rule-gated":
        gs.d_theta = grad_theta(X, trace, targets, model.consequents, gates)
    return gs
