"""Scalar and vector numerics: memberships, firing-strength operators, gates.

Every function here is pure and broadcasts over leading axes.  Operators
that aggregate a membership vector reduce over the *last* axis, so the same
code serves a single rule (shape ``(D,)``) and a whole batch of
rule/instance pairs (shape ``(N, R, D)``).
"""

import numpy as np
from scipy.special import lambertw

from .errors import InvalidArgumentError

MEMBERSHIP_FLOOR = 1e-300
# exponent bound: every mu**q stays below ~1e300 (e**690 ~ 1e299.7)
LOG_OVERFLOW_BUDGET = 690.0
Q_MIN = -1000
Q_MAX = -1


def gaussian_membership(x, m):
    """Unit-spread Gaussian membership ``exp(-(x - m)**2)``.

    The result is floored at ``MEMBERSHIP_FLOOR`` so that it stays strictly
    positive; the adaptive exponent needs ``log(min(mu))`` to be finite.
    """
    x = np.asarray(x, dtype=float)
    m = np.asarray(m, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(m))):
        raise InvalidArgumentError("gaussian_membership: inputs must be finite")
    out = np.maximum(np.exp(-((x - m) ** 2)), MEMBERSHIP_FLOOR)
    return out[()] if out.ndim == 0 else out


def _as_membership(mu, name):
    mu = np.asarray(mu, dtype=float)
    if mu.ndim == 0 or mu.shape[-1] == 0:
        raise InvalidArgumentError(f"{name}: membership vector must be non-empty")
    return mu


def product_firing(mu):
    """Product T-norm over the last axis. Underflows to 0 for large D.

    Results below the smallest normal double are flushed to 0.  A running
    product can otherwise stall a few ulps above zero (``x * 0.8`` rounds
    back to ``x`` for the tiniest subnormals) and report a meaningless
    positive value where the exact product is far below the double range.
    """
    mu = _as_membership(mu, "product_firing")
    f = np.prod(mu, axis=-1)
    return np.where(f < np.finfo(float).tiny, 0.0, f)[()]


def _power_mean(values, q):
    # Sorting fixes the summation order, which makes the result bitwise
    # symmetric in its arguments.
    q = np.asarray(q, dtype=float)
    v = np.sort(values, axis=-1)
    s = np.sum(v ** q[..., None], axis=-1) / v.shape[-1]
    return s ** (1.0 / q)


def fixed_softmin(values, q):
    """Softmin with a fixed negative exponent ``q``.

    Computed literally in double precision: overflowing powers make the
    result collapse to 0, and a moderate ``q`` may return a value above the
    second-smallest entry.  No rescue is attempted.
    """
    values = _as_membership(values, "fixed_softmin")
    q_arr = np.asarray(q)
    if np.any(q_arr >= 0):
        raise InvalidArgumentError(f"fixed_softmin: exponent must be negative, got {q}")
    if np.any(values <= 0):
        raise InvalidArgumentError("fixed_softmin: entries must be strictly positive")
    with np.errstate(over="ignore", divide="ignore"):
        out = _power_mean(values, np.broadcast_to(q_arr, values.shape[:-1]))
    return out[()] if np.ndim(out) == 0 else out


def _adaptive_exponent(mu):
    mn = np.min(mu, axis=-1)
    with np.errstate(divide="ignore"):
        ratio = LOG_OVERFLOW_BUDGET / np.log(mn)
    q = np.where(mn >= 1.0, Q_MIN, np.clip(np.ceil(ratio), Q_MIN, Q_MAX))
    return q.astype(np.int64)


def adaptive_exponent(mu):
    """Negative integer exponent chosen from the smallest membership.

    ``ceil(690 / ln(min(mu)))`` clamped to ``[-1000, -1]``; an all-ones
    vector gets -1000.
    """
    mu = _as_membership(mu, "adaptive_exponent")
    if np.any(mu < MEMBERSHIP_FLOOR) or np.any(mu > 1.0):
        raise InvalidArgumentError("adaptive_exponent: memberships must lie in [1e-300, 1]")
    q = _adaptive_exponent(mu)
    return q[()] if q.ndim == 0 else q


def _ada_softmin(mu, q):
    f = _power_mean(mu, q)
    # rounding can push the power mean a few ulps outside [min, max]
    return np.clip(f, np.min(mu, axis=-1), np.max(mu, axis=-1))


def ada_softmin_firing(mu, qhat=None):
    """Adaptive softmin firing strength.

    Parameters
    ----------
    mu : array_like, shape (..., D)
        Membership values in ``[1e-300, 1]``.
    qhat : array_like of int, optional
        Exponents to use instead of recomputing them from ``mu``.  Passing
        a cached value keeps the exponent constant while the memberships
        change (e.g. under finite-difference perturbation).

    Returns
    -------
    ndarray or float
        Strictly positive firing strength in ``[min(mu), max(mu)]``.
    """
    mu = _as_membership(mu, "ada_softmin_firing")
    if qhat is None:
        qhat = adaptive_exponent(mu)
    f = _ada_softmin(mu, np.asarray(qhat))
    return f[()] if np.ndim(f) == 0 else f


# -- gates -----------------------------------------------------------------

def gate_value(lam):
    """Odd gate ``lam * sqrt(exp(1 - lam**2))``; range [-1, 1], peaks at +-1."""
    lam = np.asarray(lam, dtype=float)
    return lam * np.sqrt(np.exp(1.0 - lam**2))


def gate_derivative(lam):
    lam = np.asarray(lam, dtype=float)
    return (1.0 - lam**2) * np.sqrt(np.exp(1.0 - lam**2))


def _sigmoid(lam):
    return 1.0 / (1.0 + np.exp(-lam))


_LEGACY = {
    "sigmoid": (
        _sigmoid,
        lambda lam: _sigmoid(lam) * (1.0 - _sigmoid(lam)),
    ),
    "one-minus-exp": (
        lambda lam: 1.0 - np.exp(-(lam**2)),
        lambda lam: 2.0 * lam * np.exp(-(lam**2)),
    ),
    "exp-sq": (
        lambda lam: np.exp(-(lam**2)),
        lambda lam: -2.0 * lam * np.exp(-(lam**2)),
    ),
}

LEGACY_GATES = tuple(_LEGACY)
GATE_KINDS = ("proposed",) + LEGACY_GATES


def _legacy(kind):
    try:
        return _LEGACY[kind]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown gate kind {kind!r}; expected one of {', '.join(LEGACY_GATES)}"
        ) from None


def legacy_gate_value(kind, lam):
    return _legacy(kind)[0](np.asarray(lam, dtype=float))


def legacy_gate_derivative(kind, lam):
    return _legacy(kind)[1](np.asarray(lam, dtype=float))


def gate_functions(kind="proposed"):
    """Return the ``(value, derivative)`` pair for a gate kind."""
    if kind == "proposed":
        return gate_value, gate_derivative
    return _legacy(kind)


def gate_parameter_for(kind, value):
    """Gate parameter whose gate value equals ``value``, on the branch nearest a closed gate.

    For the proposed gate the root in ``[0, 1]`` is returned (closed gates
    sit near zero); ``exp-sq`` returns the positive root.
    """
    v = float(value)
    if kind == "proposed":
        if not 0 <= v <= 1:
            raise InvalidArgumentError("proposed gate values lie in [-1, 1]; pass v in [0, 1]")
        # lam**2 * exp(1 - lam**2) = v**2  <=>  -lam**2 = W0(-v**2 / e)
        if v >= 1.0 - 1e-12:
            return 1.0  # branch point of W0
        return float(np.sqrt(-np.real(lambertw(-(v**2) / np.e, 0))))
    if not 0 < v < 1:
        raise InvalidArgumentError(f"{kind} gate value must lie in (0, 1)")
    if kind == "sigmoid":
        return float(np.log(v / (1.0 - v)))
    if kind == "one-minus-exp":
        return float(np.sqrt(-np.log1p(-v)))
    if kind == "exp-sq":
        return float(np.sqrt(-np.log(v)))
    return _legacy(kind)  # raises for unknown kinds
