"""Rule-base construction: index matrices, center placement, consequents.

Index matrices use 1-based fuzzy-set indices, so ``rows[r, d] == s`` means
rule ``r`` uses the ``s``-th set on feature ``d``.
"""

from dataclasses import dataclass
import itertools

import numpy as np

from .errors import CapacityError, InvalidArgumentError

FUCO_MAX_ROWS = 10**6


@dataclass(frozen=True)
class IndexMatrix:
    rows: np.ndarray
    kind: str  # "CoCo", "FuCo", "En" or "subset"
    n_sets: int

    @property
    def n_rules(self):
        return self.rows.shape[0]

    @property
    def n_features(self):
        return self.rows.shape[1]

    @property
    def zero_based(self):
        return self.rows - 1

    def take(self, rule_indices):
        """Sub-rule-base with only the given rows."""
        return IndexMatrix(self.rows[np.asarray(rule_indices, dtype=int)], "subset", self.n_sets)

    def as_tuples(self):
        return [tuple(int(v) for v in row) for row in self.rows]


@dataclass
class FuzzyPartition:
    """Per-feature Gaussian centers; ``centers[d, s]`` is set ``s+1`` on feature ``d``.

    The spread is fixed at 1 (memberships are ``exp(-(x - m)**2)``).
    """

    centers: np.ndarray

    @property
    def n_features(self):
        return self.centers.shape[0]

    @property
    def n_sets(self):
        return self.centers.shape[1]

    def rule_centers(self, index):
        """Resolve the ``(R, D)`` table of centers ``m[r, d]`` for an index matrix."""
        if index.n_features != self.n_features:
            raise InvalidArgumentError(
                f"index matrix has {index.n_features} features, partition has {self.n_features}"
            )
        cols = np.arange(self.n_features)[None, :]
        return self.centers[cols, index.zero_based]

    def copy(self):
        return FuzzyPartition(self.centers.copy())


def _check_counts(S, D, name):
    if int(S) < 1 or int(D) < 1:
        raise InvalidArgumentError(f"{name}: S and D must be positive (got S={S}, D={D})")


def build_coco(S, D):
    _check_counts(S, D, "build_coco")
    rows = np.repeat(np.arange(1, S + 1)[:, None], D, axis=1)
    return IndexMatrix(rows, "CoCo", S)


def build_fuco(S, D):
    """All ``S**D`` set combinations, last column varying fastest."""
    _check_counts(S, D, "build_fuco")
    if S**D > FUCO_MAX_ROWS:
        raise CapacityError(
            f"build_fuco: S**D = {S}**{D} exceeds the limit of {FUCO_MAX_ROWS} rules"
        )
    rows = np.array(list(itertools.product(range(1, S + 1), repeat=D)), dtype=int)
    return IndexMatrix(rows.reshape(S**D, D), "FuCo", S)


def build_enfrb(S, D):
    """Enhanced rule base with ``(2D + 1) * S`` rules.

    For every base set ``s`` the constant row ``[s, ..., s]`` is followed by
    the D rows with one position shifted to ``s - 1`` and then the D rows
    with one position shifted to ``s + 1``; shifts wrap cyclically within
    ``1..S``.  With ``S == 2`` both shifts coincide and duplicates are kept.
    """
    _check_counts(S, D, "build_enfrb")
    if S < 2:
        raise InvalidArgumentError("build_enfrb: S must be at least 2")
    blocks = []
    eye = np.eye(D, dtype=bool)
    for s in range(1, S + 1):
        base = np.full(D, s)
        down = (s - 2) % S + 1
        up = s % S + 1
        blocks.append(base[None, :])
        blocks.append(np.where(eye, down, base))
        blocks.append(np.where(eye, up, base))
    return IndexMatrix(np.vstack(blocks).astype(int), "En", S)


def place_centers(train_features, S):
    """Evenly spaced centers on ``[min_d, max_d]`` of every training feature."""
    X = np.asarray(train_features, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidArgumentError("place_centers: need a non-empty (N, D) training matrix")
    if S < 1:
        raise InvalidArgumentError("place_centers: S must be positive")
    lo, hi = X.min(axis=0), X.max(axis=0)
    if S == 1:
        return FuzzyPartition(((lo + hi) / 2.0)[:, None])
    t = np.linspace(0.0, 1.0, S)
    centers = lo[:, None] + (hi - lo)[:, None] * t[None, :]
    centers[:, -1] = hi  # exact right endpoint
    return FuzzyPartition(centers)


def init_consequents(R, D, C):
    """Zero consequent bank; ``p[r, 0, c]`` is the bias, ``p[r, d + 1, c]`` multiplies x_d."""
    return np.zeros((R, D + 1, C))
