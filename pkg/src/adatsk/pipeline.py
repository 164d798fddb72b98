"""Three-phase training: feature selection, rule extraction, fine tuning.

Phase (i) trains a compact rule base with one gate per feature and keeps
the features whose gates opened widest.  Phase (ii) builds the enhanced
rule base on those features, trains one gate per rule and keeps the
strongest rules.  Phase (iii) drops the gates and refines the remaining
system by gradient descent or least squares.
"""

from dataclasses import dataclass, field
from typing import Optional
import logging
import time

import numpy as np

from .data import fit_normalization, kfold_split, minmax_normalize, one_hot
from .errors import InvalidArgumentError
from .model import UNGATED, GateBank, TSKModel, antecedent, forward, mse_loss
from .rulebase import build_coco, build_enfrb, init_consequents, place_centers
from .training import TrainConfig, lse_consequents, train_gd

log = logging.getLogger(__name__)


def _threshold(gate_values, zeta, absolute=True):
    g = np.asarray(gate_values, dtype=float)
    if g.size == 0:
        raise InvalidArgumentError("threshold: gate vector is empty")
    if absolute:
        g = np.abs(g)
    hi, lo = g.max(), g.min()
    return float(hi - zeta * (hi - lo))


def threshold_lambda(gate_values, zeta_lambda, absolute=True):
    """Feature-selection threshold ``max g - zeta * (max g - min g)`` over |gate values|."""
    return _threshold(gate_values, zeta_lambda, absolute)


def threshold_theta(gate_values, zeta_theta, absolute=True):
    return _threshold(gate_values, zeta_theta, absolute)


def _strength(gate_values, absolute):
    g = np.asarray(gate_values, dtype=float)
    return np.abs(g) if absolute else g


def _top(strength, k, among=None):
    idx = np.arange(strength.size) if among is None else np.flatnonzero(among)
    order = idx[np.argsort(-strength[idx], kind="stable")]
    return np.sort(order[:k])


@dataclass
class PhaseResult:
    name: str
    model: TSKModel
    losses: list
    gates: Optional[GateBank] = None
    gate_values: Optional[np.ndarray] = None
    gate_history: Optional[np.ndarray] = None
    threshold: Optional[float] = None
    selected: Optional[np.ndarray] = None  # phase (i): feature indices
    retained: Optional[np.ndarray] = None  # phase (ii): rule indices
    seconds: float = 0.0


def run_phase_fs(X, targets, config, record_gates=False):
    """Phase (i): gated feature selection on a compact rule base.

    ``X`` is the normalized training matrix.  Centers are trained only for
    low-dimensional inputs.
    """
    t0 = time.perf_counter()
    X = np.asarray(X, dtype=float)
    T = np.asarray(targets, dtype=float)
    N, D = X.shape
    cfg = config.resolved(D)
    index = build_coco(cfg.s_fs, D)
    model = TSKModel(place_centers(X, cfg.s_fs), index,
                     init_consequents(index.n_rules, D, T.shape[1]), cfg.tnorm, cfg.softmin_q)
    gates = GateBank.feature_gated(np.full(D, cfg.gate_init), kind=cfg.gate_kind)
    gd = train_gd(model, X, T, gates, cfg.iterations_fs, cfg.eta,
                  train_centers=not cfg.is_high_dim(D), batch_size=cfg.batch_size,
                  phase="feature-selection", record_gates=record_gates)

    values = gates.values()
    strength = _strength(values, cfg.threshold_on_abs)
    tau = threshold_lambda(values, cfg.zeta_lambda, cfg.threshold_on_abs)
    # constant training features carry no information (they normalize to 0)
    informative = np.ptp(X, axis=0) > 0
    selected = np.flatnonzero((strength >= tau) & informative)
    if selected.size == 0:
        selected = _top(strength, 1, informative if informative.any() else None)
    return PhaseResult("feature-selection", model, gd.losses, gates, values, gd.gate_history,
                       tau, selected=selected, seconds=time.perf_counter() - t0)


def run_phase_re(X_selected, targets, config, high_dim=False, record_gates=False):
    """Phase (ii): gated rule extraction on the enhanced rule base.

    ``high_dim`` says whether the *original* dataset is high-dimensional,
    in which case the centers stay at their initial positions.
    """
    t0 = time.perf_counter()
    X = np.asarray(X_selected, dtype=float)
    T = np.asarray(targets, dtype=float)
    N, D = X.shape
    C = T.shape[1]
    cfg = config.resolved(config.high_dim_threshold + 1 if high_dim else D)
    index = build_enfrb(cfg.s_re, D)
    model = TSKModel(place_centers(X, cfg.s_re), index,
                     init_consequents(index.n_rules, D, C), cfg.tnorm, cfg.softmin_q)
    gates = GateBank.rule_gated(np.full(index.n_rules, cfg.gate_init), kind=cfg.gate_kind)
    gd = train_gd(model, X, T, gates, cfg.iterations_re, cfg.eta,
                  train_centers=not high_dim, batch_size=cfg.batch_size,
                  phase="rule-extraction", record_gates=record_gates)

    values = gates.values()
    strength = _strength(values, cfg.threshold_on_abs)
    tau = threshold_theta(values, cfg.zeta_theta, cfg.threshold_on_abs)
    retained = np.flatnonzero(strength >= tau)
    floor = min(C, index.n_rules)
    if retained.size < floor:
        retained = _top(strength, floor)
    return PhaseResult("rule-extraction", model, gd.losses, gates, values, gd.gate_history,
                       tau, retained=retained, seconds=time.perf_counter() - t0)


def run_phase_ft(X_selected, targets, re_result, config, high_dim=False):
    """Phase (iii): fine tuning of the reduced, ungated system.

    The retained rules keep their centers and consequents from phase (ii);
    each rule's gate value is folded into its consequents so the starting
    point is the gated model restricted to the retained rules.
    """
    t0 = time.perf_counter()
    X = np.asarray(X_selected, dtype=float)
    T = np.asarray(targets, dtype=float)
    cfg = config.resolved(config.high_dim_threshold + 1 if high_dim else X.shape[1])
    keep = re_result.retained
    src = re_result.model
    p = src.consequents[keep] * re_result.gate_values[keep][:, None, None]
    model = TSKModel(src.partition.copy(), src.index.take(keep), p, src.tnorm, src.softmin_q)

    if cfg.fine_tune_mode == "LSE":
        ante = antecedent(X, model.partition, model.index, model.tnorm, model.softmin_q)
        before = mse_loss(forward(X, model.partition, model.index, model.consequents,
                                  ante=ante, tnorm=model.tnorm).output, T)
        model.consequents = lse_consequents(X, ante.normalized, T)
        after = mse_loss(forward(X, model.partition, model.index, model.consequents,
                                 ante=ante, tnorm=model.tnorm).output, T)
        losses = [before, after]
    else:
        train_centers = (not high_dim) or cfg.train_centers_in_ft
        gd = train_gd(model, X, T, UNGATED, cfg.iterations_ft, cfg.eta,
                      train_centers=train_centers, batch_size=cfg.batch_size, phase="fine-tuning")
        losses = gd.losses
    return PhaseResult("fine-tuning", model, losses, seconds=time.perf_counter() - t0)


@dataclass
class FittedClassifier:
    """A model together with the scaling and label decoding needed to use it on raw data."""

    model: TSKModel
    stats: object  # NormalizationStats over all original features
    n_classes: int
    feature_names: list = field(default_factory=list)
    label_names: list = field(default_factory=list)
    phases: tuple = ()

    @property
    def selected_features(self):
        if self.model.features is None:
            return np.arange(self.model.index.n_features)
        return np.asarray(self.model.features)

    def predict(self, X_raw):
        return self.model.predict(minmax_normalize(X_raw, self.stats))

    def predict_selected(self, X_sel_raw):
        """Predict from raw values of the selected features only."""
        stats = self.stats.take(self.selected_features)
        return self.model.predict(minmax_normalize(X_sel_raw, stats))

    def accuracy(self, X_raw, labels):
        return float(np.mean(self.predict(X_raw) == np.asarray(labels)))


def fit_fsre(X, labels, n_classes, config, record_gates=False):
    """Run all three phases on a normalized training matrix.

    Returns the final :class:`TSKModel` (with ``features`` set to the
    selected column indices) and the three :class:`PhaseResult` objects.
    """
    X = np.asarray(X, dtype=float)
    T = one_hot(labels, n_classes)
    high = config.is_high_dim(X.shape[1])
    fs = run_phase_fs(X, T, config, record_gates)
    Xs = X[:, fs.selected]
    re = run_phase_re(Xs, T, config, high_dim=high, record_gates=record_gates)
    ft = run_phase_ft(Xs, T, re, config, high_dim=high)
    ft.model.features = fs.selected
    return ft.model, (fs, re, ft)


def fit_plain(X, labels, n_classes, config, tnorm=None):
    """Ungated compact-rule-base TSK classifier (no selection or extraction).

    Uses ``config.s_plain`` sets per feature and ``config.iterations_plain``
    gradient steps; centers are frozen for high-dimensional inputs.
    """
    t0 = time.perf_counter()
    X = np.asarray(X, dtype=float)
    T = one_hot(labels, n_classes)
    D = X.shape[1]
    cfg = config.resolved(D)
    index = build_coco(cfg.s_plain, D)
    model = TSKModel(place_centers(X, cfg.s_plain), index,
                     init_consequents(index.n_rules, D, n_classes),
                     tnorm or cfg.tnorm, cfg.softmin_q)
    gd = train_gd(model, X, T, UNGATED, cfg.iterations_plain, cfg.eta,
                  train_centers=not cfg.is_high_dim(D), batch_size=cfg.batch_size, phase="plain")
    res = PhaseResult("plain", model, gd.losses, seconds=time.perf_counter() - t0)
    return model, (res,)


def run_pipeline(dataset, config, train_rows=None, method="fsre", record_gates=False, tnorm=None):
    """Normalize on the training rows and fit; returns a :class:`FittedClassifier`."""
    rows = np.arange(dataset.n_samples) if train_rows is None else np.asarray(train_rows)
    Xtr = dataset.features[rows]
    stats = fit_normalization(Xtr, config.normalization)
    Xn = minmax_normalize(Xtr, stats)
    y = dataset.labels[rows]
    if method == "fsre":
        model, phases = fit_fsre(Xn, y, dataset.n_classes, config, record_gates)
    elif method == "plain":
        model, phases = fit_plain(Xn, y, dataset.n_classes, config, tnorm)
    else:
        raise InvalidArgumentError(f"unknown method {method!r}")
    return FittedClassifier(model, stats, dataset.n_classes, list(dataset.feature_names),
                            list(dataset.label_names), phases)


@dataclass
class PipelineReport:
    runs: list  # one dict per (repeat, fold)
    mean_accuracy: float
    mean_features: float
    mean_rules: float

    def to_dict(self, timing=False):
        runs = self.runs if timing else [
            {k: v for k, v in r.items() if k != "seconds"} for r in self.runs
        ]
        return {
            "mean_accuracy": self.mean_accuracy,
            "mean_features": self.mean_features,
            "mean_rules": self.mean_rules,
            "runs": runs,
        }


def cross_validate(dataset, config, folds=10, repeats=1, method="fsre", tnorm=None):
    """Repeated stratified k-fold cross-validation.

    Repeat ``i`` splits with seed ``config.seed + i``.  Every run records
    test accuracy, number of selected features, number of rules and
    per-phase wall time.
    """
    if dataset.n_samples < folds:
        raise InvalidArgumentError(f"cross_validate: N={dataset.n_samples} < folds={folds}")
    runs = []
    for rep in range(repeats):
        assign = kfold_split(dataset.labels, folds, config.seed + rep)
        for k in range(folds):
            train = np.flatnonzero(assign != k)
            test = np.flatnonzero(assign == k)
            clf = run_pipeline(dataset, config, train, method=method, tnorm=tnorm)
            acc = clf.accuracy(dataset.features[test], dataset.labels[test])
            runs.append({
                "repeat": rep,
                "fold": k,
                "n_test": int(test.size),
                "accuracy": acc,
                "n_features": int(clf.selected_features.size),
                "n_rules": int(clf.model.n_rules),
                "seconds": {ph.name: ph.seconds for ph in clf.phases},
            })
            log.info("repeat %d fold %d: acc=%.4f #F=%d #R=%d", rep, k, acc,
                     runs[-1]["n_features"], runs[-1]["n_rules"])
    mean = lambda key: float(np.mean([r[key] for r in runs]))
    return PipelineReport(runs, mean("accuracy"), mean("n_features"), mean("n_rules"))
