"""
A microarray-sized problem
==========================

Sixty samples, 7129 features, twenty of which carry the class.  The product
t-norm cannot even produce a firing strength here; the adaptive softmin
trains the full pipeline in seconds.
"""

import numpy as np

from adatsk import core
from adatsk.data import fit_normalization, make_high_dim_dataset, minmax_normalize
from adatsk.errors import DegenerateFiringError
from adatsk.pipeline import run_pipeline
from adatsk.rulebase import build_coco, place_centers
from adatsk.model import antecedent
from adatsk.training import TrainConfig

ds = make_high_dim_dataset(n_samples=60, n_features=7129, n_informative=20, seed=0)
X = minmax_normalize(ds.features, fit_normalization(ds.features))

##############################################################################
# Every feature is an on/off level plus noise, so after scaling each
# membership sits well below 1 and their product is far below ``1e-308``.

part, index = place_centers(X, 10), build_coco(10, ds.n_features)
try:
    antecedent(X, part, index, tnorm="product")
except DegenerateFiringError as exc:
    print("product:", exc)
ante = antecedent(X, part, index)
print("adaptive softmin firing range:", ante.firing.min(), ante.firing.max())
print("exponents used:", np.unique(ante.qhat))

##############################################################################
# High-dimensional inputs keep their centers fixed, use 200 steps per phase
# and the looser thresholds.

clf = run_pipeline(ds, TrainConfig(eta=0.1))
sel = clf.selected_features
print(f"{sel.size} features selected, {np.sum(sel < 20)} of them informative")
print(f"{clf.model.n_rules} rules, training accuracy {clf.accuracy(ds.features, ds.labels):.3f}")
